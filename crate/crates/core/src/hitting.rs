//! Hitting times of the simple random walk.
//!
//! Three independent routes to `H_ij`: the spectral formula over the
//! eigenpairs of `B`, a dense linear solve of the first-step equations, and
//! direct simulation of the walk.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{is_connected, stationary_distribution, GraphSample};
use crate::linalg;
use crate::rng::{self, mix_seed, rng_from_seed};
use crate::spectral::{check_belongs, SpectralDecomposition};

/// Per-trial step cap for the simulated walk.
pub const STEP_CAP: u64 = 1_000_000_000;

const MC_CHUNK: usize = 4096;

fn prepare(dec: &SpectralDecomposition, g: &GraphSample) -> Result<()> {
    check_belongs(dec, g)?;
    g.check_no_isolated()?;
    dec.check_gap()
}

/// `H_ij = 2|E| sum_{k>=2} (v_kj^2 / d_j - v_ki v_kj / sqrt(d_i d_j)) / (1 - lambda_k)`.
pub fn hitting_time_spectral(dec: &SpectralDecomposition, g: &GraphSample, i: usize, j: usize) -> Result<f64> {
    g.check_vertex(i)?;
    g.check_vertex(j)?;
    if i == j {
        return Err(Error::SameVertex(i));
    }
    prepare(dec, g)?;
    Ok(spectral_entry(dec, g, i, j))
}

fn spectral_entry(dec: &SpectralDecomposition, g: &GraphSample, i: usize, j: usize) -> f64 {
    let dj = g.degree(j) as f64;
    let dij = (g.degree(i) as f64 * dj).sqrt();
    let mut acc = 0.0;
    for k in 1..dec.n() {
        let vkj = dec.component(k, j);
        let vki = dec.component(k, i);
        acc += (vkj * vkj / dj - vki * vkj / dij) / (1.0 - dec.eigenvalues()[k]);
    }
    (2 * g.edge_count()) as f64 * acc
}

/// `H_ij` for every starting vertex `i`, with `H_jj = 0`.
pub fn hitting_column_spectral(dec: &SpectralDecomposition, g: &GraphSample, j: usize) -> Result<Vec<f64>> {
    g.check_vertex(j)?;
    prepare(dec, g)?;
    Ok((0..g.n())
        .map(|i| if i == j { 0.0 } else { spectral_entry(dec, g, i, j) })
        .collect())
}

/// The sum `S_j = sum_{k>=2} v_kj^2 / (1 - lambda_k)` split as
/// `1 - 2 pi_j + Z_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumDecomposition {
    pub spectral_sum: f64,
    pub pi_j: f64,
    pub z_n: f64,
}

impl SumDecomposition {
    /// `|S_j - (1 - 2 pi_j + Z_n)|`
    pub fn identity_residual(&self) -> f64 {
        (self.spectral_sum - (1.0 - 2.0 * self.pi_j + self.z_n)).abs()
    }
}

pub fn sum_decomposition(dec: &SpectralDecomposition, g: &GraphSample, j: usize) -> Result<SumDecomposition> {
    g.check_vertex(j)?;
    prepare(dec, g)?;
    let mut spectral_sum = 0.0;
    let mut z_n = 0.0;
    for k in 1..dec.n() {
        let lambda = dec.eigenvalues()[k];
        let v2 = dec.component(k, j).powi(2);
        let w = v2 / (1.0 - lambda);
        spectral_sum += w;
        z_n += lambda * lambda * w;
    }
    Ok(SumDecomposition {
        spectral_sum,
        pi_j: g.degree(j) as f64 / (2 * g.edge_count()) as f64,
        z_n,
    })
}

/// Hitting quantities for one target vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingProfile {
    pub target: usize,
    /// `H_ij` indexed by start vertex `i`.
    pub h_column: Vec<f64>,
    /// `H_j = sum_i pi_i H_ij`
    pub h_target: f64,
    /// `H^i = sum_j pi_j H_ij`, present only when all targets were computed.
    pub h_start: Option<Vec<f64>>,
    pub spectral_sum: f64,
    pub pi_j: f64,
    pub z_n: f64,
}

/// `H_j = (2|E| / d_j) S_j` together with the `S_j` decomposition and the
/// full column from the pairwise formula.
pub fn mean_target_hitting_spectral(dec: &SpectralDecomposition, g: &GraphSample, j: usize) -> Result<HittingProfile> {
    let parts = sum_decomposition(dec, g, j)?;
    let h_column = hitting_column_spectral(dec, g, j)?;
    let h_target = (2 * g.edge_count()) as f64 / g.degree(j) as f64 * parts.spectral_sum;
    Ok(HittingProfile {
        target: j,
        h_column,
        h_target,
        h_start: None,
        spectral_sum: parts.spectral_sum,
        pi_j: parts.pi_j,
        z_n: parts.z_n,
    })
}

/// Solves the first-step equations `h_i = 1 + sum_k P_ik h_k` (`i != j`),
/// `h_j = 0`, by partial-pivot LU.
///
/// Rows are scaled by `d_i`, i.e. the grounded Laplacian system
/// `d_i h_i - sum_{k ~ i} h_k = d_i`, which has the same solution.
pub fn hitting_times_solve(g: &GraphSample, j: usize) -> Result<Vec<f64>> {
    g.check_vertex(j)?;
    if !is_connected(g) {
        return Err(Error::NotConnected);
    }
    let n = g.n();
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let m = n - 1;
    let reduced = |v: usize| if v < j { v } else { v - 1 };
    let mut a = vec![0.0; m * m];
    let mut b = vec![0.0; m];
    for v in (0..n).filter(|&v| v != j) {
        let r = reduced(v);
        let d = g.degree(v) as f64;
        a[r * m + r] = d;
        b[r] = d;
        for u in g.adjacency().neighbors(v).filter(|&u| u != j) {
            a[r * m + reduced(u)] = -1.0;
        }
    }
    let h = linalg::lu_solve(a, m, b)?;
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&h[..j]);
    out.push(0.0);
    out.extend_from_slice(&h[j..]);
    Ok(out)
}

/// `H_j = sum_i pi_i H_ij` from a hitting column.
pub fn mean_target_from_column(g: &GraphSample, column: &[f64]) -> Result<f64> {
    if column.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            actual: column.len(),
        });
    }
    let pi = stationary_distribution(g)?.pi;
    Ok(pi.iter().zip(column).map(|(p, h)| p * h).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Trial `t` walks with its own stream seeded by `mix_seed(seed, [i, j, t])`;
/// step counts are summed as integers, so the estimate does not depend on
/// how trials are scheduled.
pub fn hitting_time_mc(g: &GraphSample, i: usize, j: usize, trials: u64, seed: u64) -> Result<McEstimate> {
    g.check_vertex(i)?;
    g.check_vertex(j)?;
    if i == j {
        return Err(Error::SameVertex(i));
    }
    if trials == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    if !is_connected(g) {
        return Err(Error::NotConnected);
    }
    let nbrs = g.neighbor_lists();
    let chunks = trials.div_ceil(MC_CHUNK as u64);
    let (sum, sum_sq) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * MC_CHUNK as u64;
            let hi = (lo + MC_CHUNK as u64).min(trials);
            let mut s: u128 = 0;
            let mut s2: u128 = 0;
            for t in lo..hi {
                let mut r = rng_from_seed(mix_seed(seed, &[i as u64, j as u64, t]));
                let mut at = i;
                let mut steps: u64 = 0;
                while at != j {
                    let out = nbrs.of(at);
                    at = out[rng::uniform_index(&mut r, out.len())];
                    steps += 1;
                    if steps >= STEP_CAP && at != j {
                        return Err(Error::StepCapExceeded(STEP_CAP));
                    }
                }
                s += steps as u128;
                s2 += (steps as u128) * (steps as u128);
            }
            Ok((s, s2))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let t = trials as f64;
    let mean = sum as f64 / t;
    let std_error = if trials > 1 {
        // exact integer numerator: T * sum_sq - sum^2
        let num = (trials as u128) * sum_sq - sum * sum;
        (num as f64 / (t * (t - 1.0))).sqrt() / t.sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        std_error,
        trials,
    })
}

/// Aggregates of the full hitting matrix. `columns[j][i]` is `H_ij`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingAggregates {
    /// `H_j` for every target.
    pub mean_target: Vec<f64>,
    /// `H^i` for every start.
    pub mean_start: Vec<f64>,
}

pub fn mean_hitting_aggregates(g: &GraphSample, columns: &[Vec<f64>]) -> Result<HittingAggregates> {
    let n = g.n();
    if columns.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: columns.len(),
        });
    }
    if let Some(bad) = columns.iter().find(|c| c.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: bad.len(),
        });
    }
    let pi = stationary_distribution(g)?.pi;
    let mean_target = columns
        .iter()
        .map(|col| pi.iter().zip(col).map(|(p, h)| p * h).sum())
        .collect();
    let mean_start = (0..n).map(|i| (0..n).map(|j| pi[j] * columns[j][i]).sum()).collect();
    Ok(HittingAggregates {
        mean_target,
        mean_start,
    })
}

/// All columns by the linear-solve route (`n` dense solves).
pub fn hitting_matrix_solve(g: &GraphSample) -> Result<Vec<Vec<f64>>> {
    (0..g.n()).map(|j| hitting_times_solve(g, j)).collect()
}

/// All columns by the spectral route.
pub fn hitting_matrix_spectral(dec: &SpectralDecomposition, g: &GraphSample) -> Result<Vec<Vec<f64>>> {
    (0..g.n()).map(|j| hitting_column_spectral(dec, g, j)).collect()
}
