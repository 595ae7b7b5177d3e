//! The normalized adjacency matrix `B = D^{-1/2} A D^{-1/2}`, its full
//! eigendecomposition, and the spectral diagnostics computed from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{stationary_distribution, GraphSample};
use crate::linalg;
use crate::rng::{self, rng_from_seed};

/// Eigenvalues closer than this are treated as one eigenspace.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Hitting-time formulas refuse graphs with `1 - lambda_2` below this.
pub const NEAR_DISCONNECTED_TOL: f64 = 1e-8;
const TOP_EIGENVALUE_TOL: f64 = 1e-10;
const RESIDUAL_TOL_PER_VERTEX: f64 = 1e-9;
const SIGN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedAdjacency {
    n: usize,
    entries: Vec<f64>,
}

impl NormalizedAdjacency {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// `sum_{i != j} b_ij^2`, which equals `sum_k lambda_k^2`.
    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|b| b * b).sum()
    }

    /// Nonzero pattern of each row as `(column, value)` pairs.
    fn sparse_rows(&self) -> Vec<Vec<(usize, f64)>> {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b != 0.0)
                    .map(|(j, &b)| (j, b))
                    .collect()
            })
            .collect()
    }
}

pub fn build_normalized_adjacency(g: &GraphSample) -> Result<NormalizedAdjacency> {
    g.check_no_isolated()?;
    let n = g.n();
    let d = g.degrees();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in g.adjacency().neighbors(i) {
            entries[i * n + j] = 1.0 / ((d[i] as f64) * (d[j] as f64)).sqrt();
        }
    }
    Ok(NormalizedAdjacency { n, entries })
}

/// Eigenpairs of `B` sorted by descending eigenvalue.
///
/// Each eigenvector's first component exceeding `1e-10` in magnitude is
/// positive. Inside a degenerate eigenspace the basis is rebuilt by
/// Gram–Schmidt on the projected unit vectors `e_0, e_1, ...`, so the basis
/// depends only on the subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    n: usize,
    eigenvalues: Vec<f64>,
    vectors: Vec<f64>,
    residual: f64,
    degenerate: bool,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `v_k` with `k` 0-based (`eigenvector(0)` is the Perron vector).
    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.n..(k + 1) * self.n]
    }

    /// Component `j` of `v_k`.
    #[inline]
    pub fn component(&self, k: usize, j: usize) -> f64 {
        self.vectors[k * self.n + j]
    }

    /// `max_k ||B v_k - lambda_k v_k||_inf`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// True if some nontrivial eigenvalue is repeated.
    pub fn degenerate(&self) -> bool {
        self.degenerate
    }

    /// `max_{a,b} |<v_a, v_b> - delta_ab|`. Costs a full Gram product.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.n {
            let va = self.eigenvector(a);
            for b in a..self.n {
                let dot: f64 = va.iter().zip(self.eigenvector(b)).map(|(x, y)| x * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }

    /// Fails with `NearDisconnected` when `1 - lambda_2 < 1e-8`.
    pub fn check_gap(&self) -> Result<()> {
        if self.n < 2 {
            return Ok(());
        }
        let gap = 1.0 - self.eigenvalues[1];
        if gap < NEAR_DISCONNECTED_TOL {
            Err(Error::NearDisconnected(gap))
        } else {
            Ok(())
        }
    }

    /// Same decomposition with every degenerate eigenspace re-expressed in a
    /// random orthonormal basis. Quantities that are basis-invariant must
    /// not move.
    pub fn with_rotated_eigenspaces(&self, seed: u64) -> Self {
        let mut out = self.clone();
        let mut rng = rng_from_seed(seed);
        for (start, end) in clusters(&self.eigenvalues) {
            let m = end - start;
            if m < 2 {
                continue;
            }
            // random orthogonal m x m matrix via Gram-Schmidt on uniform noise
            let mut q: Vec<Vec<f64>> = Vec::with_capacity(m);
            while q.len() < m {
                let mut x: Vec<f64> = (0..m).map(|_| rng::uniform_f64(&mut rng) - 0.5).collect();
                for _ in 0..2 {
                    for qv in &q {
                        let d: f64 = x.iter().zip(qv).map(|(a, b)| a * b).sum();
                        x.iter_mut().zip(qv).for_each(|(a, b)| *a -= d * b);
                    }
                }
                let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
                if norm > 1e-3 {
                    x.iter_mut().for_each(|a| *a /= norm);
                    q.push(x);
                }
            }
            for (r, qr) in q.iter().enumerate() {
                let row = &mut out.vectors[(start + r) * self.n..(start + r + 1) * self.n];
                row.fill(0.0);
                for (c, &w) in qr.iter().enumerate() {
                    let src = &self.vectors[(start + c) * self.n..(start + c + 1) * self.n];
                    row.iter_mut().zip(src).for_each(|(a, b)| *a += w * b);
                }
            }
        }
        out
    }
}

/// Half-open index ranges of runs of (numerically) equal eigenvalues.
fn clusters(sorted_desc: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=sorted_desc.len() {
        if k == sorted_desc.len() || sorted_desc[k - 1] - sorted_desc[k] > DEGENERACY_TOL {
            out.push((start, k));
            start = k;
        }
    }
    out
}

fn canonicalize_eigenspace(vectors: &mut [f64], n: usize, start: usize, end: usize) {
    let m = end - start;
    let old: Vec<f64> = vectors[start * n..end * n].to_vec();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    for i in 0..n {
        if basis.len() == m {
            break;
        }
        // projection of e_i onto the eigenspace
        let mut x = vec![0.0; n];
        for c in 0..m {
            let v = &old[c * n..(c + 1) * n];
            let w = v[i];
            x.iter_mut().zip(v).for_each(|(a, b)| *a += w * b);
        }
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = x.iter().zip(b).map(|(a, c)| a * c).sum();
                x.iter_mut().zip(b).for_each(|(a, c)| *a -= d * c);
            }
        }
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-4 {
            x.iter_mut().for_each(|a| *a /= norm);
            basis.push(x);
        }
    }
    if basis.len() == m {
        for (r, b) in basis.into_iter().enumerate() {
            vectors[(start + r) * n..(start + r + 1) * n].copy_from_slice(&b);
        }
    }
}

fn fix_sign(v: &mut [f64]) {
    if let Some(&first) = v.iter().find(|x| x.abs() > SIGN_TOL) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

pub fn eigendecompose(b: &NormalizedAdjacency) -> Result<SpectralDecomposition> {
    let n = b.n();
    let (values, raw) = linalg::symmetric_eigen(b.entries.clone(), n)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| values[y].total_cmp(&values[x]).then(x.cmp(&y)));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        vectors[dst * n..(dst + 1) * n].copy_from_slice(&raw[src * n..(src + 1) * n]);
    }

    let mut degenerate = false;
    for (start, end) in clusters(&eigenvalues) {
        if end - start > 1 {
            canonicalize_eigenspace(&mut vectors, n, start, end);
            degenerate = true;
        }
    }
    for k in 0..n {
        fix_sign(&mut vectors[k * n..(k + 1) * n]);
    }

    let rows = b.sparse_rows();
    let mut residual: f64 = 0.0;
    for k in 0..n {
        let v = &vectors[k * n..(k + 1) * n];
        let lambda = eigenvalues[k];
        for (i, row) in rows.iter().enumerate() {
            let bv: f64 = row.iter().map(|&(j, bij)| bij * v[j]).sum();
            residual = residual.max((bv - lambda * v[i]).abs());
        }
    }
    if !(residual <= RESIDUAL_TOL_PER_VERTEX * n as f64) {
        return Err(Error::ConvergenceFailure(format!(
            "eigen-residual {residual:e} exceeds 1e-9 * n"
        )));
    }
    if n > 0 && (eigenvalues[0] - 1.0).abs() > TOP_EIGENVALUE_TOL {
        return Err(Error::TopEigenvalue(eigenvalues[0]));
    }
    Ok(SpectralDecomposition {
        n,
        eigenvalues,
        vectors,
        residual,
        degenerate,
    })
}

/// Builds `B` for `g` and decomposes it.
pub fn decompose_graph(g: &GraphSample) -> Result<SpectralDecomposition> {
    eigendecompose(&build_normalized_adjacency(g)?)
}

pub(crate) fn check_belongs(dec: &SpectralDecomposition, g: &GraphSample) -> Result<()> {
    if dec.n() != g.n() {
        Err(Error::DimensionMismatch {
            expected: g.n(),
            actual: dec.n(),
        })
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// `|sum_k v_kj^2 - 1|`
    pub completeness: f64,
    /// `|sum_k lambda_k v_kj^2|` (equals `|b_jj|`, which is zero)
    pub diagonal: f64,
    /// `|v_1j^2 - pi_j|`
    pub perron: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.completeness.max(self.diagonal).max(self.perron)
    }
}

pub fn verify_spectral_identities(dec: &SpectralDecomposition, g: &GraphSample, j: usize) -> Result<IdentityResiduals> {
    check_belongs(dec, g)?;
    g.check_vertex(j)?;
    let pi = stationary_distribution(g)?.pi;
    let mut sq = 0.0;
    let mut weighted = 0.0;
    for k in 0..dec.n() {
        let v = dec.component(k, j);
        sq += v * v;
        weighted += dec.eigenvalues()[k] * v * v;
    }
    let v1 = dec.component(0, j);
    Ok(IdentityResiduals {
        completeness: (sq - 1.0).abs(),
        diagonal: weighted.abs(),
        perron: (v1 * v1 - pi[j]).abs(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapStatistic {
    pub max_abs_nontrivial: f64,
    /// `max_abs_nontrivial / (2 / sqrt(n p))`
    pub normalized_ratio: f64,
}

pub fn spectral_gap_statistic(dec: &SpectralDecomposition, n: usize, p: f64) -> GapStatistic {
    let max_abs_nontrivial = dec.eigenvalues().iter().skip(1).fold(0.0f64, |m, l| m.max(l.abs()));
    GapStatistic {
        max_abs_nontrivial,
        normalized_ratio: max_abs_nontrivial * (n as f64 * p).sqrt() / 2.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelocalizationStatistic {
    /// `max_{k >= 2} ||v_k||_inf^2`
    pub max_inf_norm_sq: f64,
    /// `max_inf_norm_sq / sqrt(p / n)`; conjectured to vanish as n grows.
    pub conjecture_ratio: f64,
    /// The maximum is basis-dependent when this is set.
    pub degenerate: bool,
}

pub fn delocalization_statistic(dec: &SpectralDecomposition, n: usize, p: f64) -> DelocalizationStatistic {
    let max_inf_norm_sq = (1..dec.n())
        .map(|k| dec.eigenvector(k).iter().fold(0.0f64, |m, x| m.max(x.abs())))
        .fold(0.0f64, f64::max)
        .powi(2);
    DelocalizationStatistic {
        max_inf_norm_sq,
        conjecture_ratio: max_inf_norm_sq / (p / n as f64).sqrt(),
        degenerate: dec.degenerate(),
    }
}

/// `sum_{k >= 2} lambda_k^2` from the spectrum.
pub fn nontrivial_square_sum(dec: &SpectralDecomposition) -> f64 {
    dec.eigenvalues().iter().skip(1).map(|l| l * l).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::sample_er_graph;

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn normalized_adjacency_examples() {
        let b = build_normalized_adjacency(&complete(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(b.get(i, j), if i == j { 0.0 } else { 0.5 });
            }
        }
        let b = build_normalized_adjacency(&path(3)).unwrap();
        assert!(close(b.get(0, 1), SQRT_HALF, 1e-15));
        assert!(close(b.get(1, 2), SQRT_HALF, 1e-15));
        assert_eq!(b.get(0, 2), 0.0);
        let b = build_normalized_adjacency(&complete(2)).unwrap();
        assert_eq!(b.get(0, 1), 1.0);
        assert!(matches!(
            build_normalized_adjacency(&graph(3, &[(0, 1)], 0.5)),
            Err(Error::IsolatedVertex(2))
        ));
    }

    #[test]
    fn rows_satisfy_perron_relation() {
        let g = sample_er_graph(150, 0.1, 8).unwrap();
        let b = build_normalized_adjacency(&g).unwrap();
        for i in 0..150 {
            let s: f64 = (0..150).map(|j| b.get(i, j) * (g.degree(j) as f64).sqrt()).sum();
            assert!(close(s, (g.degree(i) as f64).sqrt(), 1e-12));
            assert_eq!(b.get(i, i), 0.0);
            for j in 0..150 {
                assert_eq!(b.get(i, j), b.get(j, i));
            }
        }
    }

    #[test]
    fn k3_spectrum_and_canonical_basis() {
        let dec = decompose_graph(&complete(3)).unwrap();
        let ev = dec.eigenvalues();
        assert!(close(ev[0], 1.0, 1e-14) && close(ev[1], -0.5, 1e-14) && close(ev[2], -0.5, 1e-14));
        assert!(dec.degenerate());
        // projected e_0 first: (2, -1, -1)/sqrt 6, then (0, 1, -1)/sqrt 2
        let s6 = 6f64.sqrt();
        let want = [[2.0 / s6, -1.0 / s6, -1.0 / s6], [0.0, SQRT_HALF, -SQRT_HALF]];
        for (k, w) in want.iter().enumerate() {
            for (x, y) in dec.eigenvector(k + 1).iter().zip(w) {
                assert!(close(*x, *y, 1e-12), "{:?}", dec.eigenvector(k + 1));
            }
        }
        let d = delocalization_statistic(&dec, 3, 1.0);
        assert!(close(d.max_inf_norm_sq, 2.0 / 3.0, 1e-12));
        assert!(d.degenerate);
    }

    #[test]
    fn single_edge_spectrum() {
        let dec = decompose_graph(&complete(2)).unwrap();
        assert!(close(dec.eigenvalues()[0], 1.0, 1e-15));
        assert!(close(dec.eigenvalues()[1], -1.0, 1e-15));
        let v2 = dec.eigenvector(1);
        assert!(close(v2[0], SQRT_HALF, 1e-15) && close(v2[1], -SQRT_HALF, 1e-15));
        assert!(!dec.degenerate());
        let d = delocalization_statistic(&dec, 2, 1.0);
        assert!(close(d.max_inf_norm_sq, 0.5, 1e-15));
        let gap = spectral_gap_statistic(&dec, 2, 1.0);
        assert!(close(gap.max_abs_nontrivial, 1.0, 1e-15));
        assert!(close(gap.normalized_ratio, 2f64.sqrt() / 2.0, 1e-14));
        // bipartite: lambda_n = -1 but the gap at the top is fine
        dec.check_gap().unwrap();
    }

    #[test]
    fn k3_gap_ratio() {
        let dec = decompose_graph(&complete(3)).unwrap();
        let gap = spectral_gap_statistic(&dec, 3, 1.0);
        assert!(close(gap.max_abs_nontrivial, 0.5, 1e-14));
        assert!(close(gap.normalized_ratio, 0.5 * 3f64.sqrt() / 2.0, 1e-14));
    }

    #[test]
    fn perron_vector_is_sqrt_pi() {
        for seed in 0..5 {
            let g = sample_er_graph(120, 0.15, seed).unwrap();
            let dec = decompose_graph(&g).unwrap();
            let pi = stationary_distribution(&g).unwrap().pi;
            for (v, p) in dec.eigenvector(0).iter().zip(&pi) {
                assert!(close(*v, p.sqrt(), 1e-9));
            }
            assert!(dec.orthonormality_defect() <= 1e-9);
            assert!(dec.residual() <= 1e-9 * 120.0);
        }
    }

    #[test]
    fn identities_small_cases() {
        let g = complete(3);
        let dec = decompose_graph(&g).unwrap();
        let r = verify_spectral_identities(&dec, &g, 0).unwrap();
        assert!(r.max() <= 1e-12, "{r:?}");
        let g = complete(2);
        let dec = decompose_graph(&g).unwrap();
        let r = verify_spectral_identities(&dec, &g, 1).unwrap();
        assert!(close(dec.component(0, 1).powi(2), 0.5, 1e-15));
        assert!(r.perron <= 1e-15);
    }

    #[test]
    fn identities_at_scale() {
        let g = sample_er_graph(500, 0.2, 17).unwrap();
        let dec = decompose_graph(&g).unwrap();
        for j in [0, 123, 499] {
            let r = verify_spectral_identities(&dec, &g, j).unwrap();
            assert!(r.max() <= 1e-9, "{r:?}");
        }
        let trace: f64 = dec.eigenvalues().iter().sum();
        assert!(trace.abs() <= 1e-9 * 500.0);
        let b = build_normalized_adjacency(&g).unwrap();
        let sq: f64 = dec.eigenvalues().iter().map(|l| l * l).sum();
        assert!(close(sq, b.frobenius_sq(), 1e-8 * 500.0));
        for l in dec.eigenvalues() {
            assert!(l.abs() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn decomposition_is_reproducible() {
        let g = sample_er_graph(90, 0.2, 4).unwrap();
        let a = decompose_graph(&g).unwrap();
        let b = decompose_graph(&g).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn star_graph_has_large_null_space() {
        let g = star(7);
        let dec = decompose_graph(&g).unwrap();
        assert!(dec.degenerate());
        assert!(dec.orthonormality_defect() <= 1e-12);
        assert!(dec.residual() <= 1e-12);
        // bipartite star: spectrum {1, 0 x5, -1}
        assert!(close(dec.eigenvalues()[6], -1.0, 1e-14));
    }

    #[test]
    fn rotated_eigenspaces_stay_orthonormal_eigenvectors() {
        let g = star(6);
        let dec = decompose_graph(&g).unwrap();
        let rot = dec.with_rotated_eigenspaces(3);
        assert_ne!(dec.eigenvector(2), rot.eigenvector(2));
        assert!(rot.orthonormality_defect() <= 1e-12);
    }
}
