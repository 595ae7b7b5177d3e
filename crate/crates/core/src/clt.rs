//! Standardized statistics for the mean target hitting time and the batch
//! runner that samples them across an `n`-grid.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{graph_statistics, is_connected, sample_er_graph, GraphSample};
use crate::hitting::{hitting_times_solve, mean_target_from_column, mean_target_hitting_spectral, sum_decomposition};
use crate::rng::{mix_seed, RNG_ID};
use crate::spectral::{
    decompose_graph, delocalization_statistic, nontrivial_square_sum, spectral_gap_statistic, SpectralDecomposition,
};
use crate::stats::{median, summary_stats, Summary};

pub const CONFIG_SCHEMA: u32 = 1;
/// Above this size `Method::Auto` evaluates `H_j` by linear solve.
pub const AUTO_SOLVE_ABOVE: usize = 500;
/// Relative tolerance for the solve/spectral cross-check.
pub const CROSS_CHECK_TOL: f64 = 1e-8;
const MAX_ATTEMPTS_PER_REPLICATION: u64 = 64;

fn check_open_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

fn binom2(m: usize) -> f64 {
    (m * m.saturating_sub(1) / 2) as f64
}

/// `sqrt(p / (n (1 - p))) (H_j - n)`
pub fn standardized_target_statistic(h_j: f64, n: usize, p: f64) -> Result<f64> {
    check_open_probability(p)?;
    let nf = n as f64;
    Ok((p / (nf * (1.0 - p))).sqrt() * (h_j - nf))
}

/// `sqrt(C(n-1,2) / (p (1-p))) (|E \ N_j| / C(n-1,2) - p)`, with `p` taken
/// from the graph.
pub fn standardized_edge_statistic(g: &GraphSample, j: usize) -> Result<f64> {
    let p = g.p();
    check_open_probability(p)?;
    if g.n() < 3 {
        return Err(Error::InvalidSize(g.n()));
    }
    let excluded = graph_statistics(g, j)?.excluded_edge_count as f64;
    let pairs = binom2(g.n() - 1);
    Ok((pairs / (p * (1.0 - p))).sqrt() * (excluded / pairs - p))
}

/// `sqrt(n p / (1-p)) (log(2 |E \ N_j| / d_j + 2) - log n)`
pub fn standardized_log_statistic(g: &GraphSample, j: usize) -> Result<f64> {
    let p = g.p();
    check_open_probability(p)?;
    let s = graph_statistics(g, j)?;
    if s.degree == 0 {
        return Err(Error::IsolatedTarget(j));
    }
    let n = g.n() as f64;
    let factor = 2.0 * s.excluded_edge_count as f64 / s.degree as f64 + 2.0;
    Ok((n * p / (1.0 - p)).sqrt() * (factor.ln() - n.ln()))
}

/// Inputs of the bivariate delta-method step for `(|E \ N_j|, d_j)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaInputs {
    /// `sqrt((n-1) p / (1-p))`
    pub r_n: f64,
    /// `(|E \ N_j| / sqrt(C(n-1,2) (n-1) p^2), d_j / ((n-1) p))`
    pub t_n: [f64; 2],
    /// `(sqrt((n-2)/2), 1)`
    pub theta_n: [f64; 2],
}

pub fn delta_inputs(g: &GraphSample, j: usize) -> Result<DeltaInputs> {
    let p = g.p();
    check_open_probability(p)?;
    if g.n() < 3 {
        return Err(Error::InvalidSize(g.n()));
    }
    let s = graph_statistics(g, j)?;
    let m = (g.n() - 1) as f64;
    Ok(DeltaInputs {
        r_n: (m * p / (1.0 - p)).sqrt(),
        t_n: [
            s.excluded_edge_count as f64 / (binom2(g.n() - 1) * m * p * p).sqrt(),
            s.degree as f64 / (m * p),
        ],
        theta_n: [((m - 1.0) / 2.0).sqrt(), 1.0],
    })
}

/// Terms that must vanish on the CLT scale `a_n = sqrt(n p / (1-p))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegligibilityDiagnostics {
    /// `a_n pi_j`
    pub pi_term: f64,
    /// `a_n Z_n`
    pub z_term: f64,
    /// `a_n log S_j`
    pub log_sum_term: f64,
    /// `p sum_{k>=2} lambda_k^2`
    pub lambda_sq_term: f64,
}

/// `p` sets the scaling and may differ from the graph's own `p` (e.g. for
/// complete graphs, where `p = 1` has no finite scale).
pub fn negligibility_diagnostics(
    dec: &SpectralDecomposition,
    g: &GraphSample,
    j: usize,
    p: f64,
) -> Result<NegligibilityDiagnostics> {
    check_open_probability(p)?;
    let parts = sum_decomposition(dec, g, j)?;
    let scale = (g.n() as f64 * p / (1.0 - p)).sqrt();
    Ok(NegligibilityDiagnostics {
        pi_term: scale * parts.pi_j,
        z_term: scale * parts.z_n,
        log_sum_term: scale * parts.spectral_sum.ln(),
        lambda_sq_term: p * nontrivial_square_sum(dec),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PRule {
    Constant {
        p: f64,
    },
    /// `p = c log(n) / n`
    LogScaled {
        c: f64,
    },
}

impl PRule {
    pub fn p_for(&self, n: usize) -> f64 {
        match *self {
            PRule::Constant { p } => p,
            PRule::LogScaled { c } => c * (n as f64).ln() / n as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Spectral up to `n = 500`, solve above.
    #[default]
    Auto,
    Solve,
    Spectral,
}

impl Method {
    fn resolve(self, n: usize) -> Method {
        match self {
            Method::Auto if n > AUTO_SOLVE_ABOVE => Method::Solve,
            Method::Auto => Method::Spectral,
            m => m,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    Target,
    Edge,
    Log,
    Diagnostics,
}

/// Names of the per-sample values, in CSV order within a replication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Target,
    Edge,
    Log,
    PiTerm,
    ZTerm,
    LogSumTerm,
    LambdaSqTerm,
    GapRatio,
    DelocalizationRatio,
}

impl SampleKind {
    pub fn name(self) -> &'static str {
        match self {
            SampleKind::Target => "target",
            SampleKind::Edge => "edge",
            SampleKind::Log => "log",
            SampleKind::PiTerm => "pi_term",
            SampleKind::ZTerm => "z_term",
            SampleKind::LogSumTerm => "log_sum_term",
            SampleKind::LambdaSqTerm => "lambda_sq_term",
            SampleKind::GapRatio => "gap_ratio",
            SampleKind::DelocalizationRatio => "delocalization_ratio",
        }
    }
}

fn default_schema() -> u32 {
    CONFIG_SCHEMA
}

fn default_statistics() -> Vec<StatisticKind> {
    vec![StatisticKind::Target]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub n_grid: Vec<usize>,
    pub p_rule: PRule,
    #[serde(default)]
    pub target: usize,
    pub replications: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_statistics")]
    pub statistics: Vec<StatisticKind>,
    /// Evaluate `H_j` both ways and fail on disagreement.
    #[serde(default)]
    pub cross_check: bool,
    /// Worker threads; `None` lets the pool decide.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(Error::InvalidConfig(format!("unsupported schema {}", self.schema)));
        }
        if self.n_grid.is_empty() {
            return Err(Error::InvalidConfig("n_grid is empty".into()));
        }
        if self.replications < 1 {
            return Err(Error::InvalidConfig("replications must be at least 1".into()));
        }
        if self.statistics.is_empty() {
            return Err(Error::InvalidConfig("no statistics requested".into()));
        }
        if let PRule::LogScaled { c } = self.p_rule {
            if !(c >= 2.0) {
                return Err(Error::InvalidConfig(format!("log-scaled rule needs c >= 2, got {c}")));
            }
        }
        for &n in &self.n_grid {
            if n < 3 {
                return Err(Error::InvalidConfig(format!("n = {n} is below 3")));
            }
            if self.target >= n {
                return Err(Error::IndexOutOfRange { index: self.target, n });
            }
            check_open_probability(self.p_rule.p_for(n))?;
        }
        Ok(())
    }

    fn wants(&self, kind: StatisticKind) -> bool {
        self.statistics.contains(&kind)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardizedSample {
    pub n: usize,
    pub p: f64,
    pub rep: usize,
    pub statistic: SampleKind,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPointReport {
    pub n: usize,
    pub p: f64,
    /// How `H_j` was evaluated at this `n` (`None` if not requested).
    pub method: Option<Method>,
    pub accepted: usize,
    /// Disconnected draws that were discarded and redrawn.
    pub rejected: usize,
    pub summaries: BTreeMap<SampleKind, Summary>,
    /// Largest relative solve/spectral disagreement when cross-checking.
    pub cross_check_max_rel_err: Option<f64>,
}

/// Medians over replications of the negligibility and spectral terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsPoint {
    pub n: usize,
    pub p: f64,
    pub median_abs_pi_term: f64,
    pub median_abs_z_term: f64,
    pub median_abs_log_sum_term: f64,
    pub median_lambda_sq_term: f64,
    pub median_gap_ratio: f64,
    pub median_delocalization_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuntimeInfo {
    pub elapsed_seconds: f64,
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub config: ExperimentConfig,
    pub rng_id: String,
    pub notes: Vec<String>,
    pub grid: Vec<GridPointReport>,
    pub diagnostics: Vec<DiagnosticsPoint>,
    pub runtime: RuntimeInfo,
    #[serde(skip)]
    pub samples: Vec<StandardizedSample>,
}

impl ExperimentReport {
    /// Samples as CSV with header `n,p,rep,statistic,value`.
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("n,p,rep,statistic,value\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{:?},{},{},{:?}", s.n, s.p, s.rep, s.statistic.name(), s.value);
        }
        out
    }

    pub fn samples_of(&self, n: usize, kind: SampleKind) -> Vec<f64> {
        self.samples
            .iter()
            .filter(|s| s.n == n && s.statistic == kind)
            .map(|s| s.value)
            .collect()
    }

    /// Report with the runtime block zeroed, for reproducibility checks.
    pub fn without_runtime(&self) -> Self {
        let mut out = self.clone();
        out.runtime = RuntimeInfo {
            elapsed_seconds: 0.0,
            workers: 0,
        };
        out
    }
}

struct ReplicationOutcome {
    rejected: usize,
    values: Vec<(SampleKind, f64)>,
    cross_rel_err: Option<f64>,
}

fn draw_connected(cfg: &ExperimentConfig, n: usize, p: f64, rep: usize) -> Result<(GraphSample, usize)> {
    for attempt in 0..MAX_ATTEMPTS_PER_REPLICATION {
        let seed = mix_seed(cfg.master_seed, &[n as u64, rep as u64, attempt]);
        let g = sample_er_graph(n, p, seed)?;
        if is_connected(&g) {
            return Ok((g, attempt as usize));
        }
    }
    Err(Error::TooManyRejections {
        n,
        rejected: MAX_ATTEMPTS_PER_REPLICATION as usize,
    })
}

fn run_replication(cfg: &ExperimentConfig, n: usize, p: f64, rep: usize) -> Result<ReplicationOutcome> {
    let (g, rejected) = draw_connected(cfg, n, p, rep)?;
    let j = cfg.target;
    let mut values = Vec::new();
    let mut cross_rel_err = None;

    let wants_diag = cfg.wants(StatisticKind::Diagnostics);
    let wants_target = cfg.wants(StatisticKind::Target);
    let method = cfg.method.resolve(n);
    let needs_dec = wants_diag || (wants_target && (method == Method::Spectral || cfg.cross_check));
    let dec = if needs_dec { Some(decompose_graph(&g)?) } else { None };

    if wants_target {
        let by_solve = || -> Result<f64> { mean_target_from_column(&g, &hitting_times_solve(&g, j)?) };
        let by_spectral =
            || -> Result<f64> { Ok(mean_target_hitting_spectral(dec.as_ref().expect("decomposed"), &g, j)?.h_target) };
        let h_j = match method {
            Method::Solve => by_solve()?,
            _ => by_spectral()?,
        };
        if cfg.cross_check {
            let other = match method {
                Method::Solve => by_spectral()?,
                _ => by_solve()?,
            };
            let rel = ((h_j - other) / other).abs();
            if !(rel <= CROSS_CHECK_TOL) {
                return Err(Error::CrossMethodMismatch { n, rep, rel_err: rel });
            }
            cross_rel_err = Some(rel);
        }
        values.push((SampleKind::Target, standardized_target_statistic(h_j, n, p)?));
    }
    if cfg.wants(StatisticKind::Edge) {
        values.push((SampleKind::Edge, standardized_edge_statistic(&g, j)?));
    }
    if cfg.wants(StatisticKind::Log) {
        values.push((SampleKind::Log, standardized_log_statistic(&g, j)?));
    }
    if let (true, Some(dec)) = (wants_diag, dec.as_ref()) {
        let d = negligibility_diagnostics(dec, &g, j, p)?;
        values.push((SampleKind::PiTerm, d.pi_term));
        values.push((SampleKind::ZTerm, d.z_term));
        values.push((SampleKind::LogSumTerm, d.log_sum_term));
        values.push((SampleKind::LambdaSqTerm, d.lambda_sq_term));
        values.push((SampleKind::GapRatio, spectral_gap_statistic(dec, n, p).normalized_ratio));
        values.push((
            SampleKind::DelocalizationRatio,
            delocalization_statistic(dec, n, p).conjecture_ratio,
        ));
    }
    Ok(ReplicationOutcome {
        rejected,
        values,
        cross_rel_err,
    })
}

/// Runs every `(n, replication)` task, possibly in parallel, and aggregates
/// in `(n, replication)` order.
///
/// Replication `r` at size `n` uses seed `mix_seed(master_seed, [n, r, a])`
/// for attempt `a = 0, 1, ...`, redrawing until the graph is connected.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let started = Instant::now();
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = cfg.workers {
            b = b.num_threads(w.max(1));
        }
        b.build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?
    };
    let workers = pool.current_num_threads();

    let tasks: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (0..cfg.replications).map(move |r| (n, r)))
        .collect();
    let outcomes: Vec<Result<ReplicationOutcome>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(n, r)| run_replication(cfg, n, cfg.p_rule.p_for(n), r))
            .collect()
    });

    let mut samples = Vec::new();
    let mut grid = Vec::new();
    let mut diagnostics = Vec::new();
    let mut outcomes = outcomes.into_iter();
    for &n in &cfg.n_grid {
        let p = cfg.p_rule.p_for(n);
        let mut rejected = 0;
        let mut cross: Option<f64> = None;
        let mut by_kind: BTreeMap<SampleKind, Vec<f64>> = BTreeMap::new();
        for rep in 0..cfg.replications {
            let out = outcomes.next().expect("one outcome per task")?;
            rejected += out.rejected;
            if let Some(e) = out.cross_rel_err {
                cross = Some(cross.map_or(e, |c: f64| c.max(e)));
            }
            for (kind, value) in out.values {
                by_kind.entry(kind).or_default().push(value);
                samples.push(StandardizedSample {
                    n,
                    p,
                    rep,
                    statistic: kind,
                    value,
                });
            }
        }
        if 2 * rejected > rejected + cfg.replications {
            return Err(Error::TooManyRejections { n, rejected });
        }
        let summaries = by_kind
            .iter()
            .map(|(&k, v)| summary_stats(v).map(|s| (k, s)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        if cfg.wants(StatisticKind::Diagnostics) {
            let med_abs =
                |k: SampleKind| -> Result<f64> { median(&by_kind[&k].iter().map(|x| x.abs()).collect::<Vec<_>>()) };
            diagnostics.push(DiagnosticsPoint {
                n,
                p,
                median_abs_pi_term: med_abs(SampleKind::PiTerm)?,
                median_abs_z_term: med_abs(SampleKind::ZTerm)?,
                median_abs_log_sum_term: med_abs(SampleKind::LogSumTerm)?,
                median_lambda_sq_term: median(&by_kind[&SampleKind::LambdaSqTerm])?,
                median_gap_ratio: median(&by_kind[&SampleKind::GapRatio])?,
                median_delocalization_ratio: median(&by_kind[&SampleKind::DelocalizationRatio])?,
            });
        }
        grid.push(GridPointReport {
            n,
            p,
            method: cfg.wants(StatisticKind::Target).then(|| cfg.method.resolve(n)),
            accepted: cfg.replications,
            rejected,
            summaries,
            cross_check_max_rel_err: cross,
        });
    }

    let p_bar = cfg.n_grid.iter().map(|&n| cfg.p_rule.p_for(n)).fold(0.0f64, f64::max);
    let notes = vec![
        format!("p_rule = {:?}", cfg.p_rule),
        format!("largest realized p (p_bar) = {p_bar:?}"),
        "disconnected draws are redrawn with the next attempt seed".to_string(),
    ];
    Ok(ExperimentReport {
        schema: CONFIG_SCHEMA,
        config: cfg.clone(),
        rng_id: RNG_ID.to_string(),
        notes,
        grid,
        diagnostics,
        runtime: RuntimeInfo {
            elapsed_seconds: started.elapsed().as_secs_f64(),
            workers,
        },
        samples,
    })
}
