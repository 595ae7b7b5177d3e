//! JSON reports for spectra, hitting times and single-graph diagnostics.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::clt::{negligibility_diagnostics, NegligibilityDiagnostics};
use crate::error::{Error, Result};
use crate::graph::{stationary_distribution, GraphSample};
use crate::hitting::{
    hitting_column_spectral, hitting_time_mc, hitting_times_solve, mean_target_from_column, sum_decomposition,
    SumDecomposition,
};
use crate::io::GraphMetadata;
use crate::spectral::{
    delocalization_statistic, spectral_gap_statistic, verify_spectral_identities, DelocalizationStatistic,
    GapStatistic, IdentityResiduals, SpectralDecomposition,
};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub schema: u32,
    pub graph: GraphMetadata,
    pub edge_count: usize,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub residual: f64,
    pub orthonormality_defect: f64,
    /// Absent when `p = 0` leaves the normalization undefined.
    pub gap: Option<GapStatistic>,
    pub delocalization: Option<DelocalizationStatistic>,
    pub degenerate: bool,
}

pub fn spectrum_report(g: &GraphSample, dec: &SpectralDecomposition) -> SpectrumReport {
    let scaled = g.p() > 0.0;
    SpectrumReport {
        schema: REPORT_SCHEMA,
        graph: GraphMetadata::of(g),
        edge_count: g.edge_count(),
        eigenvalues: dec.eigenvalues().to_vec(),
        residual: dec.residual(),
        orthonormality_defect: dec.orthonormality_defect(),
        gap: scaled.then(|| spectral_gap_statistic(dec, g.n(), g.p())),
        delocalization: scaled.then(|| delocalization_statistic(dec, g.n(), g.p())),
        degenerate: dec.degenerate(),
    }
}

/// One row per eigenvector, in eigenvalue order; no header.
pub fn eigenvectors_csv(dec: &SpectralDecomposition) -> String {
    let mut out = String::new();
    for k in 0..dec.n() {
        for (idx, x) in dec.eigenvector(k).iter().enumerate() {
            if idx > 0 {
                out.push(',');
            }
            let _ = write!(out, "{x:?}");
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitMethod {
    Spectral,
    Solve,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HitOptions {
    pub target: usize,
    pub method: HitMethod,
    pub include_column: bool,
    /// Walks per start vertex for `Mc`.
    pub trials: u64,
    pub seed: u64,
}

impl Default for HitOptions {
    fn default() -> Self {
        HitOptions {
            target: 0,
            method: HitMethod::Spectral,
            include_column: false,
            trials: 10_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingReport {
    pub schema: u32,
    pub graph: GraphMetadata,
    pub target: usize,
    pub method: HitMethod,
    /// `sum_i pi_i H_ij`
    pub h_target: f64,
    /// `H_ij` for every start `i` (zero at `i = j`).
    pub h_column: Option<Vec<f64>>,
    pub terms: Option<SumDecomposition>,
    pub trials: Option<u64>,
    pub std_error: Option<f64>,
    pub seed: Option<u64>,
}

/// `dec` is required for `HitMethod::Spectral` and ignored otherwise.
pub fn hitting_report(
    g: &GraphSample,
    dec: Option<&SpectralDecomposition>,
    opts: &HitOptions,
) -> Result<HittingReport> {
    let j = opts.target;
    g.check_vertex(j)?;
    let mut report = HittingReport {
        schema: REPORT_SCHEMA,
        graph: GraphMetadata::of(g),
        target: j,
        method: opts.method,
        h_target: 0.0,
        h_column: None,
        terms: None,
        trials: None,
        std_error: None,
        seed: None,
    };
    let column = match opts.method {
        HitMethod::Spectral => {
            let dec = dec.ok_or_else(|| Error::InvalidConfig("spectral method needs a decomposition".into()))?;
            report.terms = Some(sum_decomposition(dec, g, j)?);
            hitting_column_spectral(dec, g, j)?
        }
        HitMethod::Solve => hitting_times_solve(g, j)?,
        HitMethod::Mc => {
            let pi = stationary_distribution(g)?.pi;
            let mut column = vec![0.0; g.n()];
            let mut var_sum = 0.0;
            for (i, slot) in column.iter_mut().enumerate() {
                if i != j {
                    let est = hitting_time_mc(g, i, j, opts.trials, opts.seed)?;
                    *slot = est.mean;
                    var_sum += (pi[i] * est.std_error).powi(2);
                }
            }
            report.trials = Some(opts.trials);
            report.std_error = Some(var_sum.sqrt());
            report.seed = Some(opts.seed);
            column
        }
    };
    report.h_target = mean_target_from_column(g, &column)?;
    if opts.include_column {
        report.h_column = Some(column);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub schema: u32,
    pub graph: GraphMetadata,
    pub target: usize,
    /// Scale used for the negligibility terms.
    pub p: f64,
    pub gap: GapStatistic,
    pub delocalization: DelocalizationStatistic,
    pub negligibility: NegligibilityDiagnostics,
    pub identities: IdentityResiduals,
    pub sum_identity_residual: f64,
}

pub fn diagnostics_report(
    g: &GraphSample,
    dec: &SpectralDecomposition,
    target: usize,
    p: f64,
) -> Result<DiagnosticsReport> {
    Ok(DiagnosticsReport {
        schema: REPORT_SCHEMA,
        graph: GraphMetadata::of(g),
        target,
        p,
        gap: spectral_gap_statistic(dec, g.n(), p),
        delocalization: delocalization_statistic(dec, g.n(), p),
        negligibility: negligibility_diagnostics(dec, g, target, p)?,
        identities: verify_spectral_identities(dec, g, target)?,
        sum_identity_residual: sum_decomposition(dec, g, target)?.identity_residual(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::complete;
    use crate::graph::sample_er_graph;
    use crate::spectral::decompose_graph;

    #[test]
    fn k3_hitting_report() {
        let g = complete(3);
        let dec = decompose_graph(&g).unwrap();
        let mut opts = HitOptions {
            method: HitMethod::Solve,
            include_column: true,
            ..HitOptions::default()
        };
        let r = hitting_report(&g, None, &opts).unwrap();
        // H_{i0} = 2 for i != 0, weighted by pi_i = 1/3
        assert!((r.h_target - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.h_column.as_ref().unwrap()[0], 0.0);
        assert!(r.terms.is_none());
        opts.method = HitMethod::Spectral;
        let s = hitting_report(&g, Some(&dec), &opts).unwrap();
        assert!((s.h_target - 4.0 / 3.0).abs() < 1e-12);
        assert!(s.terms.is_some());
        assert!(hitting_report(&g, None, &opts).is_err());
    }

    #[test]
    fn mc_report_carries_trials() {
        let g = sample_er_graph(12, 0.6, 3).unwrap();
        let opts = HitOptions {
            method: HitMethod::Mc,
            trials: 4000,
            seed: 11,
            ..HitOptions::default()
        };
        let mc = hitting_report(&g, None, &opts).unwrap();
        let exact = hitting_report(
            &g,
            None,
            &HitOptions {
                method: HitMethod::Solve,
                ..opts
            },
        )
        .unwrap();
        assert_eq!(mc.trials, Some(4000));
        let se = mc.std_error.unwrap();
        assert!(
            (mc.h_target - exact.h_target).abs() <= 4.0 * se,
            "{} {} {se}",
            mc.h_target,
            exact.h_target
        );
    }

    #[test]
    fn spectrum_report_fields() {
        let g = sample_er_graph(40, 0.5, 1).unwrap();
        let dec = decompose_graph(&g).unwrap();
        let r = spectrum_report(&g, &dec);
        assert_eq!(r.eigenvalues.len(), 40);
        assert!(r.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert!(r.gap.is_some());
        let csv = eigenvectors_csv(&dec);
        assert_eq!(csv.lines().count(), 40);
        let first: Vec<f64> = csv
            .lines()
            .next()
            .unwrap()
            .split(',')
            .map(|x| x.parse().unwrap())
            .collect();
        assert_eq!(first, dec.eigenvector(0));
    }

    #[test]
    fn reports_survive_json() {
        let g = sample_er_graph(30, 0.4, 8).unwrap();
        let dec = decompose_graph(&g).unwrap();
        let r = diagnostics_report(&g, &dec, 0, 0.4).unwrap();
        let back: DiagnosticsReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(r.sum_identity_residual <= 1e-9);
    }
}
