//! Acceptance checks. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use erhit_core::clt::{run_experiment, ExperimentConfig, ExperimentReport, Method, PRule, SampleKind, StatisticKind};
use erhit_core::coupling::{CoupledSequenceState, CouplingMode};
use erhit_core::graph::{is_connected, sample_er_graph, GraphSample};
use erhit_core::hitting::{
    hitting_matrix_solve, hitting_matrix_spectral, hitting_time_mc, hitting_times_solve, mean_target_from_column,
    sum_decomposition,
};
use erhit_core::io::to_json_pretty;
use erhit_core::report::{hitting_report, spectrum_report, HitMethod, HitOptions};
use erhit_core::rng::{mix_seed, rng_from_seed, uniform_f64, uniform_index};
use erhit_core::spectral::{decompose_graph, verify_spectral_identities, SpectralDecomposition};
use statrs::distribution::{Binomial, DiscreteCDF};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn connected_sample(n: usize, p: f64, key: &[u64]) -> GraphSample {
    for attempt in 0.. {
        let mut k = key.to_vec();
        k.push(attempt);
        let g = sample_er_graph(n, p, mix_seed(0xACCE_5500, &k)).unwrap();
        if is_connected(&g) {
            return g;
        }
    }
    unreachable!()
}

fn experiment(
    n_grid: Vec<usize>,
    p: f64,
    replications: usize,
    seed: u64,
    method: Method,
    stats: Vec<StatisticKind>,
) -> ExperimentReport {
    run_experiment(&ExperimentConfig {
        schema: 1,
        n_grid,
        p_rule: PRule::Constant { p },
        target: 0,
        replications,
        master_seed: seed,
        method,
        statistics: stats,
        cross_check: false,
        workers: None,
    })
    .unwrap()
}

/// Two-sided binomial p-value.
fn binomial_p_value(k: u64, trials: u64, p: f64) -> f64 {
    let b = Binomial::new(p, trials).unwrap();
    let lower = b.cdf(k);
    let upper = if k == 0 { 1.0 } else { 1.0 - b.cdf(k - 1) };
    (2.0 * lower.min(upper)).min(1.0)
}

fn c1_oracle_equivalence(store: &mut Vec<(GraphSample, SpectralDecomposition)>) -> Outcome {
    let mut worst: f64 = 0.0;
    for s in 0..50u64 {
        let n = [10, 50, 200][(s % 3) as usize];
        let p = [0.3, 0.6][((s / 3) % 2) as usize];
        let g = connected_sample(n, p, &[1, s]);
        let dec = decompose_graph(&g).unwrap();
        let spectral = hitting_matrix_spectral(&dec, &g).unwrap();
        let solve = hitting_matrix_solve(&g).unwrap();
        for j in 0..n {
            for i in (0..n).filter(|&i| i != j) {
                worst = worst.max(((spectral[j][i] - solve[j][i]) / solve[j][i]).abs());
            }
        }
        store.push((g, dec));
    }
    outcome(
        worst <= 1e-8,
        format!("max relative error {worst:.2e} over all H_ij (tol 1e-8)"),
    )
}

fn c2_monte_carlo() -> Outcome {
    let mut rng = rng_from_seed(0x2002);
    let mut agree = 0;
    let mut worst_z: f64 = 0.0;
    for case in 0..100u64 {
        let n = 10 + uniform_index(&mut rng, 91);
        let p = 0.2 + 0.7 * uniform_f64(&mut rng);
        let g = connected_sample(n, p, &[2, case]);
        let j = uniform_index(&mut rng, n);
        let i = (j + 1 + uniform_index(&mut rng, n - 1)) % n;
        let exact = hitting_times_solve(&g, j).unwrap()[i];
        let mc = hitting_time_mc(&g, i, j, 100_000, mix_seed(0x2002, &[case])).unwrap();
        let z = (mc.mean - exact).abs() / mc.std_error;
        worst_z = worst_z.max(z);
        agree += (z <= 4.0) as usize;
    }
    outcome(
        agree >= 99,
        format!("{agree}/100 within 4 std_error (need 99), largest |z| {worst_z:.2}"),
    )
}

fn c3_identities(store: &[(GraphSample, SpectralDecomposition)]) -> Outcome {
    let mut worst: f64 = 0.0;
    for (g, dec) in store {
        for j in 0..g.n() {
            worst = worst.max(verify_spectral_identities(dec, g, j).unwrap().max());
            worst = worst.max(sum_decomposition(dec, g, j).unwrap().identity_residual());
        }
    }
    outcome(
        worst <= 1e-9,
        format!(
            "max residual {worst:.2e} over {} decompositions, all targets (tol 1e-9)",
            store.len()
        ),
    )
}

fn c4_law_of_large_numbers() -> Outcome {
    let mut worst: f64 = 0.0;
    for s in 0..20u64 {
        let g = connected_sample(1000, 0.3, &[4, s]);
        let h = mean_target_from_column(&g, &hitting_times_solve(&g, 0).unwrap()).unwrap();
        worst = worst.max((h / 1000.0 - 1.0).abs());
    }
    outcome(
        worst <= 0.2,
        format!("max |H_j/n - 1| = {worst:.4} over 20 seeds (tol 0.2)"),
    )
}

fn c5_target_clt(info: &mut Vec<String>) -> Outcome {
    let (n, p) = (1000.0, 0.2);
    let r = experiment(vec![1000], p, 400, 0x5005, Method::Solve, vec![StatisticKind::Target]);
    let s = &r.grid[0].summaries[&SampleKind::Target];
    let var = s.variance.unwrap();
    // E[2|E|/d_j] ~ n + (1-p)/p and S_j ~ 1 - 2/n + (1-p)/(n p)
    let bias = (p / (n * (1.0 - p))).sqrt() * (2.0 * (1.0 - p) / p - 2.0);
    info.push(format!(
        "target statistic: first-order finite-n bias {bias:.4}, standard error of the mean {:.4}",
        (var / s.count as f64).sqrt()
    ));
    let pass = s.mean.abs() <= 0.15 && (0.7..=1.3).contains(&var) && s.ks_distance <= 0.09;
    outcome(
        pass,
        format!(
            "mean {:.4} (|.| <= 0.15), variance {var:.4} (in [0.7, 1.3]), KS {:.4} (<= 0.09), R = {}",
            s.mean, s.ks_distance, s.count
        ),
    )
}

fn c6_edge_clt() -> Outcome {
    let r = experiment(vec![2000], 0.1, 1000, 0x6006, Method::Auto, vec![StatisticKind::Edge]);
    let s = &r.grid[0].summaries[&SampleKind::Edge];
    outcome(
        s.ks_distance <= 0.05,
        format!(
            "KS {:.4} (<= 0.05), mean {:.4}, variance {:.4}",
            s.ks_distance,
            s.mean,
            s.variance.unwrap()
        ),
    )
}

fn c7_spectral_gap() -> Outcome {
    let r = experiment(
        vec![1000],
        0.1,
        20,
        0x7007,
        Method::Spectral,
        vec![StatisticKind::Diagnostics],
    );
    let worst = r
        .samples_of(1000, SampleKind::GapRatio)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    outcome(worst <= 1.1, format!("max gap ratio {worst:.4} over 20 seeds (<= 1.1)"))
}

fn c8_delocalization(info: &mut Vec<String>) -> Outcome {
    let r = experiment(
        vec![250, 500, 1000, 2000],
        0.2,
        10,
        0x8008,
        Method::Spectral,
        vec![StatisticKind::Diagnostics],
    );
    let medians: Vec<f64> = r.diagnostics.iter().map(|d| d.median_delocalization_ratio).collect();
    for d in &r.diagnostics {
        info.push(format!(
            "n = {}: median |a_n pi_j| {:.4}, |a_n Z_n| {:.4}, |a_n log S_j| {:.4}",
            d.n, d.median_abs_pi_term, d.median_abs_z_term, d.median_abs_log_sum_term
        ));
    }
    let pass = medians.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = medians.iter().map(|m| format!("{m:.4}")).collect();
    outcome(
        pass,
        format!("median ratios at n = 250, 500, 1000, 2000: {}", shown.join(", ")),
    )
}

fn c9_trace_law(info: &mut Vec<String>) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (idx, p) in [0.1, 0.2, 0.4].into_iter().enumerate() {
        let r = experiment(
            vec![1000],
            p,
            5,
            0x9009 + idx as u64,
            Method::Spectral,
            vec![StatisticKind::Diagnostics],
        );
        let v = r.samples_of(1000, SampleKind::LambdaSqTerm);
        let worst = v.iter().map(|x| (x - 1.0).abs()).fold(0.0f64, f64::max);
        pass &= worst <= 0.1;
        let (lo, hi) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        parts.push(format!("p = {p}: [{lo:.4}, {hi:.4}]"));
        info.push(format!(
            "p = {p}: p * sum over all k of lambda_k^2 in [{:.4}, {:.4}]",
            lo + p,
            hi + p
        ));
    }
    outcome(
        pass,
        format!(
            "p * sum_(k>=2) lambda_k^2 per seed, {} (need within 0.1 of 1)",
            parts.join("; ")
        ),
    )
}

fn c10_coupling() -> Outcome {
    let rule = |n: usize| 4.0 * (n as f64).ln() / n as f64;
    let (chains, advances, n0) = (200u64, 200usize, 500usize);
    let mut subset_ok = true;
    let mut pair_present = 0u64;
    let (mut pooled_edges, mut pooled_pairs) = (0u64, 0u64);
    for c in 0..chains {
        let (mut st, mut prev) =
            CoupledSequenceState::start(n0, rule(n0), CouplingMode::Decreasing, mix_seed(0x1010, &[c])).unwrap();
        for _ in 0..advances {
            let next = st.advance(rule(prev.n() + 1)).unwrap();
            subset_ok &= next
                .edges()
                .filter(|&(_, j)| j < prev.n())
                .all(|(i, j)| prev.has_edge(i, j));
            prev = next;
        }
        pair_present += prev.has_edge(0, 1) as u64;
        pooled_edges += prev.edge_count() as u64;
        pooled_pairs += (prev.n() * (prev.n() - 1) / 2) as u64;
    }
    let p_final = rule(n0 + advances);
    let pv_pair = binomial_p_value(pair_present, chains, p_final);
    let pv_pooled = binomial_p_value(pooled_edges, pooled_pairs, p_final);

    // increasing mode: must equal the complement of the decreasing chain on 1 - p
    let up = |n: usize| 1.0 - rule(n);
    let inc_chains = 40u64;
    let mut complement_ok = true;
    let mut superset_ok = true;
    let mut absent = 0u64;
    for c in 0..inc_chains {
        let seed = mix_seed(0x1011, &[c]);
        let (mut inc, mut prev) =
            CoupledSequenceState::start(n0, up(n0), CouplingMode::IncreasingViaComplement, seed).unwrap();
        let (mut dec, mut dual) = CoupledSequenceState::start(n0, rule(n0), CouplingMode::Decreasing, seed).unwrap();
        complement_ok &= prev.adjacency() == &dual.adjacency().complement();
        for _ in 0..advances {
            let n = prev.n() + 1;
            let next = inc.advance(up(n)).unwrap();
            dual = dec.advance(rule(n)).unwrap();
            superset_ok &= prev.edges().all(|(i, j)| next.has_edge(i, j));
            complement_ok &= next.adjacency() == &dual.adjacency().complement();
            prev = next;
        }
        absent += !prev.has_edge(0, 1) as u64;
    }
    let pv_inc = binomial_p_value(absent, inc_chains, p_final);

    let pass = subset_ok && superset_ok && complement_ok && pv_pair >= 0.01 && pv_pooled >= 0.01 && pv_inc >= 0.01;
    outcome(
        pass,
        format!(
            "subset {subset_ok}, pair (0,1) p-value {pv_pair:.3}, pooled p-value {pv_pooled:.3}; \
             increasing: superset {superset_ok}, complement match {complement_ok}, pair p-value {pv_inc:.3}"
        ),
    )
}

fn c11_determinism() -> Outcome {
    let cfg = |workers| ExperimentConfig {
        schema: 1,
        n_grid: vec![60, 120],
        p_rule: PRule::LogScaled { c: 4.0 },
        target: 0,
        replications: 12,
        master_seed: 0x1111,
        method: Method::Spectral,
        statistics: vec![
            StatisticKind::Target,
            StatisticKind::Edge,
            StatisticKind::Log,
            StatisticKind::Diagnostics,
        ],
        cross_check: true,
        workers,
    };
    let a = run_experiment(&cfg(Some(1))).unwrap().samples_csv();
    let b = run_experiment(&cfg(None)).unwrap().samples_csv();
    let c = run_experiment(&cfg(Some(4))).unwrap().samples_csv();
    let csv_same = a == b && b == c;

    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("g");
    let exe = env!("CARGO_BIN_EXE_erhit");
    let run = |args: &[&str]| Command::new(exe).args(args).output().unwrap();
    let gp = prefix.to_str().unwrap();
    let spec_path = dir.path().join("spectrum.json");
    let hit_path = dir.path().join("hit.json");
    let ok = run(&["gen", "--n", "200", "--p", "0.2", "--seed", "4242", "--out", gp])
        .status
        .success()
        && run(&["spectrum", "--in", gp, "--out", spec_path.to_str().unwrap()])
            .status
            .success()
        && run(&[
            "hit",
            "--in",
            gp,
            "--method",
            "spectral",
            "--column",
            "--out",
            hit_path.to_str().unwrap(),
        ])
        .status
        .success();
    let g = sample_er_graph(200, 0.2, 4242).unwrap();
    let dec = decompose_graph(&g).unwrap();
    let opts = HitOptions {
        method: HitMethod::Spectral,
        include_column: true,
        ..HitOptions::default()
    };
    let want_spec = to_json_pretty(&spectrum_report(&g, &dec)).unwrap();
    let want_hit = to_json_pretty(&hitting_report(&g, Some(&dec), &opts).unwrap()).unwrap();
    let files_same = ok
        && std::fs::read_to_string(&spec_path).unwrap() == want_spec
        && std::fs::read_to_string(&hit_path).unwrap() == want_hit;
    outcome(
        csv_same && files_same,
        format!("sample CSVs identical across worker counts: {csv_same}; file pipeline equals in-memory: {files_same}"),
    )
}

fn check(id: u32, name: &str, budget: Option<u64>, results: &mut Vec<(u32, bool)>, f: impl FnOnce() -> Outcome) {
    let t = Instant::now();
    let out = f();
    let elapsed = t.elapsed();
    let in_time = budget.is_none_or(|b| elapsed <= Duration::from_secs(b));
    let pass = out.pass && in_time;
    let budget_note = budget.map_or(String::new(), |b| format!(", budget {b}s"));
    println!(
        "criterion {id:>2} {name}: {} ({}; {:.1}s{budget_note})",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64()
    );
    results.push((id, pass));
}

fn main() {
    let mut store = Vec::new();
    let mut info = Vec::new();
    let mut results = Vec::new();
    let r = &mut results;
    check(1, "oracle equivalence", Some(120), r, || {
        c1_oracle_equivalence(&mut store)
    });
    check(2, "monte carlo consistency", Some(300), r, c2_monte_carlo);
    check(3, "spectral identities", None, r, || c3_identities(&store));
    check(4, "law of large numbers", None, r, c4_law_of_large_numbers);
    check(5, "target statistic CLT", Some(1800), r, || c5_target_clt(&mut info));
    check(6, "edge statistic CLT", Some(120), r, c6_edge_clt);
    check(7, "spectral gap", None, r, c7_spectral_gap);
    check(8, "delocalization trend", None, r, || c8_delocalization(&mut info));
    check(9, "trace law", None, r, || c9_trace_law(&mut info));
    check(10, "coupling", None, r, c10_coupling);
    check(11, "determinism and round-trip", None, r, c11_determinism);

    for line in &info {
        println!("info: {line}");
    }
    let failed: Vec<u32> = results.iter().filter(|(_, pass)| !pass).map(|(id, _)| *id).collect();
    println!(
        "acceptance: {} of {} criteria passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failed: {failed:?}")
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
