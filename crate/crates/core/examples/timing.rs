//! Wall-clock cost of the two `H_j` paths on one sample.
//!
//! cargo run --release --example timing -- 1000 0.2

use std::time::Instant;

use erhit_core::graph::sample_er_graph;
use erhit_core::hitting::{hitting_times_solve, mean_target_from_column, mean_target_hitting_spectral};
use erhit_core::spectral::decompose_graph;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(1000, |s| s.parse().expect("n"));
    let p: f64 = args.next().map_or(0.2, |s| s.parse().expect("p"));
    let g = sample_er_graph(n, p, 1).expect("sample");

    let t = Instant::now();
    let dec = decompose_graph(&g).expect("decompose");
    let h_spec = mean_target_hitting_spectral(&dec, &g, 0).expect("spectral").h_target;
    println!(
        "spectral: H_0 = {h_spec:.6} in {:.2?} (residual {:.1e})",
        t.elapsed(),
        dec.residual()
    );

    let t = Instant::now();
    let h_solve = mean_target_from_column(&g, &hitting_times_solve(&g, 0).expect("solve")).expect("mean");
    println!("solve:    H_0 = {h_solve:.6} in {:.2?}", t.elapsed());
}
