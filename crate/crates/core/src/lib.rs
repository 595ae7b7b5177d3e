//! Random walks on Erdős–Rényi graphs: sampling, spectral decomposition of
//! the normalized adjacency, hitting times and standardized statistics.
//!
//! ```
//! use erhit_core::{clt, graph, hitting, spectral};
//!
//! let g = graph::sample_er_graph(200, 0.2, 42)?;
//! let dec = spectral::decompose_graph(&g)?;
//! let profile = hitting::mean_target_hitting_spectral(&dec, &g, 0)?;
//! let z = clt::standardized_target_statistic(profile.h_target, g.n(), g.p())?;
//! assert!(z.is_finite());
//! # Ok::<(), erhit_core::Error>(())
//! ```

// `!(x <= tol)` style checks are there to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod clt;
pub mod coupling;
pub mod error;
pub mod graph;
pub mod hitting;
pub mod io;
pub mod linalg;
pub mod report;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
