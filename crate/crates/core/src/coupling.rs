//! Coupled sequence of graphs `G_n, G_{n+1}, ...` whose edge indicators form
//! a time-inhomogeneous Markov chain.
//!
//! In decreasing mode a present edge survives an advance with probability
//! `p_next / p_current` and an absent edge stays absent. Increasing sequences
//! apply the same thinning to the complement graph, which is what the state
//! stores in that mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Adjacency, GraphSample};
use crate::rng::{self, Rng, RNG_ID};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingMode {
    Decreasing,
    IncreasingViaComplement,
}

impl CouplingMode {
    fn name(self) -> &'static str {
        match self {
            CouplingMode::Decreasing => "decreasing",
            CouplingMode::IncreasingViaComplement => "increasing-via-complement",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CoupledSequenceState {
    current_n: usize,
    current_p: f64,
    seed: u64,
    mode: CouplingMode,
    /// Thinned indicators: the graph itself when decreasing, its complement
    /// when increasing.
    indicators: Adjacency,
    rng: Rng,
}

impl CoupledSequenceState {
    /// Starts a chain at `G(n, p)` and returns the initial graph as well.
    pub fn start(n: usize, p: f64, mode: CouplingMode, seed: u64) -> Result<(Self, GraphSample)> {
        if n < 1 {
            return Err(Error::InvalidSize(n));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidProbability(p));
        }
        let mut rng = rng::rng_from_seed(seed);
        let indicator_p = match mode {
            CouplingMode::Decreasing => p,
            CouplingMode::IncreasingViaComplement => 1.0 - p,
        };
        let mut indicators = Adjacency::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                if rng::bernoulli(&mut rng, indicator_p) {
                    indicators.set(i, j, true);
                }
            }
        }
        let state = Self {
            current_n: n,
            current_p: p,
            seed,
            mode,
            indicators,
            rng,
        };
        let g = state.materialize()?;
        Ok((state, g))
    }

    pub fn current_n(&self) -> usize {
        self.current_n
    }

    pub fn current_p(&self) -> f64 {
        self.current_p
    }

    pub fn mode(&self) -> CouplingMode {
        self.mode
    }

    /// Moves to `n + 1` vertices at edge probability `p_next`.
    ///
    /// Existing indicators are thinned in row-major pair order, then the new
    /// vertex draws its `n` indicators in vertex order.
    pub fn advance(&mut self, p_next: f64) -> Result<GraphSample> {
        if !(p_next > 0.0 && p_next < 1.0) {
            return Err(Error::InvalidProbability(p_next));
        }
        let (retain, fresh) = match self.mode {
            CouplingMode::Decreasing => {
                if p_next > self.current_p {
                    return Err(self.violation(p_next));
                }
                (p_next / self.current_p, p_next)
            }
            CouplingMode::IncreasingViaComplement => {
                if p_next < self.current_p {
                    return Err(self.violation(p_next));
                }
                ((1.0 - p_next) / (1.0 - self.current_p), 1.0 - p_next)
            }
        };
        let n = self.current_n;
        let mut next = self.indicators.grown();
        if retain < 1.0 {
            let present: Vec<(usize, usize)> = self.indicators.edges().collect();
            for (i, j) in present {
                if !rng::bernoulli(&mut self.rng, retain) {
                    next.set(i, j, false);
                }
            }
        }
        for i in 0..n {
            if rng::bernoulli(&mut self.rng, fresh) {
                next.set(i, n, true);
            }
        }
        self.indicators = next;
        self.current_n = n + 1;
        self.current_p = p_next;
        self.materialize()
    }

    fn violation(&self, next: f64) -> Error {
        Error::MonotonicityViolation {
            mode: self.mode.name(),
            current: self.current_p,
            next,
        }
    }

    /// The graph at the current stage. Its `seed` is the chain's start seed.
    pub fn materialize(&self) -> Result<GraphSample> {
        let adj = match self.mode {
            CouplingMode::Decreasing => self.indicators.clone(),
            CouplingMode::IncreasingViaComplement => self.indicators.complement(),
        };
        GraphSample::from_adjacency(adj, self.current_p, self.seed, RNG_ID)
    }
}
