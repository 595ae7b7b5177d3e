//! Erdős–Rényi samples and the basic statistics the walk analysis needs.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::rng::{self, RNG_ID};

/// Dense symmetric bit matrix. Row `i` holds the neighbours of vertex `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl Adjacency {
    pub fn empty(n: usize) -> Self {
        let words_per_row = n.div_ceil(64);
        Self {
            n,
            words_per_row,
            bits: vec![0; n * words_per_row],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words_per_row + j / 64] >> (j % 64) & 1 == 1
    }

    /// Sets or clears the unordered pair `{i, j}`. `i == j` is ignored.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, present: bool) {
        if i == j {
            return;
        }
        let w = self.words_per_row;
        let (bi, mi) = (i * w + j / 64, 1u64 << (j % 64));
        let (bj, mj) = (j * w + i / 64, 1u64 << (i % 64));
        if present {
            self.bits[bi] |= mi;
            self.bits[bj] |= mj;
        } else {
            self.bits[bi] &= !mi;
            self.bits[bj] &= !mj;
        }
    }

    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row_words(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Neighbours of `i` in increasing order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row_words(i)
            .iter()
            .enumerate()
            .flat_map(|(wi, &word)| BitIter { word }.map(move |b| wi * 64 + b))
    }

    /// Graph complement on the same vertex set (still loop-free).
    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            let row = &mut out.bits[i * self.words_per_row..(i + 1) * self.words_per_row];
            for w in row.iter_mut() {
                *w = !*w;
            }
            let tail = self.n % 64;
            if tail != 0 {
                row[self.words_per_row - 1] &= (1u64 << tail) - 1;
            }
            row[i / 64] &= !(1u64 << (i % 64));
        }
        out
    }

    /// Copy of the first `n` rows/columns extended to `n + 1` vertices.
    pub(crate) fn grown(&self) -> Self {
        let mut out = Self::empty(self.n + 1);
        for i in 0..self.n {
            let src = self.row_words(i);
            let dst = &mut out.bits[i * out.words_per_row..i * out.words_per_row + src.len()];
            dst.copy_from_slice(src);
        }
        out
    }

    /// Edges `(i, j)` with `i < j`, row-major.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.neighbors(i).filter(move |&j| j > i).map(move |j| (i, j)))
    }
}

struct BitIter {
    word: u64,
}

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.word == 0 {
            return None;
        }
        let b = self.word.trailing_zeros() as usize;
        self.word &= self.word - 1;
        Some(b)
    }
}

/// One realization of G(n, p) together with the metadata needed to
/// regenerate it.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSample {
    n: usize,
    p: f64,
    seed: u64,
    rng_id: String,
    adjacency: Adjacency,
    degrees: Vec<usize>,
    edge_count: usize,
}

impl GraphSample {
    /// Wraps an adjacency matrix. `p`, `seed` and `rng_id` are recorded as
    /// given; they describe where the graph came from.
    pub fn from_adjacency(adjacency: Adjacency, p: f64, seed: u64, rng_id: impl Into<String>) -> Result<Self> {
        if adjacency.n() == 0 {
            return Err(Error::InvalidSize(0));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        let degrees: Vec<usize> = (0..adjacency.n()).map(|i| adjacency.degree(i)).collect();
        let edge_count = degrees.iter().sum::<usize>() / 2;
        Ok(Self {
            n: adjacency.n(),
            p,
            seed,
            rng_id: rng_id.into(),
            adjacency,
            degrees,
            edge_count,
        })
    }

    /// Builds a graph from an explicit edge list. Rejects self-loops,
    /// out-of-range endpoints and repeated pairs.
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize)],
        p: f64,
        seed: u64,
        rng_id: impl Into<String>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(0));
        }
        let mut adj = Adjacency::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), n });
            }
            if i == j {
                return Err(Error::InvalidEdge {
                    i,
                    j,
                    reason: "self-loop",
                });
            }
            if adj.contains(i, j) {
                return Err(Error::InvalidEdge {
                    i,
                    j,
                    reason: "duplicate edge",
                });
            }
            adj.set(i, j, true);
        }
        Self::from_adjacency(adj, p, seed, rng_id)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng_id(&self) -> &str {
        &self.rng_id
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency.contains(i, j)
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.edges()
    }

    pub fn check_vertex(&self, j: usize) -> Result<()> {
        if j >= self.n {
            Err(Error::IndexOutOfRange { index: j, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Fails with `IsolatedVertex` on the first vertex of degree zero.
    pub fn check_no_isolated(&self) -> Result<()> {
        match self.degrees.iter().position(|&d| d == 0) {
            Some(i) => Err(Error::IsolatedVertex(i)),
            None => Ok(()),
        }
    }

    /// Compressed neighbour lists, built once per graph for walk simulation
    /// and sparse products.
    pub fn neighbor_lists(&self) -> NeighborLists {
        let mut offsets = Vec::with_capacity(self.n + 1);
        let mut targets = Vec::with_capacity(2 * self.edge_count);
        offsets.push(0);
        for i in 0..self.n {
            targets.extend(self.adjacency.neighbors(i));
            offsets.push(targets.len());
        }
        NeighborLists { offsets, targets }
    }
}

#[derive(Clone, Debug)]
pub struct NeighborLists {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl NeighborLists {
    #[inline]
    pub fn of(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// Samples G(n, p). Pairs `(i, j)`, `i < j`, are visited row-major and each
/// consumes exactly one uniform draw, so the result is a pure function of
/// `(n, p, seed)` for a given [`RNG_ID`].
pub fn sample_er_graph(n: usize, p: f64, seed: u64) -> Result<GraphSample> {
    check_probability(p)?;
    if n < 1 {
        return Err(Error::InvalidSize(n));
    }
    let mut rng = rng::rng_from_seed(seed);
    let mut adj = Adjacency::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng::bernoulli(&mut rng, p) {
                adj.set(i, j, true);
            }
        }
    }
    GraphSample::from_adjacency(adj, p, seed, RNG_ID)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphStatistics {
    pub edge_count: usize,
    pub degree: usize,
    /// Edges not incident to the chosen vertex.
    pub excluded_edge_count: usize,
}

pub fn graph_statistics(g: &GraphSample, j: usize) -> Result<GraphStatistics> {
    g.check_vertex(j)?;
    let degree = g.degree(j);
    Ok(GraphStatistics {
        edge_count: g.edge_count(),
        degree,
        excluded_edge_count: g.edge_count() - degree,
    })
}

/// Invariant law of the simple random walk, `pi_i = d_i / 2|E|`.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
}

pub fn stationary_distribution(g: &GraphSample) -> Result<StationaryDistribution> {
    g.check_no_isolated()?;
    let total = (2 * g.edge_count()) as f64;
    Ok(StationaryDistribution {
        pi: g.degrees().iter().map(|&d| d as f64 / total).collect(),
    })
}

/// Breadth-first search from vertex 0.
pub fn is_connected(g: &GraphSample) -> bool {
    let adj = g.adjacency();
    let words = g.n().div_ceil(64);
    let mut seen = vec![0u64; words];
    seen[0] = 1;
    let mut reached = 1;
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for (wi, (&row, mark)) in adj.row_words(v).iter().zip(seen.iter_mut()).enumerate() {
            let fresh = row & !*mark;
            if fresh != 0 {
                *mark |= fresh;
                for b in (BitIter { word: fresh }) {
                    queue.push_back(wi * 64 + b);
                    reached += 1;
                }
            }
        }
    }
    reached == g.n()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn graph(n: usize, edges: &[(usize, usize)], p: f64) -> GraphSample {
        GraphSample::from_edges(n, edges, p, 0, "fixture").unwrap()
    }

    pub fn complete(n: usize) -> GraphSample {
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        graph(n, &edges, 1.0)
    }

    pub fn path(n: usize) -> GraphSample {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        graph(n, &edges, 1.0)
    }

    pub fn star(n: usize) -> GraphSample {
        let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
        graph(n, &edges, 1.0)
    }
}
