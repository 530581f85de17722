//! Stochastic block model likelihoods.
//!
//! Everything is computed from the sufficient statistics `n_i` (group sizes)
//! and `e_ij` (edges from group `i` to group `j`), together with the pair
//! capacity `N_ij`, the number of vertex pairs that could carry an edge
//! between the two groups. The capacity depends on the [`Mode`]:
//!
//! | mode                   | `N_ii`          | `N_ij` (`i != j`) |
//! |------------------------|-----------------|-------------------|
//! | directed, loops        | `n_i^2`         | `n_i n_j`         |
//! | directed, no loops     | `n_i (n_i - 1)` | `n_i n_j`         |
//! | undirected, no loops   | `C(n_i, 2)`     | `n_i n_j`         |
//! | undirected, loops      | `C(n_i + 1, 2)` | `n_i n_j`         |
//!
//! Undirected modes only use cells with `i <= j`.
//!
//! All likelihoods are natural logs. Binomial and beta functions go through
//! log-gamma, so large graphs do not overflow.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::math;

/// Which pairs of vertices may carry an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    DirectedWithLoops,
    DirectedNoLoops,
    UndirectedNoLoops,
    UndirectedWithLoops,
}

impl Mode {
    pub fn new(directed: bool, self_loops: bool) -> Self {
        match (directed, self_loops) {
            (true, true) => Mode::DirectedWithLoops,
            (true, false) => Mode::DirectedNoLoops,
            (false, false) => Mode::UndirectedNoLoops,
            (false, true) => Mode::UndirectedWithLoops,
        }
    }

    pub fn of(graph: &Graph) -> Self {
        Self::new(graph.is_directed(), graph.allows_self_loops())
    }

    pub fn is_directed(self) -> bool {
        matches!(self, Mode::DirectedWithLoops | Mode::DirectedNoLoops)
    }

    pub fn allows_self_loops(self) -> bool {
        matches!(self, Mode::DirectedWithLoops | Mode::UndirectedWithLoops)
    }

    /// Pair capacity between groups of sizes `ni` and `nj`; `same` marks a
    /// diagonal cell (then `ni == nj`).
    #[inline]
    pub fn capacity(self, ni: u64, nj: u64, same: bool) -> u64 {
        if !same {
            return ni * nj;
        }
        match self {
            Mode::DirectedWithLoops => ni * ni,
            Mode::DirectedNoLoops => ni * ni.saturating_sub(1),
            Mode::UndirectedNoLoops => ni * ni.saturating_sub(1) / 2,
            Mode::UndirectedWithLoops => ni * (ni + 1) / 2,
        }
    }
}

/// Beta(alpha, beta) prior on every edge probability. The default (1, 1) is
/// the uniform prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    alpha: f64,
    beta: f64,
}

impl PriorSpec {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidConfig("Beta prior parameters must be positive and finite"));
        }
        Ok(PriorSpec { alpha, beta })
    }

    pub const fn uniform() -> Self {
        PriorSpec { alpha: 1.0, beta: 1.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self::uniform()
    }
}

/// A labeling `t: V -> {0..k-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeAssignment(Vec<usize>);

impl TypeAssignment {
    pub fn new(types: Vec<usize>, k: usize) -> Result<Self> {
        check_types(&types, k)?;
        Ok(TypeAssignment(types))
    }

    pub fn set(&mut self, v: usize, ty: usize) {
        self.0[v] = ty;
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for TypeAssignment {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

fn check_types(t: &[usize], k: usize) -> Result<()> {
    match t.iter().enumerate().find(|(_, &ty)| ty >= k) {
        Some((vertex, &ty)) => Err(Error::TypeOutOfRange { vertex, ty, k }),
        None => Ok(()),
    }
}

/// A k x k matrix of edge probabilities, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeProbs {
    k: usize,
    p: Vec<f64>,
}

impl EdgeProbs {
    pub fn new(k: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != k * k {
            return Err(Error::LengthMismatch { expected: k * k, found: p.len() });
        }
        if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidConfig("edge probabilities must lie in [0, 1]"));
        }
        Ok(EdgeProbs { k, p })
    }

    pub fn constant(k: usize, value: f64) -> Result<Self> {
        Self::new(k, vec![value; k * k])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.k + j]
    }
}

/// Sufficient statistics of a graph under a type assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockCounts {
    k: usize,
    mode: Mode,
    sizes: Vec<u64>,
    edges: Vec<u64>,
}

impl BlockCounts {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn size(&self, i: usize) -> u64 {
        self.sizes[i]
    }

    #[inline]
    fn cell(&self, i: usize, j: usize) -> usize {
        if self.mode.is_directed() || i <= j {
            i * self.k + j
        } else {
            j * self.k + i
        }
    }

    /// `e_ij`; undirected modes read the canonical cell `(min, max)`.
    #[inline]
    pub fn edge_count(&self, i: usize, j: usize) -> u64 {
        self.edges[self.cell(i, j)]
    }

    /// `N_ij` for the current group sizes.
    #[inline]
    pub fn capacity(&self, i: usize, j: usize) -> u64 {
        self.mode.capacity(self.sizes[i], self.sizes[j], i == j)
    }

    /// The stored cells: all `(i, j)` when directed, `i <= j` otherwise.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let k = self.k;
        let directed = self.mode.is_directed();
        (0..k).flat_map(move |i| (if directed { 0 } else { i }..k).map(move |j| (i, j)))
    }

    pub fn total_edges(&self) -> u64 {
        self.cells().map(|(i, j)| self.edge_count(i, j)).sum()
    }

    /// `0 <= e_ij <= N_ij` for every stored cell.
    pub fn is_consistent(&self) -> bool {
        self.cells().all(|(i, j)| self.edge_count(i, j) <= self.capacity(i, j))
    }

    /// Reassigns `v` to `new_type`, updating the counts in O(deg(v) + k).
    pub fn apply_move(&mut self, graph: &Graph, t: &mut TypeAssignment, v: usize, new_type: usize) -> Result<()> {
        if v >= graph.n() {
            return Err(Error::VertexOutOfRange { vertex: v, n: graph.n() });
        }
        if new_type >= self.k {
            return Err(Error::TypeOutOfRange { vertex: v, ty: new_type, k: self.k });
        }
        let mut tally = Tally::new(self.k);
        tally.fill(graph, t, v);
        self.remove_vertex(&tally, t[v]);
        self.insert_vertex(&tally, new_type);
        t.set(v, new_type);
        debug_assert!(self.is_consistent());
        Ok(())
    }

    /// Takes a vertex with neighbor tally `tally` out of group `a`.
    pub(crate) fn remove_vertex(&mut self, tally: &Tally, a: usize) {
        self.sizes[a] -= 1;
        self.shift(tally, a, |e, d| *e -= d);
    }

    /// Puts a vertex with neighbor tally `tally` into group `c`.
    pub(crate) fn insert_vertex(&mut self, tally: &Tally, c: usize) {
        self.sizes[c] += 1;
        self.shift(tally, c, |e, d| *e += d);
    }

    #[inline]
    fn shift(&mut self, tally: &Tally, g: usize, op: impl Fn(&mut u64, u64)) {
        let k = self.k;
        if self.mode.is_directed() {
            for j in 0..k {
                op(&mut self.edges[g * k + j], tally.out[j]);
                op(&mut self.edges[j * k + g], tally.inn[j]);
            }
        } else {
            for j in 0..k {
                let c = self.cell(g, j);
                op(&mut self.edges[c], tally.out[j]);
            }
        }
        if tally.self_loop {
            op(&mut self.edges[g * k + g], 1);
        }
    }
}

/// Edges between one vertex and each group, excluding the vertex itself.
/// Undirected graphs only fill `out`.
#[derive(Debug, Clone)]
pub(crate) struct Tally {
    out: Vec<u64>,
    inn: Vec<u64>,
    self_loop: bool,
}

impl Tally {
    pub(crate) fn new(k: usize) -> Self {
        Tally { out: vec![0; k], inn: vec![0; k], self_loop: false }
    }

    #[inline]
    pub(crate) fn fill(&mut self, graph: &Graph, t: &[usize], v: usize) {
        self.out.iter_mut().for_each(|x| *x = 0);
        self.inn.iter_mut().for_each(|x| *x = 0);
        self.self_loop = false;
        for &u in graph.out_neighbors(v) {
            if u == v {
                self.self_loop = true;
            } else {
                self.out[t[u]] += 1;
            }
        }
        if graph.is_directed() {
            for &u in graph.in_neighbors(v) {
                if u != v {
                    self.inn[t[u]] += 1;
                }
            }
        }
    }
}

/// Counts `n_i` and `e_ij` for the assignment `t`.
pub fn block_counts(graph: &Graph, t: &[usize], k: usize) -> Result<BlockCounts> {
    if t.len() != graph.n() {
        return Err(Error::LengthMismatch { expected: graph.n(), found: t.len() });
    }
    check_types(t, k)?;
    let mode = Mode::of(graph);
    let mut counts = BlockCounts { k, mode, sizes: vec![0; k], edges: vec![0; k * k] };
    for &ty in t {
        counts.sizes[ty] += 1;
    }
    for &(u, v) in graph.edges() {
        let c = counts.cell(t[u], t[v]);
        counts.edges[c] += 1;
    }
    debug_assert!(counts.is_consistent());
    Ok(counts)
}

#[inline]
fn xlny(x: u64, y: f64) -> f64 {
    if x == 0 {
        0.0
    } else {
        x as f64 * math::ln(y)
    }
}

/// `ln L(G | t, p) = sum_ij e_ij ln p_ij + (N_ij - e_ij) ln(1 - p_ij)`,
/// with `0 ln 0 = 0`. Impossible configurations give `-inf`.
pub fn log_likelihood_given_p(counts: &BlockCounts, p: &EdgeProbs) -> f64 {
    counts
        .cells()
        .map(|(i, j)| {
            let e = counts.edge_count(i, j);
            let cap = counts.capacity(i, j);
            let pij = p.get(i, j);
            xlny(e, pij) + xlny(cap - e, 1.0 - pij)
        })
        .sum()
}

/// `ln L(G | t)` with every `p_ij` integrated against the prior:
/// `sum_ij ln B(e_ij + alpha, N_ij - e_ij + beta) - ln B(alpha, beta)`.
pub fn log_integrated_likelihood(counts: &BlockCounts, prior: &PriorSpec) -> f64 {
    CellLikelihood::new(*prior).total(counts)
}

/// `p_ij = e_ij / N_ij`, with 0 for empty cells. Undirected matrices are
/// filled symmetrically.
pub fn mle_edge_probs(counts: &BlockCounts) -> EdgeProbs {
    let k = counts.k();
    let mut p = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            let cap = counts.capacity(i, j);
            if cap > 0 {
                p[i * k + j] = counts.edge_count(i, j) as f64 / cap as f64;
            }
        }
    }
    EdgeProbs { k, p }
}

/// Distribution of `t(v)` given every other label, proportional to the
/// integrated likelihood. Normalized with max-subtraction in log space.
pub fn conditional_type_distribution(
    graph: &Graph,
    t: &[usize],
    counts: &BlockCounts,
    v: usize,
    prior: &PriorSpec,
) -> Vec<f64> {
    let cells = CellLikelihood::new(*prior);
    let mut tally = Tally::new(counts.k());
    tally.fill(graph, t, v);
    let mut removed = counts.clone();
    removed.remove_vertex(&tally, t[v]);
    let mut w = vec![0.0; counts.k()];
    cells.insertion_log_weights(&removed, &tally, &mut w);
    math::softmax_in_place(&mut w);
    w
}

/// Per-cell integrated log-likelihood `ln B(e + a, N - e + b) - ln B(a, b)`,
/// optionally backed by log-gamma tables for the sampler's inner loop.
#[derive(Debug, Clone)]
pub struct CellLikelihood {
    prior: PriorSpec,
    ln_beta_prior: f64,
    // ln Γ(x + alpha), ln Γ(x + beta), ln Γ(x + alpha + beta) for x = 0..=max
    lg_a: Vec<f64>,
    lg_b: Vec<f64>,
    lg_ab: Vec<f64>,
}

impl CellLikelihood {
    pub fn new(prior: PriorSpec) -> Self {
        CellLikelihood {
            prior,
            ln_beta_prior: math::ln_beta(prior.alpha, prior.beta),
            lg_a: Vec::new(),
            lg_b: Vec::new(),
            lg_ab: Vec::new(),
        }
    }

    /// Tabulates log-gamma for every capacity up to `max_capacity`.
    pub fn tabulated(prior: PriorSpec, max_capacity: u64) -> Self {
        let mut c = Self::new(prior);
        let range = 0..=max_capacity;
        c.lg_a = range.clone().map(|x| math::lgamma(x as f64 + prior.alpha)).collect();
        c.lg_b = if prior.alpha == prior.beta {
            c.lg_a.clone()
        } else {
            range.clone().map(|x| math::lgamma(x as f64 + prior.beta)).collect()
        };
        c.lg_ab = range.map(|x| math::lgamma(x as f64 + prior.alpha + prior.beta)).collect();
        c
    }

    /// Table large enough for any cell of `graph`.
    pub fn for_graph(prior: PriorSpec, graph: &Graph) -> Self {
        let n = graph.n() as u64;
        Self::tabulated(prior, n * n)
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    #[inline]
    pub fn log_cell(&self, e: u64, cap: u64) -> f64 {
        debug_assert!(e <= cap);
        let (e, cap) = (e as usize, cap as usize);
        if cap < self.lg_ab.len() {
            self.lg_a[e] + self.lg_b[cap - e] - self.lg_ab[cap] - self.ln_beta_prior
        } else {
            let (a, b) = (self.prior.alpha, self.prior.beta);
            math::ln_beta(e as f64 + a, (cap - e) as f64 + b) - self.ln_beta_prior
        }
    }

    pub fn total(&self, counts: &BlockCounts) -> f64 {
        counts.cells().map(|(i, j)| self.log_cell(counts.edge_count(i, j), counts.capacity(i, j))).sum()
    }

    /// For a vertex already removed from `counts`, writes the change in total
    /// log-likelihood from inserting it into each group. Only cells in the
    /// candidate group's row and column change.
    #[inline]
    pub(crate) fn insertion_log_weights(&self, counts: &BlockCounts, tally: &Tally, out: &mut [f64]) {
        let k = counts.k;
        let mode = counts.mode;
        let sizes = &counts.sizes;
        let loop_add = tally.self_loop as u64;
        for (c, w) in out.iter_mut().enumerate() {
            let nc = sizes[c];
            let mut delta = 0.0;
            if mode.is_directed() {
                for j in 0..k {
                    let e_old = counts.edges[c * k + j];
                    if j == c {
                        let e_new = e_old + tally.out[c] + tally.inn[c] + loop_add;
                        delta += self.log_cell(e_new, mode.capacity(nc + 1, nc + 1, true))
                            - self.log_cell(e_old, mode.capacity(nc, nc, true));
                    } else {
                        let nj = sizes[j];
                        delta += self.log_cell(e_old + tally.out[j], (nc + 1) * nj) - self.log_cell(e_old, nc * nj);
                        let e_in = counts.edges[j * k + c];
                        delta += self.log_cell(e_in + tally.inn[j], (nc + 1) * nj) - self.log_cell(e_in, nc * nj);
                    }
                }
            } else {
                for j in 0..k {
                    let e_old = counts.edges[counts.cell(c, j)];
                    if j == c {
                        let e_new = e_old + tally.out[c] + loop_add;
                        delta += self.log_cell(e_new, mode.capacity(nc + 1, nc + 1, true))
                            - self.log_cell(e_old, mode.capacity(nc, nc, true));
                    } else {
                        let nj = sizes[j];
                        delta += self.log_cell(e_old + tally.out[j], (nc + 1) * nj) - self.log_cell(e_old, nc * nj);
                    }
                }
            }
            *w = delta;
        }
    }
}
