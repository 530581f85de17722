//! Constrained single-site heat-bath Gibbs sampling over type assignments.
//!
//! A chain starts from uniformly random types for the unqueried vertices,
//! pins the queried ones, and at every step resamples one uniformly chosen
//! unqueried vertex from its exact conditional distribution. After burn-in,
//! each step contributes:
//!
//! - the full state, to the occupancy counts behind [`MarginalTable`];
//! - the resampled vertex's conditional vector and its entropy, to the
//!   mutual-information sums;
//! - every `agreement_interval` steps, a comparison between the two chains of
//!   a pair, to the average-agreement numerator and denominator.
//!
//! Chain `i` of an ensemble is seeded with `seed::derive(master, CHAIN, i)`,
//! and all real-valued sums are fixed-point, so an ensemble's accumulators are
//! bit-identical however the chains are scheduled or merged.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;

use crate::blockmodel::{block_counts, BlockCounts, CellLikelihood, PriorSpec, Tally, TypeAssignment};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::math::{self, FixedSum};
use crate::seed::{self, Stream};

/// Vertices whose types are known and held fixed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Constraints {
    pinned: BTreeMap<usize, usize>,
}

impl Constraints {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pin(&mut self, v: usize, ty: usize) {
        self.pinned.insert(v, ty);
    }

    pub fn get(&self, v: usize) -> Option<usize> {
        self.pinned.get(&v).copied()
    }

    pub fn is_pinned(&self, v: usize) -> bool {
        self.pinned.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.pinned.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pinned.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pinned.iter().map(|(&v, &t)| (v, t))
    }

    /// Unpinned vertices of an `n`-vertex graph, ascending.
    pub fn free_vertices(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|v| !self.is_pinned(*v)).collect()
    }

    pub fn validate(&self, n: usize, k: usize) -> Result<()> {
        for (v, ty) in self.iter() {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            if ty >= k {
                return Err(Error::TypeOutOfRange { vertex: v, ty, k });
            }
        }
        Ok(())
    }
}

/// Ensemble configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsConfig {
    pub k: usize,
    pub chains: usize,
    pub steps_per_chain: usize,
    /// Leading fraction of each chain discarded before recording.
    pub burnin_fraction: f64,
    pub master_seed: u64,
    pub prior: PriorSpec,
    /// Run chains in lockstep pairs `(2i, 2i + 1)` and accumulate agreement.
    pub track_agreement: bool,
    /// Steps between successive pair comparisons after burn-in.
    pub agreement_interval: usize,
}

impl GibbsConfig {
    /// 100 chains of 2 x 10^4 steps, first half discarded.
    pub fn new(k: usize) -> Self {
        GibbsConfig {
            k,
            chains: 100,
            steps_per_chain: 20_000,
            burnin_fraction: 0.5,
            master_seed: 0,
            prior: PriorSpec::uniform(),
            track_agreement: true,
            agreement_interval: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1"));
        }
        if self.chains == 0 {
            return Err(Error::InvalidConfig("at least one chain is required"));
        }
        if self.track_agreement && (self.chains < 2 || !self.chains.is_multiple_of(2)) {
            return Err(Error::InvalidConfig("agreement tracking needs an even number of chains"));
        }
        if self.steps_per_chain == 0 {
            return Err(Error::InvalidConfig("steps_per_chain must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.burnin_fraction) {
            return Err(Error::InvalidConfig("burnin_fraction must lie in [0, 1)"));
        }
        if self.agreement_interval == 0 {
            return Err(Error::InvalidConfig("agreement_interval must be at least 1"));
        }
        Ok(())
    }

    pub fn burnin_steps(&self) -> usize {
        (self.steps_per_chain as f64 * self.burnin_fraction) as usize
    }

    fn chain_params(&self, chain: usize) -> ChainParams {
        ChainParams {
            k: self.k,
            steps: self.steps_per_chain,
            burnin: self.burnin_steps(),
            seed: seed::derive(self.master_seed, seed::CHAIN, chain as u64),
            prior: self.prior,
        }
    }
}

/// The part of [`GibbsConfig`] a single chain needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    pub k: usize,
    pub steps: usize,
    pub burnin: usize,
    pub seed: u64,
    pub prior: PriorSpec,
}

/// Sufficient statistics gathered from post-burn-in samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleAccumulators {
    n: usize,
    k: usize,
    recorded_states: u64,
    marginal_counts: Vec<u64>,
    cond_sum: Vec<FixedSum>,
    cond_entropy_sum: Vec<FixedSum>,
    visit_count: Vec<u64>,
    aa_numerator: Vec<u64>,
    aa_denominator: Vec<u64>,
    pairs: u64,
}

impl SampleAccumulators {
    pub fn new(n: usize, k: usize) -> Self {
        SampleAccumulators {
            n,
            k,
            recorded_states: 0,
            marginal_counts: vec![0; n * k],
            cond_sum: vec![FixedSum::default(); n * k],
            cond_entropy_sum: vec![FixedSum::default(); n],
            visit_count: vec![0; n],
            aa_numerator: vec![0; n],
            aa_denominator: vec![0; n],
            pairs: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Adds `other` into `self`. Associative and commutative, exactly.
    pub fn merge(&mut self, other: &SampleAccumulators) -> Result<()> {
        if (self.n, self.k) != (other.n, other.k) {
            return Err(Error::ShapeMismatch);
        }
        self.recorded_states += other.recorded_states;
        self.pairs += other.pairs;
        for (a, b) in self.marginal_counts.iter_mut().zip(&other.marginal_counts) {
            *a += b;
        }
        for (a, b) in self.cond_sum.iter_mut().zip(&other.cond_sum) {
            a.merge(*b);
        }
        for (a, b) in self.cond_entropy_sum.iter_mut().zip(&other.cond_entropy_sum) {
            a.merge(*b);
        }
        for (a, b) in self.visit_count.iter_mut().zip(&other.visit_count) {
            *a += b;
        }
        for (a, b) in self.aa_numerator.iter_mut().zip(&other.aa_numerator) {
            *a += b;
        }
        for (a, b) in self.aa_denominator.iter_mut().zip(&other.aa_denominator) {
            *a += b;
        }
        Ok(())
    }

    /// Counts one full state toward the marginals.
    pub fn record_state(&mut self, t: &[usize]) {
        for (v, &ty) in t.iter().enumerate() {
            self.marginal_counts[v * self.k + ty] += 1;
        }
        self.recorded_states += 1;
    }

    /// Records one visit of `v` with conditional distribution `p`.
    pub fn record_conditional(&mut self, v: usize, p: &[f64]) {
        let row = &mut self.cond_sum[v * self.k..(v + 1) * self.k];
        for (s, &x) in row.iter_mut().zip(p) {
            s.add(x);
        }
        self.cond_entropy_sum[v].add(math::entropy(p));
        self.visit_count[v] += 1;
    }

    /// Records one pair of independent samples: every vertex on which they
    /// agree gains the agreement size in its numerator and 1 in its denominator.
    pub fn record_pair(&mut self, t1: &[usize], t2: &[usize]) {
        let agreement = t1.iter().zip(t2).filter(|(a, b)| a == b).count() as u64;
        for (v, (a, b)) in t1.iter().zip(t2).enumerate() {
            if a == b {
                self.aa_numerator[v] += agreement;
                self.aa_denominator[v] += 1;
            }
        }
        self.pairs += 1;
    }

    pub fn recorded_states(&self) -> u64 {
        self.recorded_states
    }

    pub fn marginal_count(&self, v: usize, ty: usize) -> u64 {
        self.marginal_counts[v * self.k + ty]
    }

    pub fn visits(&self, v: usize) -> u64 {
        self.visit_count[v]
    }

    /// Sum of recorded conditional probabilities of `ty` at `v`.
    pub fn conditional_sum(&self, v: usize, ty: usize) -> f64 {
        self.cond_sum[v * self.k + ty].value()
    }

    pub fn conditional_entropy_sum(&self, v: usize) -> f64 {
        self.cond_entropy_sum[v].value()
    }

    pub fn agreement_numerator(&self, v: usize) -> u64 {
        self.aa_numerator[v]
    }

    pub fn agreement_denominator(&self, v: usize) -> u64 {
        self.aa_denominator[v]
    }

    pub fn pairs(&self) -> u64 {
        self.pairs
    }

    /// Shifts every agreement count as if `extra` more vertices agreed in
    /// every pair; used to check that query selection ignores such offsets.
    pub fn offset_agreement(&mut self, extra: u64) {
        for (num, &den) in self.aa_numerator.iter_mut().zip(&self.aa_denominator) {
            *num += extra * den;
        }
    }
}

/// Per-vertex probability vectors over types.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalTable {
    n: usize,
    k: usize,
    probs: Vec<f64>,
}

impl MarginalTable {
    pub fn new(n: usize, k: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != n * k {
            return Err(Error::LengthMismatch { expected: n * k, found: probs.len() });
        }
        Ok(MarginalTable { n, k, probs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.probs[v * self.k..(v + 1) * self.k]
    }

    pub fn prob(&self, v: usize, ty: usize) -> f64 {
        self.probs[v * self.k + ty]
    }

    /// Largest per-vertex total-variation distance to `other`.
    pub fn max_tv_distance(&self, other: &MarginalTable) -> f64 {
        (0..self.n)
            .map(|v| {
                let d: f64 = self.row(v).iter().zip(other.row(v)).map(|(a, b)| (a - b).abs()).sum();
                d / 2.0
            })
            .fold(0.0, f64::max)
    }
}

/// Normalized occupancy frequencies. Pinned vertices come out as point masses.
pub fn marginals(acc: &SampleAccumulators) -> Result<MarginalTable> {
    if acc.recorded_states == 0 {
        return Err(Error::EmptyAccumulator);
    }
    let mut probs = vec![0.0; acc.n * acc.k];
    for v in 0..acc.n {
        let row = &acc.marginal_counts[v * acc.k..(v + 1) * acc.k];
        let total: u64 = row.iter().sum();
        for (p, &c) in probs[v * acc.k..(v + 1) * acc.k].iter_mut().zip(row) {
            *p = c as f64 / total as f64;
        }
    }
    MarginalTable::new(acc.n, acc.k, probs)
}

struct Chain<'a> {
    graph: &'a Graph,
    cells: &'a CellLikelihood,
    free: &'a [usize],
    t: Vec<usize>,
    counts: BlockCounts,
    rng: Stream,
    tally: Tally,
    probs: Vec<f64>,
    // first step whose post-state holds the vertex's current type
    held_since: Vec<usize>,
    burnin: usize,
    step: usize,
}

impl<'a> Chain<'a> {
    fn new(
        graph: &'a Graph,
        cells: &'a CellLikelihood,
        constraints: &Constraints,
        free: &'a [usize],
        params: &ChainParams,
    ) -> Self {
        let k = params.k;
        let mut rng = seed::stream(params.seed);
        let t: Vec<usize> =
            (0..graph.n()).map(|v| constraints.get(v).unwrap_or_else(|| rng.random_range(0..k))).collect();
        let counts = block_counts(graph, &t, k).expect("initial state is in range");
        Chain {
            graph,
            cells,
            free,
            t,
            counts,
            rng,
            tally: Tally::new(k),
            probs: vec![0.0; k],
            held_since: vec![0; graph.n()],
            burnin: params.burnin,
            step: 0,
        }
    }

    #[inline]
    fn step(&mut self, acc: &mut SampleAccumulators) {
        let v = self.free[self.rng.random_range(0..self.free.len())];
        let old = self.t[v];
        self.tally.fill(self.graph, &self.t, v);
        self.counts.remove_vertex(&self.tally, old);
        self.cells.insertion_log_weights(&self.counts, &self.tally, &mut self.probs);
        math::softmax_in_place(&mut self.probs);
        let new = sample_index(&self.probs, self.rng.random::<f64>());
        self.counts.insert_vertex(&self.tally, new);
        debug_assert!(self.counts.is_consistent());

        let s = self.step;
        if new != old {
            let start = self.held_since[v].max(self.burnin);
            if s > start {
                acc.marginal_counts[v * acc.k + old] += (s - start) as u64;
            }
            self.held_since[v] = s;
            self.t[v] = new;
        }
        if s >= self.burnin {
            acc.record_conditional(v, &self.probs);
        }
        self.step += 1;
    }

    /// Flushes occupancy still held at the end of the chain.
    fn finish(&self, acc: &mut SampleAccumulators) {
        let end = self.step;
        for (v, &ty) in self.t.iter().enumerate() {
            let start = self.held_since[v].max(self.burnin);
            if end > start {
                acc.marginal_counts[v * acc.k + ty] += (end - start) as u64;
            }
        }
        acc.recorded_states += end.saturating_sub(self.burnin) as u64;
    }
}

#[inline]
fn sample_index(p: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &x) in p.iter().enumerate() {
        if x > 0.0 {
            acc += x;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

fn check_sampleable(graph: &Graph, constraints: &Constraints, k: usize) -> Result<Vec<usize>> {
    constraints.validate(graph.n(), k)?;
    let free = constraints.free_vertices(graph.n());
    if free.is_empty() {
        return Err(Error::NothingToSample);
    }
    Ok(free)
}

/// Runs one chain and adds its samples to `acc`.
pub fn run_chain(
    graph: &Graph,
    constraints: &Constraints,
    params: &ChainParams,
    acc: &mut SampleAccumulators,
) -> Result<()> {
    if params.k == 0 || params.burnin > params.steps {
        return Err(Error::InvalidConfig("chain needs k >= 1 and burnin <= steps"));
    }
    if (acc.n, acc.k) != (graph.n(), params.k) {
        return Err(Error::ShapeMismatch);
    }
    let free = check_sampleable(graph, constraints, params.k)?;
    let cells = CellLikelihood::for_graph(params.prior, graph);
    let mut chain = Chain::new(graph, &cells, constraints, &free, params);
    for _ in 0..params.steps {
        chain.step(acc);
    }
    chain.finish(acc);
    Ok(())
}

/// Runs a single chain, or a lockstep pair when `pair` is set.
fn run_unit(
    graph: &Graph,
    cells: &CellLikelihood,
    constraints: &Constraints,
    free: &[usize],
    config: &GibbsConfig,
    first: usize,
    pair: bool,
) -> SampleAccumulators {
    let mut acc = SampleAccumulators::new(graph.n(), config.k);
    let p1 = config.chain_params(first);
    let mut c1 = Chain::new(graph, cells, constraints, free, &p1);
    if !pair {
        for _ in 0..p1.steps {
            c1.step(&mut acc);
        }
        c1.finish(&mut acc);
        return acc;
    }
    let p2 = config.chain_params(first + 1);
    let mut c2 = Chain::new(graph, cells, constraints, free, &p2);
    let burnin = p1.burnin;
    for s in 0..p1.steps {
        c1.step(&mut acc);
        c2.step(&mut acc);
        if s >= burnin && (s - burnin).is_multiple_of(config.agreement_interval) {
            acc.record_pair(&c1.t, &c2.t);
        }
    }
    c1.finish(&mut acc);
    c2.finish(&mut acc);
    acc
}

/// Runs every chain of the ensemble and merges their accumulators.
pub fn run_ensemble(graph: &Graph, constraints: &Constraints, config: &GibbsConfig) -> Result<SampleAccumulators> {
    run_ensemble_range(graph, constraints, config, 0..config.chains)
}

/// Runs chains `range` of the ensemble described by `config`. Splitting an
/// ensemble into ranges and merging the results reproduces the whole.
pub fn run_ensemble_range(
    graph: &Graph,
    constraints: &Constraints,
    config: &GibbsConfig,
    range: Range<usize>,
) -> Result<SampleAccumulators> {
    config.validate()?;
    if range.end > config.chains {
        return Err(Error::InvalidConfig("chain range exceeds the configured chain count"));
    }
    if config.track_agreement && (!range.start.is_multiple_of(2) || !range.len().is_multiple_of(2)) {
        return Err(Error::InvalidConfig("agreement tracking needs whole chain pairs"));
    }
    let free = check_sampleable(graph, constraints, config.k)?;
    let cells = CellLikelihood::for_graph(config.prior, graph);
    let width = if config.track_agreement { 2 } else { 1 };
    let firsts: Vec<usize> = range.step_by(width).collect();
    let pair = config.track_agreement;
    let run = |&first: &usize| run_unit(graph, &cells, constraints, &free, config, first, pair);

    #[cfg(feature = "parallel")]
    let parts: Vec<SampleAccumulators> = {
        use rayon::prelude::*;
        firsts.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<SampleAccumulators> = firsts.iter().map(run).collect();

    let mut acc = SampleAccumulators::new(graph.n(), config.k);
    for part in &parts {
        acc.merge(part)?;
    }
    Ok(acc)
}

/// Largest state space [`exact_posterior`] will enumerate.
pub const MAX_ENUMERATED_STATES: u128 = 10_000_000;

/// An explicit distribution over full assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitDistribution {
    n: usize,
    k: usize,
    states: Vec<Vec<usize>>,
    probs: Vec<f64>,
}

impl ExplicitDistribution {
    /// Builds a distribution from non-negative weights, normalizing them.
    pub fn from_weights(n: usize, k: usize, states: Vec<Vec<usize>>, weights: Vec<f64>) -> Result<Self> {
        if states.len() != weights.len() {
            return Err(Error::LengthMismatch { expected: states.len(), found: weights.len() });
        }
        for s in &states {
            if s.len() != n {
                return Err(Error::LengthMismatch { expected: n, found: s.len() });
            }
            TypeAssignment::new(s.clone(), k)?;
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::Undefined("weights must be non-negative with a positive finite sum"));
        }
        let probs = weights.into_iter().map(|w| w / total).collect();
        Ok(ExplicitDistribution { n, k, states, probs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn states(&self) -> &[Vec<usize>] {
        &self.states
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.states.iter().map(Vec::as_slice).zip(self.probs.iter().copied())
    }

    pub fn marginals(&self) -> MarginalTable {
        let mut probs = vec![0.0; self.n * self.k];
        for (t, p) in self.iter() {
            for (v, &ty) in t.iter().enumerate() {
                probs[v * self.k + ty] += p;
            }
        }
        MarginalTable { n: self.n, k: self.k, probs }
    }
}

/// Enumerates every assignment consistent with `constraints`, weighted by
/// the integrated likelihood. Refuses more than [`MAX_ENUMERATED_STATES`].
pub fn exact_posterior(
    graph: &Graph,
    constraints: &Constraints,
    k: usize,
    prior: &PriorSpec,
) -> Result<ExplicitDistribution> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1"));
    }
    constraints.validate(graph.n(), k)?;
    let free = constraints.free_vertices(graph.n());
    let size = (0..free.len()).try_fold(1u128, |acc, _| acc.checked_mul(k as u128));
    let size = size.unwrap_or(u128::MAX);
    if size > MAX_ENUMERATED_STATES {
        return Err(Error::EnumerationTooLarge { size, limit: MAX_ENUMERATED_STATES });
    }

    let cells = CellLikelihood::new(*prior);
    let init: Vec<usize> = (0..graph.n()).map(|v| constraints.get(v).unwrap_or(0)).collect();
    let mut t = TypeAssignment::new(init, k)?;
    let mut counts = block_counts(graph, &t, k)?;
    let mut states = Vec::with_capacity(size as usize);
    let mut logw = Vec::with_capacity(size as usize);
    loop {
        states.push(t.to_vec());
        logw.push(cells.total(&counts));
        // odometer over the free vertices
        let mut i = 0;
        loop {
            if i == free.len() {
                math::softmax_in_place(&mut logw);
                return Ok(ExplicitDistribution { n: graph.n(), k, states, probs: logw });
            }
            let v = free[i];
            let next = t[v] + 1;
            if next < k {
                counts.apply_move(graph, &mut t, v, next)?;
                break;
            }
            counts.apply_move(graph, &mut t, v, 0)?;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockmodel::{conditional_type_distribution, Mode};
    use crate::synth;

    fn small_config(k: usize, chains: usize, steps: usize, seed: u64) -> GibbsConfig {
        GibbsConfig { chains, steps_per_chain: steps, master_seed: seed, ..GibbsConfig::new(k) }
    }

    #[test]
    fn config_validation() {
        let mut c = GibbsConfig::new(2);
        assert!(c.validate().is_ok());
        c.chains = 3;
        assert!(c.validate().is_err());
        c.track_agreement = false;
        assert!(c.validate().is_ok());
        c.burnin_fraction = 1.0;
        assert!(c.validate().is_err());
        assert_eq!(GibbsConfig::new(2).burnin_steps(), 10_000);
    }

    #[test]
    fn single_type_chain_is_constant() {
        let g = synth::random_graph(6, Mode::DirectedNoLoops, 0.5, 1);
        let acc = run_ensemble(&g, &Constraints::new(), &small_config(1, 2, 200, 0)).unwrap();
        let m = marginals(&acc).unwrap();
        for v in 0..6 {
            assert_eq!(m.row(v), &[1.0]);
        }
    }

    #[test]
    fn nothing_to_sample_when_all_pinned() {
        let g = synth::random_graph(2, Mode::DirectedNoLoops, 0.5, 1);
        let mut c = Constraints::new();
        c.pin(0, 0);
        c.pin(1, 1);
        assert_eq!(run_ensemble(&g, &c, &small_config(2, 2, 10, 0)), Err(Error::NothingToSample));
    }

    #[test]
    fn empty_accumulator_has_no_marginals() {
        assert_eq!(marginals(&SampleAccumulators::new(3, 2)), Err(Error::EmptyAccumulator));
    }

    #[test]
    fn lazy_occupancy_equals_per_step_recount() {
        let g = synth::random_graph(7, Mode::DirectedNoLoops, 0.4, 5);
        let mut constraints = Constraints::new();
        constraints.pin(2, 1);
        let free = constraints.free_vertices(7);
        let params = ChainParams { k: 3, steps: 3000, burnin: 1000, seed: 77, prior: PriorSpec::uniform() };
        let cells = CellLikelihood::for_graph(params.prior, &g);
        let mut lazy = SampleAccumulators::new(7, 3);
        let mut naive = SampleAccumulators::new(7, 3);
        let mut chain = Chain::new(&g, &cells, &constraints, &free, &params);
        for s in 0..params.steps {
            chain.step(&mut lazy);
            assert_eq!(chain.t[2], 1, "pinned vertex moved");
            if s >= params.burnin {
                naive.record_state(&chain.t);
            }
        }
        chain.finish(&mut lazy);
        assert_eq!(lazy.marginal_counts, naive.marginal_counts);
        assert_eq!(lazy.recorded_states, naive.recorded_states);
        let m = marginals(&lazy).unwrap();
        assert_eq!(m.row(2), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn ensemble_is_deterministic_and_splits_merge() {
        let g = synth::random_graph(8, Mode::UndirectedNoLoops, 0.4, 2);
        let cfg = small_config(2, 8, 500, 42);
        let full = run_ensemble(&g, &Constraints::new(), &cfg).unwrap();
        assert_eq!(full, run_ensemble(&g, &Constraints::new(), &cfg).unwrap());
        let mut a = run_ensemble_range(&g, &Constraints::new(), &cfg, 0..4).unwrap();
        let b = run_ensemble_range(&g, &Constraints::new(), &cfg, 4..8).unwrap();
        let mut b_then_a = b.clone();
        b_then_a.merge(&a).unwrap();
        a.merge(&b).unwrap();
        assert_eq!(a, full);
        assert_eq!(b_then_a, full);
        assert!(run_ensemble_range(&g, &Constraints::new(), &cfg, 1..3).is_err());
    }

    #[test]
    fn pairing_does_not_change_marginals() {
        let g = synth::random_graph(6, Mode::DirectedNoLoops, 0.4, 8);
        let paired = small_config(2, 4, 400, 9);
        let single = GibbsConfig { track_agreement: false, ..paired.clone() };
        let a = run_ensemble(&g, &Constraints::new(), &paired).unwrap();
        let b = run_ensemble(&g, &Constraints::new(), &single).unwrap();
        assert_eq!(a.marginal_counts, b.marginal_counts);
        assert_eq!(a.cond_sum, b.cond_sum);
        assert!(a.pairs() > 0 && b.pairs() == 0);
    }

    #[test]
    fn exact_posterior_single_isolated_vertex_is_uniform() {
        let g = Graph::from_edges(1, false, false, []).unwrap();
        let d = exact_posterior(&g, &Constraints::new(), 2, &PriorSpec::uniform()).unwrap();
        assert_eq!(d.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn exact_posterior_two_vertex_digon() {
        let g = Graph::from_edges(2, true, false, [(0, 1), (1, 0)]).unwrap();
        let d = exact_posterior(&g, &Constraints::new(), 2, &PriorSpec::uniform()).unwrap();
        // Same type: one cell with N = 2, e = 2 -> 1/3.
        // Different types: two cells with N = 1, e = 1 -> (1/2)^2 = 1/4.
        let z = 2.0 / 3.0 + 2.0 / 4.0;
        for (t, p) in d.iter() {
            let expected = if t[0] == t[1] { (1.0 / 3.0) / z } else { 0.25 / z };
            assert!((p - expected).abs() < 1e-12, "{t:?}: {p}");
        }
    }

    #[test]
    fn exact_posterior_respects_constraints_and_bound() {
        let g = synth::random_graph(8, Mode::DirectedNoLoops, 0.3, 4);
        let mut c = Constraints::new();
        c.pin(3, 1);
        let d = exact_posterior(&g, &c, 2, &PriorSpec::uniform()).unwrap();
        assert_eq!(d.states().len(), 128);
        assert!(d.iter().all(|(t, _)| t[3] == 1));
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let big = synth::random_graph(24, Mode::DirectedNoLoops, 0.1, 4);
        assert!(matches!(
            exact_posterior(&big, &Constraints::new(), 2, &PriorSpec::uniform()),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn heat_bath_conditional_is_the_posterior_fiber() {
        for s in 0..6u64 {
            let g = synth::random_graph(6, Mode::DirectedNoLoops, 0.35, s);
            let k = 3;
            let d = exact_posterior(&g, &Constraints::new(), k, &PriorSpec::uniform()).unwrap();
            let t = &d.states()[(s as usize * 97) % d.states().len()];
            let v = s as usize % 6;
            let fiber: Vec<f64> = (0..k)
                .map(|c| {
                    let mut u = t.clone();
                    u[v] = c;
                    d.iter().find(|(x, _)| *x == u.as_slice()).unwrap().1
                })
                .collect();
            let z: f64 = fiber.iter().sum();
            let counts = block_counts(&g, t, k).unwrap();
            let cond = conditional_type_distribution(&g, t, &counts, v, &PriorSpec::uniform());
            for (a, b) in cond.iter().zip(&fiber) {
                assert!((a - b / z).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lone_free_vertex_matches_its_conditional() {
        let g = synth::random_graph(6, Mode::DirectedNoLoops, 0.4, 21);
        let pinned = [0, 1, 1, 0, 1];
        let mut c = Constraints::new();
        for (v, &ty) in pinned.iter().enumerate() {
            c.pin(v, ty);
        }
        let cfg = small_config(2, 2, 100_000, 3);
        let m = marginals(&run_ensemble(&g, &c, &cfg).unwrap()).unwrap();
        let mut t = pinned.to_vec();
        t.push(0);
        let counts = block_counts(&g, &t, 2).unwrap();
        let cond = conditional_type_distribution(&g, &t, &counts, 5, &PriorSpec::uniform());
        assert!((m.prob(5, 0) - cond[0]).abs() < 0.01, "{:?} vs {cond:?}", m.row(5));
    }

    #[test]
    fn marginal_rows_sum_to_one() {
        let g = synth::random_graph(8, Mode::UndirectedNoLoops, 0.3, 13);
        let m = marginals(&run_ensemble(&g, &Constraints::new(), &small_config(3, 4, 2000, 1)).unwrap()).unwrap();
        for v in 0..8 {
            assert!((m.row(v).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
