//! Query criteria and selection.
//!
//! Mutual information of a vertex with the rest of the network is estimated
//! as the entropy of its average conditional distribution minus the average
//! entropy of those conditionals. Average agreement is the ratio of the
//! paired-chain numerator and denominator. The exact variants enumerate an
//! [`ExplicitDistribution`] and serve as test oracles.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{betweenness_scores, degree_scores, Graph};
use crate::math;
use crate::sampler::{Constraints, ExplicitDistribution, SampleAccumulators};

/// Query selection method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Largest mutual information with the other vertices.
    Mi,
    /// Largest average agreement between independent samples.
    Aa,
    Degree,
    Betweenness,
    Random,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Mi, Method::Aa, Method::Degree, Method::Betweenness, Method::Random];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mi => "mi",
            Method::Aa => "aa",
            Method::Degree => "degree",
            Method::Betweenness => "betweenness",
            Method::Random => "random",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidConfig("method must be one of mi, aa, degree, betweenness, random"))
    }
}

/// Per-vertex scores; vertices that cannot be queried hold `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionScores {
    pub method: Method,
    pub scores: Vec<f64>,
}

/// Estimated mutual information for every unpinned vertex, clamped at 0.
pub fn mi_scores(acc: &SampleAccumulators, constraints: &Constraints) -> Result<CriterionScores> {
    let k = acc.k();
    let mut scores = vec![f64::NEG_INFINITY; acc.n()];
    let mut mean = vec![0.0; k];
    for (v, score) in scores.iter_mut().enumerate() {
        if constraints.is_pinned(v) {
            continue;
        }
        let visits = acc.visits(v);
        if visits == 0 {
            return Err(Error::Unvisited { vertex: v });
        }
        for (ty, m) in mean.iter_mut().enumerate() {
            *m = acc.conditional_sum(v, ty);
        }
        let total: f64 = mean.iter().sum();
        mean.iter_mut().for_each(|m| *m /= total);
        let mi = math::entropy(&mean) - acc.conditional_entropy_sum(v) / visits as f64;
        *score = mi.max(0.0);
    }
    Ok(CriterionScores { method: Method::Mi, scores })
}

/// Estimated average agreement for every unpinned vertex.
pub fn aa_scores(acc: &SampleAccumulators, constraints: &Constraints) -> Result<CriterionScores> {
    let mut scores = vec![f64::NEG_INFINITY; acc.n()];
    for (v, score) in scores.iter_mut().enumerate() {
        if constraints.is_pinned(v) {
            continue;
        }
        let den = acc.agreement_denominator(v);
        if den == 0 {
            return Err(Error::NoAgreement { vertex: v });
        }
        *score = acc.agreement_numerator(v) as f64 / den as f64;
    }
    Ok(CriterionScores { method: Method::Aa, scores })
}

/// Degree, betweenness or random scores over the unqueried subgraph.
///
/// # Panics
///
/// For [`Method::Mi`] and [`Method::Aa`], which need samples.
pub fn heuristic_scores(graph: &Graph, method: Method, unqueried: &[bool]) -> CriterionScores {
    let scores = match method {
        Method::Degree => degree_scores(graph, unqueried),
        Method::Betweenness => betweenness_scores(graph, unqueried),
        Method::Random => unqueried.iter().map(|&u| if u { 0.0 } else { f64::NEG_INFINITY }).collect(),
        Method::Mi | Method::Aa => panic!("{method} scores come from samples, not topology"),
    };
    CriterionScores { method, scores }
}

/// Picks the unqueried vertex with the highest score, ties to the smallest
/// index. The random method ignores the scores and draws from `rng`.
/// Returns `None` when nothing is unqueried.
pub fn select_query<R: Rng + ?Sized>(scores: &CriterionScores, unqueried: &[bool], rng: &mut R) -> Option<usize> {
    if scores.method == Method::Random {
        let candidates: Vec<usize> = (0..unqueried.len()).filter(|&v| unqueried[v]).collect();
        if candidates.is_empty() {
            return None;
        }
        return Some(candidates[rng.random_range(0..candidates.len())]);
    }
    let mut best: Option<(usize, f64)> = None;
    for (v, &s) in scores.scores.iter().enumerate() {
        if !unqueried[v] {
            continue;
        }
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((v, s)),
        }
    }
    best.map(|(v, _)| v)
}

/// Largest number of state pairs [`exact_aa`] will enumerate.
pub const MAX_ENUMERATED_PAIRS: u128 = 10_000_000;

fn check_vertex(dist: &ExplicitDistribution, v: usize) -> Result<()> {
    if v >= dist.n() {
        return Err(Error::VertexOutOfRange { vertex: v, n: dist.n() });
    }
    Ok(())
}

fn without(t: &[usize], v: usize) -> Vec<usize> {
    t.iter().enumerate().filter(|&(u, _)| u != v).map(|(_, &x)| x).collect()
}

/// Exact `I(v; G \ v) = H(v) - H(v | G \ v)`.
pub fn exact_mi(dist: &ExplicitDistribution, v: usize) -> Result<f64> {
    check_vertex(dist, v)?;
    let k = dist.k();
    let mut by_rest: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
    let mut marginal = vec![0.0; k];
    for (t, p) in dist.iter() {
        by_rest.entry(without(t, v)).or_insert_with(|| vec![0.0; k])[t[v]] += p;
        marginal[t[v]] += p;
    }
    let mut cond_entropy = 0.0;
    for joint in by_rest.values() {
        let p_rest: f64 = joint.iter().sum();
        if p_rest > 0.0 {
            let cond: Vec<f64> = joint.iter().map(|x| x / p_rest).collect();
            cond_entropy += p_rest * math::entropy(&cond);
        }
    }
    Ok(math::entropy(&marginal) - cond_entropy)
}

/// Exact `I(v; G \ v) = H(G \ v) - H(G \ v | v)`, the other decomposition.
pub fn exact_mi_joint(dist: &ExplicitDistribution, v: usize) -> Result<f64> {
    check_vertex(dist, v)?;
    let k = dist.k();
    let mut rest: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut given: Vec<BTreeMap<Vec<usize>, f64>> = vec![BTreeMap::new(); k];
    let mut marginal = vec![0.0; k];
    for (t, p) in dist.iter() {
        let key = without(t, v);
        *rest.entry(key.clone()).or_insert(0.0) += p;
        *given[t[v]].entry(key).or_insert(0.0) += p;
        marginal[t[v]] += p;
    }
    let h_rest = math::entropy(&rest.values().copied().collect::<Vec<_>>());
    let mut h_rest_given_v = 0.0;
    for (a, table) in given.iter().enumerate() {
        if marginal[a] > 0.0 {
            let cond: Vec<f64> = table.values().map(|p| p / marginal[a]).collect();
            h_rest_given_v += marginal[a] * math::entropy(&cond);
        }
    }
    Ok(h_rest - h_rest_given_v)
}

/// Exact average agreement by double enumeration over state pairs that
/// agree at `v`.
pub fn exact_aa(dist: &ExplicitDistribution, v: usize) -> Result<f64> {
    check_vertex(dist, v)?;
    let s = dist.states().len() as u128;
    if s * s > MAX_ENUMERATED_PAIRS {
        return Err(Error::EnumerationTooLarge { size: s * s, limit: MAX_ENUMERATED_PAIRS });
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (t1, p1) in dist.iter() {
        for (t2, p2) in dist.iter() {
            if t1[v] != t2[v] {
                continue;
            }
            let agreement = t1.iter().zip(t2).filter(|(a, b)| a == b).count();
            num += p1 * p2 * agreement as f64;
            den += p1 * p2;
        }
    }
    if den == 0.0 {
        return Err(Error::NoAgreement { vertex: v });
    }
    Ok(num / den)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::seed;
    use proptest::prelude::*;
    use rand::Rng;

    /// Six vertices, two types: vertices 0-2 share one uniformly random type,
    /// vertices 3-5 are independent fair coins. 16 equiprobable states.
    pub(crate) fn toy_distribution() -> ExplicitDistribution {
        let mut states = Vec::new();
        for code in 0..16usize {
            let block = code & 1;
            states.push(vec![block, block, block, (code >> 1) & 1, (code >> 2) & 1, (code >> 3) & 1]);
        }
        ExplicitDistribution::from_weights(6, 2, states, vec![1.0; 16]).unwrap()
    }

    fn point_mass(t: Vec<usize>, k: usize) -> ExplicitDistribution {
        let n = t.len();
        ExplicitDistribution::from_weights(n, k, vec![t], vec![1.0]).unwrap()
    }

    fn scores(method: Method, s: Vec<f64>) -> CriterionScores {
        CriterionScores { method, scores: s }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("pagerank".parse::<Method>().is_err());
    }

    #[test]
    fn toy_exact_aa_values() {
        let d = toy_distribution();
        assert_eq!(exact_aa(&d, 0).unwrap(), 4.5);
        assert_eq!(exact_aa(&d, 5).unwrap(), 3.5);
    }

    #[test]
    fn toy_exact_mi_values() {
        let d = toy_distribution();
        for v in 0..3 {
            assert!((exact_mi(&d, v).unwrap() - libm::log(2.0)).abs() < 1e-10);
        }
        for v in 3..6 {
            assert!(exact_mi(&d, v).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn toy_mi_scores_from_injected_conditionals() {
        // Given the rest, vertex 0 is determined by vertices 1 and 2, while
        // vertex 5 stays a fair coin.
        let d = toy_distribution();
        let mut acc = SampleAccumulators::new(6, 2);
        for (t, _) in d.iter() {
            let mut det = [0.0; 2];
            det[t[1]] = 1.0;
            acc.record_conditional(0, &det);
            acc.record_conditional(5, &[0.5, 0.5]);
            for v in 1..5 {
                acc.record_conditional(v, &[0.5, 0.5]);
            }
        }
        let s = mi_scores(&acc, &Constraints::new()).unwrap();
        assert!((s.scores[0] - libm::log(2.0)).abs() < 1e-12);
        assert_eq!(s.scores[5], 0.0);
    }

    #[test]
    fn constant_conditional_has_zero_mi() {
        let mut acc = SampleAccumulators::new(1, 3);
        for _ in 0..10 {
            acc.record_conditional(0, &[0.2, 0.3, 0.5]);
        }
        assert_eq!(mi_scores(&acc, &Constraints::new()).unwrap().scores[0], 0.0);
    }

    #[test]
    fn unvisited_and_unagreed_vertices_are_errors() {
        let acc = SampleAccumulators::new(2, 2);
        assert_eq!(mi_scores(&acc, &Constraints::new()), Err(Error::Unvisited { vertex: 0 }));
        assert_eq!(aa_scores(&acc, &Constraints::new()), Err(Error::NoAgreement { vertex: 0 }));
        let mut c = Constraints::new();
        c.pin(0, 1);
        assert_eq!(mi_scores(&acc, &c), Err(Error::Unvisited { vertex: 1 }));
    }

    #[test]
    fn toy_aa_from_sampled_pairs() {
        let d = toy_distribution();
        let mut rng = seed::stream(5);
        let mut acc = SampleAccumulators::new(6, 2);
        for _ in 0..20_000 {
            let a = &d.states()[rng.random_range(0..16)];
            let b = &d.states()[rng.random_range(0..16)];
            acc.record_pair(a, b);
        }
        let s = aa_scores(&acc, &Constraints::new()).unwrap();
        assert!((s.scores[0] - 4.5).abs() < 0.05, "{:?}", s.scores);
        assert!((s.scores[5] - 3.5).abs() < 0.05, "{:?}", s.scores);
        let mut rng = seed::stream(0);
        assert_eq!(select_query(&s, &[true; 6], &mut rng), Some(0));
    }

    #[test]
    fn exact_aa_selects_the_locked_block() {
        let d = toy_distribution();
        let s = scores(Method::Aa, (0..6).map(|v| exact_aa(&d, v).unwrap()).collect());
        assert_eq!(&s.scores[..3], &[4.5; 3]);
        assert_eq!(select_query(&s, &[true; 6], &mut seed::stream(0)), Some(0));
    }

    #[test]
    fn point_mass_has_zero_mi_and_full_agreement() {
        let d = point_mass(vec![0, 1, 1, 0], 2);
        for v in 0..4 {
            assert_eq!(exact_mi(&d, v).unwrap(), 0.0);
            assert_eq!(exact_aa(&d, v).unwrap(), 4.0);
        }
        let mut acc = SampleAccumulators::new(4, 2);
        acc.record_pair(&[0, 1, 1, 0], &[0, 1, 1, 0]);
        assert_eq!(aa_scores(&acc, &Constraints::new()).unwrap().scores, vec![4.0; 4]);
    }

    #[test]
    fn product_distribution_has_zero_mi_and_equal_aa() {
        // Three independent vertices with identical biased marginals.
        let mut states = Vec::new();
        let mut weights = Vec::new();
        for code in 0..8usize {
            let t: Vec<usize> = (0..3).map(|i| (code >> i) & 1).collect();
            weights.push(t.iter().map(|&x| if x == 1 { 0.7 } else { 0.3 }).product());
            states.push(t);
        }
        let d = ExplicitDistribution::from_weights(3, 2, states, weights).unwrap();
        let aa0 = exact_aa(&d, 0).unwrap();
        for v in 0..3 {
            assert!(exact_mi(&d, v).unwrap().abs() < 1e-12);
            assert!((exact_aa(&d, v).unwrap() - aa0).abs() < 1e-12);
        }
    }

    #[test]
    fn select_query_rules() {
        let mut rng = seed::stream(1);
        assert_eq!(select_query(&scores(Method::Mi, vec![1.0, 2.0]), &[true, true], &mut rng), Some(1));
        assert_eq!(select_query(&scores(Method::Aa, vec![3.0; 4]), &[true; 4], &mut rng), Some(0));
        assert_eq!(select_query(&scores(Method::Aa, vec![9.0, 1.0, 1.0]), &[false, true, true], &mut rng), Some(1));
        assert_eq!(select_query(&scores(Method::Mi, vec![1.0]), &[false], &mut rng), None);
    }

    #[test]
    fn random_selection_is_uniform_over_unqueried() {
        let mut rng = seed::stream(3);
        let unq = [true, false, true, true];
        let mut hits = [0usize; 4];
        let s = scores(Method::Random, vec![0.0; 4]);
        for _ in 0..3000 {
            hits[select_query(&s, &unq, &mut rng).unwrap()] += 1;
        }
        assert_eq!(hits[1], 0);
        assert!(hits.iter().enumerate().all(|(v, &h)| v == 1 || (900..1100).contains(&h)));
    }

    #[test]
    fn agreement_offset_keeps_the_argmax() {
        let d = toy_distribution();
        let mut rng = seed::stream(8);
        let mut acc = SampleAccumulators::new(6, 2);
        for _ in 0..500 {
            let a = &d.states()[rng.random_range(0..16)];
            let b = &d.states()[rng.random_range(0..16)];
            acc.record_pair(a, b);
        }
        let unq = [true; 6];
        let before = select_query(&aa_scores(&acc, &Constraints::new()).unwrap(), &unq, &mut rng);
        acc.offset_agreement(17);
        let after = select_query(&aa_scores(&acc, &Constraints::new()).unwrap(), &unq, &mut rng);
        assert_eq!(before, after);
    }

    fn arb_distribution() -> impl Strategy<Value = ExplicitDistribution> {
        (1usize..=4, 2usize..=3).prop_flat_map(|(n, k)| {
            let size = k.pow(n as u32);
            proptest::collection::vec(0.0f64..1.0, size).prop_filter_map("positive mass", move |w| {
                let states = (0..size)
                    .map(|mut code| {
                        (0..n)
                            .map(|_| {
                                let d = code % k;
                                code /= k;
                                d
                            })
                            .collect()
                    })
                    .collect();
                ExplicitDistribution::from_weights(n, k, states, w).ok()
            })
        })
    }

    proptest! {
        #[test]
        fn mi_decompositions_agree_and_are_bounded(d in arb_distribution()) {
            for v in 0..d.n() {
                let a = exact_mi(&d, v).unwrap();
                let b = exact_mi_joint(&d, v).unwrap();
                prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
                prop_assert!(a >= -1e-12 && a <= libm::log(d.k() as f64) + 1e-12);
            }
        }

        #[test]
        fn aa_lies_between_one_and_n(d in arb_distribution()) {
            for v in 0..d.n() {
                let aa = exact_aa(&d, v).unwrap();
                prop_assert!(aa >= 1.0 - 1e-12 && aa <= d.n() as f64 + 1e-12);
            }
        }
    }
}
