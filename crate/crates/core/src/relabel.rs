//! Label consistency checks against the block model.
//!
//! [`fixed_point_relabel`] repeatedly moves every vertex to the type that
//! maximizes the likelihood under the maximum-likelihood edge probabilities
//! of the current labeling, until nothing moves. [`misfit_report`] gives each
//! vertex's leave-one-out prediction under the integrated likelihood.

use alloc::vec;
use alloc::vec::Vec;

use crate::blockmodel::{
    block_counts, conditional_type_distribution, log_likelihood_given_p, mle_edge_probs, PriorSpec, TypeAssignment,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, LabelMap};

/// Sweep cap for [`fixed_point_relabel`].
pub const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelabelOutcome {
    pub labels: LabelMap,
    /// Sweeps that changed at least one label.
    pub iterations: usize,
    /// Distinct vertices relabeled in any sweep.
    pub changed: usize,
    /// Vertices whose final label differs from the input.
    pub net_changed: usize,
    /// False if the sweep cap was hit while labels were still moving.
    pub converged: bool,
}

fn check_cover(graph: &Graph, labels: &LabelMap) -> Result<()> {
    if labels.len() != graph.n() {
        return Err(Error::LengthMismatch { expected: graph.n(), found: labels.len() });
    }
    if labels.k() == 0 {
        return Err(Error::InvalidConfig("label vocabulary is empty"));
    }
    Ok(())
}

/// Best type for every vertex with all other labels held at `t`. Ties keep
/// the current type, otherwise go to the smallest index.
fn sweep(graph: &Graph, t: &[usize], k: usize) -> Result<Vec<usize>> {
    let counts = block_counts(graph, t, k)?;
    let p = mle_edge_probs(&counts);
    let mut work = TypeAssignment::new(t.to_vec(), k)?;
    let mut scratch = counts.clone();
    let mut next = t.to_vec();
    for v in 0..graph.n() {
        let current = t[v];
        let mut best = current;
        let mut best_ll = log_likelihood_given_p(&counts, &p);
        for c in (0..k).filter(|&c| c != current) {
            scratch.apply_move(graph, &mut work, v, c)?;
            let ll = log_likelihood_given_p(&scratch, &p);
            scratch.apply_move(graph, &mut work, v, current)?;
            if ll > best_ll {
                best = c;
                best_ll = ll;
            }
        }
        next[v] = best;
    }
    Ok(next)
}

/// Synchronous fixed-point iteration, at most [`MAX_SWEEPS`] sweeps.
pub fn fixed_point_relabel(graph: &Graph, labels: &LabelMap) -> Result<RelabelOutcome> {
    check_cover(graph, labels)?;
    let k = labels.k();
    let original = labels.labels().to_vec();
    let mut t = original.clone();
    let mut ever = vec![false; t.len()];
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let next = sweep(graph, &t, k)?;
        let mut moved = false;
        for (v, (a, b)) in t.iter().zip(&next).enumerate() {
            if a != b {
                ever[v] = true;
                moved = true;
            }
        }
        if !moved {
            converged = true;
            break;
        }
        iterations += 1;
        t = next;
    }
    let net_changed = t.iter().zip(&original).filter(|(a, b)| a != b).count();
    Ok(RelabelOutcome {
        labels: LabelMap::new(t, labels.vocab().to_vec())?,
        iterations,
        changed: ever.iter().filter(|&&e| e).count(),
        net_changed,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Misfit {
    pub label: usize,
    pub predicted: usize,
    /// Conditional probability of `predicted`.
    pub confidence: f64,
}

impl Misfit {
    pub fn is_mislabeled(&self) -> bool {
        self.predicted != self.label
    }
}

/// Leave-one-out prediction for every vertex under the integrated
/// likelihood. Ties go to the smallest type index.
pub fn misfit_report(graph: &Graph, labels: &LabelMap, prior: &PriorSpec) -> Result<Vec<Misfit>> {
    check_cover(graph, labels)?;
    let t = labels.labels();
    let counts = block_counts(graph, t, labels.k())?;
    Ok((0..graph.n())
        .map(|v| {
            let dist = conditional_type_distribution(graph, t, &counts, v, prior);
            let mut predicted = 0;
            for (c, &p) in dist.iter().enumerate() {
                if p > dist[predicted] {
                    predicted = c;
                }
            }
            Misfit { label: t[v], predicted, confidence: dist[predicted] }
        })
        .collect())
}
