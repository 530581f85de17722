//! Active learning of hidden vertex types on networks modelled by a
//! stochastic block model.
//!
//! The crate is `no_std` + `alloc`. Everything here is pure computation over
//! in-memory graphs: block-model likelihoods, constrained heat-bath Gibbs
//! chains, query criteria (mutual information and average agreement, plus
//! degree, betweenness and random baselines), the stage-by-stage active
//! learning loop, fixed-point relabeling and post-hoc metrics.
//!
//! File formats, the interactive oracle and the command line live in the
//! `netal` companion crate.
//!
//! Features:
//! - `std` (default): implements `std::error::Error` for [`Error`].
//! - `parallel`: runs independent chains of an ensemble on the rayon pool.
//!   Results are bit-identical with and without it.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod active;
pub mod blockmodel;
mod error;
pub mod graph;
mod math;
pub mod metrics;
pub mod relabel;
pub mod sampler;
pub mod seed;
pub mod strategy;
pub mod synth;

pub use error::{Error, Result};

pub use active::{
    run_active_learning, ActiveConfig, ActiveError, ExperimentResult, GroundTruthOracle, Oracle, StageHook, StageRecord,
};
pub use blockmodel::{BlockCounts, EdgeProbs, Mode, PriorSpec, TypeAssignment};
pub use graph::{Graph, LabelMap};
pub use sampler::{Constraints, ExplicitDistribution, GibbsConfig, MarginalTable, SampleAccumulators};
pub use strategy::{CriterionScores, Method};
