//! The stage-by-stage active learning loop.
//!
//! Stage `j` starts with `j` queried vertices pinned to their revealed types.
//! One Gibbs ensemble is run conditioned on those pins; its marginals give the
//! accuracy fractions and its accumulators give the MI or AA scores. The
//! chosen vertex is then revealed by the [`Oracle`] and pinned for stage
//! `j + 1`. The loop stops after `max_stages` queries or when a single
//! unqueried vertex remains.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sampler::{marginals, run_ensemble, Constraints, GibbsConfig, MarginalTable};
use crate::seed;
use crate::strategy::{aa_scores, heuristic_scores, mi_scores, select_query, CriterionScores, Method};

/// Source of true types.
pub trait Oracle {
    /// Reveals the type index of `v`. Repeated queries must agree.
    fn query(&mut self, v: usize) -> Result<usize>;
}

impl<F: FnMut(usize) -> Result<usize>> Oracle for F {
    fn query(&mut self, v: usize) -> Result<usize> {
        self(v)
    }
}

/// Answers from a fixed label vector.
#[derive(Debug, Clone)]
pub struct GroundTruthOracle {
    labels: Vec<usize>,
}

impl GroundTruthOracle {
    pub fn new(labels: Vec<usize>) -> Self {
        GroundTruthOracle { labels }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

impl Oracle for GroundTruthOracle {
    fn query(&mut self, v: usize) -> Result<usize> {
        self.labels.get(v).copied().ok_or(Error::VertexOutOfRange { vertex: v, n: self.labels.len() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveConfig {
    pub k: usize,
    pub method: Method,
    /// Sampler settings; `k` and `master_seed` are overridden per stage.
    pub gibbs: GibbsConfig,
    /// Accuracy thresholds, strictly increasing in (0, 1].
    pub thresholds: Vec<f64>,
    /// Defaults to `n - 1`.
    pub max_stages: Option<usize>,
    pub seed: u64,
}

impl ActiveConfig {
    pub fn new(k: usize, method: Method) -> Self {
        ActiveConfig {
            k,
            method,
            gibbs: GibbsConfig::new(k),
            thresholds: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            max_stages: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1"));
        }
        if self.thresholds.iter().any(|&q| !(q > 0.0 && q <= 1.0)) {
            return Err(Error::InvalidConfig("thresholds must lie in (0, 1]"));
        }
        if self.thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("thresholds must be strictly increasing"));
        }
        self.stage_gibbs(0).validate()
    }

    /// Sampler settings for `stage`.
    pub fn stage_gibbs(&self, stage: usize) -> GibbsConfig {
        let mut g = self.gibbs.clone();
        g.k = self.k;
        g.master_seed = seed::derive(self.seed, seed::STAGE, stage as u64);
        g.track_agreement = self.method == Method::Aa;
        g
    }
}

/// One stage of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub stage: usize,
    pub queried: usize,
    /// Type revealed by the oracle.
    pub revealed: usize,
    pub method: Method,
    /// One fraction per threshold; NaN when no ground truth is available.
    pub fractions: Vec<f64>,
    /// Criterion scores the query was selected from.
    pub scores: Vec<f64>,
    pub wall_secs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub n: usize,
    pub method: Method,
    pub seed: u64,
    pub config: ActiveConfig,
    pub stages: Vec<StageRecord>,
    /// Stage at which each vertex was queried.
    pub query_order: Vec<Option<usize>>,
    /// False when the run stopped on an error.
    pub completed: bool,
}

impl ExperimentResult {
    fn new(n: usize, config: &ActiveConfig) -> Self {
        ExperimentResult {
            n,
            method: config.method,
            seed: config.seed,
            config: config.clone(),
            stages: Vec::new(),
            query_order: vec![None; n],
            completed: false,
        }
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.config.thresholds
    }

    /// Queried vertices in query order.
    pub fn queried(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.queried).collect()
    }
}

/// A failed run together with everything recorded before the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveError {
    pub source: Error,
    pub partial: Box<ExperimentResult>,
}

impl fmt::Display for ActiveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} completed stages)", self.source, self.partial.stages.len())
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ActiveError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

/// Observer called after every stage.
pub trait StageHook {
    /// Seconds since the run started; the core has no clock.
    fn elapsed_secs(&mut self) -> f64 {
        0.0
    }

    /// Called with each finished stage and the marginals it was scored from,
    /// if an ensemble was run. An error aborts the run.
    fn on_stage(&mut self, _record: &StageRecord, _marginals: Option<&MarginalTable>) -> Result<()> {
        Ok(())
    }
}

impl StageHook for () {}

/// Fraction of `unqueried` vertices whose true type has marginal at least `q`.
pub fn accuracy_fractions(
    marginals: &MarginalTable,
    truth: &[usize],
    unqueried: &[bool],
    thresholds: &[f64],
) -> Result<Vec<f64>> {
    if truth.len() != marginals.n() {
        return Err(Error::LengthMismatch { expected: marginals.n(), found: truth.len() });
    }
    let mut hits = vec![0usize; thresholds.len()];
    let mut total = 0usize;
    for v in (0..truth.len()).filter(|&v| unqueried[v]) {
        if truth[v] >= marginals.k() {
            return Err(Error::TypeOutOfRange { vertex: v, ty: truth[v], k: marginals.k() });
        }
        let p = marginals.prob(v, truth[v]);
        total += 1;
        for (h, &q) in hits.iter_mut().zip(thresholds) {
            if p >= q {
                *h += 1;
            }
        }
    }
    Ok(hits.into_iter().map(|h| if total == 0 { f64::NAN } else { h as f64 / total as f64 }).collect())
}

/// Runs the active learning protocol on `graph`.
///
/// `truth`, when given, is used only to score accuracy; queries always go
/// through `oracle`.
pub fn run_active_learning<O, H>(
    graph: &Graph,
    oracle: &mut O,
    config: &ActiveConfig,
    truth: Option<&[usize]>,
    hook: &mut H,
) -> core::result::Result<ExperimentResult, ActiveError>
where
    O: Oracle + ?Sized,
    H: StageHook + ?Sized,
{
    let n = graph.n();
    let mut result = ExperimentResult::new(n, config);
    match run_stages(graph, oracle, config, truth, hook, &mut result) {
        Ok(()) => {
            result.completed = true;
            Ok(result)
        }
        Err(source) => Err(ActiveError { source, partial: Box::new(result) }),
    }
}

fn run_stages<O, H>(
    graph: &Graph,
    oracle: &mut O,
    config: &ActiveConfig,
    truth: Option<&[usize]>,
    hook: &mut H,
    result: &mut ExperimentResult,
) -> Result<()>
where
    O: Oracle + ?Sized,
    H: StageHook + ?Sized,
{
    config.validate()?;
    let n = graph.n();
    if let Some(t) = truth {
        if t.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: t.len() });
        }
    }
    let max_stages = config.max_stages.unwrap_or(n.saturating_sub(1));
    let mut constraints = Constraints::new();
    let mut unqueried = vec![true; n];
    let mut remaining = n;
    let mut random_stream = seed::stream(seed::derive(config.seed, seed::RANDOM_QUERY, 0));
    let needs_samples = matches!(config.method, Method::Mi | Method::Aa);

    let mut stage = 0;
    while stage < max_stages && remaining > 1 {
        let table = if needs_samples || truth.is_some() {
            let acc = run_ensemble(graph, &constraints, &config.stage_gibbs(stage))?;
            Some((marginals(&acc)?, acc))
        } else {
            None
        };
        let fractions = match (truth, &table) {
            (Some(t), Some((m, _))) => accuracy_fractions(m, t, &unqueried, &config.thresholds)?,
            _ => vec![f64::NAN; config.thresholds.len()],
        };
        let scores: CriterionScores = match (config.method, &table) {
            (Method::Mi, Some((_, acc))) => mi_scores(acc, &constraints)?,
            (Method::Aa, Some((_, acc))) => aa_scores(acc, &constraints)?,
            (m, _) => heuristic_scores(graph, m, &unqueried),
        };
        let v = select_query(&scores, &unqueried, &mut random_stream)
            .ok_or(Error::Undefined("no unqueried vertex to select"))?;
        let revealed = oracle.query(v)?;
        if revealed >= config.k {
            return Err(Error::TypeOutOfRange { vertex: v, ty: revealed, k: config.k });
        }
        constraints.pin(v, revealed);
        unqueried[v] = false;
        remaining -= 1;
        result.query_order[v] = Some(stage);
        let record = StageRecord {
            stage,
            queried: v,
            revealed,
            method: config.method,
            fractions,
            scores: scores.scores,
            wall_secs: hook.elapsed_secs(),
        };
        result.stages.push(record);
        let last = result.stages.last().expect("just pushed");
        hook.on_stage(last, table.as_ref().map(|(m, _)| m))?;
        stage += 1;
    }
    Ok(())
}
