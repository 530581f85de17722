//! Summaries across runs: accuracy curves, query-order statistics, Pearson
//! correlation and adjusted mutual information.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::active::ExperimentResult;
use crate::error::{Error, Result};
use crate::math;

/// The parts of a run the metrics need.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// `fractions[stage][threshold]`.
    pub fractions: Vec<Vec<f64>>,
    /// Stage at which each vertex was queried.
    pub query_stage: Vec<Option<usize>>,
}

impl RunSummary {
    pub fn from_result(result: &ExperimentResult) -> Self {
        RunSummary {
            fractions: result.stages.iter().map(|s| s.fractions.clone()).collect(),
            query_stage: result.query_order.clone(),
        }
    }
}

/// Runs over the same vertex set with the same thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct RunCollection {
    thresholds: Vec<f64>,
    n: usize,
    runs: Vec<RunSummary>,
}

impl RunCollection {
    pub fn new(thresholds: Vec<f64>, n: usize) -> Self {
        RunCollection { thresholds, n, runs: Vec::new() }
    }

    pub fn push(&mut self, run: RunSummary) -> Result<()> {
        if run.query_stage.len() != self.n || run.fractions.iter().any(|f| f.len() != self.thresholds.len()) {
            return Err(Error::ThresholdMismatch);
        }
        self.runs.push(run);
        Ok(())
    }

    /// Collects finished runs; all must share thresholds and vertex count.
    pub fn from_results<'a, I>(results: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a ExperimentResult>,
    {
        let mut iter = results.into_iter();
        let first = iter.next().ok_or(Error::InvalidConfig("no runs given"))?;
        let mut c = RunCollection::new(first.thresholds().to_vec(), first.n);
        c.push(RunSummary::from_result(first))?;
        for r in iter {
            if r.thresholds() != c.thresholds.as_slice() {
                return Err(Error::ThresholdMismatch);
            }
            c.push(RunSummary::from_result(r))?;
        }
        Ok(c)
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn runs(&self) -> &[RunSummary] {
        &self.runs
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub stage: usize,
    /// Mean fraction per threshold.
    pub mean: Vec<f64>,
    /// Runs that reached this stage.
    pub n_runs: usize,
}

/// Mean fraction at every (stage, threshold) over the runs reaching that stage.
pub fn accuracy_curves(runs: &RunCollection) -> Result<Vec<CurvePoint>> {
    if runs.is_empty() {
        return Err(Error::InvalidConfig("no runs given"));
    }
    let stages = runs.runs.iter().map(|r| r.fractions.len()).max().unwrap_or(0);
    let q = runs.thresholds.len();
    Ok((0..stages)
        .map(|stage| {
            let rows: Vec<&Vec<f64>> = runs.runs.iter().filter_map(|r| r.fractions.get(stage)).collect();
            let mean = (0..q).map(|i| rows.iter().map(|row| row[i]).sum::<f64>() / rows.len() as f64).collect();
            CurvePoint { stage, mean, n_runs: rows.len() }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderStat {
    /// NaN if no run queried the vertex.
    pub mean_stage: f64,
    /// Sample standard deviation; 0 with fewer than two runs.
    pub std_stage: f64,
    pub n_runs: usize,
}

/// Mean and standard deviation of each vertex's query stage over the runs
/// that queried it.
pub fn query_order_stats(runs: &RunCollection) -> Result<Vec<OrderStat>> {
    if runs.is_empty() {
        return Err(Error::InvalidConfig("no runs given"));
    }
    Ok((0..runs.n)
        .map(|v| {
            let stages: Vec<f64> = runs.runs.iter().filter_map(|r| r.query_stage[v]).map(|s| s as f64).collect();
            let m = stages.len();
            if m == 0 {
                return OrderStat { mean_stage: f64::NAN, std_stage: f64::NAN, n_runs: 0 };
            }
            let mean = stages.iter().sum::<f64>() / m as f64;
            let std = if m < 2 {
                0.0
            } else {
                math::sqrt(stages.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (m - 1) as f64)
            };
            OrderStat { mean_stage: mean, std_stage: std, n_runs: m }
        })
        .collect())
}

/// Sample correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), found: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::InvalidConfig("correlation needs at least two points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / math::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Dense relabeling of `a` to `0..classes` in order of first appearance.
fn compact(a: &[usize]) -> (Vec<usize>, usize) {
    let mut map = BTreeMap::new();
    let out = a
        .iter()
        .map(|x| {
            let next = map.len();
            *map.entry(*x).or_insert(next)
        })
        .collect();
    (out, map.len())
}

/// Adjusted mutual information with max-entropy normalization and the
/// hypergeometric expected mutual information.
///
/// Returns exactly 1 for partitions identical up to relabeling. Fails with
/// [`Error::Undefined`] when the normalizer vanishes otherwise.
pub fn adjusted_mutual_information(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), found: b.len() });
    }
    if a.is_empty() {
        return Err(Error::Undefined("empty labelings"));
    }
    let (a, ra) = compact(a);
    let (b, rb) = compact(b);
    if a == b {
        return Ok(1.0);
    }
    let n = a.len();
    let mut table = vec![0u64; ra * rb];
    for (&x, &y) in a.iter().zip(&b) {
        table[x * rb + y] += 1;
    }
    let row: Vec<u64> = (0..ra).map(|i| table[i * rb..(i + 1) * rb].iter().sum()).collect();
    let col: Vec<u64> = (0..rb).map(|j| (0..ra).map(|i| table[i * rb + j]).sum()).collect();
    let nf = n as f64;
    let h = |counts: &[u64]| math::entropy(&counts.iter().map(|&c| c as f64 / nf).collect::<Vec<_>>());
    let (ha, hb) = (h(&row), h(&col));

    let mut mi = 0.0;
    for i in 0..ra {
        for j in 0..rb {
            let nij = table[i * rb + j];
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / nf * math::ln(nf * nij / (row[i] as f64 * col[j] as f64));
            }
        }
    }

    let ln_fact: Vec<f64> = (0..=n).map(|x| math::lgamma(x as f64 + 1.0)).collect();
    let lf = |x: u64| ln_fact[x as usize];
    let nn = n as u64;
    let mut emi = 0.0;
    for &ai in &row {
        for &bj in &col {
            let lo = (ai + bj).saturating_sub(nn).max(1);
            let hi = ai.min(bj);
            for nij in lo..=hi {
                let x = nij as f64;
                let term = x / nf * math::ln(nf * x / (ai as f64 * bj as f64));
                let ln_p = lf(ai) + lf(bj) + lf(nn - ai) + lf(nn - bj)
                    - lf(nn)
                    - lf(nij)
                    - lf(ai - nij)
                    - lf(bj - nij)
                    - lf(nn + nij - ai - bj);
                emi += term * math::exp(ln_p);
            }
        }
    }

    let denom = ha.max(hb) - emi;
    if denom.abs() < 1e-15 {
        return Err(Error::Undefined("adjusted mutual information of degenerate labelings"));
    }
    Ok((mi - emi) / denom)
}
