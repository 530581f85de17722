//! CSV stage logs and summaries.
//!
//! Stage log: `run,stage,method,queried_vertex,frac_q_<q>...`, one row per
//! stage, flushed as each stage finishes.
//! Query order: `vertex,mean_stage,std_stage,n_runs`.
//! Curves: `stage,n_runs,frac_q_<q>...`.

use std::collections::HashMap;
use std::io::{self, Read, Write};
use std::time::Instant;

use netal_core::metrics::{CurvePoint, OrderStat, RunCollection, RunSummary};
use netal_core::{Error, MarginalTable, StageHook, StageRecord};

use crate::error::InputError;

const FIXED_COLUMNS: [&str; 4] = ["run", "stage", "method", "queried_vertex"];

pub fn threshold_column(q: f64) -> String {
    format!("frac_q_{q}")
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

/// Writes stage rows as a run progresses.
pub struct StageLogWriter<W: Write> {
    csv: csv::Writer<W>,
    names: Vec<String>,
    run: usize,
    start: Instant,
    progress: bool,
}

impl<W: Write> StageLogWriter<W> {
    /// Writes the header immediately.
    pub fn new(w: W, names: Vec<String>, thresholds: &[f64], progress: bool) -> io::Result<Self> {
        let mut csv = csv::Writer::from_writer(w);
        let header: Vec<String> = FIXED_COLUMNS
            .iter()
            .map(|s| s.to_string())
            .chain(thresholds.iter().map(|&q| threshold_column(q)))
            .collect();
        csv.write_record(&header).map_err(csv_err)?;
        csv.flush()?;
        Ok(StageLogWriter { csv, names, run: 0, start: Instant::now(), progress })
    }

    /// Starts the rows of run `run`.
    pub fn begin_run(&mut self, run: usize) {
        self.run = run;
        self.start = Instant::now();
    }

    pub fn write_stage(&mut self, record: &StageRecord) -> io::Result<()> {
        let mut row = vec![
            self.run.to_string(),
            record.stage.to_string(),
            record.method.to_string(),
            self.names[record.queried].clone(),
        ];
        row.extend(record.fractions.iter().map(|f| f.to_string()));
        self.csv.write_record(&row).map_err(csv_err)?;
        self.csv.flush()
    }

    pub fn into_inner(self) -> io::Result<W> {
        self.csv.into_inner().map_err(|e| e.into_error())
    }
}

impl<W: Write> StageHook for StageLogWriter<W> {
    fn elapsed_secs(&mut self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn on_stage(&mut self, record: &StageRecord, _marginals: Option<&MarginalTable>) -> Result<(), Error> {
        self.write_stage(record).map_err(|e| Error::External(format!("cannot write stage log: {e}")))?;
        if self.progress {
            let fracs: Vec<String> = record.fractions.iter().map(|f| format!("{f:.3}")).collect();
            eprintln!(
                "run {} stage {} queried {} fractions [{}] ({:.1}s)",
                self.run,
                record.stage,
                self.names[record.queried],
                fracs.join(" "),
                record.wall_secs
            );
        }
        Ok(())
    }
}

/// One parsed row of a stage log.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRow {
    pub run: usize,
    pub stage: usize,
    pub method: String,
    pub queried: String,
    pub fractions: Vec<f64>,
}

/// A parsed stage log.
#[derive(Debug, Clone, PartialEq)]
pub struct StageLog {
    pub thresholds: Vec<f64>,
    pub rows: Vec<StageRow>,
}

impl StageLog {
    pub fn parse<R: Read>(r: R) -> Result<Self, InputError> {
        let mut reader = csv::Reader::from_reader(r);
        let bad = |line: usize, message: String| InputError::Parse { line, message };
        let header = reader.headers().map_err(|e| bad(1, e.to_string()))?.clone();
        let cols: Vec<&str> = header.iter().collect();
        if cols.len() < FIXED_COLUMNS.len() || cols[..4] != FIXED_COLUMNS {
            return Err(bad(1, format!("expected header starting with {}", FIXED_COLUMNS.join(","))));
        }
        let thresholds = cols[4..]
            .iter()
            .map(|c| {
                c.strip_prefix("frac_q_")
                    .and_then(|q| q.parse::<f64>().ok())
                    .ok_or_else(|| bad(1, format!("bad threshold column {c:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| bad(line, e.to_string()))?;
            let int = |j: usize| rec[j].parse::<usize>().map_err(|e| bad(line, format!("{}: {e}", FIXED_COLUMNS[j])));
            let fractions = (4..rec.len())
                .map(|j| rec[j].parse::<f64>().map_err(|e| bad(line, format!("{}: {e}", cols[j]))))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(StageRow {
                run: int(0)?,
                stage: int(1)?,
                method: rec[2].to_string(),
                queried: rec[3].to_string(),
                fractions,
            });
        }
        Ok(StageLog { thresholds, rows })
    }

    /// Vertex names in order of first query.
    pub fn vertices(&self) -> Vec<String> {
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for r in &self.rows {
            if !seen.contains_key(&r.queried) {
                seen.insert(r.queried.clone(), out.len());
                out.push(r.queried.clone());
            }
        }
        out
    }

    /// Groups rows into runs over the vertex set `names`.
    pub fn to_collection(&self, names: &[String]) -> Result<RunCollection, InputError> {
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut runs: Vec<(usize, RunSummary)> = Vec::new();
        for r in &self.rows {
            let pos = match runs.iter().position(|(id, _)| *id == r.run) {
                Some(p) => p,
                None => {
                    runs.push((r.run, RunSummary { fractions: Vec::new(), query_stage: vec![None; names.len()] }));
                    runs.len() - 1
                }
            };
            let run = &mut runs[pos].1;
            if r.stage != run.fractions.len() {
                return Err(InputError::Invalid(format!("run {} skips to stage {}", r.run, r.stage)));
            }
            let v = *index.get(r.queried.as_str()).ok_or_else(|| InputError::UnknownVertex(r.queried.clone()))?;
            if run.query_stage[v].is_some() {
                return Err(InputError::Invalid(format!("run {} queries {} twice", r.run, r.queried)));
            }
            run.query_stage[v] = Some(r.stage);
            run.fractions.push(r.fractions.clone());
        }
        let mut c = RunCollection::new(self.thresholds.clone(), names.len());
        for (_, run) in runs {
            c.push(run).map_err(|_| InputError::Invalid("row width does not match the header".into()))?;
        }
        Ok(c)
    }
}

fn fmt_opt(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        x.to_string()
    }
}

/// Writes query-order statistics sorted by mean stage; never-queried
/// vertices come last with empty statistics.
pub fn write_order<W: Write>(w: W, names: &[String], stats: &[OrderStat]) -> io::Result<()> {
    let mut idx: Vec<usize> = (0..names.len()).collect();
    idx.sort_by(|&a, &b| {
        let key = |v: usize| if stats[v].n_runs == 0 { f64::INFINITY } else { stats[v].mean_stage };
        key(a).total_cmp(&key(b)).then(a.cmp(&b))
    });
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["vertex", "mean_stage", "std_stage", "n_runs"]).map_err(csv_err)?;
    for v in idx {
        let s = &stats[v];
        csv.write_record([names[v].clone(), fmt_opt(s.mean_stage), fmt_opt(s.std_stage), s.n_runs.to_string()])
            .map_err(csv_err)?;
    }
    csv.flush()
}

pub fn write_curves<W: Write>(w: W, thresholds: &[f64], curves: &[CurvePoint]) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let header: Vec<String> = ["stage".to_string(), "n_runs".to_string()]
        .into_iter()
        .chain(thresholds.iter().map(|&q| threshold_column(q)))
        .collect();
    csv.write_record(&header).map_err(csv_err)?;
    for p in curves {
        let mut row = vec![p.stage.to_string(), p.n_runs.to_string()];
        row.extend(p.mean.iter().map(|m| m.to_string()));
        csv.write_record(&row).map_err(csv_err)?;
    }
    csv.flush()
}
