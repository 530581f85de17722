//! Command-line interface.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use netal_core::metrics::{accuracy_curves, adjusted_mutual_information, pearson, query_order_stats, RunCollection};
use netal_core::relabel::{fixed_point_relabel, misfit_report};
use netal_core::{
    run_active_learning, seed, ActiveConfig, ExperimentResult, Graph, GroundTruthOracle, LabelMap, Method, Oracle,
    PriorSpec,
};

use crate::error::{CliError, InputError};
use crate::io::{parse_label_pairs, read_edge_list, read_labels, read_to_string, write_labels};
use crate::log::{write_curves, write_order, StageLog, StageLogWriter};
use crate::oracle::InteractiveOracle;

/// Steps per chain when `--steps` is not given: 2 x 10^4 up to this many
/// vertices, 5 x 10^4 above.
pub const SMALL_GRAPH: usize = 100;

#[derive(Debug, Parser)]
#[command(
    name = "netal",
    version,
    about = "Active learning of hidden vertex types on networks under a stochastic block model",
    after_help = "Environment:\n  NETAL_THREADS  number of worker threads for chain sampling\n\n\
Exit status: 0 ok, 2 input error, 3 runtime error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run active-learning experiments and write stage and query-order logs.
    Run(RunArgs),
    /// Summarize stage logs: accuracy curves, query order, correlations.
    Analyze(AnalyzeArgs),
    /// Relabel vertices until every label is the model's best guess.
    Fixpoint(FixpointArgs),
    /// Report each vertex's leave-one-out predicted type.
    Misfit(MisfitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    /// Answer queries from the --labels file.
    File,
    /// Prompt on standard input/output.
    Interactive,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Edge list, one `source target` pair per line.
    #[arg(long)]
    pub graph: PathBuf,
    /// Treat edges as directed.
    #[arg(long)]
    pub directed: bool,
    /// Allow self-loops.
    #[arg(long)]
    pub self_loops: bool,
}

impl GraphArgs {
    fn load(&self) -> Result<Graph, InputError> {
        read_edge_list(&self.graph, self.directed, self.self_loops)
    }
}

#[derive(Debug, Args)]
#[command(after_help = "Run r uses seed derive(--seed, RUN, r); stage j of a run and chain i of a \
stage are seeded beneath it the same way, so every output is a function of the inputs and --seed.")]
pub struct RunArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Vertex labels, `vertex<TAB>label` per line. Required for --oracle file;
    /// otherwise used only to score accuracy.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Number of types.
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value = "aa")]
    pub method: Method,
    #[arg(long, default_value_t = 100)]
    pub chains: usize,
    /// Steps per chain [default: 20000, or 50000 above 100 vertices].
    #[arg(long)]
    pub steps: Option<usize>,
    /// Fraction of each chain discarded as burn-in.
    #[arg(long, default_value_t = 0.5)]
    pub burnin: f64,
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5, 0.7, 0.9])]
    pub thresholds: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for stages.csv and order.csv.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OracleMode::File)]
    pub oracle: OracleMode,
    /// Stop after this many queries [default: n - 1].
    #[arg(long)]
    pub max_stages: Option<usize>,
    /// Suppress per-stage progress lines.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Stage logs written by `netal run`.
    #[arg(required = true)]
    pub logs: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// First label file for adjusted mutual information.
    #[arg(long, requires = "labels_b")]
    pub labels_a: Option<PathBuf>,
    /// Second label file for adjusted mutual information.
    #[arg(long, requires = "labels_a")]
    pub labels_b: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixpointArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub labels: PathBuf,
    /// Number of types; must match the label vocabulary when given.
    #[arg(long)]
    pub k: Option<usize>,
    /// Relabeled output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Report file [default: standard output only].
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MisfitArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub labels: PathBuf,
    /// Per-vertex CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Confidence level for the summary line.
    #[arg(long, default_value_t = 0.9)]
    pub confidence: f64,
}

/// Applies NETAL_THREADS to the global worker pool.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("NETAL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("NETAL_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(CliError::runtime)
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Fixpoint(a) => cmd_fixpoint(&a),
        Command::Misfit(a) => cmd_misfit(&a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))
}

fn write_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))
}

fn build_config(a: &RunArgs, n: usize) -> Result<ActiveConfig, CliError> {
    if a.runs == 0 {
        return Err(CliError::Input("--runs must be at least 1".into()));
    }
    let mut config = ActiveConfig::new(a.k, a.method);
    config.gibbs.chains = a.chains;
    config.gibbs.steps_per_chain = a.steps.unwrap_or(if n <= SMALL_GRAPH { 20_000 } else { 50_000 });
    config.gibbs.burnin_fraction = a.burnin;
    config.thresholds = a.thresholds.clone();
    config.max_stages = a.max_stages;
    config.validate().map_err(CliError::input)?;
    Ok(config)
}

fn write_order_file(
    path: &Path,
    graph: &Graph,
    config: &ActiveConfig,
    results: &[ExperimentResult],
) -> Result<(), CliError> {
    let mut c = RunCollection::new(config.thresholds.clone(), graph.n());
    for r in results {
        c.push(netal_core::metrics::RunSummary::from_result(r)).map_err(CliError::runtime)?;
    }
    let stats = if c.is_empty() { Vec::new() } else { query_order_stats(&c).map_err(CliError::runtime)? };
    let names = if c.is_empty() { Vec::new() } else { graph.names().to_vec() };
    write_order(create(path)?, &names, &stats).map_err(write_err(path))
}

pub fn cmd_run(a: &RunArgs) -> Result<(), CliError> {
    let graph = a.graph.load()?;
    let labels = a.labels.as_deref().map(|p| read_labels(p, &graph)).transpose()?;
    if a.oracle == OracleMode::File && labels.is_none() {
        return Err(CliError::Input("--oracle file needs --labels".into()));
    }
    if let Some(l) = &labels {
        if l.k() > a.k {
            return Err(CliError::Input(format!("label file has {} distinct labels but --k is {}", l.k(), a.k)));
        }
    }
    let mut config = build_config(a, graph.n())?;
    fs::create_dir_all(&a.out).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", a.out.display())))?;
    let stages_path = a.out.join("stages.csv");
    let order_path = a.out.join("order.csv");

    let progress = !a.quiet && a.oracle == OracleMode::File;
    let mut log = StageLogWriter::new(create(&stages_path)?, graph.names().to_vec(), &config.thresholds, progress)
        .map_err(write_err(&stages_path))?;
    let truth = labels.as_ref().map(|l| l.labels());
    let vocab = labels.as_ref().map(|l| l.vocab().to_vec()).unwrap_or_default();
    let stdin = io::stdin();
    let mut interactive = InteractiveOracle::new(stdin.lock(), io::stdout(), graph.names().to_vec(), vocab, a.k);
    let mut file_oracle = labels.as_ref().map(|l| GroundTruthOracle::new(l.labels().to_vec()));

    let mut results = Vec::new();
    for r in 0..a.runs {
        config.seed = seed::derive(a.seed, seed::RUN, r as u64);
        log.begin_run(r);
        let oracle: &mut dyn Oracle = match (&mut file_oracle, a.oracle) {
            (Some(o), OracleMode::File) => o,
            _ => &mut interactive,
        };
        match run_active_learning(&graph, oracle, &config, truth, &mut log) {
            Ok(res) => results.push(res),
            Err(e) => {
                results.push(*e.partial.clone());
                write_order_file(&order_path, &graph, &config, &results)?;
                return Err(CliError::Runtime(format!("run {r}: {e}")));
            }
        }
    }
    write_order_file(&order_path, &graph, &config, &results)?;
    if !a.quiet {
        eprintln!(
            "wrote {} runs x {} stages to {}",
            results.len(),
            results.first().map_or(0, |r| r.stages.len()),
            stages_path.display()
        );
    }
    Ok(())
}

fn load_label_pairs(path: &Path) -> Result<Vec<(String, String)>, InputError> {
    parse_label_pairs(&read_to_string(path)?)
}

/// Label indices of `a` and `b` aligned on the vertex names of `a`.
fn aligned_labels(a: &[(String, String)], b: &[(String, String)]) -> Result<(Vec<usize>, Vec<usize>), InputError> {
    fn index(pairs: &[(String, String)]) -> Result<std::collections::HashMap<&str, usize>, InputError> {
        let mut vocab: Vec<&str> = Vec::new();
        let mut out = std::collections::HashMap::new();
        for (v, l) in pairs {
            let id = vocab.iter().position(|x| x == l).unwrap_or_else(|| {
                vocab.push(l);
                vocab.len() - 1
            });
            if out.insert(v.as_str(), id).is_some() {
                return Err(InputError::DuplicateLabel(v.clone()));
            }
        }
        Ok(out)
    }
    let ia = index(a)?;
    let ib = index(b)?;
    if ia.len() != ib.len() {
        return Err(InputError::Invalid(format!("label files cover {} and {} vertices", ia.len(), ib.len())));
    }
    let mut xa = Vec::with_capacity(a.len());
    let mut xb = Vec::with_capacity(a.len());
    for (v, _) in a {
        xa.push(ia[v.as_str()]);
        xb.push(*ib.get(v.as_str()).ok_or_else(|| InputError::MissingLabel(v.clone()))?);
    }
    Ok((xa, xb))
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let mut parsed = Vec::new();
    for path in &a.logs {
        let file = File::open(path).map_err(|source| InputError::Read { path: path.clone(), source })?;
        let log = StageLog::parse(io::BufReader::new(file))
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        parsed.push(log);
    }
    fs::create_dir_all(&a.out).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", a.out.display())))?;

    let stems: Vec<String> = a
        .logs
        .iter()
        .map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "log".into()))
        .collect();
    let unique = stems.iter().enumerate().all(|(i, s)| !stems[..i].contains(s));

    let mut orders = Vec::new();
    for (i, log) in parsed.iter().enumerate() {
        let stem = if unique { stems[i].clone() } else { format!("{i}-{}", stems[i]) };
        let names = log.vertices();
        if log.rows.is_empty() {
            return Err(CliError::Input(format!("{} has no stage rows", a.logs[i].display())));
        }
        let runs = log.to_collection(&names).map_err(|e| CliError::Input(format!("{}: {e}", a.logs[i].display())))?;
        let curves = accuracy_curves(&runs).map_err(CliError::runtime)?;
        let stats = query_order_stats(&runs).map_err(CliError::runtime)?;
        let curves_path = a.out.join(format!("{stem}.curves.csv"));
        write_curves(create(&curves_path)?, runs.thresholds(), &curves).map_err(write_err(&curves_path))?;
        let order_path = a.out.join(format!("{stem}.order.csv"));
        write_order(create(&order_path)?, &names, &stats).map_err(write_err(&order_path))?;
        orders.push((names, stats));
    }

    let mut report: Vec<(String, f64, usize)> = Vec::new();
    if let [(na, sa), (nb, sb)] = orders.as_slice() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (i, name) in na.iter().enumerate() {
            if let Some(j) = nb.iter().position(|m| m == name) {
                x.push(sa[i].mean_stage);
                y.push(sb[j].mean_stage);
            }
        }
        let r = pearson(&x, &y).map_err(|e| CliError::Runtime(format!("pearson: {e}")))?;
        report.push(("pearson_mean_stage".into(), r, x.len()));
    }
    if let (Some(pa), Some(pb)) = (&a.labels_a, &a.labels_b) {
        let (la, lb) = aligned_labels(&load_label_pairs(pa)?, &load_label_pairs(pb)?)?;
        let ami = adjusted_mutual_information(&la, &lb).map_err(|e| CliError::Runtime(format!("ami: {e}")))?;
        report.push(("ami".into(), ami, la.len()));
    }
    if !report.is_empty() {
        let path = a.out.join("correlation.csv");
        let mut w = create(&path)?;
        let mut body = String::from("metric,value,n\n");
        for (m, v, n) in &report {
            body.push_str(&format!("{m},{v},{n}\n"));
            println!("{m} = {v:.6} (n = {n})");
        }
        w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(write_err(&path))?;
    }
    Ok(())
}

pub fn cmd_fixpoint(a: &FixpointArgs) -> Result<(), CliError> {
    let graph = a.graph.load()?;
    let labels = read_labels(&a.labels, &graph)?;
    if let Some(k) = a.k {
        if k != labels.k() {
            return Err(CliError::Input(format!("--k is {k} but the label file has {} distinct labels", labels.k())));
        }
    }
    let out = fixed_point_relabel(&graph, &labels).map_err(CliError::runtime)?;
    write_labels(create(&a.out)?, &graph, &out.labels).map_err(write_err(&a.out))?;
    let report = format!(
        "iterations {}\nchanged {}\nnet_changed {}\nconverged {}\n",
        out.iterations, out.changed, out.net_changed, out.converged
    );
    print!("{report}");
    if let Some(path) = &a.report {
        let mut w = create(path)?;
        w.write_all(report.as_bytes()).and_then(|_| w.flush()).map_err(write_err(path))?;
    }
    if !out.converged {
        return Err(CliError::Runtime(format!(
            "no fixed point after {} sweeps; last labeling written",
            netal_core::relabel::MAX_SWEEPS
        )));
    }
    Ok(())
}

pub fn cmd_misfit(a: &MisfitArgs) -> Result<(), CliError> {
    let graph = a.graph.load()?;
    let labels: LabelMap = read_labels(&a.labels, &graph)?;
    let report = misfit_report(&graph, &labels, &PriorSpec::uniform()).map_err(CliError::runtime)?;
    if let Some(path) = &a.out {
        let mut body = String::from("vertex,label,predicted,confidence,mislabeled\n");
        let mut w = csv::Writer::from_writer(Vec::new());
        for (v, m) in report.iter().enumerate() {
            w.write_record([
                graph.name(v).to_string(),
                labels.vocab()[m.label].clone(),
                labels.vocab()[m.predicted].clone(),
                m.confidence.to_string(),
                m.is_mislabeled().to_string(),
            ])
            .map_err(CliError::runtime)?;
        }
        body.push_str(&String::from_utf8(w.into_inner().map_err(CliError::runtime)?).map_err(CliError::runtime)?);
        let mut f = create(path)?;
        f.write_all(body.as_bytes()).and_then(|_| f.flush()).map_err(write_err(path))?;
    }
    let bad: Vec<_> = report.iter().filter(|m| m.is_mislabeled()).collect();
    let confident = bad.iter().filter(|m| m.confidence > a.confidence).count();
    let pct = if bad.is_empty() { 0.0 } else { 100.0 * confident as f64 / bad.len() as f64 };
    println!(
        "mislabeled {} of {}; {} of them ({pct:.1}%) with confidence > {}",
        bad.len(),
        report.len(),
        confident,
        a.confidence
    );
    Ok(())
}
