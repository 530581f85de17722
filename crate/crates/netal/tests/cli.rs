use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netal"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run_karate(out: &Path, extra: &[&str], stdin: Option<&str>) -> Output {
    let mut cmd = bin();
    cmd.arg("run")
        .arg("--graph")
        .arg(data("karate.edges"))
        .arg("--labels")
        .arg(data("karate.labels"))
        .arg("--out")
        .arg(out);
    for (flag, value) in [("--k", "2"), ("--chains", "4"), ("--steps", "2000")] {
        if !extra.contains(&flag) {
            cmd.args([flag, value]);
        }
    }
    cmd.arg("--quiet").args(extra).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    let mut child = cmd.spawn().unwrap();
    {
        let mut input = child.stdin.take().unwrap();
        if let Some(text) = stdin {
            input.write_all(text.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

#[test]
fn same_seed_gives_identical_csvs() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["--method", "aa", "--chains", "16", "--max-stages", "4", "--runs", "2", "--seed", "9"];
    assert!(run_karate(a.path(), &args, None).status.success());
    assert!(run_karate(b.path(), &args, None).status.success());
    for f in ["stages.csv", "order.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let stages = read(&a.path().join("stages.csv"));
    assert!(
        stages.starts_with("run,stage,method,queried_vertex,frac_q_0.1,frac_q_0.3,frac_q_0.5,frac_q_0.7,frac_q_0.9\n")
    );
    assert_eq!(stages.lines().count(), 1 + 2 * 4);
    assert!(read(&a.path().join("order.csv")).starts_with("vertex,mean_stage,std_stage,n_runs\n"));
}

#[test]
fn full_karate_run_has_33_stages() {
    let out = TempDir::new().unwrap();
    let o = run_karate(out.path(), &["--method", "mi"], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stages = read(&out.path().join("stages.csv"));
    assert_eq!(stages.lines().count(), 1 + 33);
    let order = read(&out.path().join("order.csv"));
    assert_eq!(order.lines().count(), 1 + 34);
    assert!(order.trim_end().ends_with(",,,0"));
}

#[test]
fn missing_labels_is_an_input_error() {
    let out = TempDir::new().unwrap();
    let o = bin()
        .arg("run")
        .arg("--graph")
        .arg(data("karate.edges"))
        .args(["--labels", "/nonexistent/labels.tsv", "--k", "2", "--out"])
        .arg(out.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));

    let o = bin()
        .arg("run")
        .arg("--graph")
        .arg(data("karate.edges"))
        .args(["--k", "2", "--out"])
        .arg(out.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_flags_are_input_errors() {
    let out = TempDir::new().unwrap();
    for extra in [&["--thresholds", "0.9,0.5"][..], &["--chains", "3"], &["--k", "1"], &["--method", "pagerank"]] {
        let o = run_karate(out.path(), extra, None);
        assert_eq!(o.status.code(), Some(2), "{extra:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = bin().arg("analyze").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn interactive_transcript_replays_file_run() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["--method", "mi", "--max-stages", "5", "--seed", "3"];
    assert!(run_karate(a.path(), &args, None).status.success());
    let labels: std::collections::HashMap<String, String> = read(&data("karate.labels"))
        .lines()
        .filter_map(|l| l.split_once('\t'))
        .map(|(v, l)| (v.to_string(), l.to_string()))
        .collect();
    let transcript: String = read(&a.path().join("stages.csv"))
        .lines()
        .skip(1)
        .map(|row| format!("{}\n", labels[row.split(',').nth(3).unwrap()]))
        .collect();
    let mut with_oracle = args.to_vec();
    with_oracle.extend(["--oracle", "interactive"]);
    let o = run_karate(b.path(), &with_oracle, Some(&transcript));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&a.path().join("stages.csv")), read(&b.path().join("stages.csv")));
    let prompts = String::from_utf8(o.stdout).unwrap();
    assert_eq!(prompts.matches("label vertex ").count(), 5);
    assert!(prompts.contains("[known labels: MrHi, Officer]:"));
}

#[test]
fn eof_aborts_with_intact_log() {
    let out = TempDir::new().unwrap();
    let o = run_karate(out.path(), &["--method", "degree", "--oracle", "interactive"], Some(""));
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("end of input"));
    assert_eq!(read(&out.path().join("stages.csv")).lines().count(), 1);
    assert!(out.path().join("order.csv").exists());
}

#[test]
fn eof_mid_run_keeps_completed_stages() {
    let out = TempDir::new().unwrap();
    let o = run_karate(out.path(), &["--method", "degree", "--oracle", "interactive"], Some("MrHi\nOfficer\n"));
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(read(&out.path().join("stages.csv")).lines().count(), 1 + 2);
}

#[test]
fn analyze_single_and_pair() {
    let (a, b, out) = (TempDir::new().unwrap(), TempDir::new().unwrap(), TempDir::new().unwrap());
    assert!(run_karate(a.path(), &["--method", "degree", "--max-stages", "6", "--runs", "2"], None).status.success());
    assert!(run_karate(b.path(), &["--method", "random", "--max-stages", "6", "--runs", "2"], None).status.success());

    let single = TempDir::new().unwrap();
    let o = bin().arg("analyze").arg(a.path().join("stages.csv")).arg("--out").arg(single.path()).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let curves = read(&single.path().join("stages.curves.csv"));
    assert!(curves.starts_with("stage,n_runs,frac_q_0.1"));
    assert_eq!(curves.lines().count(), 1 + 6);
    // Degree runs query the same vertices in the same order.
    let order = read(&single.path().join("stages.order.csv"));
    assert!(order.lines().skip(1).all(|l| l.ends_with(",0,2")), "{order}");
    assert!(!single.path().join("correlation.csv").exists());

    let o = bin()
        .arg("analyze")
        .arg(a.path().join("stages.csv"))
        .arg(b.path().join("stages.csv"))
        .arg("--labels-a")
        .arg(data("karate.labels"))
        .arg("--labels-b")
        .arg(data("karate.labels"))
        .arg("--out")
        .arg(out.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.path().join("0-stages.curves.csv").exists());
    assert!(out.path().join("1-stages.order.csv").exists());
    let corr = read(&out.path().join("correlation.csv"));
    assert!(corr.starts_with("metric,value,n\npearson_mean_stage,"));
    assert!(corr.contains("\nami,1,34\n"), "{corr}");
}

#[test]
fn fixpoint_and_misfit() {
    let dir = TempDir::new().unwrap();
    let graph = dir.path().join("g.edges");
    let labels = dir.path().join("g.labels");
    fs::write(&graph, "a b\nd e\nd f\ne f\nc d\nc e\nc f\n").unwrap();
    fs::write(&labels, "a\tx\nb\tx\nc\tx\nd\ty\ne\ty\nf\ty\n").unwrap();

    let out = dir.path().join("fixed.labels");
    let report = dir.path().join("report.txt");
    let o = bin()
        .arg("fixpoint")
        .arg("--graph")
        .arg(&graph)
        .arg("--labels")
        .arg(&labels)
        .args(["--k", "2", "--out"])
        .arg(&out)
        .arg("--report")
        .arg(&report)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(&out).contains("c\ty\n"));
    assert_eq!(read(&report), "iterations 1\nchanged 1\nnet_changed 1\nconverged true\n");

    let again = bin()
        .arg("fixpoint")
        .arg("--graph")
        .arg(&graph)
        .arg("--labels")
        .arg(&out)
        .arg("--out")
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&again.stdout).starts_with("iterations 0\nchanged 0\n"));

    let csv = dir.path().join("misfit.csv");
    let o = bin()
        .arg("misfit")
        .arg("--graph")
        .arg(&graph)
        .arg("--labels")
        .arg(&labels)
        .arg("--out")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("mislabeled 1 of 6"));
    let rows = read(&csv);
    assert!(rows.starts_with("vertex,label,predicted,confidence,mislabeled\n"));
    assert!(rows.lines().any(|l| l.starts_with("c,x,y,") && l.ends_with(",true")));

    let o = bin()
        .arg("fixpoint")
        .arg("--graph")
        .arg(&graph)
        .arg("--labels")
        .arg(&labels)
        .args(["--k", "3", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_an_input_error() {
    let o = bin().env("NETAL_THREADS", "zero").args(["analyze", "x.csv"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
