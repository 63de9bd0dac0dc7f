use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use phi_sentinel::ingest::{load_dataset, save_dataset, LoadOptions};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_phi-sentinel");

fn run(args: &[&str]) -> Output {
    run_in(Path::new(env!("CARGO_TARGET_TMPDIR")), args)
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("PHI_SENTINEL_THREADS")
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn phi-sentinel")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// A small generated corpus and a model trained on it, built once.
struct Fixture {
    dir: PathBuf,
    corpus: PathBuf,
    model: PathBuf,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli_fixture");
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        let corpus = dir.join("corpus");
        let model = dir.join("model.json");
        let log = dir.join("loss.csv");
        let gen = run(&[
            "gen", "--output", p(&corpus), "--datasets", "2", "--columns", "80", "--rows", "150",
            "--phi-fraction", "0.2",
        ]);
        assert_eq!(code(&gen), 0, "{}", String::from_utf8_lossy(&gen.stderr));
        let train = run(&["train", "--input", p(&corpus), "--output", p(&model), "--log", p(&log)]);
        assert_eq!(code(&train), 0, "{}", String::from_utf8_lossy(&train.stderr));
        Fixture { dir, corpus, model }
    })
}

#[test]
fn train_writes_model_and_loss_log() {
    let f = fixture();
    let log = fs::read_to_string(f.dir.join("loss.csv")).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines[0], "round,loss");
    assert_eq!(lines.len(), 102);
    let first: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    let last: f64 = lines[101].split(',').nth(1).unwrap().parse().unwrap();
    assert!(last < first);
    let model: Value = serde_json::from_str(&fs::read_to_string(&f.model).unwrap()).unwrap();
    assert_eq!(model["trees"].as_array().unwrap().len(), 100);
}

#[test]
fn scan_writes_report() {
    let f = fixture();
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("report.json");
    let input = f.corpus.join("ehr_01.csv");
    let out = run(&["scan", "--input", p(&input), "--model", p(&f.model), "--output", p(&report)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["meta"]["k"], 1000);
    assert_eq!(v["meta"]["seed"], 42);
    assert_eq!(v["meta"]["threshold"], 0.5);
    assert_eq!(v["meta"]["model_hash"].as_str().unwrap().len(), 64);
    let columns = v["columns"].as_array().unwrap();
    assert_eq!(columns.len(), 40);
    assert!(columns.iter().any(|c| c["predicted"] == true));
    for c in columns {
        let (r, m, fin) = (
            c["prob_regex"].as_f64().unwrap(),
            c["prob_ml_calibrated"].as_f64().unwrap(),
            c["prob_final"].as_f64().unwrap(),
        );
        assert_eq!(fin, r.max(m));
    }
}

#[test]
fn scan_to_stdout_matches_file() {
    let f = fixture();
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("r.json");
    let input = f.corpus.join("ehr_02.csv");
    let a = run(&["scan", "--input", p(&input), "--model", p(&f.model)]);
    run(&["scan", "--input", p(&input), "--model", p(&f.model), "--output", p(&report)]);
    assert_eq!(String::from_utf8(a.stdout).unwrap(), fs::read_to_string(&report).unwrap());
}

#[test]
fn fail_on_phi_exits_two() {
    let f = fixture();
    let input = f.corpus.join("ehr_01.csv");
    let out = run(&["scan", "--input", p(&input), "--model", p(&f.model), "--fail-on-phi"]);
    assert_eq!(code(&out), 2);

    // The same file restricted to the columns that were not flagged passes.
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let keep: Vec<&str> = report["columns"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["predicted"] == false)
        .map(|c| c["column_name"].as_str().unwrap())
        .collect();
    let mut ds = load_dataset(&input, &LoadOptions::default()).unwrap();
    ds.columns.retain(|c| keep.contains(&c.name.as_str()));
    let tmp = tempfile::tempdir().unwrap();
    let clean = tmp.path().join("clean.csv");
    save_dataset(&ds, &clean).unwrap();
    let out = run(&["scan", "--input", p(&clean), "--model", p(&f.model), "--fail-on-phi"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn paranoid_flags_at_least_as_many() {
    let f = fixture();
    let input = f.corpus.join("ehr_01.csv");
    let count = |extra: &[&str]| {
        let mut args = vec!["scan", "--input", p(&input), "--model", p(&f.model)];
        args.extend_from_slice(extra);
        let v: Value = serde_json::from_slice(&run(&args).stdout).unwrap();
        assert_eq!(v["meta"]["threshold"], if extra.is_empty() { 0.5 } else { 0.2 });
        v["columns"].as_array().unwrap().iter().filter(|c| c["predicted"] == true).count()
    };
    assert!(count(&["--paranoid"]) >= count(&[]));
}

#[test]
fn evaluate_is_deterministic() {
    let f = fixture();
    let args = ["evaluate", "--input", p(&f.corpus), "--folds", "3"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    for row in ["Regex", "ML", "Ensemble"] {
        assert!(text.lines().any(|l| l.starts_with(row)), "{text}");
    }
    let json = &text[text.find('{').unwrap()..];
    let v: Value = serde_json::from_str(json).unwrap();
    assert_eq!(v["per_fold"].as_array().unwrap().len(), 3);
    assert!(v["summary"]["ensemble"]["mean"]["auroc"].as_f64().unwrap() > 0.5);
}

#[test]
fn thread_count_does_not_change_output() {
    let f = fixture();
    let tmp = tempfile::tempdir().unwrap();
    let (m1, m4) = (tmp.path().join("m1.json"), tmp.path().join("m4.json"));
    for (threads, model) in [("1", &m1), ("4", &m4)] {
        let out = run(&["--threads", threads, "train", "--input", p(&f.corpus), "--output", p(model), "--log", p(&tmp.path().join("l.csv"))]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(fs::read(&m1).unwrap(), fs::read(&m4).unwrap());

    let input = f.corpus.join("ehr_01.csv");
    let scan = |threads: &str| {
        run(&["--threads", threads, "scan", "--input", p(&input), "--model", p(&f.model), "--top", "2"]).stdout
    };
    assert_eq!(scan("1"), scan("3"));

    let env = Command::new(BIN)
        .args(["scan", "--input", p(&input), "--model", p(&f.model), "--top", "2"])
        .env("PHI_SENTINEL_THREADS", "2")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert_eq!(env.stdout, scan("1"));
}

#[test]
fn explain_outputs_json_text_and_csv() {
    let f = fixture();
    let tmp = tempfile::tempdir().unwrap();
    let (json, csv) = (tmp.path().join("e.json"), tmp.path().join("imp.csv"));
    let input = f.corpus.join("ehr_01.csv");
    let out = run(&[
        "explain", "--input", p(&input), "--model", p(&f.model), "--output", p(&json), "--csv", p(&csv),
        "--top-k", "5",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let cols = v.as_array().unwrap();
    assert_eq!(cols.len(), 40);
    for c in cols {
        let contrib = c["contributions"].as_array().unwrap();
        assert_eq!(contrib.len(), 5);
        let mags: Vec<f64> = contrib.iter().map(|x| x["value"].as_f64().unwrap().abs()).collect();
        assert!(mags.windows(2).all(|w| w[0] >= w[1]));
    }
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("rank"), "{text}");
    assert_eq!(text.lines().count(), 6);
    let csv = fs::read_to_string(&csv).unwrap();
    assert_eq!(csv.lines().count(), 50, "{csv}");
}

#[test]
fn explain_full_contributions_sum_to_margin() {
    let f = fixture();
    let input = f.corpus.join("ehr_02.csv");
    let out = run(&["explain", "--input", p(&input), "--model", p(&f.model), "--top-k", "49"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for c in v.as_array().unwrap() {
        let sum: f64 = c["contributions"].as_array().unwrap().iter().map(|x| x["value"].as_f64().unwrap()).sum();
        let margin = c["margin"].as_f64().unwrap();
        assert!((c["phi0"].as_f64().unwrap() + sum - margin).abs() < 1e-9);
    }
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(code(&run(&["scan", "--bogus"])), 64);
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&["scan", "--k", "many"])), 64);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn missing_required_values_are_usage_errors() {
    let f = fixture();
    assert_eq!(code(&run(&["scan", "--model", p(&f.model)])), 64);
    let input = f.corpus.join("ehr_01.csv");
    assert_eq!(code(&run(&["scan", "--input", p(&input)])), 64);
    assert_eq!(code(&run(&["--threads", "0", "scan", "--input", p(&input), "--model", p(&f.model)])), 64);
    assert_eq!(code(&run(&["scan", "--input", p(&input), "--model", p(&f.model), "--threshold", "1.5"])), 64);
}

#[test]
fn missing_files_exit_66() {
    let f = fixture();
    let input = f.corpus.join("ehr_01.csv");
    assert_eq!(code(&run(&["scan", "--input", "/nonexistent/x.csv", "--model", p(&f.model)])), 66);
    assert_eq!(code(&run(&["scan", "--input", p(&input), "--model", "/nonexistent/m.json"])), 66);
    assert_eq!(code(&run(&["--config", "/nonexistent/c.json", "gen", "--output", "x"])), 66);
}

#[test]
fn config_file_fills_in_and_flags_override() {
    let f = fixture();
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    let input = f.corpus.join("ehr_01.csv");
    let body = serde_json::json!({
        "input": p(&input), "model": p(&f.model), "k": 200, "seed": 7, "threshold": 0.3
    });
    fs::write(&cfg, body.to_string()).unwrap();

    let v: Value = serde_json::from_slice(&run(&["--config", p(&cfg), "scan"]).stdout).unwrap();
    assert_eq!(v["meta"]["k"], 200);
    assert_eq!(v["meta"]["seed"], 7);
    assert_eq!(v["meta"]["threshold"], 0.3);

    let v: Value = serde_json::from_slice(&run(&["--config", p(&cfg), "--k", "50", "scan", "--threshold", "0.6"]).stdout).unwrap();
    assert_eq!(v["meta"]["k"], 50);
    assert_eq!(v["meta"]["threshold"], 0.6);

    fs::write(&cfg, r#"{"kk": 3}"#).unwrap();
    assert_eq!(code(&run(&["--config", p(&cfg), "scan"])), 64);
}

#[test]
fn gen_is_deterministic_and_writes_only_under_output() {
    let tmp = tempfile::tempdir().unwrap();
    let work = tmp.path().join("work");
    fs::create_dir(&work).unwrap();
    let args = |dir: &Path| {
        run_in(&work, &["gen", "--output", p(dir), "--datasets", "2", "--columns", "30", "--rows", "40"])
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&args(&a)), 0);
    assert_eq!(code(&args(&b)), 0);
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 5);
    for n in &names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap());
    }
    assert_eq!(fs::read_dir(&work).unwrap().count(), 0);

    assert_eq!(code(&run(&["gen", "--output", p(&a), "--phi-fraction", "0.9"])), 64);
}

#[test]
fn delimiter_and_header_options() {
    let f = fixture();
    let tmp = tempfile::tempdir().unwrap();
    let tsv = tmp.path().join("d.tsv");
    let mut body = String::new();
    for i in 0..100 {
        body.push_str(&format!("{:03}-{:02}-{:04}\t{}\n", 100 + i, 10 + i % 80, 1000 + i * 7, i % 5));
    }
    fs::write(&tsv, body).unwrap();
    let out = run(&["--delimiter", "\t", "--no-header", "scan", "--input", p(&tsv), "--model", p(&f.model)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let cols = v["columns"].as_array().unwrap();
    assert_eq!(cols.len(), 2);
    assert_eq!(cols[0]["prob_regex"], 1.0);
    assert_eq!(cols[0]["predicted"], true);
}
