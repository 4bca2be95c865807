use std::path::Path;
use std::process::{Command, Output};

use ensemble_fs::dataset::{load_csv_with, LoadOptions, Schema};
use ensemble_fs::evaluation::EvaluationReport;

const SMALL: &str = r#"
seed = 8

[synth]
n_rows = 240
n_informative = 2
n_noise = 4
n_redundant = 1
flip_prob = 0.02

[rf]
n_trees = 8

[selector.importance]
n_trees = 8

[selector.sbs]
folds = 3

[selector.sbs.learner]
learner = "rf"
n_trees = 5
"#;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ensemble-fs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_writes_the_report_set() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let o = bin(&["run", "--config", p(&cfg), "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["manifest.json", "report.json", "cv_curves.csv", "heuristic_curves.csv", "timing.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let report =
        EvaluationReport::from_json(&std::fs::read_to_string(out.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report.manifest.master_seed, 8);
    let curves = std::fs::read_to_string(out.join("heuristic_curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 1 + report.candidates.len());
}

#[test]
fn staged_commands_match_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), SMALL);
    let whole = tmp.path().join("whole");
    assert!(bin(&["run", "--config", p(&cfg), "--out", p(&whole)]).status.success());

    let pre = tmp.path().join("pre.json");
    assert!(bin(&["prefilter", "--config", p(&cfg), "--out", p(&pre)]).status.success());
    let traces = tmp.path().join("traces");
    // two invocations, as if on separate machines
    for sels in [&["rfe", "sbs"][..], &["univariate", "importance"][..]] {
        let mut args = vec!["trace", "--config", p(&cfg), "--prefilter", p(&pre), "--out", p(&traces)];
        for s in sels {
            args.extend(["--selector", s]);
        }
        let o = bin(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let staged = tmp.path().join("staged");
    let files: Vec<String> = ["importance", "univariate", "sbs", "rfe"]
        .iter()
        .map(|s| traces.join(format!("trace_{s}.json")).to_str().unwrap().to_string())
        .collect();
    let mut args = vec!["combine", "--config", p(&cfg), "--prefilter", p(&pre), "--out", p(&staged), "--traces"];
    args.extend(files.iter().map(String::as_str));
    let o = bin(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    for f in ["heuristic_curves.csv", "trajectories.csv", "cv_curves.csv"] {
        assert_eq!(
            std::fs::read(whole.join(f)).unwrap(),
            std::fs::read(staged.join(f)).unwrap(),
            "{f}"
        );
    }
    let strip = |dir: &Path| {
        let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
        EvaluationReport::from_json(&text).unwrap().without_timing()
    };
    assert_eq!(strip(&whole), strip(&staged));
}

#[test]
fn usage_errors() {
    let o = bin(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).to_lowercase().contains("usage"));
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
    assert_eq!(bin(&["run"]).status.code(), Some(1));
}

#[test]
fn failures_leave_no_output() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = config(tmp.path(), "seed = 1\nbogus_key = 3\n");
    let out = tmp.path().join("out");
    let o = bin(&["run", "--config", p(&bad), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());

    let data = tmp.path().join("d");
    std::fs::create_dir(&data).unwrap();
    std::fs::write(data.join("train.csv"), "a,b,label\n0.1,0.2,0\n0.3,oops,1\n").unwrap();
    std::fs::write(data.join("test.csv"), "a,b,label\n0.1,0.2,0\n").unwrap();
    let cfg = config(
        tmp.path(),
        &format!(
            "seed = 1\n[data]\ntrain = \"{}\"\ntest = \"{}\"\n",
            p(&data.join("train.csv")),
            p(&data.join("test.csv"))
        ),
    );
    let o = bin(&["run", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("row 3") && err.contains("[load]"), "{err}");
    assert!(!out.exists());

    let missing = tmp.path().join("nope.json");
    let o = bin(&["prefilter", "--config", p(&cfg), "--out", p(&missing)]);
    assert_ne!(o.status.code(), Some(0));
    assert!(!missing.exists());
}

#[test]
fn synth_files_load_back() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s");
    let o = bin(&[
        "synth", "--out", p(&out), "--rows", "200", "--informative", "2", "--noise", "3",
        "--redundant", "1", "--seed", "5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let schema = Schema::from_file(out.join("schema.txt")).unwrap();
    let train = load_csv_with(out.join("train.csv"), &schema, "label", &LoadOptions::default()).unwrap();
    assert_eq!(train.n_rows(), 200);
    assert_eq!(train.n_features(), 6);
    let (neg, pos) = train.class_counts();
    assert!(neg > 0 && pos > 0);

    // the generated files drive a run through [data]
    let cfg = config(
        tmp.path(),
        &format!(
            "seed = 2\n[data]\ntrain = \"{}\"\ntest = \"{}\"\nschema = \"{}\"\n[rf]\nn_trees = 5\n\
             [selector.importance]\nn_trees = 5\n[selector.sbs.learner]\nlearner = \"lr\"\niterations = 50\n",
            p(&out.join("train.csv")),
            p(&out.join("test.csv")),
            p(&out.join("schema.txt"))
        ),
    );
    let run = tmp.path().join("run");
    let o = bin(&["run", "--config", p(&cfg), "--out", p(&run)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let ev = tmp.path().join("ev.json");
    let o = bin(&["evaluate", "--config", p(&cfg), "--features", "inf_0,inf_1", "--out", p(&ev)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&ev).unwrap();
    assert!(text.contains("inf_1"));
}
