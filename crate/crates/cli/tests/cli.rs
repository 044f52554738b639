use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn adlrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adlrec")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn synth_then_featurize_gives_one_row_per_capture() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let table = dir.path().join("features.csv");
    let o = adlrec(&["synth", "--per-class", "10", "--out-dir", p(&corpus), "--seed", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_dir(&corpus).unwrap().count(), 50);

    let o = adlrec(&["featurize", "--in-dir", p(&corpus), "--out", p(&table)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&table).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("d1,d2,d3,d4,d5,"));
    assert_eq!(lines.count(), 50);
}

#[test]
fn invalid_capture_aborts_unless_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let table = dir.path().join("f.csv");
    assert!(adlrec(&["synth", "--per-class", "2", "--out-dir", p(&corpus)]).status.success());
    fs::write(corpus.join("zz_broken.txt"), "# adl=walking rate_hz=100\n0,1,2\n").unwrap();

    let o = adlrec(&["featurize", "--in-dir", p(&corpus), "--out", p(&table)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.starts_with("error: MalformedLine:"), "{err}");
    assert!(err.contains("zz_broken.txt"));

    let o = adlrec(&["featurize", "--in-dir", p(&corpus), "--out", p(&table), "--skip-invalid"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&table).unwrap().lines().count(), 11);
}

#[test]
fn help_and_usage_errors() {
    let o = adlrec(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("gradcheck"));
    let o = adlrec(&["grid", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: Usage:"));
    let o = adlrec(&["train", "--preset", "lstm"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let o = adlrec(&["train", "--features", p(&missing), "--out", p(&dir.path().join("m"))]);
    assert_eq!(o.status.code(), Some(1));
    let o = adlrec(&["train", "--out", p(&dir.path().join("m"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: MissingArgument:"));

    let model = dir.path().join("bad.bin");
    fs::write(&model, b"NOTAMODEL-------").unwrap();
    let o = adlrec(&["eval", "--model", p(&model), "--features", p(&missing)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: BadMagic:"), "{}", stderr(&o));
}

#[test]
fn divergent_training_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    let table = dir.path().join("f.csv");
    assert!(adlrec(&["synth", "--per-class", "5", "--out-dir", p(&corpus)]).status.success());
    assert!(adlrec(&["featurize", "--in-dir", p(&corpus), "--out", p(&table)]).status.success());
    let o = adlrec(&[
        "train", "--features", p(&table), "--norm", "raw", "--learning-rate", "1e6", "--budget", "2000", "--out",
        p(&dir.path().join("m")),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error: NonFiniteLoss:"));
}

#[test]
fn train_then_eval_reports_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    let table = dir.path().join("f.csv");
    let model = dir.path().join("m.bin");
    let eval = dir.path().join("eval.csv");
    assert!(adlrec(&["synth", "--per-class", "20", "--out-dir", p(&corpus)]).status.success());
    assert!(adlrec(&["featurize", "--in-dir", p(&corpus), "--out", p(&table)]).status.success());
    let o = adlrec(&["train", "--features", p(&table), "--budget", "4000", "--seed", "3", "--out", p(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = adlrec(&["eval", "--model", p(&model), "--features", p(&table), "--seed", "3", "--out-csv", p(&eval)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    let acc: f64 = out.lines().next().unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(acc > 0.6, "{out}");
    let written = fs::read_to_string(&eval).unwrap();
    assert_eq!(written.lines().count(), 7);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let corpus = dir.path().join("corpus");
    fs::write(&cfg, format!("# test run\ncorpus_dir = {}\nper_class = 3\nseed = 8\n", p(&corpus))).unwrap();
    let o = adlrec(&["synth", "--config", p(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_dir(&corpus).unwrap().count(), 15);
    let o = adlrec(&["synth", "--config", p(&cfg), "--per-class", "4"]);
    assert!(o.status.success());
    assert_eq!(fs::read_dir(&corpus).unwrap().count(), 20);
}

#[test]
fn gradcheck_deep_passes() {
    let o = adlrec(&["gradcheck", "--preset", "deep", "--trials", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("ok: worst relative error"));
}

#[test]
fn small_grid_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = adlrec(&[
            "grid", "--synth-per-class", "15", "--seed", "5", "--budgets", "500,1000", "--variants", "D4,D5",
            "--out-dir", p(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let (a, b) = (run("a"), run("b"));
    let mut names: Vec<String> =
        fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names.len(), 8);
    for n in &names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n}");
    }
    let grid = fs::read_to_string(a.join("grid.csv")).unwrap();
    assert!(grid.starts_with("# warning: IncompleteGrid: 24 of 90 cells evaluated\n"));
    assert_eq!(grid.lines().filter(|l| !l.starts_with('#')).count(), 25);
}
