use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn toy() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/toy")
}

fn qpp(args: &[&str], out: &Path) -> Output {
    let conf = toy().join("toy.conf");
    Command::new(env!("CARGO_BIN_EXE_qpp"))
        .arg("--config")
        .arg(&conf)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str], out: &Path) -> String {
    let o = qpp(args, out);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn index_then_predict_from_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let stdout = ok(&["index"], d);
    assert!(stdout.contains("indexed 36 documents"), "{stdout}");
    let index = d.join("index.bin");
    assert!(index.exists());
    assert!(read(d, "index_stats.tsv").lines().count() > 10);

    let snap = d.join("snap");
    ok(&["predict-pre", "--index", index.to_str().unwrap()], &snap);
    ok(&["predict-pre"], d);
    assert_eq!(read(&snap, "pre.tsv"), read(d, "pre.tsv"));
    let pre = read(d, "pre.tsv");
    assert_eq!(pre.lines().count(), 13);
    assert!(pre.starts_with("query_id\t"));

    ok(&["predict-post"], d);
    let post = read(d, "post.tsv");
    assert_eq!(post.lines().count(), 13);
    assert!(post.lines().next().unwrap().contains("Clarity"));
}

#[test]
fn retrieve_writes_run_and_ap() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["retrieve"], dir.path());
    let run = read(dir.path(), "run.txt");
    let first = run.lines().next().unwrap();
    let fields: Vec<&str> = first.split_whitespace().collect();
    assert_eq!(fields.len(), 6);
    assert_eq!((fields[0], fields[1], fields[3]), ("q01", "Q0", "1"));
    let ap = read(dir.path(), "ap.tsv");
    assert_eq!(ap.lines().count(), 13);
    assert!(ap.lines().any(|l| l == "q04\t1"), "{ap}");
}

#[test]
fn experiment_then_fuse_evaluate_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let stdout = ok(&["experiment", "--repeats", "4"], d);
    assert!(stdout.contains("regime"), "{stdout}");
    for f in ["config.txt", "run.txt", "scores.tsv", "splits.tsv", "report.tsv", "hypotheses.tsv"] {
        assert!(d.join(f).exists(), "{f} missing");
    }
    assert!(read(d, "splits.tsv").lines().count() > 1);

    let scores = d.join("scores.tsv");
    let s = scores.to_str().unwrap();
    let stdout = ok(&["fuse", "--train", s, "--test", s, "--combiner", "lasso-cv", "--features", "SumSCQ,Clarity,NQC"], d);
    assert!(stdout.contains("LASSO-CV"), "{stdout}");
    let model = read(d, "model.txt");
    assert!(model.contains("Clarity"));
    assert_eq!(read(d, "predictions.tsv").lines().count(), 13);

    ok(&["evaluate", "--scores", s], d);
    assert!(read(d, "report.tsv").lines().count() >= 17);
    ok(&["heatmap", "--scores", s, "--metric", "kendall"], d);
    assert!(d.join("corr_kendall.tsv").exists());
}

#[test]
fn seed_flag_changes_splits_only() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(&["experiment", "--repeats", "3"], a.path());
    ok(&["--seed", "99", "experiment", "--repeats", "3"], b.path());
    assert_ne!(read(a.path(), "splits.tsv"), read(b.path(), "splits.tsv"));
    assert_eq!(read(a.path(), "scores.tsv"), read(b.path(), "scores.tsv"));
}

#[test]
fn errors_exit_nonzero_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpp(&["fuse", "--train", "/nonexistent/scores.tsv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let o = qpp(&["experiment", "--protocol", "bogus"], dir.path());
    assert_eq!(o.status.code(), Some(1));

    let o = qpp(&["experiment", "--repeats", "0"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--repeats"));

    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "retrieval.mu = 1000\nretrieval.muu = 3\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qpp"))
        .args(["--config", bad.to_str().unwrap(), "index"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("retrieval.muu"));
}
