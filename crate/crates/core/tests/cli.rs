use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sdreg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdreg"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

const CONFIG: &str = "\
# small synthetic run
problem = lr
algorithm = sdreg_lbfgs, sgd
synth_n = 200
synth_d = 4
folds = 2
monte_carlo_runs = 2
iterations = 100
batch_size = 10
";

#[test]
fn run_is_byte_identical_and_feeds_test_stats() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.cfg"), CONFIG).unwrap();
    for out in ["a", "b"] {
        let o = sdreg(&["run", "exp.cfg", "--out", out], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["records.tsv", "summary.tsv", "metadata.tsv", "series_acc_sgd.tsv"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        assert_eq!(a, fs::read(dir.path().join("b").join(name)).unwrap(), "{name}");
    }
    let o = sdreg(
        &[
            "test-stats",
            "a/records.tsv",
            "b/records.tsv",
            "--algorithm-a",
            "sdreg_lbfgs",
            "--algorithm-b",
            "sgd",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n\tsign_log10_p\twilcoxon_log10_p");
    assert!(lines[1].starts_with("4\t"));
}

#[test]
fn sweep_overrides_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.cfg"), CONFIG).unwrap();
    let o = sdreg(&["sweep", "exp.cfg", "--batch-sizes", "5,20", "--out", "s"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let series = fs::read_to_string(dir.path().join("s/series_nog_sdreg_lbfgs.tsv")).unwrap();
    let axis: Vec<&str> = series.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(axis, vec!["batch_size", "5", "20"]);
}

#[test]
fn gen_synth_writes_rows_and_prints_theta() {
    let dir = tempfile::tempdir().unwrap();
    let o = sdreg(&["gen-synth", "--n", "30", "--d", "3", "--seed", "4", "--out", "s.csv"], dir.path());
    assert!(o.status.success());
    let theta = String::from_utf8(o.stdout).unwrap();
    assert_eq!(theta.trim().split('\t').count(), 3);
    let rows = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(rows.lines().count(), 30);
    assert!(rows.lines().all(|l| l.split(',').count() == 4));
}

#[test]
fn errors_are_one_tagged_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "learning_rate = 3\n").unwrap();
    let o = sdreg(&["run", "bad.cfg"], dir.path());
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error\tconfig_error\t"), "{err}");

    let o = sdreg(&["run", "missing.cfg"], dir.path());
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error\tio_error\t"));
}
