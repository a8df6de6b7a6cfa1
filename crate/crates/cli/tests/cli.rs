use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ktbench(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ktbench"))
        .args(args)
        .current_dir(cwd)
        .env_remove("KTBENCH_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(dir: &Path, students: &str) -> PathBuf {
    let o = ktbench(&["synth", "--out", "data", "--students", students, "--attempts", "40"], dir);
    assert!(o.status.success(), "{}", stderr(&o));
    dir.join("data/synthetic.csv")
}

const QUICK: [&str; 6] = ["--epochs", "1", "--hidden", "6", "--cell", "vanilla"];

fn read_tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn ingest_assistments_export() {
    let dir = tempfile::tempdir().unwrap();
    let raw = "order_id,user_id,problem_id,skill_id,correct,original\n\
               1,u1,p1,10,1,1\n\
               1,u1,p1,10,1,1\n\
               2,u1,p2,11,0,1\n\
               3,u1,p2,11,1,1\n\
               4,u2,p1,10,0,1\n\
               5,u2,p3,12,1,0\n\
               6,u2,p4,,1,1\n";
    fs::write(dir.path().join("raw.csv"), raw).unwrap();
    let o = ktbench(&["ingest", "--data", "raw.csv", "--out", "clean.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("rows kept      3"), "{text}");
    let dropped: usize = text
        .lines()
        .find(|l| l.starts_with("rows dropped"))
        .and_then(|l| l.split_whitespace().nth(2))
        .unwrap()
        .parse()
        .unwrap();
    assert!(dropped > 0);
    let canonical = fs::read_to_string(dir.path().join("clean.csv")).unwrap();
    assert_eq!(canonical.lines().count(), 4);
    assert!(canonical.starts_with("order,student,item,skill,correct"));
}

#[test]
fn missing_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = ktbench(&["ingest", "--data", "absent.csv", "--out", "x.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent.csv"));
    let o = ktbench(&["run", "--data", "absent.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bkt_run_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "60");
    let o = ktbench(
        &["run", "--data", "data/synthetic.csv", "--format", "canonical", "--model", "bkt", "--out", "r"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("r/report.csv")).unwrap();
    let rows: Vec<&str> = report.lines().skip(1).collect();
    assert_eq!(rows.iter().filter(|r| !r.contains(",all,")).count(), 5);
    let all = rows.iter().find(|r| r.contains(",all,")).unwrap();
    let auc: f64 = all.split(',').nth(3).unwrap().parse().unwrap();
    assert!(auc > 0.5, "{all}");
    for f in ["config.txt", "report.json", "predictions.csv", "models/bkt-fold0.csv"] {
        assert!(dir.path().join("r").join(f).exists(), "{f}");
    }
}

#[test]
fn single_cluster_and_repeatable_outputs() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "40");
    let mut args = vec!["run", "--data", "data/synthetic.csv", "--model", "dktdsc", "--clusters", "1"];
    args.extend(QUICK);
    let a: Vec<&str> = args.iter().copied().chain(["--out", "a"]).collect();
    let b: Vec<&str> = args.iter().copied().chain(["--out", "b"]).collect();
    assert!(ktbench(&a, dir.path()).status.success());
    assert!(ktbench(&b, dir.path()).status.success());
    let ta = read_tree(&dir.path().join("a"));
    let tb = read_tree(&dir.path().join("b"));
    assert!(ta.iter().any(|(p, _)| p.ends_with("dktdsc-fold0.clusters.csv")));
    assert_eq!(ta.len(), tb.len());
    for ((pa, da), (pb, db)) in ta.iter().zip(&tb) {
        assert_eq!(pa, pb);
        if pa.ends_with("config.txt") {
            continue;
        }
        assert!(da == db, "{} differs", pa.display());
    }
}

#[test]
fn config_snapshot_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "40");
    let mut args = vec!["run", "--data", "data/synthetic.csv", "--model", "dkt,pfa", "--seed", "7", "--out", "a"];
    args.extend(QUICK);
    assert!(ktbench(&args, dir.path()).status.success());
    let snapshot = fs::read_to_string(dir.path().join("a/config.txt")).unwrap();
    assert!(snapshot.contains("seed=7") && snapshot.contains("epochs=1"));
    fs::write(dir.path().join("again.cfg"), snapshot.replace("out=a", "out=b")).unwrap();
    assert!(ktbench(&["run", "--config", "again.cfg"], dir.path()).status.success());
    assert_eq!(
        fs::read(dir.path().join("a/report.json")).unwrap(),
        fs::read(dir.path().join("b/report.json")).unwrap()
    );
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "30");
    let o = Command::new(env!("CARGO_BIN_EXE_ktbench"))
        .args(["run", "--data", "data/synthetic.csv", "--model", "bkt", "--out", "r"])
        .current_dir(dir.path())
        .env("KTBENCH_SEED", "42")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read_to_string(dir.path().join("r/config.txt")).unwrap().contains("seed=42"));
}

#[test]
fn sweeps_have_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "40");
    for (axis, first) in [("interval", "interval_len,"), ("clusters", "clusters,")] {
        let mut args = vec![
            "sweep",
            "--data",
            "data/synthetic.csv",
            "--axis",
            axis,
            "--groups",
            "data/groups.csv",
            "--out",
            "s",
        ];
        args.extend(QUICK);
        let o = ktbench(&args, dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        let name = format!("s/sweep-{}.csv", if axis == "interval" { "interval_len" } else { "clusters" });
        let table = fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(table.starts_with(first));
        assert_eq!(table.lines().count(), 5);
    }
    let o = ktbench(&["sweep", "--data", "data/synthetic.csv", "--axis", "depth"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn synth_files_and_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = ktbench(&["synth", "--out", "a"], dir.path());
    assert!(o.status.success());
    assert!(dir.path().join("a/synthetic.csv").exists() && dir.path().join("a/groups.csv").exists());
    assert!(ktbench(&["synth", "--out", "b", "--seed", "18"], dir.path()).status.success());
    assert_ne!(
        fs::read(dir.path().join("a/synthetic.csv")).unwrap(),
        fs::read(dir.path().join("b/synthetic.csv")).unwrap()
    );
    let o = ktbench(&["synth", "--out", "c", "--students", "0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn full_mode_needs_a_known_dataset() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "30");
    let o = ktbench(&["run", "--data", "data/synthetic.csv", "--full"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("assistments09"));
}

#[test]
fn check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = ktbench(&["check"], dir.path());
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("[PASS]")));
}
