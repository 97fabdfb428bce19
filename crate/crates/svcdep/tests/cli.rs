use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
label_ratio = 0.5

[scenario]
steps = 300
tiers = { gateway = 1, middle = 2, backend = 2 }

[scenario.random_faults]
count = 3
min_duration = 10
max_duration = 20

[train]
epochs = 2
anchors_per_step = 16

[output]
rolling_window = 20
"#;

fn svcdep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svcdep")).args(args).output().unwrap()
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, format!("{SMALL}\n{extra}")).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn gen_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let run = |out: &str, seed: &str| {
        let o = svcdep(&["gen", "--config", &cfg, "--out", dir.path().join(out).to_str().unwrap(), "--seed", seed]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        read(&dir.path().join(out), "metrics.csv")
    };
    let (a, b, c) = (run("a", "4"), run("b", "4"), run("c", "5"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.starts_with("timestamp,service,cpu,mem,io,net_in,net_out,latency,error_rate,label\n"));
}

#[test]
fn e2e_writes_every_file_and_prints_the_reported_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("out");
    let o = svcdep(&["e2e", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["edges.csv", "metrics.csv", "checkpoint.json", "history.csv", "scores.csv", "report.csv", "rolling.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let history = read(&out, "history.csv");
    assert_eq!(history.lines().count(), 3);
    assert!(history.starts_with("epoch,total,contrast,temporal,seconds\n"));
    assert!(read(&out, "scores.csv").starts_with("service,timestamp,score,prediction,label\n"));

    let report = read(&out, "report.csv");
    let mut lines = report.lines();
    assert_eq!(lines.next().unwrap(), "precision,recall,f1,auc,tp,fp,tn,fn");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let printed = stdout(&o);
    let metrics = printed.lines().find(|l| l.starts_with("test precision")).unwrap();
    let f1: f64 = row[2].parse().unwrap();
    assert!(metrics.contains(&format!("f1 {f1:.4}")), "{metrics}");
    if let Ok(auc) = row[3].parse::<f64>() {
        assert!(metrics.contains(&format!("auc {auc:.4}")), "{metrics}");
    }
    assert!(metrics.contains(&format!("(tp {} fp {} tn {} fn {})", row[4], row[5], row[6], row[7])));
}

#[test]
fn eval_reproduces_the_e2e_report_from_its_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("out");
    let o = svcdep(&["e2e", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let first = read(&out, "report.csv");
    let ck = out.join("checkpoint.json");
    let moved = dir.path().join("model.json");
    fs::rename(&ck, &moved).unwrap();
    let o = svcdep(&["eval", "--config", &cfg, "--out", out.to_str().unwrap(), "--checkpoint", moved.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&out, "report.csv"), first);
}

#[test]
fn train_on_files_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let data = dir.path().join("data");
    assert!(svcdep(&["gen", "--config", &cfg, "--out", data.to_str().unwrap()]).status.success());
    let with_files = write_config(dir.path(), "[paths]\nedges = \"data/edges.csv\"\nmetrics = \"data/metrics.csv\"\nout = \"model\"\n");
    let o = svcdep(&["train", "--config", &with_files]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("trained 2 epochs"));
    let o = svcdep(&["eval", "--config", &with_files]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("model/report.csv").exists());
}

#[test]
fn sweep_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("sweep");
    let o = svcdep(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--knob", "gcn_layers", "--grid", "0,1", "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&out, "sweep.csv");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "gcn_layers,precision,recall,f1,auc,tp,fp,tn,fn");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0,") && lines[2].starts_with("1,"));
}

#[test]
fn config_problems_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = write_config(dir.path(), "[paths]\nedges = \"nope.csv\"\nmetrics = \"nope.csv\"\n");
    let o = svcdep(&["train", "--config", &missing]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.csv"));

    let typo = dir.path().join("typo.toml");
    fs::write(&typo, "[train]\nepoch = 3\n").unwrap();
    assert_eq!(svcdep(&["train", "--config", typo.to_str().unwrap()]).status.code(), Some(1));

    assert_eq!(svcdep(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(svcdep(&["sweep", "--knob", "nonsense", "--grid", "1"]).status.code(), Some(1));
    let no_ck = dir.path().join("empty");
    let cfg = write_config(dir.path(), "");
    assert_eq!(svcdep(&["eval", "--config", &cfg, "--out", no_ck.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn diverging_training_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let text = fs::read_to_string(&cfg).unwrap().replace("epochs = 2", "epochs = 2\nlearning_rate = 1e300\noptimizer = \"sgd_momentum\"");
    fs::write(&cfg, text).unwrap();
    let o = svcdep(&["train", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}
