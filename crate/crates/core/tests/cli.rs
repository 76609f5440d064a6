use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_load-forecast"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_series(path: &Path, n: usize) {
    let mut s = String::from("timestamp,load\n");
    for t in 0..n {
        let v = 100.0 + 25.0 * (std::f64::consts::TAU * t as f64 / 96.0).sin() + 4.0 * (t as f64 * 0.7).cos();
        s.push_str(&format!("2024-01-01 00:{t:04},{v}\n"));
    }
    fs::write(path, s).unwrap();
}

const SMALL: &str = "run_count=2\nsynthetic.length=300\npso.population=6\npso.iterations=4\nelm.hidden_count=12\n";

#[test]
fn experiment_writes_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, SMALL).unwrap();
    let out = dir.path().join("results");
    let o = run(&["experiment", "--config", cfg.to_str().unwrap(), "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["metrics.csv", "predictions.csv", "config_echo.cfg", "predictions_elm.csv", "predictions_vmd_ipso_elm.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let rows: Vec<&str> = metrics.lines().collect();
    assert_eq!(rows[0], "model,mape_max,mape_min,mape_mean,rmse_mean");
    assert_eq!(rows.len(), 5);
    assert!(rows[4].starts_with("vmd_ipso_elm,"));
    let preds = fs::read_to_string(out.join("predictions.csv")).unwrap();
    assert_eq!(preds.lines().next(), Some("index,actual,predicted"));
    assert_eq!(preds, fs::read_to_string(out.join("predictions_vmd_ipso_elm.csv")).unwrap());
    let warnings = fs::read_to_string(out.join("warnings.txt")).unwrap();
    assert!(warnings.contains("vmd_ipso_elm: decomposition runs on the full series"));
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, "models=elm,pso_elm\n".to_string() + SMALL).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&run(&["experiment", "--config", cfg.to_str().unwrap(), "--seed", "3", "--out", a.to_str().unwrap()])), 0);
    let echo = a.join("config_echo.cfg");
    assert_eq!(code(&run(&["experiment", "--config", echo.to_str().unwrap(), "--seed", "3", "--out", b.to_str().unwrap()])), 0);
    for f in ["metrics.csv", "predictions.csv", "config_echo.cfg"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn set_overrides_take_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, "models=elm\nrun_count=5\n".to_string() + "synthetic.length=300\n").unwrap();
    let out = dir.path().join("o");
    let o = run(&[
        "experiment", "--config", cfg.to_str().unwrap(), "--set", "run_count=1", "--seed", "1", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let echo = fs::read_to_string(out.join("config_echo.cfg")).unwrap();
    assert!(echo.lines().any(|l| l == "run_count=1"));
    assert!(echo.lines().any(|l| l == "base_seed=1"));
}

#[test]
fn decompose_writes_one_column_per_mode() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("load.csv");
    write_series(&input, 300);
    let out = dir.path().join("modes");
    let o = run(&["decompose", "--input", input.to_str().unwrap(), "--set", "vmd.mode_count=7", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("imf.csv")).unwrap();
    let mut lines = text.lines();
    let freqs = lines.next().unwrap();
    assert!(freqs.starts_with("# center_frequencies="));
    assert_eq!(freqs.split(',').count(), 7);
    assert_eq!(lines.next().unwrap(), "imf1,imf2,imf3,imf4,imf5,imf6,imf7");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 300);
    assert!(rows.iter().all(|r| r.split(',').count() == 7));
}

#[test]
fn partition_writes_low_and_high() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("load.csv");
    write_series(&input, 200);
    let out = dir.path().join("p");
    let o = run(&["partition", "--input", input.to_str().unwrap(), "--set", "vmd.mode_count=4", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(out.join("partition.csv")).unwrap();
    assert!(text.starts_with("# boundary_index="));
    assert!(text.contains("\nlow,high\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 201);
}

#[test]
fn train_then_forecast() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("load.csv");
    write_series(&input, 250);
    let m = dir.path().join("m");
    let o = run(&[
        "train", "--input", input.to_str().unwrap(), "--model", "ipso-elm", "--seed", "5", "--set", "pso.population=5",
        "--set", "pso.iterations=3", "--out", m.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let model = fs::read_to_string(m.join("model.elm")).unwrap();
    assert!(model.contains("model=ipso_elm") && model.contains("lag_count=7"));
    let f = dir.path().join("f");
    let o = run(&["forecast", "--input", input.to_str().unwrap(), "--model", m.join("model.elm").to_str().unwrap(), "--out", f.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let preds = fs::read_to_string(f.join("predictions.csv")).unwrap();
    assert_eq!(preds.lines().count(), 1 + 250 - 7);
    let stdout = String::from_utf8_lossy(&o.stdout);
    let mape: f64 = stdout.lines().find_map(|l| l.strip_prefix("mape=")).unwrap().parse().unwrap();
    assert!(mape < 5.0, "{mape}");
}

#[test]
fn plot_renders_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p.csv");
    fs::write(&csv, "index,actual,predicted\n0,1,1.1\n1,2,1.9\n2,3,3.2\n").unwrap();
    let out = dir.path().join("plot");
    assert_eq!(code(&run(&["plot", "--input", csv.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    let svg = fs::read_to_string(out.join("plot.svg")).unwrap();
    assert!(svg.contains("<polyline") && svg.contains(">predicted</text>"));
}

#[test]
fn usage_errors_exit_one_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("none");
    let o = out.clone();
    let cases: Vec<Vec<&str>> = vec![
        vec!["experiment", "--out", o.to_str().unwrap()],
        vec!["experiment", "--seed", "1", "--set", "nope=1", "--out", o.to_str().unwrap()],
        vec!["experiment", "--seed", "1", "--set", "run_count=0", "--out", o.to_str().unwrap()],
        vec!["experiment", "--seed", "1", "--config", "/no/such.cfg", "--out", o.to_str().unwrap()],
        vec!["train", "--input", "x.csv", "--out", o.to_str().unwrap()],
        vec!["transmogrify"],
        vec!["plot", "--input", "x.csv", "--bogus", "--out", o.to_str().unwrap()],
    ];
    for args in cases {
        let r = run(&args);
        assert_eq!(code(&r), 1, "{args:?}");
        assert!(!r.stderr.is_empty());
        assert!(!out.exists(), "{args:?}");
    }
}

#[test]
fn runtime_errors_exit_two_and_clean_up() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let r = run(&["decompose", "--input", "/no/such.csv", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&r), 2);
    assert!(!out.exists());

    // predictions.csv cannot be written because a directory holds its name
    fs::create_dir_all(out.join("predictions.csv")).unwrap();
    let r = run(&[
        "experiment", "--seed", "1", "--set", "models=elm", "--set", "run_count=1", "--set", "synthetic.length=200", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 2, "{}", String::from_utf8_lossy(&r.stderr));
    assert!(!out.join("metrics.csv").exists());
}

#[test]
fn help_exits_zero() {
    let r = run(&["--help"]);
    assert_eq!(code(&r), 0);
    let text = String::from_utf8_lossy(&r.stdout);
    for sub in ["decompose", "partition", "train", "forecast", "experiment", "plot"] {
        assert!(text.contains(sub), "{sub}");
    }
}
