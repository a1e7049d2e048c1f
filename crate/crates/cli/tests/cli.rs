use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matern-torus"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(s: &str) -> serde_json::Value {
    serde_json::from_str(s).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn factorize_sample_validate() {
    let dir = tempfile::tempdir().unwrap();
    let factor = dir.path().join("f.tgrf");
    let summary = json(&ok(&[
        "factorize", "--d", "1", "--lambda", "0.5", "--nu", "1", "--h", "2^-6", "--gamma", "1.5",
        "--scheme", "expsmooth", "--out", p(&factor),
    ]));
    assert_eq!(summary["n"], 192);
    assert_eq!(summary["is_pd"], true);

    let batch = dir.path().join("b.tgrf");
    ok(&["sample", "--factor", p(&factor), "--count", "5", "--seed", "7", "--stream", "2", "--out", p(&batch)]);
    let bytes = std::fs::read(&batch).unwrap();
    assert_eq!(&bytes[..4], b"TGRF");
    let again = dir.path().join("b2.tgrf");
    ok(&["sample", "--factor", p(&factor), "--count", "5", "--seed", "7", "--stream", "2", "--out", p(&again)]);
    assert_eq!(bytes, std::fs::read(&again).unwrap());

    let csv = dir.path().join("b.csv");
    ok(&["sample", "--factor", p(&factor), "--count", "3", "--out", p(&csv), "--csv"]);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert_eq!(text.lines().next().unwrap().split(',').count(), 1 + 65);

    let report = json(&ok(&["validate", "--factor", p(&factor), "--count", "4000", "--seed", "3"]));
    assert_eq!(report["count"], 4000);
    assert!(report["lags"].as_array().unwrap().len() >= 5);
    assert!(report["pass"].is_boolean());
}

#[test]
fn classical_not_pd_refuses_to_sample() {
    let dir = tempfile::tempdir().unwrap();
    let factor = dir.path().join("f.tgrf");
    let summary = json(&ok(&[
        "factorize", "--d", "1", "--lambda", "0.5", "--nu", "1", "--h", "2^-10", "--gamma", "1",
        "--scheme", "classical", "--out", p(&factor),
    ]));
    assert_eq!(summary["is_pd"], false);
    let out = run(&["sample", "--factor", p(&factor), "--count", "2", "--out", p(&dir.path().join("x"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not positive semidefinite"));
}

#[test]
fn min_gamma_json() {
    let r = json(&ok(&[
        "min-gamma", "--d", "1", "--lambda", "0.5", "--nu", "1", "--h", "2^-6", "--scheme", "classical",
    ]));
    let n = r["n_star"].as_u64().unwrap();
    assert_eq!(r["gamma_star"].as_f64().unwrap(), n as f64 / 128.0);
    assert!(r["margin_below"].as_f64().unwrap() < 0.0);

    let out = run(&[
        "min-gamma", "--d", "1", "--lambda", "0.5", "--nu", "1", "--h", "2^-6", "--scheme", "classical",
        "--nmax-cap", "140",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no bracket"));
}

#[test]
fn bad_arguments_are_rejected() {
    for args in [
        &["factorize", "--d", "1", "--lambda", "0.5", "--nu", "1", "--h", "0.1", "--scheme", "classical", "--out", "x"][..],
        &["factorize", "--d", "1", "--lambda", "0.5", "--nu", "1", "--h", "0.1", "--n", "40", "--gamma", "2", "--scheme", "classical", "--out", "x"],
        &["factorize", "--d", "1", "--lambda", "0.5", "--nu", "1", "--h", "0.1", "--n", "40", "--scheme", "wavelet", "--out", "x"],
        &["min-gamma", "--d", "4", "--lambda", "0.5", "--nu", "1", "--h", "0.1", "--scheme", "classical"],
    ] {
        assert!(!run(args).status.success(), "{args:?} should fail");
    }
}

#[test]
fn sweeps_write_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fig3.json");
    let csv = dir.path().join("fig3.csv");
    let ck = dir.path().join("fig3.ck");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "runs": [{"d": 1, "nu_list": [0.25, 1.0, 4.0], "h_list": [0.03125],
                      "schemes": [{"kind": "bspline"}, {"kind": "expsmooth"}]}],
            "workers": 2,
            "output": {"csv": p(&csv), "checkpoint": p(&ck)}
        })
        .to_string(),
    )
    .unwrap();
    ok(&["fig3", "--config", p(&cfg), "--svg"]);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.contains("kind,d,nu,h,n_star,gamma_star,kappa_star,ref_nu_inv_sqrt,ref_sqrt_nu_log_nu,status"));
    assert_eq!(table.lines().filter(|l| l.ends_with(",ok")).count(), 6);
    let svg = std::fs::read_to_string(dir.path().join("fig3.svg")).unwrap();
    assert_eq!(svg.matches("class=\"series\"").count(), 2);
    // rerun from the checkpoint reproduces the bytes
    ok(&["fig3", "--config", p(&cfg), "--svg"]);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), table);

    let cfg2 = dir.path().join("fig2.json");
    std::fs::write(
        &cfg2,
        r#"{"runs": [{"d": 1, "nu_list": [1], "h_list": [0.03125, 0.015625], "schemes": [{"kind": "classical"}, {"kind": "expsmooth"}]}]}"#,
    )
    .unwrap();
    let stdout = ok(&["fig2", "--config", p(&cfg2)]);
    assert!(stdout.starts_with("# lambda="));
    assert_eq!(stdout.lines().filter(|l| l.ends_with(",ok")).count(), 4);
    // fig3 refuses a classical run
    assert!(!run(&["fig3", "--config", p(&cfg2)]).status.success());
    // empty h list
    std::fs::write(&cfg2, r#"{"runs": [{"d": 1, "nu_list": [1], "h_list": [], "schemes": [{"kind": "classical"}]}]}"#).unwrap();
    let out = run(&["fig2", "--config", p(&cfg2)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid config"));
}

#[test]
fn presets_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let s = ok(&["preset", "fig2", "--full-d3"]);
    let path = dir.path().join("c.json");
    std::fs::write(&path, &s).unwrap();
    let v = json(&s);
    assert_eq!(v["runs"][2]["h_list"].as_array().unwrap().len(), 3);
    assert_eq!(json(&ok(&["preset", "fig3"]))["runs"][0]["nu_list"].as_array().unwrap().len(), 11);
}

#[test]
fn eig_decay_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eig.csv");
    let fit = json(&ok(&[
        "eig-decay", "--d", "1", "--lambda", "0.5", "--nu", "1", "--h", "2^-9", "--n", "2048",
        "--scheme", "expsmooth", "--window", "32,512", "--out", p(&out),
    ]));
    let e = fit["fit"]["exponent"].as_f64().unwrap();
    assert!((e + 3.0).abs() < 0.15, "{e}");
    assert_eq!(fit["fit"]["window"], serde_json::json!([32, 512]));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("j,lambda_j,fit"));

    let bad = run(&[
        "eig-decay", "--d", "1", "--lambda", "0.5", "--nu", "1", "--h", "2^-9", "--n", "2048",
        "--scheme", "expsmooth", "--window", "100,500", "--out", p(&out),
    ]);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("degenerate fit"));

    let trend = dir.path().join("trend.csv");
    ok(&[
        "eig-decay", "--d", "1", "--lambda", "0.5", "--nu", "1", "--h", "2^-7", "--gamma", "3",
        "--scheme", "classical", "--out", p(&out), "--trend-h", "2^-6,2^-7,2^-8", "--trend-out", p(&trend),
    ]);
    let t = std::fs::read_to_string(&trend).unwrap();
    assert!(t.contains("# trend_slope="));
    assert_eq!(t.lines().filter(|l| !l.starts_with('#')).count(), 4);
}
