use std::path::Path;
use std::process::Command;

use volarb::bs_arb::profit_split;
use volarb::commands::{cmd_backtest, cmd_bf_rr, cmd_margin, cmd_strikes, exit_code, strike_solution, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC};
use volarb::config::{RunConfig, StrikeMethod};

const SABR_BLOCK: &str = r#"{
  "truth": {"sigma": 0.2, "b": 0.3, "rho": -0.3},
  "market": {"model": "sabr", "b_tilde": 0.1, "rho_tilde": -0.5},
  "state": {"spot": 1.0, "y": 0.2},
  "tau": 1.0,
  "strikes": {"b_tilde_grid": [0.0, 0.01, 0.05, 0.1]}
}"#;

const BS_BLOCK: &str = r#"{
  "truth": {"sigma": 0.25, "b": 0.4, "rho": -0.5},
  "state": {"spot": 100.0, "y": 0.2},
  "tau": 0.25
}"#;

const BACKTEST: &str = r#"{
  "truth": {"sigma": 0.1, "b": 0.2, "rho": -0.8},
  "market": {"model": "sabr", "b_tilde": 0.2, "rho_tilde": -0.2},
  "backtest": {"n_paths": 12, "n_rebalance": 8, "horizon": 0.25, "seed": 3}
}"#;

fn volarb(args: &[&str], config: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_volarb"))
        .args(args)
        .arg("--config")
        .arg(config)
        .env_remove("VOLARB_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn strikes_table_matches_library() {
    let cfg = RunConfig::from_json(SABR_BLOCK).unwrap();
    let t = cmd_strikes(&cfg).unwrap();
    assert_eq!(t.rows.len(), 4 * 3);
    let mut i = 0;
    for b in [0.0, 0.01, 0.05, 0.1] {
        for m in [StrikeMethod::ClosedForm, StrikeMethod::Numerical, StrikeMethod::Perturbed] {
            let s = strike_solution(&cfg, m, b).unwrap();
            let row = &t.rows[i];
            assert_eq!(row[0], b.to_string());
            assert_eq!(row[2], s.k1.to_string());
            assert_eq!(row[3], s.k2.to_string());
            assert_eq!(row[9], s.profit_rate.to_string());
            i += 1;
        }
    }
    // without market vol-of-vol every method lands on the same strikes
    let k1: Vec<f64> = t.column("k1").unwrap()[..3].iter().map(|x| x.parse().unwrap()).collect();
    assert!(k1.iter().all(|k| (k / k1[0] - 1.0).abs() < 1e-5), "{k1:?}");
}

#[test]
fn bf_rr_table() {
    let cfg = RunConfig::from_json(BS_BLOCK).unwrap();
    let t = cmd_bf_rr(&cfg).unwrap();
    let p = profit_split(&cfg.state.unwrap(), &cfg.truth, 0.25).unwrap();
    assert_eq!(t.column("p_opt").unwrap()[0], p.p_opt.to_string());
    for c in ["rr_slack", "bf_slack", "sum_slack"] {
        assert!(t.column(c).unwrap()[0].parse::<f64>().unwrap() >= -1e-12);
    }
    let tiny = RunConfig::from_json(&BS_BLOCK.replace("\"b\": 0.4", "\"b\": 0.0001")).unwrap();
    let alpha: f64 = cmd_bf_rr(&tiny).unwrap().column("alpha").unwrap()[0].parse().unwrap();
    assert!(alpha > 0.999);

    let sabr = RunConfig::from_json(SABR_BLOCK).unwrap();
    assert_eq!(exit_code(&cmd_bf_rr(&sabr).unwrap_err()), EXIT_CONFIG);
}

#[test]
fn margin_tables() {
    let cfg = RunConfig::from_json(BS_BLOCK).unwrap();
    let t = cmd_margin(&cfg).unwrap();
    assert_eq!(t.summary.column("outcome").unwrap()[0], "unbounded");
    assert_eq!(t.scan.rows.len(), 241);
}

#[test]
fn binary_prints_library_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write(dir.path(), "reference_block.json", SABR_BLOCK);
    let out = dir.path().join("out");
    let o = volarb(&["strikes", "--out", out.to_str().unwrap()], &cfg_path);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let expect = cmd_strikes(&RunConfig::from_json(SABR_BLOCK).unwrap()).unwrap().to_csv();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), expect);
    assert_eq!(std::fs::read_to_string(out.join("strikes.csv")).unwrap(), expect);

    let bs_path = write(dir.path(), "bs.json", BS_BLOCK);
    let o = volarb(&["margin", "--out", out.to_str().unwrap()], &bs_path);
    assert!(o.status.success());
    assert!(out.join("margin_scan.csv").exists());
    let o = volarb(&["bf-rr"], &bs_path);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("p_opt,"));
}

#[test]
fn exit_codes_separate_failure_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "unknown.json", &BS_BLOCK.replace("\"tau\"", "\"tua\""));
    let o = volarb(&["strikes"], &unknown);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tua"));

    let broken = write(dir.path(), "broken.json", "{\"truth\": {\"sigma\": 0.2,\n \"b\": }");
    let o = volarb(&["strikes"], &broken);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    // the market already agrees with the truth: nothing to perturb around
    let flat = write(
        dir.path(),
        "flat.json",
        r#"{"truth": {"sigma": 0.2, "b": 0.0, "rho": 0.0},
            "market": {"model": "sabr", "b_tilde": 0.1, "rho_tilde": -0.5},
            "state": {"spot": 1.0, "y": 0.2}, "tau": 1.0,
            "strikes": {"methods": ["perturbed"]}}"#,
    );
    let o = volarb(&["strikes"], &flat);
    assert_eq!(o.status.code(), Some(EXIT_NUMERIC), "{}", String::from_utf8_lossy(&o.stderr));

    let o = volarb(&["strikes"], &dir.path().join("missing.json"));
    assert_eq!(o.status.code(), Some(EXIT_IO));

    let bt = write(dir.path(), "bt.json", BACKTEST);
    let blocker = write(dir.path(), "blocker", "a file, not a directory");
    let o = volarb(&["backtest", "--out", blocker.to_str().unwrap()], &bt);
    assert_eq!(o.status.code(), Some(EXIT_IO));

    let o = Command::new(env!("CARGO_BIN_EXE_volarb"))
        .args(["backtest", "--config", bt.to_str().unwrap(), "--out", dir.path().join("x").to_str().unwrap()])
        .env("VOLARB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
}

#[test]
fn backtest_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let bt = write(dir.path(), "bt.json", BACKTEST);
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["backtest", "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = volarb(&args, &bt);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        ["pnl.csv", "terminal.csv", "manifest.json"].map(|f| std::fs::read(out.join(f)).unwrap())
    };
    let a = run("a", &[]);
    let b = run("b", &[]);
    assert_eq!(a, b);

    let c = run("c", &["--seed", "4"]);
    assert_ne!(a[1], c[1]);
    let d = run("d", &["--paths", "5"]);
    assert_eq!(String::from_utf8(d[1].clone()).unwrap().lines().count(), 1 + 5);

    // the library writes the same bytes
    let cfg = RunConfig::from_json(BACKTEST).unwrap();
    let lib = dir.path().join("lib");
    cmd_backtest(&cfg, &lib).unwrap();
    assert_eq!(std::fs::read(lib.join("pnl.csv")).unwrap(), a[0]);
    let manifest: serde_json::Value = serde_json::from_slice(&a[2]).unwrap();
    assert_eq!(manifest["input_hash"].as_str().unwrap().len(), 40);
    assert_eq!(manifest["config"]["backtest"]["seed"], 3);
}
