use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;

use tbs_duality::optics::Block;
use tbs_duality::runner::{
    execute, load_config, parse_config, run, ExperimentConfig, Mode, Scenario,
};

const BIN: &str = env!("CARGO_BIN_EXE_tbs-duality");

fn reference_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/reference.json")
}

fn golden(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(p).unwrap()
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(BIN)
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn reference_run_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load_config(&reference_config()).unwrap();
    cfg.output_dir = dir.path().to_path_buf();
    let outcome = run(&cfg).unwrap();
    assert_eq!(outcome.exit_code(), 0);
    for name in ["fringes.csv", "duality.csv"] {
        let got = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(got, golden(name), "{name}");
    }
}

#[test]
fn cli_writes_all_sweep_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = reference_config();
    let (code, err) = cli(&[
        "eur-verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out,
        "--workers",
        "2",
    ]);
    assert_eq!(code, 0, "{err}");
    for name in ["fringes.csv", "duality.csv"] {
        assert_eq!(
            std::fs::read_to_string(dir.path().join(name)).unwrap(),
            golden(name)
        );
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["provenance"]["seed"], 20240517);
    assert_eq!(
        report["provenance"]["config_sha256"]
            .as_str()
            .unwrap()
            .len(),
        64
    );
    assert_eq!(report["duality"].as_array().unwrap().len(), 9);
    assert_eq!(report["fringes"].as_array().unwrap().len(), 891);
}

#[test]
fn seed_flag_changes_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = reference_config();
    let cfg = cfg.to_str().unwrap();
    assert_eq!(
        cli(&[
            "sweep",
            "--config",
            cfg,
            "--out",
            a.path().to_str().unwrap()
        ])
        .0,
        0
    );
    assert_eq!(
        cli(&[
            "sweep",
            "--config",
            cfg,
            "--seed",
            "1",
            "--out",
            b.path().to_str().unwrap()
        ])
        .0,
        0
    );
    let fa = std::fs::read_to_string(a.path().join("fringes.csv")).unwrap();
    let fb = std::fs::read_to_string(b.path().join("fringes.csv")).unwrap();
    assert_eq!(fa, golden("fringes.csv"));
    assert_ne!(fa, fb);
}

#[test]
fn ideal_mode_saturates_both_relations() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = cli(&[
        "eur-verify",
        "--mode",
        "ideal",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let mut rdr = csv::Reader::from_path(dir.path().join("duality.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (eur, wpdr) = (col("eur_formula"), col("wpdr"));
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let e: f64 = rec[eur].parse().unwrap();
        let w: f64 = rec[wpdr].parse().unwrap();
        assert!((e - 1.0).abs() <= 1e-9, "{e}");
        assert!((w - 1.0).abs() <= 1e-9, "{w}");
        rows += 1;
    }
    assert_eq!(rows, 9);
}

#[test]
fn montecarlo_full_visibility_within_band() {
    let mut cfg = ExperimentConfig::new(Scenario::Sweep);
    cfg.plan.phi_s_values = vec![std::f64::consts::FRAC_PI_2];
    let outcome = execute(&cfg).unwrap();
    let v = outcome.duality()[0].visibility.contrast;
    assert!((v.value - 0.967).abs() <= 3.0 * v.sigma.max(0.023), "{v:?}");
}

#[test]
fn switch_writes_timeseries() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = cli(&["switch", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,phi_s,phi_x,n1,n2"));
    assert_eq!(lines.count(), 288);
    assert!(!text.contains('\r'));
}

#[test]
fn exit_code_for_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"scenario": "sweep", "source": {"mu": -1}}"#).unwrap();
    let (code, err) = cli(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("source.mu"), "{err}");

    std::fs::write(&path, "{\"scenario\": \"sweep\",\n \"plan\": [}").unwrap();
    let (code, err) = cli(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("line 2"), "{err}");

    let (code, _) = cli(&["sweep", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(code, 1);
}

#[test]
fn exit_code_for_unwritable_output() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    std::fs::write(&file, "x").unwrap();
    let (code, _) = cli(&["switch", "--mode", "ideal", "--out", file.to_str().unwrap()]);
    assert_eq!(code, 3);
}

#[test]
fn phi_s_flag_accepts_fraction_literals() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = cli(&[
        "eur-verify",
        "--mode",
        "ideal",
        "--phi-s",
        "0,pi/4,pi/2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(dir.path().join("duality.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.contains("\n0.7853981633974483,"));
    let (code, _) = cli(&["sweep", "--phi-s", "pie"]);
    assert_eq!(code, 1);
}

fn any_block_set() -> impl Strategy<Value = Vec<Block>> {
    proptest::sample::subsequence(Block::ALL.to_vec(), 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trip(
        mu in 0.01f64..2.0,
        loss in 0.0f64..40.0,
        eff in 0.01f64..=1.0,
        phis in proptest::collection::vec(0.0f64..3.2, 1..12),
        steps in 8usize..64,
        pulses in 1u64..1_000_000,
        coherence in proptest::option::of(0.0f64..=1.0),
        seed in any::<u64>(),
        blocks in any_block_set(),
        ideal in any::<bool>(),
        workers in proptest::option::of(1usize..16),
    ) {
        let mut cfg = ExperimentConfig::new(Scenario::Sweep);
        cfg.source.mu = mu;
        cfg.detector.system_loss_db = loss;
        cfg.detector.efficiency = eff;
        cfg.plan.phi_s_values = phis;
        cfg.plan.phi_x_grid.steps = steps;
        cfg.plan.pulses_per_point = pulses;
        cfg.plan.coherence = coherence;
        cfg.plan.seed = seed;
        cfg.plan.blocks = blocks;
        cfg.mode = if ideal { Mode::Ideal } else { Mode::Montecarlo };
        cfg.workers = workers;
        prop_assert_eq!(parse_config(&cfg.to_json()).unwrap(), cfg);
    }
}
