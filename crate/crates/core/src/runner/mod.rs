//! Scenario orchestration and dataset emission.
//!
//! Exit codes: 0 success, 1 configuration or analysis error, 2 an
//! inequality violated beyond its error bar, 3 I/O failure.

mod config;
pub mod output;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::estimators::{
    duality_report, flatness_check, DualityReport, FlatnessCheck, FringeScan, HminConvention,
};
use crate::montecarlo::{
    run_dynamic_switch, scans_from_records, segments, sweep_records, CountRecord, Segment,
    SweepOptions, TimeSeriesPoint,
};
use crate::optics::Block;
use crate::tolerance;

pub use config::{load_config, parse_config, AnalysisConfig, ExperimentConfig, Mode, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("analysis failed: {0}")]
    Analysis(#[from] crate::Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Analysis(_) => EXIT_CONFIG,
            RunError::Io { .. } => EXIT_IO,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Whether each inequality holds within `k` sigma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InequalityFlags {
    pub eur_formula: bool,
    pub eur_defn: bool,
    pub wpdr: bool,
}

impl InequalityFlags {
    pub fn all_hold(&self) -> bool {
        self.eur_formula && self.eur_defn && self.wpdr
    }
}

fn slack(sigma: f64, k: f64) -> f64 {
    (k * sigma).max(tolerance::INEQUALITY)
}

/// EUR sums must not fall below 1 and `D^2 + V^2` must not exceed 1 by
/// more than `k` sigma.
pub fn inequality_flags(r: &DualityReport, k: f64) -> InequalityFlags {
    let eur = |e: crate::estimators::EstimateWithError| e.value >= 1.0 - slack(e.sigma, k);
    InequalityFlags {
        eur_formula: eur(r.formula.eur_sum),
        eur_defn: eur(r.definition.eur_sum),
        wpdr: r.formula.wpdr.value <= 1.0 + slack(r.formula.wpdr.sigma, k),
    }
}

/// One `DualityReport` per `phi_s` that has all three block settings.
pub fn duality_from_scans(
    scans: &[FringeScan],
    convention: HminConvention,
    k: f64,
) -> crate::Result<Vec<DualityReport>> {
    let mut phis: Vec<f64> = Vec::new();
    for s in scans {
        if !phis.contains(&s.phi_s) {
            phis.push(s.phi_s);
        }
    }
    let find = |phi: f64, block: Block| scans.iter().find(|s| s.phi_s == phi && s.block == block);
    let mut out = Vec::new();
    for phi in phis {
        if let (Some(open), Some(b0), Some(b1)) = (
            find(phi, Block::None),
            find(phi, Block::Path0),
            find(phi, Block::Path1),
        ) {
            out.push(duality_report(open, b0, b1, convention, k)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub generator: String,
    pub scenario: Scenario,
    pub mode: Mode,
    pub seed: u64,
    /// SHA-256 of the effective configuration as pretty JSON.
    pub config_sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityEntry {
    #[serde(flatten)]
    pub report: DualityReport,
    pub inequalities: InequalityFlags,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatnessEntry {
    pub phi_s: f64,
    pub block: Block,
    #[serde(flatten)]
    pub check: FlatnessCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub phi_s: f64,
    pub quantity: &'static str,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub provenance: Provenance,
    pub config: ExperimentConfig,
    pub fringes: Vec<CountRecord>,
    pub duality: Vec<DualityEntry>,
    pub flatness: Vec<FlatnessEntry>,
    pub timeseries: Vec<TimeSeriesPoint>,
    pub segments: Vec<Segment>,
    pub violations: Vec<Violation>,
}

/// Everything a run produced, before it is written.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Report,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.violations.is_empty() {
            EXIT_OK
        } else {
            EXIT_VIOLATION
        }
    }

    pub fn duality(&self) -> Vec<DualityReport> {
        self.report
            .duality
            .iter()
            .map(|e| e.report.clone())
            .collect()
    }
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(cfg.to_json().as_bytes()))
}

fn violations(entries: &[DualityEntry]) -> Vec<Violation> {
    let mut out = Vec::new();
    for e in entries {
        let r = &e.report;
        let mut push = |ok: bool, quantity, est: crate::estimators::EstimateWithError| {
            if !ok {
                out.push(Violation {
                    phi_s: r.phi_s,
                    quantity,
                    value: est.value,
                    sigma: est.sigma,
                });
            }
        };
        push(e.inequalities.eur_formula, "eur_formula", r.formula.eur_sum);
        push(e.inequalities.eur_defn, "eur_defn", r.definition.eur_sum);
        push(e.inequalities.wpdr, "wpdr", r.formula.wpdr);
    }
    out
}

fn sweep_part(cfg: &ExperimentConfig, report: &mut Report) -> Result<(), RunError> {
    let opts = SweepOptions {
        model: cfg.mode.count_model(),
        workers: cfg.workers,
    };
    let records = sweep_records(&cfg.plan, &cfg.source, &cfg.detector, opts)?;
    let scans = scans_from_records(&records, cfg.plan.phi_x_grid.steps)?;
    let k = cfg.analysis.sigma_k;
    report.duality = duality_from_scans(&scans, cfg.analysis.hmin_convention, k)?
        .into_iter()
        .map(|r| DualityEntry {
            inequalities: inequality_flags(&r, k),
            report: r,
        })
        .collect();
    for s in scans.iter().filter(|s| s.block != Block::None) {
        match flatness_check(s, k) {
            Ok(check) => report.flatness.push(FlatnessEntry {
                phi_s: s.phi_s,
                block: s.block,
                check,
            }),
            Err(e) => warn!(
                "no flatness check at phi_s = {} ({}): {e}",
                s.phi_s, s.block
            ),
        }
    }
    report.violations = violations(&report.duality);
    report.fringes = records;
    Ok(())
}

/// Runs the configured scenario without touching the file system.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    cfg.validate()?;
    let mut report = Report {
        provenance: Provenance {
            generator: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            scenario: cfg.scenario,
            mode: cfg.mode,
            seed: cfg.plan.seed,
            config_sha256: config_hash(cfg),
        },
        config: cfg.clone(),
        fringes: Vec::new(),
        duality: Vec::new(),
        flatness: Vec::new(),
        timeseries: Vec::new(),
        segments: Vec::new(),
        violations: Vec::new(),
    };
    match cfg.scenario {
        Scenario::Sweep | Scenario::EurVerify => sweep_part(cfg, &mut report)?,
        Scenario::Switch => {
            let series = run_dynamic_switch(
                &cfg.switch,
                &cfg.source,
                &cfg.detector,
                cfg.mode.count_model(),
                cfg.plan.seed,
            )?;
            report.segments = segments(&series, cfg.switch.bucket_s);
            report.timeseries = series;
        }
    }
    for v in &report.violations {
        warn!(
            "{} = {} (sigma {}) at phi_s = {} violates its bound",
            v.quantity, v.value, v.sigma, v.phi_s
        );
    }
    Ok(RunOutcome { report })
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| RunError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> RunError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    RunError::io(path, source)
}

/// Writes the outcome's tables and report into `dir`; returns the files written.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let r = &outcome.report;
    let mut written = Vec::new();
    match r.provenance.scenario {
        Scenario::Sweep | Scenario::EurVerify => {
            let path = dir.join("fringes.csv");
            output::write_fringes(create(&path)?, &r.fringes).map_err(|e| csv_error(&path, e))?;
            written.push(path);
            if !r.duality.is_empty() || r.provenance.scenario == Scenario::EurVerify {
                let path = dir.join("duality.csv");
                output::write_duality(create(&path)?, &outcome.duality())
                    .map_err(|e| csv_error(&path, e))?;
                written.push(path);
            }
        }
        Scenario::Switch => {
            let path = dir.join("timeseries.csv");
            output::write_timeseries(create(&path)?, &r.timeseries)
                .map_err(|e| csv_error(&path, e))?;
            written.push(path);
        }
    }
    let path = dir.join("report.json");
    let mut json = serde_json::to_string_pretty(r).expect("report serializes");
    json.push('\n');
    std::fs::write(&path, json).map_err(|e| RunError::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// Executes the scenario and writes its artifacts to `cfg.output_dir`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let outcome = execute(cfg)?;
    for p in write_outputs(&outcome, &cfg.output_dir)? {
        info!("wrote {}", p.display());
    }
    Ok(outcome)
}
