use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use tbs_duality::angle::parse_angle;
use tbs_duality::runner::{self, ExperimentConfig, Mode, RunError, Scenario, EXIT_CONFIG};

#[derive(Parser)]
#[command(version, about = "Tunable-beamsplitter duality simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fringe scans over phi_x for every phi_s and block setting.
    Sweep(RunArgs),
    /// Dynamic wave/particle switching time series.
    Switch(RunArgs),
    /// Sweep plus both entropy routes and the inequality checks.
    EurVerify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["ideal", "montecarlo"]))]
    mode: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sweep worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated phi_s values, e.g. "0,pi/4,pi/2".
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    phi_s: Option<Vec<String>>,
}

fn build_config(scenario: Scenario, args: &RunArgs) -> Result<ExperimentConfig, RunError> {
    let mut cfg = match &args.config {
        Some(path) => runner::load_config(path)?,
        None => ExperimentConfig::new(scenario),
    };
    if cfg.scenario != scenario {
        log::info!(
            "scenario '{}' from config replaced by '{scenario}'",
            cfg.scenario
        );
        cfg.scenario = scenario;
    }
    if let Some(seed) = args.seed {
        cfg.plan.seed = seed;
    }
    if let Some(mode) = &args.mode {
        cfg.mode = mode.parse::<Mode>().map_err(RunError::Config)?;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    if let Some(values) = &args.phi_s {
        cfg.plan.phi_s_values = values
            .iter()
            .map(|v| parse_angle(v).map_err(|e| RunError::Config(format!("--phi-s: {e}"))))
            .collect::<Result<_, _>>()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (scenario, args) = match &cli.command {
        Command::Sweep(a) => (Scenario::Sweep, a),
        Command::Switch(a) => (Scenario::Switch, a),
        Command::EurVerify(a) => (Scenario::EurVerify, a),
    };
    let result = build_config(scenario, args).and_then(|cfg| runner::run(&cfg));
    match result {
        Ok(outcome) => {
            for v in &outcome.report.violations {
                eprintln!(
                    "violation: {} = {} +/- {} at phi_s = {}",
                    v.quantity, v.value, v.sigma, v.phi_s
                );
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            error!("{e}");
            let code = e.exit_code();
            ExitCode::from(if code == 0 { EXIT_CONFIG } else { code } as u8)
        }
    }
}
