//! Command-line front end: one subcommand per experiment, CSV/JSON/SVG
//! artifacts stamped with the config hash.

pub mod config;
pub mod experiments;
pub mod output;
pub mod plot;

use std::process::ExitCode;

use serde_json::Value;

use config::{Cli, Command, Experiment, ExperimentConfig, RunArgs};
use output::Artifacts;

pub const EXIT_PRECONDITION: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const THREADS_ENV: &str = "TRICOMI_LAB_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Precondition(String),
    Numeric(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Precondition(_) => EXIT_PRECONDITION,
            Failure::Numeric(_) | Failure::Io(_) => EXIT_NUMERIC,
        }
    }

    fn status(&self) -> &'static str {
        match self {
            Failure::Precondition(_) => "precondition",
            Failure::Numeric(_) => "numeric",
            Failure::Io(_) => "io",
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Precondition(m) => write!(f, "precondition violated: {m}"),
            Failure::Numeric(m) => write!(f, "numeric failure: {m}"),
            Failure::Io(m) => write!(f, "i/o failure: {m}"),
        }
    }
}

impl From<tricomi_core::Error> for Failure {
    fn from(e: tricomi_core::Error) -> Self {
        if e.is_precondition() {
            Failure::Precondition(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

/// Cap rayon's pool from the environment. Outputs do not depend on it.
pub fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Precondition(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Numeric(e.to_string()))
}

/// Resolve, validate and run one experiment. The manifest is written even
/// when validation or the computation fails.
pub fn run_experiment(experiment: Experiment, args: &RunArgs) -> Result<Value, Failure> {
    let mut cfg = ExperimentConfig::defaults(experiment);
    let file = args.config.as_deref().map(config::read_overrides).transpose();
    let file_err = match file {
        Ok(Some(o)) => {
            cfg.apply(o);
            None
        }
        Ok(None) => None,
        Err(e) => Some(e),
    };
    cfg.apply(args.overrides.clone());
    let out = Artifacts::create(&cfg);
    let mut out = match out {
        Ok(o) => o,
        Err(e) => return Err(file_err.unwrap_or(e)),
    };
    let result = match file_err {
        Some(e) => Err(e),
        None => cfg.validate().and_then(|_| experiments::run(&cfg, &mut out)),
    };
    match result {
        Ok(summary) => {
            out.finish("ok", None, &summary)?;
            Ok(summary)
        }
        Err(e) => {
            out.finish(e.status(), Some(&e.to_string()), &Value::Null)?;
            Err(e)
        }
    }
}

pub fn main_with(cli: Cli) -> ExitCode {
    if let Err(e) = configure_threads() {
        eprintln!("{e}");
        return ExitCode::from(e.exit_code());
    }
    let experiment = match &cli.command {
        Command::Exponents(a) => (Experiment::Exponents, a),
        Command::PropagatorCheck(a) => (Experiment::PropagatorCheck, a),
        Command::LinearDemo(a) => (Experiment::LinearDemo, a),
        Command::StrichartzProbe(a) => (Experiment::StrichartzProbe, a),
        Command::Picard(a) => (Experiment::Picard, a),
        Command::LifespanScaling(a) => (Experiment::LifespanScaling, a),
        Command::UniformityProbe(a) => (Experiment::UniformityProbe, a),
        Command::Plot(a) => return plot_command(a),
    };
    match run_experiment(experiment.0, experiment.1) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn plot_command(a: &config::PlotArgs) -> ExitCode {
    let target = a.out.clone().unwrap_or_else(|| a.input.with_extension("svg"));
    let result = plot::plot_file(&a.input, a.kind).and_then(|p| {
        std::fs::write(&target, &p.svg).map_err(|e| Failure::Io(e.to_string()))?;
        Ok(p)
    });
    match result {
        Ok(p) => {
            if p.is_placeholder() {
                eprintln!("warning: {} has no data rows; wrote an empty plot", a.input.display());
            }
            match p.slope {
                Some(s) => println!("{} slope={s}", target.display()),
                None => println!("{}", target.display()),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
