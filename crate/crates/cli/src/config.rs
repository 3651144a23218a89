use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Debug, Parser)]
#[command(name = "tricomi-lab", version, about = "Experiments for the generalized Tricomi equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regime, critical regularity and Strichartz tuple for each κ.
    Exponents(RunArgs),
    /// Hypergeometric propagators against the ODE oracle.
    PropagatorCheck(RunArgs),
    /// Manufactured-solution run of the linear solver.
    LinearDemo(RunArgs),
    /// Homogeneous Strichartz ratio along a dilation ladder.
    StrichartzProbe(RunArgs),
    /// Picard iteration with contraction history.
    Picard(RunArgs),
    /// Lifespan and data norms along the scaling family.
    LifespanScaling(RunArgs),
    /// Dyadic operator bound across frequency shells.
    UniformityProbe(RunArgs),
    /// Render a CSV produced by another subcommand as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Exponents,
    PropagatorCheck,
    LinearDemo,
    StrichartzProbe,
    Picard,
    LifespanScaling,
    UniformityProbe,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Exponents => "exponents",
            Experiment::PropagatorCheck => "propagator-check",
            Experiment::LinearDemo => "linear-demo",
            Experiment::StrichartzProbe => "strichartz-probe",
            Experiment::Picard => "picard",
            Experiment::LifespanScaling => "lifespan-scaling",
            Experiment::UniformityProbe => "uniformity-probe",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Synthetic,
    Physical,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON file with any of the flag names as keys; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Every tunable, optional so that defaults, the JSON file and the flags can
/// be layered.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub n: Option<u32>,
    /// One or more comma-separated powers (only `exponents` uses more than one).
    #[arg(long, value_delimiter = ',')]
    pub kappa: Option<Vec<f64>>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Sign of F(u) = sign·|u|^{κ−1}u.
    #[arg(long, allow_hyphen_values = true)]
    pub sign: Option<i8>,
    /// Points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Side length of the periodic box.
    #[arg(long = "box")]
    #[serde(rename = "box")]
    pub box_len: Option<f64>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Amplitude of the Gaussian position datum.
    #[arg(long)]
    pub amp: Option<f64>,
    /// Amplitude of the Gaussian velocity datum.
    #[arg(long)]
    pub psi_amp: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Also run from u₋₁ = v and u₋₁ = −v and report the largest difference.
    #[arg(long)]
    pub uniqueness: Option<bool>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub j_min: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    pub j_max: Option<i32>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Added to the normalizing exponent (negative control when nonzero).
    #[arg(long, allow_hyphen_values = true)]
    pub offset: Option<f64>,
    #[arg(long, value_enum)]
    pub kernel: Option<Kernel>,
    #[arg(long)]
    pub decades: Option<f64>,
    #[arg(long)]
    pub rungs: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_shift: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Lifespan bracket at ε = 1, scaled by ε along the family.
    #[arg(long, value_delimiter = ',')]
    pub bracket: Option<Vec<f64>>,
    #[arg(long)]
    pub bisections: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Auto,
    Semilog,
    Loglog,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// CSV written by one of the experiments.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub kind: PlotKind,
    /// Output SVG; defaults to the input path with an `.svg` extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fully resolved configuration. Its JSON form, minus the output directory,
/// is what the config hash covers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub m: u32,
    pub n: u32,
    pub kappa: Vec<f64>,
    pub mu: Option<f64>,
    pub sign: i8,
    pub grid: usize,
    #[serde(rename = "box")]
    pub box_len: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub steps: usize,
    pub seed: u64,
    pub amp: f64,
    pub psi_amp: f64,
    pub width: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub uniqueness: bool,
    pub p: f64,
    pub j_min: i32,
    pub j_max: i32,
    pub trials: usize,
    pub offset: f64,
    pub kernel: Kernel,
    pub decades: f64,
    pub rungs: usize,
    pub gamma_shift: f64,
    pub eps: Vec<f64>,
    pub bracket: Vec<f64>,
    pub bisections: usize,
    pub radii: Vec<f64>,
    #[serde(skip)]
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = ExperimentConfig {
            experiment,
            m: 1,
            n: 2,
            kappa: vec![3.0],
            mu: None,
            sign: -1,
            grid: 64,
            box_len: 24.0,
            t_end: 1.0,
            steps: 64,
            seed: 0,
            amp: 0.01,
            psi_amp: 0.0,
            width: 1.0,
            tol: 1e-10,
            max_iter: 40,
            uniqueness: false,
            p: 1.8,
            j_min: -2,
            j_max: 4,
            trials: 2,
            offset: 0.0,
            kernel: Kernel::Synthetic,
            decades: 2.0,
            rungs: 5,
            gamma_shift: 0.0,
            eps: vec![1.0, 0.5, 0.25],
            bracket: vec![0.05, 3.0],
            bisections: 8,
            radii: vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            out: PathBuf::from("out"),
        };
        match experiment {
            Experiment::PropagatorCheck => {
                c.t_end = 2.0;
                c.steps = 50;
            }
            Experiment::LinearDemo => {
                c.box_len = 20.0;
                c.steps = 200;
            }
            Experiment::StrichartzProbe => {
                c.grid = 32;
                c.box_len = 40.0;
                c.t_end = 2.0;
                c.steps = 24;
                c.seed = 3;
            }
            Experiment::UniformityProbe => {
                c.grid = 32;
                c.box_len = 32.0;
                c.t_end = 4.0;
                c.steps = 24;
                c.seed = 7;
                c.mu = Some(4.0);
            }
            Experiment::LifespanScaling => {
                c.sign = 1;
                c.amp = 3.0;
                c.grid = 32;
                c.box_len = 16.0;
                c.steps = 32;
                c.max_iter = 30;
                c.gamma_shift = -0.3;
            }
            _ => {}
        }
        c
    }

    pub fn apply(&mut self, o: Overrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { self.$f = v; } )* };
        }
        take!(
            m,
            n,
            kappa,
            sign,
            grid,
            box_len,
            t_end,
            steps,
            seed,
            out,
            amp,
            psi_amp,
            width,
            tol,
            max_iter,
            uniqueness,
            p,
            j_min,
            j_max,
            trials,
            offset,
            kernel,
            decades,
            rungs,
            gamma_shift,
            eps,
            bracket,
            bisections,
            radii
        );
        if o.mu.is_some() {
            self.mu = o.mu;
        }
    }

    /// Defaults, then the JSON file, then the flags.
    pub fn validate(&self) -> Result<(), Failure> {
        let bad = |msg: String| Err(Failure::Precondition(msg));
        if self.kappa.is_empty() {
            return bad("at least one kappa is required".into());
        }
        if self.experiment != Experiment::Exponents && self.kappa.len() > 1 {
            return bad(format!("{} takes a single kappa", self.experiment.name()));
        }
        if self.grid < 4 || self.steps < 4 {
            return bad(format!("need grid >= 4 and steps >= 4, got {} and {}", self.grid, self.steps));
        }
        if !(self.box_len > 0.0 && self.t_end > 0.0) {
            return bad("box and T must be positive".into());
        }
        if self.j_min > self.j_max {
            return bad(format!("j_min = {} exceeds j_max = {}", self.j_min, self.j_max));
        }
        if self.trials == 0 || self.max_iter == 0 || self.rungs < 2 {
            return bad("trials and max_iter must be positive and rungs at least 2".into());
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive".into());
        }
        if self.bracket.len() != 2 {
            return bad("bracket takes two values".into());
        }
        if self.eps.iter().any(|e| !(*e > 0.0)) || self.radii.iter().any(|r| !(*r >= 0.0)) {
            return bad("eps must be positive and radii nonnegative".into());
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        self.kappa[0]
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }
}

pub fn read_overrides(path: &Path) -> Result<Overrides, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Precondition(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Precondition(format!("bad config {}: {e}", path.display())))
}
