use rayon::prelude::*;
use serde_json::{json, Value};

use tricomi_core::dyadic::{
    homogeneous_probe, uniformity_probe, FioKernelSpec, HomogeneousConfig, ScaledGrid, UniformityConfig,
};
use tricomi_core::exponents::{
    classify_regime, data_norm_scaling_exponent, derive_exponents, dyadic_critical_alpha, gamma_critical,
    scaling_defect, supplementary_tuple, theorem_tuple, GammaCritical, TupleKind,
};
use tricomi_core::linear::{residual, solve, LinearProblem, LinearSolver};
use tricomi_core::propagator::audit_against_oracle;
use tricomi_core::semilinear::{
    lifespan_search, picard_solve, scaling_family, uniqueness_check, LifespanConfig, PicardConfig, PicardSetup,
};
use tricomi_core::spectral::{
    sobolev_norm_unchecked, transform_forward, Grid, PhysicalField, SpaceGrid, SpaceTimeField, SpectralField,
};
use tricomi_core::{ProblemParams, StrichartzTuple};

use crate::config::{Experiment, ExperimentConfig, Kernel, PlotKind};
use crate::output::{Artifacts, Cell};
use crate::plot::plot_csv;
use crate::Failure;

pub fn run(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, Failure> {
    match cfg.experiment {
        Experiment::Exponents => exponents(cfg, out),
        Experiment::PropagatorCheck => propagator_check(cfg, out),
        Experiment::LinearDemo => linear_demo(cfg, out),
        Experiment::StrichartzProbe => strichartz_probe(cfg, out),
        Experiment::Picard => picard(cfg, out),
        Experiment::LifespanScaling => lifespan_scaling(cfg, out),
        Experiment::UniformityProbe => uniformity(cfg, out),
    }
}

fn params(cfg: &ExperimentConfig) -> Result<ProblemParams, Failure> {
    Ok(ProblemParams::new(cfg.m, cfg.n, cfg.kappa(), cfg.sign)?)
}

fn space(cfg: &ExperimentConfig) -> Result<SpaceGrid, Failure> {
    Ok(SpaceGrid::new(cfg.n as usize, cfg.box_len, cfg.grid)?)
}

/// Centered Gaussian `amp·exp(−|x − c|²/(2w²))`.
pub fn gaussian(sp: SpaceGrid, amp: f64, width: f64) -> Result<SpectralField, Failure> {
    let c = sp.extent / 2.0;
    Ok(transform_forward(&PhysicalField::from_fn(sp, |x| {
        let r2: f64 = x.iter().map(|v| (v - c) * (v - c)).sum();
        amp * (-r2 / (2.0 * width * width)).exp()
    }))?)
}

/// Render `csv_name` as an SVG next to it.
fn plot_beside(out: &mut Artifacts, csv_name: &str) -> Result<(), Failure> {
    let text = std::fs::read_to_string(out.path(csv_name)).map_err(|e| Failure::Io(e.to_string()))?;
    let plot = plot_csv(&text, PlotKind::Auto)?;
    out.write_text(&csv_name.replace(".csv", ".svg"), &plot.svg)
}

fn exponents(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, Failure> {
    let cols = ["m", "n", "kappa", "regime", "gamma", "s", "q", "r", "p", "mu", "scaling_defect"];
    let mut csv = out.csv("exponents.csv", &cols)?;
    let mut rows = Vec::new();
    for &kappa in &cfg.kappa {
        let p = ProblemParams::new(cfg.m, cfg.n, kappa, cfg.sign)?;
        let regime = classify_regime(&p);
        let head = [Cell::from(cfg.m), Cell::from(cfg.n), Cell::from(kappa), Cell::from(regime.as_str())];
        let tuple = theorem_tuple(&p).ok();
        let tail: Vec<Cell> = match &tuple {
            Some(t) => vec![
                t.gamma.into(),
                t.s.into(),
                t.q.into(),
                t.r.into(),
                t.p.into(),
                t.mu.into(),
                scaling_defect(t, cfg.m, cfg.n).into(),
            ],
            None => vec![Cell::Empty; 7],
        };
        csv.row(&head.into_iter().chain(tail).collect::<Vec<_>>())?;
        rows.push(json!({
            "kappa": kappa,
            "regime": regime.as_str(),
            "tuple": tuple,
            "supplementary": supplementary_tuple(&p).ok(),
        }));
    }
    let mu = cfg.mu.unwrap_or_else(|| tricomi_core::exponents::mu_star(cfg.m, cfg.n));
    let table = derive_exponents(cfg.m, cfg.n, mu)?;
    Ok(json!({ "table": table, "queries": rows }))
}

fn propagator_check(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, Failure> {
    let times: Vec<f64> = (0..=cfg.steps).map(|i| cfg.t_end * i as f64 / cfg.steps as f64).collect();
    let cols = ["m", "t", "xi_mag", "re_v0", "im_v0", "re_v1", "im_v1", "wronskian_err", "oracle_err"];
    let mut csv = out.csv("propagator.csv", &cols)?;
    let tables =
        cfg.radii.par_iter().map(|&xi| audit_against_oracle(cfg.m, xi, &times)).collect::<Result<Vec<_>, _>>()?;
    let (mut oracle, mut wronskian, mut imag) = (0.0f64, 0.0f64, 0.0f64);
    for r in tables.iter().flatten() {
        csv.row(&[
            r.m.into(),
            r.t.into(),
            r.xi_mag.into(),
            r.re_v0.into(),
            r.im_v0.into(),
            r.re_v1.into(),
            r.im_v1.into(),
            r.wronskian_err.into(),
            r.oracle_err.into(),
        ])?;
        oracle = oracle.max(r.oracle_err);
        wronskian = wronskian.max(r.wronskian_err);
        imag = imag.max(r.im_v0.abs()).max(r.im_v1.abs());
    }
    plot_beside(out, "propagator.csv")?;
    Ok(json!({
        "max_oracle_err": oracle,
        "max_wronskian_err": wronskian,
        "max_imag": imag,
        "pass": oracle <= 1e-7 && wronskian <= 1e-8 && imag <= 1e-8,
    }))
}

fn linear_demo(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, Failure> {
    let sp = space(cfg)?;
    let grid = Grid::uniform(sp, cfg.t_end, cfg.steps)?;
    let g0 = gaussian(sp, cfg.amp.max(f64::MIN_POSITIVE), cfg.width)?;
    // Manufactured solution g = t² cos t · G(x) and its exact source.
    let a = |t: f64| t * t * t.cos();
    let a2 = |t: f64| 2.0 * t.cos() - 4.0 * t * t.sin() - t * t * t.cos();
    let m = cfg.m;
    let exact: Vec<SpectralField> = grid.times.iter().map(|&t| g0.scale(a(t))).collect();
    let source: Vec<SpectralField> =
        grid.times.iter().map(|&t| g0.apply_radial(|xi| a2(t) + t.powi(m as i32) * xi * xi * a(t))).collect();
    let problem = LinearProblem::forced(m, SpaceTimeField::new(&grid, source)?)?;
    let u = solve(&problem)?;
    let res = residual(&u, &problem)?;
    let mut csv = out.csv("linear.csv", &["t", "l2", "exact_l2", "error_l2"])?;
    let (mut num, mut den) = (0.0, 0.0);
    for ((t, s), e) in grid.times.iter().zip(&u.slices).zip(&exact) {
        let err = s.axpy(-1.0, e).l2_norm();
        num += err * err;
        den += e.l2_norm().powi(2);
        csv.row(&[(*t).into(), s.l2_norm().into(), e.l2_norm().into(), err.into()])?;
    }
    let rel = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    Ok(json!({ "residual": res, "relative_error": rel, "points": cfg.grid, "steps": cfg.steps }))
}

fn scaled_grid(cfg: &ExperimentConfig) -> ScaledGrid {
    ScaledGrid {
        dim: cfg.n as usize,
        points: cfg.grid,
        base_extent: cfg.box_len,
        base_time: cfg.t_end,
        steps: cfg.steps,
    }
}

fn strichartz_probe(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, Failure> {
    let p = params(cfg)?;
    let tuple = theorem_tuple(&p)?;
    let ladder: Vec<f64> =
        (0..cfg.rungs).map(|i| 10f64.powf(cfg.decades * i as f64 / (cfg.rungs - 1) as f64)).collect();
    let hc = HomogeneousConfig {
        ladder,
        trials: cfg.trials,
        seed: cfg.seed,
        grid: scaled_grid(cfg),
        gamma_shift: cfg.gamma_shift,
    };
    let rep = homogeneous_probe(cfg.m, &tuple, &hc)?;
    let mut csv = out.csv("strichartz.csv", &["lambda", "trial", "solution_norm", "data_norm", "ratio"])?;
    for r in &rep.rows {
        csv.row(&[r.lambda.into(), r.trial.into(), r.solution_norm.into(), r.data_norm.into(), r.ratio.into()])?;
    }
    plot_beside(out, "strichartz.csv")?;
    Ok(json!({
        "s": rep.s,
        "q": rep.q,
        "gamma": rep.gamma,
        "gamma_shift": cfg.gamma_shift,
        "max_per_rung": rep.max_per_rung,
        "variation": rep.variation,
        "monotone_increasing": rep.monotone_increasing,
        "slope": rep.slope,
    }))
}

fn picard_config(cfg: &ExperimentConfig) -> PicardConfig {
    PicardConfig { max_iter: cfg.max_iter, tol: cfg.tol, ..Default::default() }
}

fn picard(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, Failure> {
    let p = params(cfg)?;
    let setup = PicardSetup::new(&p)?;
    let sp = space(cfg)?;
    let grid = Grid::uniform(sp, cfg.t_end, cfg.steps)?;
    let solver = LinearSolver::new(cfg.m, &grid)?;
    let phi = gaussian(sp, cfg.amp, cfg.width)?;
    let psi = gaussian(sp, cfg.psi_amp, cfg.width)?;
    let pc = picard_config(cfg);
    let run = picard_solve(&setup, &solver, &phi, &psi, &pc)?;
    let rep = &run.report;
    let mut csv = out.csv("picard.csv", &["j", "H", "N", "ratio", "contracting"])?;
    for (j, (h, n)) in rep.h.iter().zip(&rep.n).enumerate() {
        let (ratio, ok) = if j == 0 {
            (Cell::Empty, Cell::Empty)
        } else {
            (rep.ratios[j - 1].into(), rep.contraction_ok[j - 1].into())
        };
        csv.row(&[j.into(), (*h).into(), (*n).into(), ratio, ok])?;
    }
    plot_beside(out, "picard.csv")?;
    let uniqueness = if cfg.uniqueness { Some(uniqueness_check(&setup, &solver, &phi, &psi, &pc)?) } else { None };
    Ok(json!({
        "outcome": rep.outcome,
        "converged": rep.converged,
        "all_contracting": rep.all_contracting(),
        "max_ratio": rep.ratios.iter().cloned().fold(0.0, f64::max),
        "final_residual": rep.final_residual,
        "smallness": rep.smallness,
        "coverage": rep.coverage,
        "uniqueness": uniqueness,
    }))
}

fn lifespan_scaling(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, Failure> {
    let p = params(cfg)?;
    let setup = PicardSetup::new(&p)?;
    let gc = match gamma_critical(&p) {
        GammaCritical::Value(g) => g,
        GammaCritical::BelowKnownRange => {
            return Err(Failure::Precondition(format!("no critical regularity is known at kappa = {}", cfg.kappa())))
        }
    };
    let g = gc + cfg.gamma_shift;
    let predicted = data_norm_scaling_exponent(cfg.m, cfg.n, cfg.kappa(), g);
    let sp = space(cfg)?;
    let phi = gaussian(sp, cfg.amp, cfg.width)?;
    let psi = gaussian(sp, cfg.psi_amp, cfg.width)?;
    let (b0, b1) = (cfg.bracket[0], cfg.bracket[1]);
    let results = cfg
        .eps
        .par_iter()
        .map(|&eps| -> Result<_, Failure> {
            let (pe, qe) = scaling_family(&phi, &psi, eps, &p)?;
            let crit = sobolev_norm_unchecked(&pe, gc) / sobolev_norm_unchecked(&phi, gc);
            let ratio = sobolev_norm_unchecked(&pe, g) / sobolev_norm_unchecked(&phi, g);
            let lc = LifespanConfig {
                bracket: (b0 * eps, b1 * eps),
                bisections: cfg.bisections,
                steps: cfg.steps,
                picard: picard_config(cfg),
            };
            let rep = lifespan_search(&setup, pe.space, &pe, &qe, &lc)?;
            Ok((eps, rep, crit, ratio))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cols = [
        "eps",
        "T_eps",
        "uncertainty",
        "T_over_eps",
        "norm_ratio_critical",
        "norm_ratio",
        "predicted_ratio",
        "ratio_error",
    ];
    let mut csv = out.csv("lifespan.csv", &cols)?;
    let mut spans = Vec::new();
    let mut worst = 0.0f64;
    for (eps, rep, crit, ratio) in &results {
        let want = eps.powf(predicted);
        let err = (ratio / want - 1.0).abs();
        worst = worst.max(err);
        spans.push(rep.estimate / eps);
        csv.row(&[
            (*eps).into(),
            rep.estimate.into(),
            rep.uncertainty.into(),
            (rep.estimate / eps).into(),
            (*crit).into(),
            (*ratio).into(),
            want.into(),
            err.into(),
        ])?;
    }
    plot_beside(out, "lifespan.csv")?;
    let hi = spans.iter().cloned().fold(0.0, f64::max);
    let lo = spans.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(json!({
        "gamma_critical": gc,
        "gamma": g,
        "norm_exponent": predicted,
        "t_over_eps_spread": hi / lo,
        "max_ratio_error": worst,
    }))
}

fn uniformity(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, Failure> {
    let mu = cfg.mu.unwrap_or(4.0);
    let alpha = dyadic_critical_alpha(cfg.m, cfg.n, mu, cfg.p);
    let spec = match cfg.kernel {
        Kernel::Synthetic => FioKernelSpec::synthetic(cfg.m, mu, alpha),
        Kernel::Physical => FioKernelSpec::physical(cfg.m, mu, alpha),
    };
    let r = tricomi_core::dyadic::check_dyadic_tuple(cfg.m, cfg.n, mu, cfg.p, None)?;
    let tuple = StrichartzTuple { s: f64::NAN, q: f64::NAN, r, p: cfg.p, gamma: f64::NAN, mu, kind: TupleKind::Custom };
    let uc = UniformityConfig {
        j_list: (cfg.j_min..=cfg.j_max).collect(),
        trials: cfg.trials,
        seed: cfg.seed,
        grid: scaled_grid(cfg),
        exponent_offset: cfg.offset,
    };
    let rep = uniformity_probe(&spec, cfg.n, &tuple, &uc)?;
    let mut csv = out.csv("uniformity.csv", &["j", "trial", "ratio", "exponent"])?;
    for row in &rep.rows {
        csv.row(&[row.j.into(), row.trial.into(), row.ratio.into(), row.exponent.into()])?;
    }
    plot_beside(out, "uniformity.csv")?;
    Ok(json!({
        "p": rep.p,
        "r": rep.r,
        "alpha": alpha,
        "exponent": rep.exponent,
        "max_per_j": rep.max_per_j,
        "spread": rep.spread,
        "slope": rep.slope,
    }))
}
