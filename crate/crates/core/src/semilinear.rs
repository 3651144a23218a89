//! Picard iteration for `∂ₜ²u − tᵐΔu = F(u)` with `F(u) = ±|u|^{κ−1}u`,
//! the contraction quantities `H_j`, `N_j`, lifespan bisection and the
//! dilation family `u_ε(t,x) = ε^{−2/(κ−1)}u(t/ε, ε^{−(m+2)/2}x)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{
    classify_regime, derive_exponents, mu_star, supplementary_tuple, theorem_tuple, ProblemParams, Regime,
    StrichartzTuple,
};
use crate::linear::{check_cone, residual_report, LinearSolver};
use crate::spectral::{
    fractional_derivative, mixed_norm_physical, transform_forward, transform_inverse, Grid, PhysicalField, SpaceGrid,
    SpaceTimeField, SpectralField,
};

/// `F(u) = sign·|u|^{κ−1}u`. A zero sign switches the nonlinearity off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub kappa: f64,
    pub sign: f64,
}

impl Nonlinearity {
    pub fn from_params(p: &ProblemParams) -> Self {
        Nonlinearity { kappa: p.kappa, sign: p.sign as f64 }
    }

    #[inline]
    pub fn eval(&self, u: Complex64) -> Complex64 {
        let a = u.norm();
        if a == 0.0 || self.sign == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        u * (self.sign * a.powf(self.kappa - 1.0))
    }
}

/// Pointwise `F(u)` on a physical field.
pub fn nonlinearity(u: &PhysicalField, kappa: f64, sign: f64) -> PhysicalField {
    let f = Nonlinearity { kappa, sign };
    PhysicalField { space: u.space, values: u.values.iter().map(|&v| f.eval(v)).collect() }
}

/// `G(u, ũ) = (F(u) − F(ũ))/(u − ũ)` for real arguments; `F'(u)` on the
/// diagonal.
pub fn difference_quotient(u: f64, v: f64, kappa: f64, sign: f64) -> f64 {
    let f = |x: f64| sign * x.abs().powf(kappa - 1.0) * x;
    if u == v {
        return sign * kappa * u.abs().powf(kappa - 1.0);
    }
    (f(u) - f(v)) / (u - v)
}

fn apply_nonlinearity(u: &SpaceTimeField, nl: Nonlinearity) -> Result<SpaceTimeField> {
    let slices = u
        .to_physical()?
        .iter()
        .map(|p| transform_forward(&nonlinearity(p, nl.kappa, nl.sign)))
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(&u.grid, slices)
}

/// One mixed norm `‖|D|^order (u − [u₀])‖_{L^s_tL^q_x}` entering `H_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormTerm {
    pub order: f64,
    pub s: f64,
    pub q: f64,
    /// Measure `u_j − u₀` instead of `u_j`.
    pub relative_to_first: bool,
}

impl NormTerm {
    pub fn plain(s: f64, q: f64) -> Self {
        NormTerm { order: 0.0, s, q, relative_to_first: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coverage {
    Full,
    /// Only the endpoints of a continuous family of norms are monitored.
    Partial,
}

/// The norms behind `H_j = ‖u_j‖_{C⁰Ḣ^γ} + Σ terms` and `N_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorNorms {
    pub gamma: f64,
    pub terms: Vec<NormTerm>,
    pub difference: NormTerm,
    /// `(s, q)` in the smallness functional `2T^{1/q−1/s}H₀`.
    pub smallness_pair: (f64, f64),
    pub coverage: Coverage,
}

impl MonitorNorms {
    /// `H = C⁰Ḣ^γ + L^sL^q`, `N` in `L^sL^q`.
    pub fn from_tuple(t: &StrichartzTuple) -> Self {
        let term = NormTerm::plain(t.s, t.q);
        MonitorNorms {
            gamma: t.gamma,
            terms: vec![term],
            difference: term,
            smallness_pair: (t.s, t.q),
            coverage: Coverage::Full,
        }
    }

    /// Norms of the existence proof for the regime of `p`. Above κ* the
    /// localized difference norm on the cone is replaced by the global grid
    /// norm (the torus is bounded).
    pub fn for_params(p: &ProblemParams) -> Result<Self> {
        let tuple = theorem_tuple(p)?;
        let (m, n) = (p.m, p.n);
        let mf = m as f64;
        let q0s = derive_exponents(m, n, mu_star(m, n))?.q0_star;
        let q = tuple.q;
        let diff = NormTerm::plain(q0s, q0s);
        Ok(match classify_regime(p) {
            Regime::Thm11Sub | Regime::Thm16Window | Regime::BelowKnown => MonitorNorms::from_tuple(&tuple),
            Regime::Conformal | Regime::Thm11Super | Regime::Thm15Window => MonitorNorms {
                gamma: tuple.gamma,
                terms: vec![
                    NormTerm::plain(q, q),
                    NormTerm { order: tuple.gamma - 1.0 / (mf + 2.0), s: q0s, q: q0s, relative_to_first: false },
                ],
                difference: diff,
                smallness_pair: (q, q),
                coverage: Coverage::Full,
            },
            Regime::LargeIntegerKappa => {
                let ms = mu_star(m, n);
                let order = |tau: f64| {
                    ((mf + 2.0) * n as f64 + 2.0) / (tau * (mf + 2.0)) - 4.0 / ((mf + 2.0) * (p.kappa - 1.0))
                };
                let top = ms * (p.kappa - 1.0) / 2.0;
                MonitorNorms {
                    gamma: tuple.gamma,
                    terms: [q0s, top]
                        .iter()
                        .map(|&tau| NormTerm { order: order(tau), s: tau, q: tau, relative_to_first: false })
                        .collect(),
                    difference: diff,
                    smallness_pair: (q, q),
                    coverage: Coverage::Partial,
                }
            }
        })
    }

    /// The `s ≠ q` monitor for κ* ≤ κ < κ₂: adds `‖u_j − u₀‖_{L^∞_tL^δ_x}`
    /// with `1/δ = 1/2 − γ/n`.
    pub fn supplementary(p: &ProblemParams) -> Result<Self> {
        let t = supplementary_tuple(p)?;
        let delta = 1.0 / (0.5 - t.gamma / p.n as f64);
        let mut norms = MonitorNorms::from_tuple(&t);
        norms.terms.push(NormTerm { order: 0.0, s: f64::INFINITY, q: delta, relative_to_first: true });
        Ok(norms)
    }

    fn term_norm(&self, term: &NormTerm, u: &SpaceTimeField, first: Option<&SpaceTimeField>) -> Result<f64> {
        let mut field = match (term.relative_to_first, first) {
            (true, Some(u0)) => u.axpy(-1.0, u0),
            _ => u.clone(),
        };
        if term.order != 0.0 {
            for s in field.slices.iter_mut() {
                *s = fractional_derivative(s, term.order);
            }
        }
        Ok(mixed_norm_physical(&field.to_physical()?, &field.grid.times, term.s, term.q))
    }

    pub fn h(&self, u: &SpaceTimeField, first: Option<&SpaceTimeField>) -> Result<f64> {
        let mut total = u.sup_sobolev(self.gamma);
        for t in &self.terms {
            total += self.term_norm(t, u, first)?;
        }
        Ok(total)
    }

    pub fn n(&self, u: &SpaceTimeField, prev: Option<&SpaceTimeField>) -> Result<f64> {
        match prev {
            Some(p) => self.term_norm(&self.difference, &u.axpy(-1.0, p), None),
            None => self.term_norm(&self.difference, u, None),
        }
    }

    /// `2T^{1/q−1/s}H₀`.
    pub fn smallness(&self, t_end: f64, h0: f64) -> f64 {
        let (s, q) = self.smallness_pair;
        2.0 * t_end.powf(1.0 / q - 1.0 / s) * h0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    Converged { iterations: usize },
    Diverged { step: usize },
    MaxIter,
}

impl Outcome {
    pub fn converged(&self) -> bool {
        matches!(self, Outcome::Converged { .. })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationReport {
    pub h: Vec<f64>,
    pub n: Vec<f64>,
    /// `N_j/N_{j−1}` for `j ≥ 1`.
    pub ratios: Vec<f64>,
    /// `N_j ≤ ½N_{j−1}` for `j ≥ 1`.
    pub contraction_ok: Vec<bool>,
    pub converged: bool,
    pub outcome: Outcome,
    pub final_residual: Option<f64>,
    pub lifespan_estimate: Option<f64>,
    pub smallness: f64,
    pub eps0: Option<f64>,
    pub coverage: Coverage,
    pub t_end: f64,
}

impl IterationReport {
    fn empty(norms: &MonitorNorms, t_end: f64) -> Self {
        IterationReport {
            h: Vec::new(),
            n: Vec::new(),
            ratios: Vec::new(),
            contraction_ok: Vec::new(),
            converged: false,
            outcome: Outcome::MaxIter,
            final_residual: None,
            lifespan_estimate: None,
            smallness: f64::NAN,
            eps0: None,
            coverage: norms.coverage,
            t_end,
        }
    }

    fn record(&mut self, norms: &MonitorNorms, h: f64, n: f64) {
        if let Some(&prev) = self.n.last() {
            let ratio = if prev > 0.0 {
                n / prev
            } else if n == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            self.ratios.push(ratio);
            self.contraction_ok.push(n <= 0.5 * prev);
        } else {
            self.smallness = norms.smallness(self.t_end, h);
        }
        self.h.push(h);
        self.n.push(n);
    }

    /// Whether the smallness functional sits at or below the calibrated ε₀.
    pub fn within_eps0(&self) -> Option<bool> {
        self.eps0.map(|e| self.smallness <= e)
    }

    pub fn all_contracting(&self) -> bool {
        self.contraction_ok.iter().all(|&b| b)
    }
}

/// `H_j`, `N_j` and the contraction flags of a sequence `u₀, u₁, …`, with
/// `u₋₁ = 0`.
pub fn contraction_monitor(u_seq: &[SpaceTimeField], norms: &MonitorNorms) -> Result<IterationReport> {
    if u_seq.len() < 2 {
        return Err(Error::InvalidParams("the monitor needs at least two iterates".into()));
    }
    let mut rep = IterationReport::empty(norms, u_seq[0].grid.t_end());
    for (j, u) in u_seq.iter().enumerate() {
        let h = norms.h(u, Some(&u_seq[0]))?;
        let n = norms.n(u, if j == 0 { None } else { Some(&u_seq[j - 1]) })?;
        rep.record(norms, h, n);
    }
    Ok(rep)
}

/// The iterate `u₋₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitialIterate {
    Zero,
    /// `u₋₁ = v`, the homogeneous solution. This only shifts the sequence
    /// started from zero by one step.
    Homogeneous,
    /// `u₋₁ = c·v`, a genuinely different sequence for `c ∉ {0, 1}`.
    ScaledHomogeneous(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PicardConfig {
    pub max_iter: usize,
    /// Stop once `N_j ≤ tol·‖u_j‖` in the difference norm.
    pub tol: f64,
    pub initial: InitialIterate,
    /// Divergence once `max|u_j|` exceeds this multiple of `max|u₀|`.
    pub blowup_factor: f64,
    /// Consecutive increases of `N_j` that count as divergence.
    pub growth_steps: usize,
    pub eps0: Option<f64>,
    /// Radius of the data support, for the cone check.
    pub support_radius: Option<f64>,
    pub keep_iterates: bool,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            max_iter: 40,
            tol: 1e-10,
            initial: InitialIterate::Zero,
            blowup_factor: 1e6,
            growth_steps: 3,
            eps0: None,
            support_radius: None,
            keep_iterates: false,
        }
    }
}

/// Everything fixed by the equation: `m`, `F` and the monitored norms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PicardSetup {
    pub m: u32,
    pub nonlinearity: Nonlinearity,
    pub norms: MonitorNorms,
}

impl PicardSetup {
    pub fn new(params: &ProblemParams) -> Result<Self> {
        Ok(PicardSetup {
            m: params.m,
            nonlinearity: Nonlinearity::from_params(params),
            norms: MonitorNorms::for_params(params)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct PicardRun {
    pub u: SpaceTimeField,
    pub report: IterationReport,
    /// `u₀, u₁, …` when requested.
    pub iterates: Vec<SpaceTimeField>,
}

fn max_abs(u: &SpaceTimeField) -> Result<f64> {
    Ok(u.to_physical()?.iter().fold(0.0f64, |a, p| a.max(p.max_abs())))
}

/// `u_{j+1} = v + Duhamel(F(u_j))` from `u₋₁`, with `v` the homogeneous
/// solution.
pub fn picard_solve(
    setup: &PicardSetup,
    solver: &LinearSolver,
    phi_hat: &SpectralField,
    psi_hat: &SpectralField,
    cfg: &PicardConfig,
) -> Result<PicardRun> {
    if solver.m != setup.m {
        return Err(Error::InvalidParams(format!("solver built for m = {}, problem has m = {}", solver.m, setup.m)));
    }
    if let Some(r0) = cfg.support_radius {
        check_cone(&solver.grid, setup.m, r0)?;
    }
    if !(cfg.tol > 0.0) || cfg.max_iter == 0 {
        return Err(Error::InvalidParams("need tol > 0 and max_iter >= 1".into()));
    }
    let grid = &solver.grid;
    let norms = &setup.norms;
    let nl = setup.nonlinearity;
    let v = solver.homogeneous(phi_hat, psi_hat)?;
    let step = |prev: &SpaceTimeField| -> Result<SpaceTimeField> {
        let w = solver.duhamel(&apply_nonlinearity(prev, nl)?)?;
        Ok(v.axpy(1.0, &w))
    };
    let start = match cfg.initial {
        InitialIterate::Zero => None,
        InitialIterate::Homogeneous => Some(v.clone()),
        InitialIterate::ScaledHomogeneous(c) => Some(v.scale(c)),
    };
    let mut u = match &start {
        None => v.clone(),
        Some(w) => step(w)?,
    };
    let mut report = IterationReport::empty(norms, grid.t_end());
    report.eps0 = cfg.eps0;
    let reference = max_abs(&u)?;
    let first = u.clone();
    let n0 = norms.n(&u, start.as_ref())?;
    report.record(norms, norms.h(&u, Some(&first))?, n0);
    let mut iterates = if cfg.keep_iterates { vec![u.clone()] } else { Vec::new() };
    let mut growth = 0usize;
    for j in 1..=cfg.max_iter {
        let next = step(&u)?;
        let n = norms.n(&next, Some(&u))?;
        let h = norms.h(&next, Some(&first))?;
        let peak = max_abs(&next)?;
        let prev_n = *report.n.last().unwrap();
        report.record(norms, h, n);
        u = next;
        if cfg.keep_iterates {
            iterates.push(u.clone());
        }
        growth = if n > prev_n { growth + 1 } else { 0 };
        if !n.is_finite() || !peak.is_finite() || peak > cfg.blowup_factor * reference || growth >= cfg.growth_steps {
            report.outcome = Outcome::Diverged { step: j };
            break;
        }
        let size = norms.n(&u, None)?;
        if n <= cfg.tol * size {
            report.outcome = Outcome::Converged { iterations: j };
            report.converged = true;
            break;
        }
    }
    if report.converged {
        let source = apply_nonlinearity(&u, nl)?;
        report.final_residual = residual_report(&u, setup.m, Some(&source)).ok().map(|r| r.relative);
    }
    Ok(PicardRun { u, report, iterates })
}

/// Largest smallness functional among runs that converged while
/// contracting at every step.
pub fn calibrate_eps0(reports: &[IterationReport]) -> Option<f64> {
    reports
        .iter()
        .filter(|r| r.converged && r.all_contracting())
        .map(|r| r.smallness)
        .fold(None, |a: Option<f64>, s| Some(a.map_or(s, |a| a.max(s))))
}

/// Largest `‖u − ũ‖_{L^sL^q}/‖u‖` between the run from `u₋₁ = 0` and the
/// runs from `u₋₁ = v` and `u₋₁ = −v`.
pub fn uniqueness_check(
    setup: &PicardSetup,
    solver: &LinearSolver,
    phi_hat: &SpectralField,
    psi_hat: &SpectralField,
    cfg: &PicardConfig,
) -> Result<f64> {
    let mut base = cfg.clone();
    base.keep_iterates = false;
    let starts = [
        ("u_-1 = 0", InitialIterate::Zero),
        ("u_-1 = v", InitialIterate::Homogeneous),
        ("u_-1 = -v", InitialIterate::ScaledHomogeneous(-1.0)),
    ];
    let mut runs = Vec::with_capacity(starts.len());
    for (name, initial) in starts {
        let r = picard_solve(setup, solver, phi_hat, psi_hat, &PicardConfig { initial, ..base.clone() })?;
        if !r.report.converged {
            return Err(Error::Numeric(format!("run from {name} did not converge ({:?})", r.report.outcome)));
        }
        runs.push(r.u);
    }
    let norm = setup.norms.n(&runs[0], None)?;
    let mut worst = 0.0f64;
    for other in &runs[1..] {
        let d = setup.norms.n(&runs[0], Some(other))?;
        worst = worst.max(if norm == 0.0 { d } else { d / norm });
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LifespanConfig {
    pub bracket: (f64, f64),
    pub bisections: usize,
    pub steps: usize,
    pub picard: PicardConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LifespanReport {
    /// Midpoint of the final bracket.
    pub estimate: f64,
    /// Width of the final bracket.
    pub uncertainty: f64,
    pub bracket: (f64, f64),
    pub history: Vec<(f64, Outcome)>,
}

/// Bisection on `T` for the boundary between converged and non-converged
/// Picard runs; the grid at each `T` has `steps` uniform time steps.
pub fn lifespan_search(
    setup: &PicardSetup,
    space: SpaceGrid,
    phi_hat: &SpectralField,
    psi_hat: &SpectralField,
    cfg: &LifespanConfig,
) -> Result<LifespanReport> {
    let (mut lo, mut hi) = cfg.bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParams(format!("invalid bracket ({lo}, {hi})")));
    }
    let mut history = Vec::new();
    let mut run = |t: f64| -> Result<Outcome> {
        let grid = Grid::uniform(space, t, cfg.steps)?;
        let solver = LinearSolver::new(setup.m, &grid)?;
        let out = picard_solve(setup, &solver, phi_hat, psi_hat, &cfg.picard)?.report.outcome;
        history.push((t, out));
        Ok(out)
    };
    let at_lo = run(lo)?;
    let at_hi = run(hi)?;
    if !at_lo.converged() || at_hi.converged() {
        return Err(Error::Hypothesis(format!(
            "lifespan bracket must converge at T = {lo} and fail at T = {hi}, got {at_lo:?} and {at_hi:?}"
        )));
    }
    for _ in 0..cfg.bisections {
        let mid = 0.5 * (lo + hi);
        if run(mid)?.converged() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(LifespanReport { estimate: 0.5 * (lo + hi), uncertainty: hi - lo, bracket: (lo, hi), history })
}

fn dilate_space(space: &SpaceGrid, m: u32, epsilon: f64) -> Result<SpaceGrid> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParams(format!("epsilon must be positive, got {epsilon}")));
    }
    SpaceGrid::new(space.dim, space.extent * epsilon.powf((m as f64 + 2.0) / 2.0), space.points)
}

fn rescale_samples(f: &SpectralField, space: SpaceGrid, factor: f64) -> Result<SpectralField> {
    let values = transform_inverse(f)?.values.iter().map(|v| v * factor).collect();
    transform_forward(&PhysicalField { space, values })
}

/// `φ_ε(x) = ε^{−2/(κ−1)}φ(ε^{−(m+2)/2}x)`, `ψ_ε(x) = ε^{−2/(κ−1)−1}ψ(ε^{−(m+2)/2}x)`,
/// realized on the box dilated by `ε^{(m+2)/2}` so every sample maps onto a
/// sample.
pub fn scaling_family(
    phi_hat: &SpectralField,
    psi_hat: &SpectralField,
    epsilon: f64,
    params: &ProblemParams,
) -> Result<(SpectralField, SpectralField)> {
    if phi_hat.space != psi_hat.space {
        return Err(Error::InvalidParams("phi and psi live on different grids".into()));
    }
    let space = dilate_space(&phi_hat.space, params.m, epsilon)?;
    let a = epsilon.powf(-2.0 / (params.kappa - 1.0));
    Ok((rescale_samples(phi_hat, space, a)?, rescale_samples(psi_hat, space, a / epsilon)?))
}

/// `u_ε(t,x) = ε^{−2/(κ−1)}u(t/ε, ε^{−(m+2)/2}x)` on the dilated space-time
/// grid.
pub fn rescale_solution(u: &SpaceTimeField, epsilon: f64, params: &ProblemParams) -> Result<SpaceTimeField> {
    let space = dilate_space(&u.grid.space, params.m, epsilon)?;
    let grid = Grid::new(space, u.grid.times.iter().map(|t| t * epsilon).collect())?;
    let a = epsilon.powf(-2.0 / (params.kappa - 1.0));
    let slices = u.slices.iter().map(|s| rescale_samples(s, space, a)).collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(&grid, slices)
}
