//! Littlewood–Paley pieces and the dyadic Fourier integral operators
//! `W_j^α f(t) = ∫₀ᵗ e^{i(φ(t)−φ(τ))|D|} b_j(t,τ,D)|D|^{−α} f(τ) dτ`, with
//! the probes that measure their operator norms across `j`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{conjugate, derive_exponents, dyadic_exponent, dyadic_time_exponent, StrichartzTuple};
use crate::linear::LinearSolver;
use crate::propagator::{eta, phi, symbol_b};
use crate::quadrature::simpson_weights;
use crate::spectral::{
    mixed_norm_physical, sobolev_norm, transform_forward, Grid, PhysicalField, SpaceGrid, SpaceTimeField, SpectralField,
};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `Θ(r) = η(r) − η(2r)`: supported in `[1/2, 2]`, and `Σ_j Θ(r/2^j)`
/// telescopes to 1.
pub fn theta(r: f64) -> f64 {
    eta(r) - eta(2.0 * r)
}

/// A finite window `j_min..=j_max` of the dyadic partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicPartition {
    pub j_min: i32,
    pub j_max: i32,
}

impl DyadicPartition {
    pub fn new(j_min: i32, j_max: i32) -> Result<Self> {
        if j_min > j_max {
            return Err(Error::InvalidParams(format!("empty dyadic range {j_min}..={j_max}")));
        }
        Ok(DyadicPartition { j_min, j_max })
    }

    /// Smallest window whose shells cover every nonzero frequency of the
    /// grid.
    pub fn covering(space: &SpaceGrid) -> Self {
        let lo = space.dk();
        let hi = space.dk() * (space.dim as f64).sqrt() * (space.points / 2) as f64;
        DyadicPartition { j_min: lo.log2().floor() as i32 - 1, j_max: hi.log2().ceil() as i32 + 1 }
    }

    pub fn weight(&self, j: i32, r: f64) -> f64 {
        theta(r / 2f64.powi(j))
    }

    /// `Σ_j Θ(r/2^j)` over the window.
    pub fn resum(&self, r: f64) -> f64 {
        (self.j_min..=self.j_max).map(|j| self.weight(j, r)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> {
        self.j_min..=self.j_max
    }
}

/// `P_j u`: multiply by `Θ(|ξ|/2^j)`.
pub fn project_dyadic(field: &SpectralField, j: i32) -> SpectralField {
    let scale = 2f64.powi(j);
    field.apply_radial(|r| theta(r / scale))
}

/// `(Σ_j ‖P_j u‖²)^{1/2} / ‖u‖_{L²}` over the window.
pub fn square_function_ratio(field: &SpectralField, partition: &DyadicPartition) -> f64 {
    let total: f64 = partition.iter().map(|j| project_dyadic(field, j).l2_norm().powi(2)).sum();
    total.sqrt() / field.l2_norm()
}

/// Amplitude `b(t, τ, ξ)` of the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    /// `b₂(t,ξ)b₃(τ,ξ)`, the outgoing-incoming product of the propagator
    /// symbols.
    Physical,
    /// `(1+|φ(t)−φ(τ)||ξ|)^{−m/(μ(m+2))}|ξ|^{−2/(m+2)}`, meeting the amplitude
    /// bound with constant 1.
    Synthetic,
    /// `b ≡ 1`.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FioKernelSpec {
    pub kind: KernelKind,
    pub m: u32,
    pub mu: f64,
    pub alpha: Complex64,
}

impl FioKernelSpec {
    pub fn synthetic(m: u32, mu: f64, alpha: f64) -> Self {
        FioKernelSpec { kind: KernelKind::Synthetic, m, mu, alpha: Complex64::new(alpha, 0.0) }
    }

    pub fn physical(m: u32, mu: f64, alpha: f64) -> Self {
        FioKernelSpec { kind: KernelKind::Physical, m, mu, alpha: Complex64::new(alpha, 0.0) }
    }

    /// Synthetic amplitude at `(t, τ, |ξ|)`.
    pub fn synthetic_amplitude(&self, t: f64, tau: f64, r: f64) -> f64 {
        let mf = self.m as f64;
        let d = (phi(t, self.m) - phi(tau, self.m)).abs() * r;
        (1.0 + d).powf(-mf / (self.mu * (mf + 2.0))) * r.powf(-2.0 / (mf + 2.0))
    }
}

/// Frequency localization of the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Localization {
    Shell(i32),
    /// No cutoff: the operator `W` itself (zero mode excluded).
    Full,
}

/// Precomputed causal kernel `K_{il}(|ξ|)` for every radius the operator
/// touches; reused across inputs on the same grid.
#[derive(Debug, Clone)]
pub struct DyadicOperator {
    pub grid: Grid,
    pub spec: FioKernelSpec,
    pub localization: Localization,
    /// Kernel slot of every mode, `None` outside the shell.
    slot: Vec<Option<usize>>,
    /// Packed lower-triangular `(i, l ≤ i)` kernels, one per radius.
    kernels: Vec<Vec<Complex64>>,
}

#[inline]
fn packed(i: usize, l: usize) -> usize {
    i * (i + 1) / 2 + l
}

impl DyadicOperator {
    pub fn new(grid: &Grid, spec: FioKernelSpec, localization: Localization) -> Result<Self> {
        if spec.mu < 2f64.max(spec.m as f64 / 2.0) {
            return Err(Error::Hypothesis(format!(
                "the dyadic estimates require mu >= max{{2, m/2}}, got mu = {}",
                spec.mu
            )));
        }
        let sp = grid.space;
        let classes = sp.radial_classes();
        let cutoff = |r: f64| match localization {
            Localization::Shell(j) => theta(r / 2f64.powi(j)),
            Localization::Full => {
                if r > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        };
        let active: Vec<usize> = (0..classes.radii.len()).filter(|&c| cutoff(classes.radii[c]) > 0.0).collect();
        let times = &grid.times;
        let nt = times.len();
        let weights: Vec<Vec<f64>> = (0..nt).map(|i| simpson_weights(times, i)).collect();
        let phases: Vec<f64> = times.iter().map(|&t| phi(t, spec.m)).collect();
        let kernels = active
            .par_iter()
            .map(|&c| {
                let r = classes.radii[c];
                let amp = cutoff(r);
                let pow = (-spec.alpha * r.ln()).exp();
                let (b2, b3): (Vec<Complex64>, Vec<Complex64>) = match spec.kind {
                    KernelKind::Physical => {
                        let b2 = times.iter().map(|&t| symbol_b(2, t, r, spec.m)).collect::<Result<Vec<_>>>()?;
                        let b3 = times.iter().map(|&t| symbol_b(3, t, r, spec.m)).collect::<Result<Vec<_>>>()?;
                        (b2, b3)
                    }
                    _ => (Vec::new(), Vec::new()),
                };
                let mut k = Vec::with_capacity(nt * (nt + 1) / 2);
                for i in 0..nt {
                    for l in 0..=i {
                        let b = match spec.kind {
                            KernelKind::Physical => b2[i] * b3[l],
                            KernelKind::Synthetic => {
                                Complex64::new(spec.synthetic_amplitude(times[i], times[l], r), 0.0)
                            }
                            KernelKind::Unit => Complex64::new(1.0, 0.0),
                        };
                        let ph = Complex64::new(0.0, (phases[i] - phases[l]) * r).exp();
                        k.push(ph * b * pow * (amp * weights[i][l]));
                    }
                }
                Ok(k)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut slot_of_class = vec![None; classes.radii.len()];
        for (s, &c) in active.iter().enumerate() {
            slot_of_class[c] = Some(s);
        }
        let slot = classes.class.iter().map(|&c| slot_of_class[c]).collect();
        Ok(DyadicOperator { grid: grid.clone(), spec, localization, slot, kernels })
    }

    pub fn apply(&self, f: &SpaceTimeField) -> Result<SpaceTimeField> {
        if f.grid != self.grid {
            return Err(Error::InvalidParams("input is sampled on a different grid".into()));
        }
        let nt = self.grid.times.len();
        let nm = self.grid.space.len();
        let per_mode: Vec<Option<Vec<Complex64>>> = (0..nm)
            .into_par_iter()
            .map(|k| {
                let s = self.slot[k]?;
                let ker = &self.kernels[s];
                let fk: Vec<Complex64> = f.slices.iter().map(|sl| sl.coeffs[k]).collect();
                Some(
                    (0..nt)
                        .map(|i| {
                            let row = &ker[packed(i, 0)..=packed(i, i)];
                            row.iter().zip(&fk).fold(ZERO, |acc, (a, b)| acc + a * b)
                        })
                        .collect(),
                )
            })
            .collect();
        let slices = (0..nt)
            .map(|i| SpectralField {
                space: self.grid.space,
                coeffs: per_mode.iter().map(|w| w.as_ref().map_or(ZERO, |w| w[i])).collect(),
            })
            .collect();
        SpaceTimeField::new(&self.grid, slices)
    }

    /// Number of modes the operator acts on.
    pub fn support_size(&self) -> usize {
        self.slot.iter().filter(|s| s.is_some()).count()
    }
}

/// `W_j^α f` on `f`'s grid.
pub fn apply_wj_alpha(f: &SpaceTimeField, j: i32, spec: FioKernelSpec) -> Result<SpaceTimeField> {
    DyadicOperator::new(&f.grid, spec, Localization::Shell(j))?.apply(f)
}

/// Base geometry of a dilation ladder: at scale `λ` the box is `L₀/λ` and
/// the time window `T₀λ^{−2/(m+2)}`, the anisotropic dilation under which
/// `φ(t)|ξ|` is invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledGrid {
    pub dim: usize,
    pub points: usize,
    pub base_extent: f64,
    pub base_time: f64,
    pub steps: usize,
}

impl ScaledGrid {
    pub fn at(&self, lambda: f64, m: u32) -> Result<Grid> {
        let sp = SpaceGrid::new(self.dim, self.base_extent / lambda, self.points)?;
        Grid::uniform(sp, self.base_time * lambda.powf(-2.0 / (m as f64 + 2.0)), self.steps)
    }
}

/// Configuration of [`uniformity_probe`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformityConfig {
    pub j_list: Vec<i32>,
    pub trials: usize,
    pub seed: u64,
    pub grid: ScaledGrid,
    /// Added to the exponent `E` in the normalization `λ_j^E`; nonzero
    /// values are negative controls.
    pub exponent_offset: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeRow {
    pub j: i32,
    pub trial: usize,
    pub ratio: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformityReport {
    pub p: f64,
    pub r: f64,
    pub exponent: f64,
    pub rows: Vec<ProbeRow>,
    /// `(j, max over trials of R_j)`.
    pub max_per_j: Vec<(i32, f64)>,
    pub spread: f64,
    /// Least-squares slope of `log₂ max R_j` against `j`.
    pub slope: f64,
}

/// Parameters of one random test function, in units of the `j = 0` grid.
#[derive(Debug, Clone, Copy)]
struct Trial {
    center: [f64; 3],
    direction: [f64; 3],
    frequency: f64,
    width: f64,
    t_center: f64,
    t_width: f64,
}

fn draw_trial(seed: u64, index: usize, dim: usize, freq: (f64, f64), width: (f64, f64), jitter: f64) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index as u64 + 1)));
    let mut center = [0.0; 3];
    let mut direction = [0.0; 3];
    let mut norm = 0.0f64;
    for d in 0..dim {
        center[d] = rng.random_range(-jitter..=jitter);
        direction[d] = rng.random_range(-1.0..1.0);
        norm += direction[d] * direction[d];
    }
    let norm = norm.sqrt().max(1e-12);
    for v in direction.iter_mut().take(dim) {
        *v /= norm;
    }
    Trial {
        center,
        direction,
        frequency: rng.random_range(freq.0..=freq.1),
        width: rng.random_range(width.0..=width.1),
        t_center: rng.random_range(0.2..=0.5),
        t_width: rng.random_range(0.08..=0.15),
    }
}

/// Modulated Gaussian `exp(−|y|²/(2w²)) cos(κ ω·y)` with `y` measured from
/// the box center plus the trial offset, all lengths scaled by `1/λ`.
fn trial_profile(tr: &Trial, space: &SpaceGrid, lambda: f64) -> PhysicalField {
    let c = space.extent / 2.0;
    PhysicalField::from_fn(space.to_owned(), |x| {
        let mut r2 = 0.0;
        let mut proj = 0.0;
        for d in 0..x.len() {
            let y = x[d] - c - tr.center[d] / lambda;
            r2 += y * y;
            proj += y * tr.direction[d];
        }
        let w = tr.width / lambda;
        (-r2 / (2.0 * w * w)).exp() * (tr.frequency * lambda * proj).cos()
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Check the source exponents against the `L^r_tL^p_x → L^{r'}_tL^{p'}_x`
/// estimate: `n ≥ 2`, `μ ≥ max{2, m/2}`, `max{p₁,1} < p ≤ 2` and `r` paired
/// with `p`. Returns `r`.
pub fn check_dyadic_tuple(m: u32, n: u32, mu: f64, p: f64, r: Option<f64>) -> Result<f64> {
    let table = derive_exponents(m, n, mu)?;
    let lo = table.p1.max(1.0);
    if !(p > lo && p <= 2.0) {
        return Err(Error::Hypothesis(format!(
            "the dyadic estimate requires max{{p1, 1}} = {lo:.6} < p <= 2, got p = {p}"
        )));
    }
    let paired = dyadic_time_exponent(m, n, mu, p);
    if let Some(r) = r {
        if (1.0 / r - 1.0 / paired).abs() > 1e-9 {
            return Err(Error::Hypothesis(format!(
                "the dyadic estimate pairs p = {p} with r = {paired:.6}, got r = {r}"
            )));
        }
    }
    Ok(paired)
}

/// Measure `R_j = ‖W_j^α f‖_{L^{r'}L^{p'}} / (λ_j^{E}‖f‖_{L^rL^p})` over
/// random shell-adapted inputs on `j`-dilated grids.
pub fn uniformity_probe(
    spec: &FioKernelSpec,
    n: u32,
    tuple: &StrichartzTuple,
    cfg: &UniformityConfig,
) -> Result<UniformityReport> {
    if cfg.grid.dim != n as usize {
        return Err(Error::InvalidParams(format!("grid dimension {} does not match n = {n}", cfg.grid.dim)));
    }
    if cfg.j_list.is_empty() || cfg.trials == 0 {
        return Err(Error::InvalidParams("probe needs at least one j and one trial".into()));
    }
    let m = spec.m;
    let p = tuple.p;
    let r = check_dyadic_tuple(m, n, spec.mu, p, Some(tuple.r))?;
    let exponent = dyadic_exponent(m, n, spec.mu, p, spec.alpha.re) + cfg.exponent_offset;
    let trials: Vec<Trial> = (0..cfg.trials)
        .map(|i| draw_trial(cfg.seed, i, cfg.grid.dim, (0.9, 1.1), (4.0, 6.0), cfg.grid.base_extent / 16.0))
        .collect();
    let mut rows = Vec::new();
    let mut max_per_j = Vec::new();
    for &j in &cfg.j_list {
        let lambda = 2f64.powi(j);
        let grid = cfg.grid.at(lambda, m)?;
        let op = DyadicOperator::new(&grid, *spec, Localization::Shell(j))?;
        let t_end = grid.t_end();
        let mut best = 0.0f64;
        for (ti, tr) in trials.iter().enumerate() {
            let profile = transform_forward(&trial_profile(tr, &grid.space, lambda))?;
            let slices = grid
                .times
                .iter()
                .map(|&t| {
                    let a = ((t / t_end - tr.t_center) / tr.t_width).powi(2);
                    profile.scale((-0.5 * a).exp())
                })
                .collect();
            let f = SpaceTimeField::new(&grid, slices)?;
            let w = op.apply(&f)?;
            let num = mixed_norm_physical(&w.to_physical()?, &grid.times, conjugate(r), conjugate(p));
            let den = mixed_norm_physical(&f.to_physical()?, &grid.times, r, p);
            let ratio = num / (lambda.powf(exponent) * den);
            best = best.max(ratio);
            rows.push(ProbeRow { j, trial: ti, ratio, exponent });
        }
        max_per_j.push((j, best));
    }
    let vals: Vec<f64> = max_per_j.iter().map(|x| x.1).collect();
    let spread = vals.iter().cloned().fold(0.0, f64::max) / vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let xs: Vec<f64> = max_per_j.iter().map(|x| x.0 as f64).collect();
    let ys: Vec<f64> = vals.iter().map(|v| v.log2()).collect();
    Ok(UniformityReport { p, r, exponent, rows, max_per_j, spread, slope: least_squares_slope(&xs, &ys) })
}

/// Configuration of [`homogeneous_probe`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomogeneousConfig {
    /// Dilation factors `λ` of the data family.
    pub ladder: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub grid: ScaledGrid,
    /// Data regularity used in the denominator is `γ + gamma_shift`.
    pub gamma_shift: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomogeneousRow {
    pub lambda: f64,
    pub trial: usize,
    pub solution_norm: f64,
    pub data_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomogeneousReport {
    pub s: f64,
    pub q: f64,
    pub gamma: f64,
    pub rows: Vec<HomogeneousRow>,
    /// `(λ, max over trials of the ratio)`.
    pub max_per_rung: Vec<(f64, f64)>,
    /// Largest over smallest rung maximum.
    pub variation: f64,
    pub monotone_increasing: bool,
    /// Least-squares slope of `log ratio` against `log λ`.
    pub slope: f64,
}

/// Ratio `‖v‖_{L^s_tL^q_x} / (‖φ‖_{Ḣ^γ} + ‖ψ‖_{Ḣ^{γ−2/(m+2)}})` for
/// homogeneous solutions with dilated, modulated Gaussian data (zero mean
/// removed), one dilated grid per rung.
pub fn homogeneous_probe(m: u32, tuple: &StrichartzTuple, cfg: &HomogeneousConfig) -> Result<HomogeneousReport> {
    if cfg.ladder.is_empty() || cfg.trials == 0 {
        return Err(Error::InvalidParams("probe needs at least one rung and one trial".into()));
    }
    let gamma = tuple.gamma + cfg.gamma_shift;
    let sigma = 2.0 / (m as f64 + 2.0);
    let trials: Vec<(Trial, Trial)> = (0..cfg.trials)
        .map(|i| {
            let jitter = cfg.grid.base_extent / 20.0;
            (
                draw_trial(cfg.seed, 2 * i, cfg.grid.dim, (0.3, 1.2), (1.5, 2.5), jitter),
                draw_trial(cfg.seed, 2 * i + 1, cfg.grid.dim, (0.3, 1.2), (1.5, 2.5), jitter),
            )
        })
        .collect();
    let mut rows = Vec::new();
    let mut max_per_rung = Vec::new();
    for &lambda in &cfg.ladder {
        let grid = cfg.grid.at(lambda, m)?;
        let solver = LinearSolver::new(m, &grid)?;
        let mut best = 0.0f64;
        for (ti, (a, b)) in trials.iter().enumerate() {
            let mut phi_hat = transform_forward(&trial_profile(a, &grid.space, lambda))?;
            let mut psi_hat = transform_forward(&trial_profile(b, &grid.space, lambda))?.scale(lambda.powf(sigma));
            phi_hat.coeffs[0] = ZERO;
            psi_hat.coeffs[0] = ZERO;
            let v = solver.homogeneous(&phi_hat, &psi_hat)?;
            let solution_norm = mixed_norm_physical(&v.to_physical()?, &grid.times, tuple.s, tuple.q);
            let data_norm = sobolev_norm(&phi_hat, gamma)? + sobolev_norm(&psi_hat, gamma - sigma)?;
            let ratio = solution_norm / data_norm;
            best = best.max(ratio);
            rows.push(HomogeneousRow { lambda, trial: ti, solution_norm, data_norm, ratio });
        }
        max_per_rung.push((lambda, best));
    }
    let vals: Vec<f64> = max_per_rung.iter().map(|x| x.1).collect();
    let variation = vals.iter().cloned().fold(0.0, f64::max) / vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let monotone_increasing = vals.windows(2).all(|w| w[1] > w[0]);
    let xs: Vec<f64> = max_per_rung.iter().map(|x| x.0.ln()).collect();
    let ys: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    Ok(HomogeneousReport {
        s: tuple.s,
        q: tuple.q,
        gamma,
        rows,
        max_per_rung,
        variation,
        monotone_increasing,
        slope: least_squares_slope(&xs, &ys),
    })
}
