//! Spectral solution of `∂ₜ²u − tᵐΔu = f`, `u(0) = φ`, `∂ₜu(0) = ψ`, mode by
//! mode through the exact propagators, plus the residual and
//! finite-propagation checks used to verify it.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::{phi, PropagatorTable};
use crate::quadrature::{second_difference, simpson_weights, uniform_step, CumulativeRule};
use crate::spectral::{sobolev_norm_unchecked, transform_inverse, Grid, RadialClasses, SpaceTimeField, SpectralField};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Data of the linear Cauchy problem.
#[derive(Debug, Clone)]
pub struct LinearProblem {
    pub m: u32,
    pub grid: Grid,
    pub phi: SpectralField,
    pub psi: SpectralField,
    pub source: Option<SpaceTimeField>,
}

impl LinearProblem {
    pub fn new(
        m: u32,
        grid: Grid,
        phi: SpectralField,
        psi: SpectralField,
        source: Option<SpaceTimeField>,
    ) -> Result<Self> {
        if phi.space != grid.space || psi.space != grid.space {
            return Err(Error::InvalidParams("initial data live on a different grid".into()));
        }
        if phi.coeffs.len() != grid.space.len() || psi.coeffs.len() != grid.space.len() {
            return Err(Error::SizeMismatch {
                expected: grid.space.len(),
                got: phi.coeffs.len().min(psi.coeffs.len()),
            });
        }
        if let Some(f) = &source {
            if f.grid != grid {
                return Err(Error::InvalidParams("source is sampled on a different grid".into()));
            }
        }
        Ok(LinearProblem { m, grid, phi, psi, source })
    }

    /// Zero data with the given source.
    pub fn forced(m: u32, source: SpaceTimeField) -> Result<Self> {
        let grid = source.grid.clone();
        let z = SpectralField::zeros(grid.space);
        LinearProblem::new(m, grid, z.clone(), z, Some(source))
    }

    /// Refuse runs where a wave started inside `support_radius` of the box
    /// center would reach the box edge before `T`.
    pub fn check_cone(&self, support_radius: f64) -> Result<()> {
        check_cone(&self.grid, self.m, support_radius)
    }
}

/// `R₀ + φ(T) + 3Δx ≤ L/2`, the condition under which the torus is an
/// honest proxy for the whole space.
pub fn check_cone(grid: &Grid, m: u32, support_radius: f64) -> Result<()> {
    let reach = support_radius + phi(grid.t_end(), m) + 3.0 * grid.space.dx();
    if reach > grid.space.extent / 2.0 {
        return Err(Error::Hypothesis(format!(
            "light cone reaches {reach:.4} by T = {}, beyond the half box {:.4}",
            grid.t_end(),
            grid.space.extent / 2.0
        )));
    }
    Ok(())
}

/// Largest `T` with `R₀ + φ(T) + 3Δx ≤ L/2`.
pub fn wrap_limit(m: u32, extent: f64, dx: f64, support_radius: f64) -> f64 {
    let room = extent / 2.0 - support_radius - 3.0 * dx;
    if room <= 0.0 {
        return 0.0;
    }
    let k = (m as f64 + 2.0) / 2.0;
    (room * k).powf(1.0 / k)
}

/// Quadrature used for the Duhamel integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DuhamelMethod {
    /// Separable kernel with cumulative sixth-order integrals, `O(N_t)` per mode.
    Separable,
    /// Explicit kernel `E(t,τ)` with composite Simpson per output time, `O(N_t²)`.
    Direct,
}

/// Propagator cache for one `(m, grid)`, shared by every solve on that grid.
#[derive(Debug, Clone)]
pub struct LinearSolver {
    pub m: u32,
    pub grid: Grid,
    pub classes: RadialClasses,
    pub table: PropagatorTable,
    rule: CumulativeRule,
}

impl LinearSolver {
    pub fn new(m: u32, grid: &Grid) -> Result<Self> {
        let classes = grid.space.radial_classes();
        let table = PropagatorTable::build(m, &classes.radii, &grid.times)?;
        let rule = CumulativeRule::new(&grid.times)?;
        Ok(LinearSolver { m, grid: grid.clone(), classes, table, rule })
    }

    fn check_space(&self, f: &SpectralField) -> Result<()> {
        if f.space != self.grid.space {
            return Err(Error::InvalidParams("field lives on a different grid".into()));
        }
        Ok(())
    }

    /// `v̂(t,ξ) = V₀(t,|ξ|)φ̂(ξ) + V₁(t,|ξ|)ψ̂(ξ)`.
    pub fn homogeneous(&self, phi_hat: &SpectralField, psi_hat: &SpectralField) -> Result<SpaceTimeField> {
        self.check_space(phi_hat)?;
        self.check_space(psi_hat)?;
        let nt = self.grid.times.len();
        let slices = (0..nt)
            .into_par_iter()
            .map(|i| {
                let coeffs = (0..phi_hat.coeffs.len())
                    .map(|k| {
                        let at = self.table.idx(self.classes.class[k], i);
                        phi_hat.coeffs[k] * self.table.v0[at] + psi_hat.coeffs[k] * self.table.v1[at]
                    })
                    .collect();
                SpectralField { space: self.grid.space, coeffs }
            })
            .collect();
        SpaceTimeField::new(&self.grid, slices)
    }

    /// `∂ₜv̂` for the same data, from the derivative propagators.
    pub fn homogeneous_velocity(&self, phi_hat: &SpectralField, psi_hat: &SpectralField) -> Result<SpaceTimeField> {
        self.check_space(phi_hat)?;
        self.check_space(psi_hat)?;
        let nt = self.grid.times.len();
        let slices = (0..nt)
            .into_par_iter()
            .map(|i| {
                let coeffs = (0..phi_hat.coeffs.len())
                    .map(|k| {
                        let at = self.table.idx(self.classes.class[k], i);
                        phi_hat.coeffs[k] * self.table.dv0[at] + psi_hat.coeffs[k] * self.table.dv1[at]
                    })
                    .collect();
                SpectralField { space: self.grid.space, coeffs }
            })
            .collect();
        SpaceTimeField::new(&self.grid, slices)
    }

    /// `ŵ(t,ξ) = ∫₀ᵗ [V₁(t)V₀(τ) − V₀(t)V₁(τ)] f̂(τ,ξ) dτ`.
    pub fn duhamel(&self, source: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.duhamel_with(source, DuhamelMethod::Separable)
    }

    pub fn duhamel_with(&self, source: &SpaceTimeField, method: DuhamelMethod) -> Result<SpaceTimeField> {
        if source.grid != self.grid {
            return Err(Error::InvalidParams("source is sampled on a different grid".into()));
        }
        let nt = self.grid.times.len();
        let nm = self.grid.space.len();
        let simpson: Vec<Vec<f64>> = match method {
            DuhamelMethod::Direct => (0..nt).map(|i| simpson_weights(&self.grid.times, i)).collect(),
            DuhamelMethod::Separable => Vec::new(),
        };
        let per_mode: Vec<Vec<Complex64>> = (0..nm)
            .into_par_iter()
            .map(|k| {
                let (v0, v1) = self.table.row(self.classes.class[k]);
                let f: Vec<Complex64> = source.slices.iter().map(|s| s.coeffs[k]).collect();
                match method {
                    DuhamelMethod::Separable => {
                        let g0: Vec<Complex64> = f.iter().zip(v0).map(|(f, v)| f * v).collect();
                        let g1: Vec<Complex64> = f.iter().zip(v1).map(|(f, v)| f * v).collect();
                        let a = self.rule.apply(&g0, ZERO);
                        let b = self.rule.apply(&g1, ZERO);
                        (0..nt).map(|i| a[i] * v1[i] - b[i] * v0[i]).collect()
                    }
                    DuhamelMethod::Direct => (0..nt)
                        .map(|i| {
                            simpson[i].iter().enumerate().fold(ZERO, |acc, (j, w)| {
                                let kernel = v1[i] * v0[j] - v0[i] * v1[j];
                                acc + f[j] * (w * kernel)
                            })
                        })
                        .collect(),
                }
            })
            .collect();
        let slices = (0..nt)
            .map(|i| SpectralField { space: self.grid.space, coeffs: per_mode.iter().map(|w| w[i]).collect() })
            .collect();
        SpaceTimeField::new(&self.grid, slices)
    }

    /// `u = v + w`.
    pub fn solve(&self, problem: &LinearProblem) -> Result<SpaceTimeField> {
        let v = self.homogeneous(&problem.phi, &problem.psi)?;
        match &problem.source {
            None => Ok(v),
            Some(f) => Ok(v.axpy(1.0, &self.duhamel(f)?)),
        }
    }
}

fn check_problem(solver_m: u32, problem: &LinearProblem) -> Result<()> {
    if problem.m != solver_m {
        return Err(Error::InvalidParams("solver and problem disagree on m".into()));
    }
    Ok(())
}

/// Homogeneous part `v` (the source is ignored).
pub fn solve_homogeneous(problem: &LinearProblem) -> Result<SpaceTimeField> {
    let s = LinearSolver::new(problem.m, &problem.grid)?;
    check_problem(s.m, problem)?;
    s.homogeneous(&problem.phi, &problem.psi)
}

/// Duhamel part `w`.
pub fn solve_duhamel(problem: &LinearProblem) -> Result<SpaceTimeField> {
    let f = problem.source.as_ref().ok_or_else(|| Error::InvalidParams("Duhamel solve needs a source".into()))?;
    LinearSolver::new(problem.m, &problem.grid)?.duhamel(f)
}

/// Full solution `u = v + w`.
pub fn solve(problem: &LinearProblem) -> Result<SpaceTimeField> {
    LinearSolver::new(problem.m, &problem.grid)?.solve(problem)
}

/// Pieces of the residual `∂ₜ²u − tᵐΔu − f`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `‖r‖ / (‖∂ₜ²u‖ + ‖tᵐΔu‖ + ‖f‖)`, zero when all three vanish.
    pub relative: f64,
    pub absolute: f64,
    pub scale: f64,
}

/// ℓ²-relative residual over the interior sample indices `2..=M−2`.
pub fn residual(u: &SpaceTimeField, problem: &LinearProblem) -> Result<f64> {
    Ok(residual_report(u, problem.m, problem.source.as_ref())?.relative)
}

pub fn residual_report(u: &SpaceTimeField, m: u32, source: Option<&SpaceTimeField>) -> Result<ResidualReport> {
    let times = &u.grid.times;
    let nt = times.len();
    if nt < 5 {
        return Err(Error::InvalidParams(format!("residual needs at least 5 time samples, got {nt}")));
    }
    let h = uniform_step(times).ok_or_else(|| Error::Unsupported("residual needs equally spaced times".into()))?;
    if let Some(f) = source {
        if f.grid != u.grid {
            return Err(Error::InvalidParams("source is sampled on a different grid".into()));
        }
    }
    let sp = u.grid.space;
    let xi2: Vec<f64> = (0..sp.len()).map(|k| sp.xi_mag(k).powi(2)).collect();
    let parts: Vec<[f64; 4]> = (2..nt - 2)
        .into_par_iter()
        .map(|i| {
            let tm = times[i].powi(m as i32);
            let mut acc = [0.0f64; 4];
            let mut series = [ZERO; 5];
            for k in 0..sp.len() {
                for (d, s) in series.iter_mut().enumerate() {
                    *s = u.slices[i + d - 2].coeffs[k];
                }
                let utt = second_difference(&series, 2, h);
                let lap = series[2] * (tm * xi2[k]);
                let f = source.map_or(ZERO, |f| f.slices[i].coeffs[k]);
                acc[0] += (utt + lap - f).norm_sqr();
                acc[1] += utt.norm_sqr();
                acc[2] += lap.norm_sqr();
                acc[3] += f.norm_sqr();
            }
            acc
        })
        .collect();
    let mut tot = [0.0f64; 4];
    for p in &parts {
        for j in 0..4 {
            tot[j] += p[j];
        }
    }
    let absolute = tot[0].sqrt();
    let scale = tot[1].sqrt() + tot[2].sqrt() + tot[3].sqrt();
    let relative = if scale == 0.0 { 0.0 } else { absolute / scale };
    Ok(ResidualReport { relative, absolute, scale })
}

/// Outcome of [`cone_containment`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeReport {
    pub pass: bool,
    pub worst_leakage: f64,
    pub worst_time: f64,
    pub tol: f64,
    pub cone_factor: f64,
    /// Leakage at every sample time.
    pub leakage: Vec<f64>,
}

/// Fraction of `‖u(t)‖²` outside `|x − center| ≤ R₀ + φ(t) + 3Δx` at every
/// sample time, compared against `tol`.
pub fn cone_containment(
    u: &SpaceTimeField,
    m: u32,
    center: &[f64],
    support_radius: f64,
    tol: f64,
) -> Result<ConeReport> {
    cone_containment_scaled(u, m, center, support_radius, 1.0, tol)
}

/// As [`cone_containment`] with the cone radius `R₀ + c·φ(t) + 3Δx`; `c < 1`
/// is the negative control.
pub fn cone_containment_scaled(
    u: &SpaceTimeField,
    m: u32,
    center: &[f64],
    support_radius: f64,
    cone_factor: f64,
    tol: f64,
) -> Result<ConeReport> {
    let sp = u.grid.space;
    if center.len() != sp.dim {
        return Err(Error::SizeMismatch { expected: sp.dim, got: center.len() });
    }
    let dist: Vec<f64> = (0..sp.len()).map(|k| sp.periodic_distance(k, center)).collect();
    let leakage = u
        .slices
        .par_iter()
        .zip(u.grid.times.par_iter())
        .map(|(s, &t)| {
            let f = transform_inverse(s)?;
            let radius = support_radius + cone_factor * phi(t, m) + 3.0 * sp.dx();
            let mut total = 0.0;
            let mut outside = 0.0;
            for (v, d) in f.values.iter().zip(&dist) {
                let e = v.norm_sqr();
                total += e;
                if *d > radius {
                    outside += e;
                }
            }
            Ok(if total == 0.0 { 0.0 } else { outside / total })
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mut worst, mut worst_time) = (0.0, 0.0);
    for (l, t) in leakage.iter().zip(&u.grid.times) {
        if *l > worst {
            worst = *l;
            worst_time = *t;
        }
    }
    Ok(ConeReport { pass: worst <= tol, worst_leakage: worst, worst_time, tol, cone_factor, leakage })
}

/// Norms recorded at one time in a run manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormSample {
    pub t: f64,
    pub l2: f64,
    pub h_gamma: f64,
}

/// Per-run summary written next to solution snapshots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearManifest {
    pub m: u32,
    pub dim: usize,
    pub extent: f64,
    pub points: usize,
    pub t_end: f64,
    pub steps: usize,
    pub gamma: f64,
    pub norms: Vec<NormSample>,
    pub residual: Option<ResidualReport>,
    pub cone: Option<ConeReport>,
}

impl LinearManifest {
    /// Norms at `count` roughly evenly spread sample times.
    pub fn new(m: u32, u: &SpaceTimeField, gamma: f64, count: usize) -> Self {
        let g = &u.grid;
        let nt = g.times.len();
        let count = count.clamp(1, nt);
        let mut picks: Vec<usize> =
            (0..count).map(|j| if count == 1 { nt - 1 } else { j * (nt - 1) / (count - 1) }).collect();
        picks.dedup();
        let norms = picks
            .into_iter()
            .map(|i| NormSample {
                t: g.times[i],
                l2: u.slices[i].l2_norm(),
                h_gamma: sobolev_norm_unchecked(&u.slices[i], gamma),
            })
            .collect();
        LinearManifest {
            m,
            dim: g.space.dim,
            extent: g.space.extent,
            points: g.space.points,
            t_end: g.t_end(),
            steps: nt - 1,
            gamma,
            norms,
            residual: None,
            cone: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{transform_forward, PhysicalField, SpaceGrid};

    fn grid() -> Grid {
        Grid::uniform(SpaceGrid::new(1, 8.0, 16).unwrap(), 1.0, 20).unwrap()
    }

    #[test]
    fn zero_mode_is_free_motion() {
        let g = grid();
        let mut phi = SpectralField::zeros(g.space);
        let mut psi = SpectralField::zeros(g.space);
        phi.coeffs[0] = Complex64::new(2.0, 0.0);
        psi.coeffs[0] = Complex64::new(-0.5, 0.0);
        let s = LinearSolver::new(1, &g).unwrap();
        let v = s.homogeneous(&phi, &psi).unwrap();
        for (t, sl) in g.times.iter().zip(&v.slices) {
            assert!((sl.coeffs[0].re - (2.0 - 0.5 * t)).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_field_residual_and_cone() {
        let g = grid();
        let u = SpaceTimeField::zeros(&g);
        let p = LinearProblem::forced(1, SpaceTimeField::zeros(&g)).unwrap();
        assert_eq!(residual(&u, &p).unwrap(), 0.0);
        let r = cone_containment(&u, 1, &[4.0], 1.0, 1e-8).unwrap();
        assert!(r.pass && r.worst_leakage == 0.0);
    }

    #[test]
    fn residual_needs_five_samples() {
        let g = Grid::uniform(SpaceGrid::new(1, 8.0, 16).unwrap(), 1.0, 3).unwrap();
        let u = SpaceTimeField::zeros(&g);
        assert!(residual_report(&u, 1, None).is_err());
    }

    #[test]
    fn unit_forcing_small_time() {
        // ŵ = t²/2 + O(t^{m+4}) for f̂ ≡ 1.
        let g = Grid::uniform(SpaceGrid::new(1, 2.0 * std::f64::consts::PI, 8).unwrap(), 0.2, 40).unwrap();
        let f = SpaceTimeField::from_fn(&g, |_, _| 1.0).unwrap();
        let c = f.slices[0].coeffs[0];
        let w = LinearSolver::new(1, &g).unwrap().duhamel(&f).unwrap();
        for (t, s) in g.times.iter().zip(&w.slices) {
            let got = s.coeffs[0] / c;
            assert!((got.re - t * t / 2.0).abs() < 1e-12, "t={t}");
        }
        // a nonzero mode with unit forcing
        let mut one = SpaceTimeField::zeros(&g);
        for s in one.slices.iter_mut() {
            s.coeffs[1] = Complex64::new(1.0, 0.0);
        }
        let w = LinearSolver::new(1, &g).unwrap().duhamel(&one).unwrap();
        for (t, s) in g.times.iter().zip(&w.slices) {
            assert!((s.coeffs[1].re - t * t / 2.0).abs() <= 0.1 * t.powi(5) + 1e-12, "t={t}");
        }
    }

    #[test]
    fn real_data_gives_real_solution() {
        let g = grid();
        let phi = transform_forward(&PhysicalField::from_fn(g.space, |x| (-(x[0] - 4.0).powi(2)).exp())).unwrap();
        let psi = phi.scale(0.3);
        let v = LinearSolver::new(2, &g).unwrap().homogeneous(&phi, &psi).unwrap();
        for s in &v.slices {
            assert!(s.hermitian_defect() <= 1e-10 * (1.0 + s.l2_norm()));
        }
    }

    #[test]
    fn wrap_limit_inverts_cone() {
        let t = wrap_limit(1, 20.0, 0.1, 2.0);
        let reach = 2.0 + phi(t, 1) + 0.3;
        assert!((reach - 10.0).abs() < 1e-12);
    }
}
