//! Periodic grids, Fourier transforms, homogeneous Sobolev norms and mixed
//! space-time Lebesgue norms.
//!
//! Coefficients are normalized so that Parseval holds without factors:
//! `coeff_k = L^{n/2} N^{−n} Σ_x u(x) e^{−iξ_k·x}` and
//! `Σ_k |coeff_k|² = ∫|u|² dx` (cell-average quadrature in space).

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial part of a grid: the box `[0, L)^n` sampled with `N` points per
/// axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceGrid {
    pub dim: usize,
    pub extent: f64,
    pub points: usize,
}

impl SpaceGrid {
    pub fn new(dim: usize, extent: f64, points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParams(format!("grid dimension must be 1..=3, got {dim}")));
        }
        if points < 2 || !points.is_power_of_two() {
            return Err(Error::InvalidParams(format!("points per axis must be a power of two >= 2, got {points}")));
        }
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::InvalidParams(format!("box extent must be positive, got {extent}")));
        }
        Ok(SpaceGrid { dim, extent, points })
    }

    /// Total number of grid points `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.extent / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// `2π/L`.
    pub fn dk(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.extent
    }

    /// Signed integer index along one axis for storage position `i`.
    #[inline]
    pub fn signed(&self, i: usize) -> i64 {
        if i < self.points / 2 {
            i as i64
        } else {
            i as i64 - self.points as i64
        }
    }

    /// Per-axis storage positions of a flat index (last axis fastest).
    #[inline]
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for d in (0..self.dim).rev() {
            out[d] = flat % self.points;
            flat /= self.points;
        }
        out
    }

    /// Integer wave vector of a flat index.
    pub fn wave_index(&self, flat: usize) -> [i64; 3] {
        let u = self.unravel(flat);
        let mut k = [0i64; 3];
        for d in 0..self.dim {
            k[d] = self.signed(u[d]);
        }
        k
    }

    /// `|k|²` in integer units.
    pub fn k_squared(&self, flat: usize) -> u64 {
        let k = self.wave_index(flat);
        (0..self.dim).map(|d| (k[d] * k[d]) as u64).sum()
    }

    /// `|ξ|` for a flat index.
    pub fn xi_mag(&self, flat: usize) -> f64 {
        self.dk() * (self.k_squared(flat) as f64).sqrt()
    }

    /// Frequency vector for a flat index.
    pub fn xi(&self, flat: usize) -> [f64; 3] {
        let k = self.wave_index(flat);
        let mut out = [0.0; 3];
        for d in 0..self.dim {
            out[d] = self.dk() * k[d] as f64;
        }
        out
    }

    /// Physical coordinates of a flat index.
    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let u = self.unravel(flat);
        let mut out = [0.0; 3];
        for d in 0..self.dim {
            out[d] = u[d] as f64 * self.dx();
        }
        out
    }

    /// Flat index of the mode `−k`.
    pub fn negate(&self, flat: usize) -> usize {
        let u = self.unravel(flat);
        let mut out = 0usize;
        for d in 0..self.dim {
            out = out * self.points + (self.points - u[d]) % self.points;
        }
        out
    }

    /// Nyquist wavenumber `πN/L`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.points as f64 / self.extent
    }

    /// Distinct `|ξ|` values and the class of every mode.
    pub fn radial_classes(&self) -> RadialClasses {
        let mut keys = BTreeMap::new();
        let k2: Vec<u64> = (0..self.len()).map(|f| self.k_squared(f)).collect();
        for &k in &k2 {
            keys.entry(k).or_insert(0usize);
        }
        let mut radii = Vec::with_capacity(keys.len());
        for (i, (k, slot)) in keys.iter_mut().enumerate() {
            *slot = i;
            radii.push(self.dk() * (*k as f64).sqrt());
        }
        let class = k2.iter().map(|k| keys[k]).collect();
        RadialClasses { radii, class }
    }

    /// Shortest periodic distance from `x` (flat index) to `center`.
    pub fn periodic_distance(&self, flat: usize, center: &[f64]) -> f64 {
        let x = self.coords(flat);
        let mut s = 0.0;
        for d in 0..self.dim {
            let mut dd = (x[d] - center[d]).rem_euclid(self.extent);
            if dd > self.extent / 2.0 {
                dd = self.extent - dd;
            }
            s += dd * dd;
        }
        s.sqrt()
    }
}

/// Grouping of modes by `|ξ|`.
#[derive(Debug, Clone)]
pub struct RadialClasses {
    pub radii: Vec<f64>,
    pub class: Vec<usize>,
}

/// Space grid together with the sample times `0 = t₀ < t₁ < … < T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub space: SpaceGrid,
    pub times: Vec<f64>,
}

impl Grid {
    pub fn new(space: SpaceGrid, times: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times[0] != 0.0 {
            return Err(Error::InvalidParams("sample times must start at 0".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParams("sample times must be strictly increasing".into()));
        }
        Ok(Grid { space, times })
    }

    /// `steps + 1` equally spaced times on `[0, T]`.
    pub fn uniform(space: SpaceGrid, t_end: f64, steps: usize) -> Result<Self> {
        if !(t_end > 0.0) || steps == 0 {
            return Err(Error::InvalidParams(format!("need T > 0 and steps >= 1, got T = {t_end}, steps = {steps}")));
        }
        let times = (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect();
        Grid::new(space, times)
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Uniform step if the times are equally spaced (to 1e−12 relative).
    pub fn uniform_step(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let h = self.t_end() / (self.times.len() - 1) as f64;
        let ok = self.times.iter().enumerate().all(|(i, &t)| (t - i as f64 * h).abs() <= 1e-12 * self.t_end());
        ok.then_some(h)
    }
}

/// Samples of a (possibly complex) field at the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub space: SpaceGrid,
    pub values: Vec<Complex64>,
}

impl PhysicalField {
    pub fn zeros(space: SpaceGrid) -> Self {
        PhysicalField { space, values: vec![Complex64::new(0.0, 0.0); space.len()] }
    }

    /// Sample `f` at every grid point.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(space: SpaceGrid, f: F) -> Self {
        let values = (0..space.len())
            .map(|i| {
                let x = space.coords(i);
                Complex64::new(f(&x[..space.dim]), 0.0)
            })
            .collect();
        PhysicalField { space, values }
    }

    pub fn from_real(space: SpaceGrid, values: &[f64]) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::SizeMismatch { expected: space.len(), got: values.len() });
        }
        Ok(PhysicalField { space, values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect() })
    }

    /// `(ΔV Σ|u|^q)^{1/q}`, `q = ∞` giving the maximum.
    pub fn lp_norm(&self, q: f64) -> f64 {
        lp_norm_values(&self.values, self.space.cell_volume(), q)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.norm()))
    }
}

fn lp_norm_values(values: &[Complex64], dv: f64, q: f64) -> f64 {
    if q.is_infinite() {
        return values.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    }
    if q == 2.0 {
        return (dv * values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
    }
    (dv * values.iter().map(|v| v.norm().powf(q)).sum::<f64>()).powf(1.0 / q)
}

/// Fourier coefficients on the periodic grid (storage order of the FFT,
/// last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub space: SpaceGrid,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(space: SpaceGrid) -> Self {
        SpectralField { space, coeffs: vec![Complex64::new(0.0, 0.0); space.len()] }
    }

    /// `Σ|coeff|²` under the Parseval normalization.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, a: f64) -> SpectralField {
        SpectralField { space: self.space, coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> SpectralField {
        SpectralField {
            space: self.space,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + y * a).collect(),
        }
    }

    /// Replace `c_k` by `(c_k + conj(c_{−k}))/2`, the coefficients of the
    /// real part of the field.
    pub fn enforce_hermitian(&mut self) {
        let sp = self.space;
        let old = self.coeffs.clone();
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            let j = sp.negate(i);
            *c = (old[i] + old[j].conj()) * 0.5;
        }
    }

    /// Largest `|c_k − conj(c_{−k})|`, zero for real fields.
    pub fn hermitian_defect(&self) -> f64 {
        let sp = self.space;
        (0..self.coeffs.len()).fold(0.0f64, |a, i| a.max((self.coeffs[i] - self.coeffs[sp.negate(i)].conj()).norm()))
    }

    /// Coefficient of the zero mode.
    pub fn mean_coefficient(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Multiply every coefficient by `m(|ξ|)`.
    pub fn apply_radial<F: Fn(f64) -> f64>(&self, m: F) -> SpectralField {
        let sp = self.space;
        let coeffs = self.coeffs.iter().enumerate().map(|(i, c)| c * m(sp.xi_mag(i))).collect();
        SpectralField { space: sp, coeffs }
    }
}

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    static PLANS: RefCell<HashMap<usize, Plans>> = RefCell::new(HashMap::new());
}

fn plans(n: usize) -> Plans {
    PLANS.with(|p| {
        p.borrow_mut()
            .entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
            })
            .clone()
    })
}

/// Unnormalized multi-dimensional DFT in place.
fn fft_nd(space: &SpaceGrid, data: &mut [Complex64], forward: bool) {
    let n = space.points;
    let (f, i) = plans(n);
    let plan = if forward { f } else { i };
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    let total = data.len();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..space.dim {
        let stride = n.pow((space.dim - 1 - axis) as u32);
        if stride == 1 {
            for chunk in data.chunks_exact_mut(n) {
                plan.process_with_scratch(chunk, &mut scratch);
            }
            continue;
        }
        let block = stride * n;
        for base in (0..total).step_by(block) {
            for off in 0..stride {
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[base + off + k * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    data[base + off + k * stride] = *v;
                }
            }
        }
    }
}

pub fn transform_forward(field: &PhysicalField) -> Result<SpectralField> {
    let sp = field.space;
    if field.values.len() != sp.len() {
        return Err(Error::SizeMismatch { expected: sp.len(), got: field.values.len() });
    }
    let mut data = field.values.clone();
    fft_nd(&sp, &mut data, true);
    let scale = sp.extent.powf(sp.dim as f64 / 2.0) / sp.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
    Ok(SpectralField { space: sp, coeffs: data })
}

pub fn transform_inverse(field: &SpectralField) -> Result<PhysicalField> {
    let sp = field.space;
    if field.coeffs.len() != sp.len() {
        return Err(Error::SizeMismatch { expected: sp.len(), got: field.coeffs.len() });
    }
    let mut data = field.coeffs.clone();
    fft_nd(&sp, &mut data, false);
    let scale = 1.0 / sp.extent.powf(sp.dim as f64 / 2.0);
    for v in data.iter_mut() {
        *v *= scale;
    }
    Ok(PhysicalField { space: sp, values: data })
}

/// `|D|^γ`: multiply by `|ξ|^γ`; the zero mode is removed for `γ ≠ 0`.
pub fn fractional_derivative(field: &SpectralField, gamma: f64) -> SpectralField {
    if gamma == 0.0 {
        return field.clone();
    }
    let sp = field.space;
    let coeffs = field
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| if i == 0 { Complex64::new(0.0, 0.0) } else { c * sp.xi_mag(i).powf(gamma) })
        .collect();
    SpectralField { space: sp, coeffs }
}

/// Relative size of the zero mode above which negative-order norms are
/// refused.
pub const MEAN_TOL: f64 = 1e-12;

/// `‖|ξ|^γ coeff‖_{ℓ²}`. For `γ < 0` the field must have zero mean.
pub fn sobolev_norm(field: &SpectralField, gamma: f64) -> Result<f64> {
    if gamma < 0.0 {
        let mean = field.coeffs[0].norm();
        if mean > MEAN_TOL * field.l2_norm().max(f64::MIN_POSITIVE) {
            return Err(Error::Hypothesis(format!(
                "negative-order Sobolev norm (gamma = {gamma}) needs a zero-mean field; mean coefficient is {mean:.3e}"
            )));
        }
    }
    Ok(sobolev_norm_unchecked(field, gamma))
}

/// As [`sobolev_norm`] but silently excludes the zero mode.
pub fn sobolev_norm_unchecked(field: &SpectralField, gamma: f64) -> f64 {
    let sp = field.space;
    if gamma == 0.0 {
        return field.l2_norm();
    }
    field
        .coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.norm_sqr() * sp.xi_mag(i).powf(2.0 * gamma))
        .sum::<f64>()
        .sqrt()
}

/// A field sampled at every grid time, stored as spectral slices.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    pub grid: Grid,
    pub slices: Vec<SpectralField>,
}

impl SpaceTimeField {
    pub fn zeros(grid: &Grid) -> Self {
        let slices = vec![SpectralField::zeros(grid.space); grid.times.len()];
        SpaceTimeField { grid: grid.clone(), slices }
    }

    pub fn new(grid: &Grid, slices: Vec<SpectralField>) -> Result<Self> {
        if slices.len() != grid.times.len() {
            return Err(Error::SizeMismatch { expected: grid.times.len(), got: slices.len() });
        }
        Ok(SpaceTimeField { grid: grid.clone(), slices })
    }

    /// Sample `f(t, x)` on the grid and transform.
    pub fn from_fn<F: Fn(f64, &[f64]) -> f64>(grid: &Grid, f: F) -> Result<Self> {
        let slices = grid
            .times
            .iter()
            .map(|&t| transform_forward(&PhysicalField::from_fn(grid.space, |x| f(t, x))))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpaceTimeField { grid: grid.clone(), slices })
    }

    pub fn to_physical(&self) -> Result<Vec<PhysicalField>> {
        self.slices.iter().map(transform_inverse).collect()
    }

    pub fn from_physical(grid: &Grid, slices: &[PhysicalField]) -> Result<Self> {
        let s = slices.iter().map(transform_forward).collect::<Result<Vec<_>>>()?;
        SpaceTimeField::new(grid, s)
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &SpaceTimeField) -> SpaceTimeField {
        SpaceTimeField {
            grid: self.grid.clone(),
            slices: self.slices.iter().zip(&other.slices).map(|(x, y)| x.axpy(a, y)).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> SpaceTimeField {
        SpaceTimeField { grid: self.grid.clone(), slices: self.slices.iter().map(|s| s.scale(a)).collect() }
    }

    /// `max_t ‖u(t)‖_{Ḣ^γ}` (zero mode excluded for `γ ≠ 0`).
    pub fn sup_sobolev(&self, gamma: f64) -> f64 {
        self.slices.iter().fold(0.0f64, |a, s| a.max(sobolev_norm_unchecked(s, gamma)))
    }

    /// `L^s_t L^q_x` norm.
    pub fn mixed_norm(&self, s: f64, q: f64) -> Result<f64> {
        let phys = self.to_physical()?;
        Ok(mixed_norm_physical(&phys, &self.grid.times, s, q))
    }
}

/// `(∫(∫|u|^q dx)^{s/q} dt)^{1/s}` with cell averages in space and the
/// trapezoidal rule in time; `s = ∞` or `q = ∞` use maxima.
pub fn mixed_norm_physical(slices: &[PhysicalField], times: &[f64], s: f64, q: f64) -> f64 {
    let spatial: Vec<f64> = slices.iter().map(|f| f.lp_norm(q)).collect();
    time_norm(&spatial, times, s)
}

/// `L^s` norm in time of sampled nonnegative values, trapezoidal rule.
pub fn time_norm(values: &[f64], times: &[f64], s: f64) -> f64 {
    if s.is_infinite() {
        return values.iter().fold(0.0f64, |a, &v| a.max(v));
    }
    if values.len() == 1 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 1..values.len() {
        let h = times[i] - times[i - 1];
        acc += 0.5 * h * (values[i].powf(s) + values[i - 1].powf(s));
    }
    acc.powf(1.0 / s)
}

/// `L^s_t L^q_x` norm of a spectral space-time field.
pub fn mixed_norm(u: &SpaceTimeField, s: f64, q: f64) -> Result<f64> {
    u.mixed_norm(s, q)
}

/// Header written in front of binary field snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub dim: usize,
    pub extent: f64,
    pub points: usize,
    pub times: Vec<f64>,
    /// `"spectral"`: little-endian `(re, im)` pairs of every coefficient,
    /// slice by slice.
    pub layout: String,
}

const SNAPSHOT_FORMAT: &str = "tricomi-field-v1";

/// Write a snapshot: one line of JSON header, then the raw coefficients.
pub fn write_snapshot<P: AsRef<Path>>(path: P, u: &SpaceTimeField) -> Result<()> {
    let header = SnapshotHeader {
        format: SNAPSHOT_FORMAT.into(),
        dim: u.grid.space.dim,
        extent: u.grid.space.extent,
        points: u.grid.space.points,
        times: u.grid.times.clone(),
        layout: "spectral".into(),
    };
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    let json = serde_json::to_string(&header).map_err(|e| Error::Io(e.to_string()))?;
    f.write_all(json.as_bytes())?;
    f.write_all(b"\n")?;
    for s in &u.slices {
        for c in &s.coeffs {
            f.write_all(&c.re.to_le_bytes())?;
            f.write_all(&c.im.to_le_bytes())?;
        }
    }
    f.flush()?;
    Ok(())
}

pub fn read_snapshot<P: AsRef<Path>>(path: P) -> Result<SpaceTimeField> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let nl =
        bytes.iter().position(|&b| b == b'\n').ok_or_else(|| Error::Io("snapshot header is not terminated".into()))?;
    let header: SnapshotHeader = serde_json::from_slice(&bytes[..nl]).map_err(|e| Error::Io(e.to_string()))?;
    if header.format != SNAPSHOT_FORMAT {
        return Err(Error::Io(format!("unknown snapshot format {}", header.format)));
    }
    let space = SpaceGrid::new(header.dim, header.extent, header.points)?;
    let grid = Grid::new(space, header.times)?;
    let body = &bytes[nl + 1..];
    let expected = grid.times.len() * space.len() * 16;
    if body.len() != expected {
        return Err(Error::SizeMismatch { expected, got: body.len() });
    }
    let mut slices = Vec::with_capacity(grid.times.len());
    for chunk in body.chunks_exact(space.len() * 16) {
        let coeffs = chunk
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        slices.push(SpectralField { space, coeffs });
    }
    SpaceTimeField::new(&grid, slices)
}
