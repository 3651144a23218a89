//! Fundamental system of the mode equation `ü + tᵐ|ξ|²u = 0`:
//!
//! ```text
//! V₀ = e^{−z/2} Φ(m/(2(m+2)), m/(m+2); z)
//! V₁ = t e^{−z/2} Φ((m+4)/(2(m+2)), (m+4)/(m+2); z),   z = 2iφ(t)|ξ|
//! ```
//!
//! with `V₀(0) = 1, V̇₀(0) = 0, V₁(0) = 0, V̇₁(0) = 1`, plus the symbol
//! pieces `b₁…b₄` that split `V₀, V₁` into outgoing and incoming phases
//! `e^{∓iφ(t)|ξ|}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{gamma, h_minus, h_plus, kummer_m, rgamma};

/// `φ(t) = (2/(m+2)) t^{(m+2)/2}`.
pub fn phase_phi(t: f64, m: u32) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParams(format!("time must be nonnegative, got {t}")));
    }
    Ok(phi(t, m))
}

/// Unchecked `φ(t)`; callers guarantee `t ≥ 0`.
#[inline]
pub fn phi(t: f64, m: u32) -> f64 {
    let e = (m as f64 + 2.0) / 2.0;
    t.powf(e) / e
}

/// `φ'(t) = t^{m/2}`.
#[inline]
pub fn phi_dot(t: f64, m: u32) -> f64 {
    if m == 0 {
        1.0
    } else {
        t.powf(m as f64 / 2.0)
    }
}

/// Kummer parameters `(a₀, c₀)` of `V₀` and `(a₁, c₁)` of `V₁`.
pub fn kummer_parameters(m: u32) -> ((f64, f64), (f64, f64)) {
    let mf = m as f64;
    ((mf / (2.0 * (mf + 2.0)), mf / (mf + 2.0)), ((mf + 4.0) / (2.0 * (mf + 2.0)), (mf + 4.0) / (mf + 2.0)))
}

/// `(V₀, V₁, ∂ₜV₀, ∂ₜV₁)` at one `(t, |ξ|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagatorSample {
    pub t: f64,
    pub xi_mag: f64,
    pub v0: Complex64,
    pub v1: Complex64,
    pub dv0: Complex64,
    pub dv1: Complex64,
}

impl PropagatorSample {
    /// `V₀V̇₁ − V₁V̇₀`, identically 1.
    pub fn wronskian(&self) -> Complex64 {
        self.v0 * self.dv1 - self.v1 * self.dv0
    }
}

/// `e^{−z/2}Φ(a,c;z)` and its `z`-derivative
/// `e^{−z/2}(−Φ(a,c;z)/2 + (a/c)Φ(a+1,c+1;z))`.
fn scaled_kummer_with_derivative(a: f64, c: f64, z: Complex64) -> Result<(Complex64, Complex64)> {
    let e = (-z * 0.5).exp();
    let f = kummer_m(a, c, z)?;
    let g = kummer_m(a + 1.0, c + 1.0, z)?;
    Ok((e * f, e * (g * (a / c) - f * 0.5)))
}

pub fn propagator(t: f64, xi_mag: f64, m: u32) -> Result<PropagatorSample> {
    if !(t >= 0.0) || !(xi_mag >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "propagator needs t >= 0 and |xi| >= 0, got t = {t}, |xi| = {xi_mag}"
        )));
    }
    let z = Complex64::new(0.0, 2.0 * phi(t, m) * xi_mag);
    let dz = Complex64::new(0.0, 2.0 * xi_mag * phi_dot(t, m));
    let ((_, _), (a1, c1)) = kummer_parameters(m);
    let (e1, de1) = scaled_kummer_with_derivative(a1, c1, z)?;
    let v1 = e1 * t;
    let dv1 = e1 + de1 * dz * t;
    let (v0, dv0) = if m == 0 {
        // Φ(m/(2(m+2)), m/(m+2); z) degenerates at m = 0; there V₀ = V̇₁
        // and V̇₀ = −|ξ|²V₁.
        (dv1, -v1 * (xi_mag * xi_mag))
    } else {
        let ((a0, c0), _) = kummer_parameters(m);
        let (e0, de0) = scaled_kummer_with_derivative(a0, c0, z)?;
        (e0, de0 * dz)
    };
    Ok(PropagatorSample { t, xi_mag, v0, v1, dv0, dv1 })
}

/// Cutoff `η`: 1 on `[0, 1]`, 0 on `[2, ∞)`, smooth `exp(−1/x)` blend
/// in between.
pub fn eta(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let g = |s: f64| (-1.0 / s).exp();
        let (left, right) = (g(2.0 - r), g(r - 1.0));
        left / (left + right)
    }
}

/// Symbol piece `b_ℓ(t, ξ)`, `ℓ ∈ 1..=4`. With `x = φ(t)|ξ|`:
///
/// ```text
/// b₁ = ηΦ(a₀,c₀;z) + (1−η)·Γ(c₀)/Γ(c₀−a₀)·H₋(a₀,c₀;z)
/// b₂ = (1−η)·Γ(c₀)/Γ(a₀)·H₊(a₀,c₀;z)
/// b₃ = t[ηΦ(a₁,c₁;z) + (1−η)·Γ(c₁)/Γ(c₁−a₁)·H₋(a₁,c₁;z)]
/// b₄ = t(1−η)·Γ(c₁)/Γ(a₁)·H₊(a₁,c₁;z)
/// ```
///
/// so that `b₁e^{−ix} + b₂e^{ix} = V₀` and `b₃e^{−ix} + b₄e^{ix} = V₁`.
pub fn symbol_b(ell: u8, t: f64, xi_mag: f64, m: u32) -> Result<Complex64> {
    if !(1..=4).contains(&ell) {
        return Err(Error::InvalidParams(format!("symbol index must be 1..=4, got {ell}")));
    }
    if !(t >= 0.0) || !(xi_mag >= 0.0) {
        return Err(Error::InvalidParams("symbol needs t >= 0 and |xi| >= 0".into()));
    }
    let x = phi(t, m) * xi_mag;
    let z = Complex64::new(0.0, 2.0 * x);
    let w = eta(x);
    let zero = Complex64::new(0.0, 0.0);
    let ((a0, c0), (a1, c1)) = kummer_parameters(m);
    let (a, c, scale) = if ell <= 2 { (a0, c0, 1.0) } else { (a1, c1, t) };
    if m == 0 && ell <= 2 {
        // a₀ = c₀ = 0: Φ reduces to (1 + e^z)/2 and both H± to 1.
        let inner = if w > 0.0 { (Complex64::new(1.0, 0.0) + z.exp()) * 0.5 } else { zero };
        return Ok(match ell {
            1 => inner * w + (1.0 - w) * 0.5,
            _ => Complex64::new((1.0 - w) * 0.5, 0.0),
        });
    }
    let incoming = ell % 2 == 1;
    let mut val = zero;
    if incoming && w > 0.0 {
        val += kummer_m(a, c, z)? * w;
    }
    if w < 1.0 {
        if incoming {
            val += h_minus(a, c, z)?.value * (gamma(c) * rgamma(c - a) * (1.0 - w));
        } else {
            val += h_plus(a, c, z)?.value * (gamma(c) * rgamma(a) * (1.0 - w));
        }
    }
    Ok(val * scale)
}

/// Symbol piece at a frequency vector.
pub fn symbol_b_vec(ell: u8, t: f64, xi: &[f64], m: u32) -> Result<Complex64> {
    let mag = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    symbol_b(ell, t, mag, m)
}

/// Decay weight used in the symbol bounds: `(1+x)^{m/(2(m+2))}` for
/// `b₁, b₂`; `(1+x)^{(m+4)/(2(m+2))}/t` for `b₃, b₄`.
pub fn symbol_weight(ell: u8, t: f64, xi_mag: f64, m: u32) -> f64 {
    let x = phi(t, m) * xi_mag;
    let ((a0, _), (a1, _)) = kummer_parameters(m);
    if ell <= 2 {
        (1.0 + x).powf(a0)
    } else if t > 0.0 {
        (1.0 + x).powf(a1) / t
    } else {
        0.0
    }
}

/// Largest `|b_ℓ|·weight` over the product grid `times × radii`, for each
/// `ℓ = 1..4`.
pub fn measure_symbol_constants(m: u32, times: &[f64], radii: &[f64]) -> Result<[f64; 4]> {
    let rows: Vec<Result<[f64; 4]>> = times
        .par_iter()
        .map(|&t| {
            let mut best = [0.0f64; 4];
            for &r in radii {
                for ell in 1..=4u8 {
                    let v = symbol_b(ell, t, r, m)?.norm() * symbol_weight(ell, t, r, m);
                    best[ell as usize - 1] = best[ell as usize - 1].max(v);
                }
            }
            Ok(best)
        })
        .collect();
    let mut out = [0.0f64; 4];
    for r in rows {
        let r = r?;
        for k in 0..4 {
            out[k] = out[k].max(r[k]);
        }
    }
    Ok(out)
}

/// Real parts of `V₀, V₁, V̇₀, V̇₁` on a product grid of radii and times,
/// stored radius-major.
#[derive(Debug, Clone)]
pub struct PropagatorTable {
    pub m: u32,
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    pub v0: Vec<f64>,
    pub v1: Vec<f64>,
    pub dv0: Vec<f64>,
    pub dv1: Vec<f64>,
}

impl PropagatorTable {
    pub fn build(m: u32, radii: &[f64], times: &[f64]) -> Result<Self> {
        let nt = times.len();
        let rows: Vec<Result<Vec<[f64; 4]>>> = radii
            .par_iter()
            .map(|&xi| {
                times
                    .iter()
                    .map(|&t| {
                        let s = propagator(t, xi, m)
                            .map_err(|e| Error::Numeric(format!("propagator failed at t = {t}, |xi| = {xi}: {e}")))?;
                        Ok([s.v0.re, s.v1.re, s.dv0.re, s.dv1.re])
                    })
                    .collect()
            })
            .collect();
        let mut table = PropagatorTable {
            m,
            radii: radii.to_vec(),
            times: times.to_vec(),
            v0: Vec::with_capacity(radii.len() * nt),
            v1: Vec::with_capacity(radii.len() * nt),
            dv0: Vec::with_capacity(radii.len() * nt),
            dv1: Vec::with_capacity(radii.len() * nt),
        };
        for row in rows {
            for s in row? {
                table.v0.push(s[0]);
                table.v1.push(s[1]);
                table.dv0.push(s[2]);
                table.dv1.push(s[3]);
            }
        }
        Ok(table)
    }

    #[inline]
    pub fn idx(&self, radius: usize, time: usize) -> usize {
        radius * self.times.len() + time
    }

    /// `(V₀, V₁)` rows for one radius.
    pub fn row(&self, radius: usize) -> (&[f64], &[f64]) {
        let nt = self.times.len();
        let s = radius * nt;
        (&self.v0[s..s + nt], &self.v1[s..s + nt])
    }
}

/// One line of the audit table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditRow {
    pub m: u32,
    pub t: f64,
    pub xi_mag: f64,
    pub re_v0: f64,
    pub im_v0: f64,
    pub re_v1: f64,
    pub im_v1: f64,
    pub wronskian_err: f64,
    pub oracle_err: f64,
}

/// Compare the hypergeometric propagator against the adaptive ODE oracle
/// on `times` for one `|ξ|`. Errors are measured against the sup norm of
/// the oracle's time series (pointwise relative error is meaningless at
/// zero crossings).
pub fn audit_against_oracle(m: u32, xi_mag: f64, times: &[f64]) -> Result<Vec<AuditRow>> {
    use crate::oracle::{integrate_mode, OdeTolerance};
    let tol = OdeTolerance::default();
    let o0 = integrate_mode(m, xi_mag, 1.0, 0.0, None, times, tol)?;
    let o1 = integrate_mode(m, xi_mag, 0.0, 1.0, None, times, tol)?;
    let scale0 = o0.iter().fold(0.0f64, |a, y| a.max(y[0].abs()));
    let scale1 = o1.iter().fold(0.0f64, |a, y| a.max(y[0].abs())).max(f64::MIN_POSITIVE);
    let mut rows = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let s = propagator(t, xi_mag, m)?;
        let e0 = (s.v0 - o0[i][0]).norm() / scale0;
        let e1 = (s.v1 - o1[i][0]).norm() / scale1;
        rows.push(AuditRow {
            m,
            t,
            xi_mag,
            re_v0: s.v0.re,
            im_v0: s.v0.im,
            re_v1: s.v1.re,
            im_v1: s.v1.im,
            wronskian_err: (s.wronskian() - 1.0).norm(),
            oracle_err: e0.max(e1),
        });
    }
    Ok(rows)
}
