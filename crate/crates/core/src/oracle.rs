//! Reference solvers that share no code with the hypergeometric route:
//! an adaptive Dormand–Prince 5(4) integrator for the mode equation
//! `ü + tᵐ|ξ|²u = f(t)` and the Airy functions used for `m = 1`.

use crate::error::{Error, Result};

/// Tolerances for [`integrate_mode`].
#[derive(Debug, Clone, Copy)]
pub struct OdeTolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        OdeTolerance { rtol: 1e-12, atol: 1e-14 }
    }
}

// Dormand–Prince coefficients.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Integrate `y' = rhs(t, y)` for a two-component state through every
/// requested output time (which must be nondecreasing and start at or after
/// `t0`). Steps are clipped so that each output time is hit exactly.
pub fn dopri5<F>(rhs: F, t0: f64, y0: [f64; 2], t_out: &[f64], tol: OdeTolerance) -> Result<Vec<[f64; 2]>>
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
{
    let mut out = Vec::with_capacity(t_out.len());
    let mut t = t0;
    let mut y = y0;
    let mut h = 1e-3f64;
    let mut steps = 0usize;
    for &target in t_out {
        if target < t {
            return Err(Error::InvalidParams("output times must be nondecreasing".into()));
        }
        while t < target {
            steps += 1;
            if steps > 50_000_000 {
                return Err(Error::Numeric("ODE oracle exceeded its step budget".into()));
            }
            let last = target - t <= h;
            let hs = if last { target - t } else { h };
            let mut k = [[0.0f64; 2]; 7];
            for i in 0..7 {
                let mut yi = y;
                for (j, kj) in k.iter().enumerate().take(i) {
                    yi[0] += hs * A[i][j] * kj[0];
                    yi[1] += hs * A[i][j] * kj[1];
                }
                k[i] = rhs(t + C[i] * hs, yi);
            }
            let mut y5 = y;
            let mut err = [0.0f64; 2];
            for i in 0..7 {
                y5[0] += hs * B5[i] * k[i][0];
                y5[1] += hs * B5[i] * k[i][1];
                err[0] += hs * (B5[i] - B4[i]) * k[i][0];
                err[1] += hs * (B5[i] - B4[i]) * k[i][1];
            }
            let mut e = 0.0f64;
            for c in 0..2 {
                let sc = tol.atol + tol.rtol * y[c].abs().max(y5[c].abs());
                e = e.max((err[c] / sc).abs());
            }
            if e <= 1.0 {
                t = if last { target } else { t + hs };
                y = y5;
            }
            let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
            if !last || e > 1.0 {
                h = hs * fac;
            }
            if h < 1e-14 {
                return Err(Error::Numeric("ODE oracle step size underflow".into()));
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Solve `ü + tᵐξ²u = f(t)` from `t = 0` with `(u, u̇)(0) = (y0, dy0)`.
/// Returns `(u, u̇)` at every output time.
pub fn integrate_mode(
    m: u32,
    xi: f64,
    y0: f64,
    dy0: f64,
    forcing: Option<&dyn Fn(f64) -> f64>,
    t_out: &[f64],
    tol: OdeTolerance,
) -> Result<Vec<[f64; 2]>> {
    let xi2 = xi * xi;
    let rhs = |t: f64, y: [f64; 2]| {
        let f = forcing.map_or(0.0, |g| g(t));
        [y[1], -t.powi(m as i32) * xi2 * y[0] + f]
    };
    dopri5(rhs, 0.0, [y0, dy0], t_out, tol)
}

const AI0: f64 = 0.355_028_053_887_817_2;
const NEG_DAI0: f64 = 0.258_819_403_792_806_8;

/// `(Ai(x), Bi(x))` for real `x ≤ 8`. Maclaurin series in double-double on
/// `|x| ≤ 8`, the oscillatory asymptotic expansion for `x < −8`.
pub fn airy_ai_bi(x: f64) -> Result<(f64, f64)> {
    if x > 8.0 {
        return Err(Error::Unsupported(format!("Airy oracle covers x <= 8, got {x}")));
    }
    if x >= -8.0 {
        Ok(airy_maclaurin(x))
    } else {
        Ok(airy_negative_asymptotic(-x))
    }
}

fn airy_maclaurin(x: f64) -> (f64, f64) {
    use crate::dd::Dd;
    let x3 = Dd::new(x) * Dd::new(x) * Dd::new(x);
    let mut tf = Dd::ONE;
    let mut tg = Dd::new(x);
    let mut f = tf;
    let mut g = tg;
    for k in 0..200 {
        let kf = k as f64;
        tf = (tf * x3).div(Dd::new((3.0 * kf + 2.0) * (3.0 * kf + 3.0)));
        tg = (tg * x3).div(Dd::new((3.0 * kf + 3.0) * (3.0 * kf + 4.0)));
        f = f + tf;
        g = g + tg;
        if tf.hi.abs() < 1e-34 && tg.hi.abs() < 1e-34 {
            break;
        }
    }
    let ai = f.mul_f64(AI0) - g.mul_f64(NEG_DAI0);
    let bi = (f.mul_f64(AI0) + g.mul_f64(NEG_DAI0)).mul_f64(3f64.sqrt());
    (ai.to_f64(), bi.to_f64())
}

fn airy_negative_asymptotic(z: f64) -> (f64, f64) {
    use std::f64::consts::{FRAC_PI_4, PI};
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    // u_k = (2k+1)(2k+3)…(6k−1) / (216^k k!)
    let mut u = 1.0f64;
    let mut even = 0.0;
    let mut odd = 0.0;
    let mut zpow = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 0..200usize {
        let term = u / zpow;
        if term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        // (−1)^{⌊k/2⌋} sign pattern for the two interleaved sums
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            even += sign * term;
        } else {
            odd += sign * term;
        }
        let k1 = (k + 1) as f64;
        u *= (6.0 * k1 - 5.0) * (6.0 * k1 - 3.0) * (6.0 * k1 - 1.0) / ((2.0 * k1 - 1.0) * 216.0 * k1);
        zpow *= zeta;
    }
    let pre = 1.0 / (PI.sqrt() * z.powf(0.25));
    let (s, c) = (zeta - FRAC_PI_4).sin_cos();
    (pre * (c * even + s * odd), pre * (-s * even + c * odd))
}

/// `(V₀, V₁)` at time `t` for `m = 1` from the Airy representation
/// `u = c₁Ai(−|ξ|^{2/3}t) + c₂Bi(−|ξ|^{2/3}t)`.
pub fn airy_fundamental_pair(t: f64, xi: f64) -> Result<(f64, f64)> {
    if xi == 0.0 {
        return Ok((1.0, t));
    }
    let s = xi.powf(2.0 / 3.0);
    let (ai, bi) = airy_ai_bi(-s * t)?;
    let r3 = 3f64.sqrt();
    let v0 = ai / (2.0 * AI0) + bi / (2.0 * r3 * AI0);
    let v1 = (ai / (2.0 * NEG_DAI0) - bi / (2.0 * r3 * NEG_DAI0)) / s;
    Ok((v0, v1))
}
