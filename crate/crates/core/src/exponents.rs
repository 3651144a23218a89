//! Exponents, thresholds and admissibility windows for
//! `∂ₜ²u − tᵐΔu = ±|u|^{κ−1}u` in `n` space dimensions.
//!
//! All quantities are evaluated in `f64`. Identities are checked with an
//! absolute tolerance of [`TOL`]; the test suite re-derives every formula in
//! exact rational arithmetic as an independent cross-check.
//!
//! Infinite exponents are plain `f64::INFINITY`, so `1/∞ = 0` falls out of
//! ordinary division.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when comparing exponents against thresholds.
pub const TOL: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * b.abs().max(1.0)
}

/// The triple `(m, n, κ)` together with the sign of the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub m: u32,
    pub n: u32,
    pub kappa: f64,
    /// `+1` or `−1`; `F(u) = sign·|u|^{κ−1}u`.
    pub sign: i8,
}

impl ProblemParams {
    pub fn new(m: u32, n: u32, kappa: f64, sign: i8) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("n must be at least 2, got {n}")));
        }
        if !(kappa > 1.0) || !kappa.is_finite() {
            return Err(Error::InvalidParams(format!("kappa must be a finite number > 1, got {kappa}")));
        }
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidParams(format!("sign must be +1 or -1, got {sign}")));
        }
        let p = ProblemParams { m, n, kappa, sign };
        if let Some(k3) = kappa3(m, n) {
            if kappa > k3 + TOL && kappa.fract() != 0.0 {
                return Err(Error::InvalidParams(format!(
                    "kappa = {kappa} exceeds kappa3 = {k3:.6} for n >= 3 and must then be an integer"
                )));
            }
        }
        Ok(p)
    }

    pub fn mu_star(&self) -> f64 {
        mu_star(self.m, self.n)
    }

    pub fn kappa_star(&self) -> f64 {
        kappa_star(self.m, self.n)
    }
}

/// Homogeneous dimension `((m+2)n + 2)/2`.
pub fn mu_star(m: u32, n: u32) -> f64 {
    ((m as f64 + 2.0) * n as f64 + 2.0) / 2.0
}

/// Conformal power `(μ*+2)/(μ*−2)`.
pub fn kappa_star(m: u32, n: u32) -> f64 {
    let ms = mu_star(m, n);
    (ms + 2.0) / (ms - 2.0)
}

/// Lower end of the window covered by the small-κ theorem; defined for
/// `n ≥ 3` or `n = 2, m ≥ 3`.
pub fn kappa0(m: u32, n: u32) -> Option<f64> {
    if !(n >= 3 || m >= 3) {
        return None;
    }
    let (mf, nf) = (m as f64, n as f64);
    let ms = mu_star(m, n);
    Some(1.0 + (6.0 * ms + mf) / (ms * (mf + 2.0) * nf))
}

/// Lower end of the range covered by the main existence theorem. Undefined
/// for the wave case `m = 0, n = 2`.
pub fn kappa1(m: u32, n: u32) -> Option<f64> {
    if n == 2 && m == 1 {
        return Some(2.0);
    }
    if n == 2 && m == 0 {
        return None;
    }
    let (mf, nf) = (m as f64, n as f64);
    let ms = mu_star(m, n);
    let a = (mf + 2.0) * (nf - 1.0);
    Some(((ms + 2.0) * a + 8.0) / ((ms - 2.0) * a + 8.0))
}

/// Upper end of the window with the supplementary `s ≠ q` estimate.
/// Reported as undefined when the formula's denominator is not positive.
pub fn kappa2(m: u32, n: u32) -> Option<f64> {
    let nf = n as f64;
    let ms = mu_star(m, n);
    let num = ms * (ms + 2.0) * (nf - 1.0) - 2.0 * (nf + 1.0);
    let den = ms * (ms - 2.0) * (nf - 1.0) - 2.0 * (nf + 1.0);
    if den <= 0.0 {
        None
    } else {
        Some(num / den)
    }
}

/// Power beyond which integer κ is assumed (`n ≥ 3` only). Undefined when
/// `μ* − m − 4 ≤ 0`.
pub fn kappa3(m: u32, n: u32) -> Option<f64> {
    if n < 3 {
        return None;
    }
    let ms = mu_star(m, n);
    let mf = m as f64;
    let den = ms - mf - 4.0;
    if den <= 0.0 {
        None
    } else {
        Some((ms - mf) / den)
    }
}

/// Every exponent attached to one `(m, n)` and an auxiliary `μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentTable {
    pub m: u32,
    pub n: u32,
    pub mu: f64,
    pub mu_star: f64,
    pub kappa_star: f64,
    pub kappa0: Option<f64>,
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
    pub kappa3: Option<f64>,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub p0_star: f64,
    pub q0_star: f64,
    pub gamma_star: f64,
    pub gamma_d: f64,
    pub gamma0: f64,
}

impl ExponentTable {
    /// `1 < p1` holds; several estimates need it.
    pub fn p1_above_one(&self) -> bool {
        self.p1 > 1.0 + TOL
    }
}

fn conj(p: f64) -> f64 {
    // p/(p−1) with 1 ↦ ∞
    let inv = 1.0 - 1.0 / p;
    1.0 / inv
}

/// Sobolev index matched to `L^q` by the homogeneous scaling:
/// `γ(m,n,q) = n/2 − (1/q)(n + 2/(m+2))`.
pub fn gamma_of_q(m: u32, n: u32, q: f64) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    nf / 2.0 - (nf + 2.0 / (mf + 2.0)) / q
}

/// Check `μ ≥ max{2, m/2}`.
pub fn check_mu(m: u32, mu: f64) -> Result<()> {
    let lo = 2f64.max(m as f64 / 2.0);
    if !(mu >= lo - TOL) {
        return Err(Error::Hypothesis(format!(
            "the dyadic estimates require mu >= max{{2, m/2}} = {lo}, got mu = {mu}"
        )));
    }
    Ok(())
}

pub fn derive_exponents(m: u32, n: u32, mu: f64) -> Result<ExponentTable> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("n must be at least 2, got {n}")));
    }
    check_mu(m, mu)?;
    let (mf, nf) = (m as f64, n as f64);
    let ms = mu_star(m, n);
    let inv_p0 = 0.5 + (2.0 * mu - mf) / (mu * (2.0 * ms - mf));
    let inv_p1 = 0.5 + (2.0 * mu - mf) / (mu * (mf + 2.0) * (nf - 1.0));
    let inv_p2 = 2.0 * inv_p0 - inv_p1;
    let (p0, p1, p2) = (1.0 / inv_p0, 1.0 / inv_p1, 1.0 / inv_p2);
    let q0 = 1.0 / (1.0 - inv_p0);
    let q1 = 1.0 / (1.0 - inv_p1);
    let q2 = 1.0 / (1.0 - inv_p2);
    let p0_star = 2.0 * ms / (ms + 2.0);
    let q0_star = 2.0 * ms / (ms - 2.0);
    let gamma0 = (1.0 / q0) * (nf + 2.0 / (mf + 2.0)) + 2.0 / (mf + 2.0) - nf / 2.0;
    let gamma_star =
        2.0 / (mf + 2.0) + mf / (2.0 * mu * (mf + 2.0)) - (2.0 * mu - mf) * (nf + 1.0) / (2.0 * mu * (2.0 * ms - mf));
    let gamma_d = 2.0 * (2.0 * mu - mf) * (nf + 1.0) / (mu * (mf + 2.0) * (nf - 1.0) * (2.0 * ms - mf));
    Ok(ExponentTable {
        m,
        n,
        mu,
        mu_star: ms,
        kappa_star: kappa_star(m, n),
        kappa0: kappa0(m, n),
        kappa1: kappa1(m, n),
        kappa2: kappa2(m, n),
        kappa3: kappa3(m, n),
        p0,
        p1,
        p2,
        q0,
        q1,
        q2,
        p0_star,
        q0_star,
        gamma_star,
        gamma_d,
        gamma0,
    })
}

/// Which statement a given κ falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// No known result (includes the uncovered point κ = κ₁).
    BelowKnown,
    /// κ₀ ≤ κ < κ₁ with `n ≥ 3` or `n = 2, m ≥ 3`.
    Thm16Window,
    /// κ₁ < κ < κ*.
    Thm11Sub,
    /// κ = κ*.
    Conformal,
    /// κ ≥ κ₂ (or κ > κ* when κ₂ is undefined), up to κ₃.
    Thm11Super,
    /// κ* < κ < κ₂: the super-conformal result plus a supplementary
    /// `s ≠ q` estimate.
    Thm15Window,
    /// κ > κ₃ with `n ≥ 3`; κ is then an integer.
    LargeIntegerKappa,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::BelowKnown => "BelowKnown",
            Regime::Thm16Window => "Thm16Window",
            Regime::Thm11Sub => "Thm11Sub",
            Regime::Conformal => "Conformal",
            Regime::Thm11Super => "Thm11Super",
            Regime::Thm15Window => "Thm15Window",
            Regime::LargeIntegerKappa => "LargeIntegerKappa",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify_regime(p: &ProblemParams) -> Regime {
    let (m, n, k) = (p.m, p.n, p.kappa);
    let ks = kappa_star(m, n);
    if let Some(k3) = kappa3(m, n) {
        if k > k3 + TOL {
            return Regime::LargeIntegerKappa;
        }
    }
    if close(k, ks) {
        return Regime::Conformal;
    }
    if k > ks {
        return match kappa2(m, n) {
            Some(k2) if k < k2 && !close(k, k2) => Regime::Thm15Window,
            _ => Regime::Thm11Super,
        };
    }
    match kappa1(m, n) {
        Some(k1) if k > k1 && !close(k, k1) => Regime::Thm11Sub,
        Some(k1) if !close(k, k1) => match kappa0(m, n) {
            Some(k0) if k >= k0 || close(k, k0) => Regime::Thm16Window,
            _ => Regime::BelowKnown,
        },
        _ => Regime::BelowKnown,
    }
}

/// The regularity index of the super-conformal branch,
/// `n/2 − 4/((m+2)(κ−1))`; the scale-critical Sobolev index.
pub fn gamma_super(m: u32, n: u32, kappa: f64) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    nf / 2.0 - 4.0 / ((mf + 2.0) * (kappa - 1.0))
}

/// The sub-conformal branch `(n+1)/4 − (n+1)/(μ*(κ−1)) − m/(2μ*(m+2))`.
pub fn gamma_sub(m: u32, n: u32, kappa: f64) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    let ms = mu_star(m, n);
    (nf + 1.0) / 4.0 - (nf + 1.0) / (ms * (kappa - 1.0)) - mf / (2.0 * ms * (mf + 2.0))
}

/// Regularity index of the small-κ window (κ₀ ≤ κ < κ₁).
pub fn gamma_small_kappa(m: u32, n: u32, kappa: f64) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    let ms = mu_star(m, n);
    let frac = (ms * (mf + 2.0) * (nf - 1.0) + 12.0 * ms + 2.0 * mf) / (2.0 * nf * kappa - (nf + 1.0));
    (nf + 1.0) / 4.0 - (nf + 1.0) / (4.0 * ms * (mf + 2.0)) * frac - mf / (2.0 * ms * (mf + 2.0))
}

/// Result of [`gamma_critical`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaCritical {
    Value(f64),
    BelowKnownRange,
}

pub fn gamma_critical(p: &ProblemParams) -> GammaCritical {
    let (m, n, k) = (p.m, p.n, p.kappa);
    match classify_regime(p) {
        Regime::BelowKnown => GammaCritical::BelowKnownRange,
        Regime::Thm16Window => GammaCritical::Value(gamma_small_kappa(m, n, k)),
        Regime::Thm11Sub => GammaCritical::Value(gamma_sub(m, n, k)),
        _ => GammaCritical::Value(gamma_super(m, n, k)),
    }
}

/// Exponent of `ε` in `‖φ_ε‖_{Ḣ^γ}/‖φ‖_{Ḣ^γ}` for the dilation family
/// `φ_ε(x) = ε^{−2/(κ−1)}φ(ε^{−(m+2)/2}x)`.
pub fn data_norm_scaling_exponent(m: u32, n: u32, kappa: f64, gamma: f64) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    (mf + 2.0) / 2.0 * (nf / 2.0 - gamma) - 2.0 / (kappa - 1.0)
}

/// Which construction produced a tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TupleKind {
    Thm11Sub,
    Thm11Super,
    Thm15,
    Thm16,
    Thm45I,
    Thm45II,
    Thm45III,
    Cor46,
    Custom,
}

impl TupleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TupleKind::Thm11Sub => "Thm1.1-sub",
            TupleKind::Thm11Super => "Thm1.1-super",
            TupleKind::Thm15 => "Thm1.5",
            TupleKind::Thm16 => "Thm1.6",
            TupleKind::Thm45I => "Thm4.5-i",
            TupleKind::Thm45II => "Thm4.5-ii",
            TupleKind::Thm45III => "Thm4.5-iii",
            TupleKind::Cor46 => "Cor4.6",
            TupleKind::Custom => "custom",
        }
    }
}

/// Space-time exponents `(s, q)` for the solution, `(r, p)` for the source,
/// the data regularity `γ` and the auxiliary `μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrichartzTuple {
    pub s: f64,
    pub q: f64,
    pub r: f64,
    pub p: f64,
    pub gamma: f64,
    pub mu: f64,
    pub kind: TupleKind,
}

/// `((m+2)n/2)(1/p − 1/q) + 1/r − 1/s − 2`.
pub fn scaling_defect(t: &StrichartzTuple, m: u32, n: u32) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    (mf + 2.0) * nf / 2.0 * (1.0 / t.p - 1.0 / t.q) + 1.0 / t.r - 1.0 / t.s - 2.0
}

/// `1/s = ((m+2)(n−1)/4)(1/2 − 1/q) + m/(4μ)`.
pub fn inv_s_sub(m: u32, n: u32, mu: f64, q: f64) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    (mf + 2.0) * (nf - 1.0) / 4.0 * (0.5 - 1.0 / q) + mf / (4.0 * mu)
}

/// Source exponents paired with `(s, q)` by shifting both reciprocals by
/// `2/μ*`, which enforces the scaling identity.
fn source_pair(m: u32, n: u32, s: f64, q: f64) -> (f64, f64) {
    let shift = 2.0 / mu_star(m, n);
    (1.0 / (1.0 / s + shift), 1.0 / (1.0 / q + shift))
}

/// Tuple of the existence theorem matching κ. In the window κ* < κ < κ₂
/// this is the super-conformal tuple; the supplementary estimate is
/// available from [`supplementary_tuple`].
pub fn theorem_tuple(p: &ProblemParams) -> Result<StrichartzTuple> {
    let (m, n, k) = (p.m, p.n, p.kappa);
    let ms = mu_star(m, n);
    match classify_regime(p) {
        Regime::BelowKnown => {
            Err(Error::Unsupported(format!("kappa = {k} lies below every known existence range for m = {m}, n = {n}")))
        }
        Regime::Thm16Window => {
            let (mf, nf) = (m as f64, n as f64);
            let inv_q = ((nf - 1.0) / 2.0 + 6.0 / (mf + 2.0) + mf / (ms * (mf + 2.0))) / (2.0 * nf * k - (nf + 1.0));
            let q = 1.0 / inv_q;
            let s = 1.0 / inv_s_sub(m, n, ms, q);
            Ok(StrichartzTuple {
                s,
                q,
                r: 2.0,
                p: q / k,
                gamma: gamma_small_kappa(m, n, k),
                mu: ms,
                kind: TupleKind::Thm16,
            })
        }
        Regime::Thm11Sub => {
            let q = ms * (k - 1.0) / 2.0;
            let s = 1.0 / inv_s_sub(m, n, ms, q);
            let (r, pp) = source_pair(m, n, s, q);
            Ok(StrichartzTuple { s, q, r, p: pp, gamma: gamma_sub(m, n, k), mu: ms, kind: TupleKind::Thm11Sub })
        }
        Regime::Conformal | Regime::Thm11Super | Regime::Thm15Window | Regime::LargeIntegerKappa => {
            let q = ms * (k - 1.0) / 2.0;
            let (r, pp) = source_pair(m, n, q, q);
            Ok(StrichartzTuple { s: q, q, r, p: pp, gamma: gamma_super(m, n, k), mu: ms, kind: TupleKind::Thm11Super })
        }
    }
}

/// Supplementary `s ≠ q` tuple for κ* ≤ κ < κ₂.
///
/// The `1/q` formula uses the factor `1/((m+2)(n+1))`: this is the version
/// for which the tuple's `γ` agrees with the super-conformal index.
pub fn supplementary_tuple(p: &ProblemParams) -> Result<StrichartzTuple> {
    let (m, n, k) = (p.m, p.n, p.kappa);
    let ks = kappa_star(m, n);
    let k2 = kappa2(m, n).ok_or_else(|| Error::Unsupported(format!("kappa2 undefined for m = {m}, n = {n}")))?;
    if k < ks - TOL || k >= k2 - TOL {
        return Err(Error::Hypothesis(format!(
            "the supplementary estimate requires kappa* <= kappa < kappa2 ({ks} <= {k} < {k2})"
        )));
    }
    let (mf, nf) = (m as f64, n as f64);
    let ms = mu_star(m, n);
    let inv_q = (8.0 / (k - 1.0) - mf / ms) / ((mf + 2.0) * (nf + 1.0)) - (nf - 1.0) / (2.0 * (nf + 1.0));
    if !(inv_q > 0.0 && inv_q <= 0.5) {
        return Err(Error::Unsupported(format!(
            "supplementary exponent 1/q = {inv_q} is outside (0, 1/2] for m = {m}, n = {n}, kappa = {k}"
        )));
    }
    let q = 1.0 / inv_q;
    let s = 1.0 / inv_s_sub(m, n, ms, q);
    let (r, pp) = source_pair(m, n, s, q);
    Ok(StrichartzTuple { s, q, r, p: pp, gamma: gamma_super(m, n, k), mu: ms, kind: TupleKind::Thm15 })
}

/// The three parameter ranges of the homogeneous Strichartz theorem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Thm45Case {
    I,
    II,
    III,
}

/// Open/closed window for `1/q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub lower: f64,
    pub lower_closed: bool,
    pub upper: f64,
    pub upper_closed: bool,
}

impl Window {
    pub fn contains(&self, x: f64) -> bool {
        let lo_ok = if self.lower_closed { x >= self.lower - TOL } else { x > self.lower + TOL };
        let hi_ok = if self.upper_closed { x <= self.upper + TOL } else { x < self.upper - TOL };
        lo_ok && hi_ok
    }
}

/// Window for `1/q` in the given case.
pub fn thm45_window(case: Thm45Case, m: u32, n: u32, mu: f64) -> Result<Window> {
    let (mf, nf) = (m as f64, n as f64);
    let ms = mu_star(m, n);
    match case {
        Thm45Case::I => {
            if mu < ms - TOL {
                return Err(Error::Hypothesis(format!("case (i) requires mu >= mu* = {ms}, got {mu}")));
            }
            if n == 2 && m == 1 {
                return Ok(Window {
                    lower: 8.0 / 63.0 * (1.0 - 4.0 / mu),
                    lower_closed: false,
                    upper: 0.5,
                    upper_closed: true,
                });
            }
            let t = derive_exponents(m, n, mu)?;
            let shift = 4.0 * (1.0 + mf / (2.0 * mu)) / ((mf + 2.0) * (nf + 1.0));
            Ok(Window {
                lower: 1.0 / t.p2 - shift,
                lower_closed: false,
                upper: 1.0 / t.p1 - shift,
                upper_closed: false,
            })
        }
        Thm45Case::II | Thm45Case::III => {
            let lo = 2f64.max(mf * nf / 2.0);
            if mu < lo - TOL {
                return Err(Error::Hypothesis(format!(
                    "cases (ii)/(iii) require mu >= max{{2, mn/2}} = {lo}, got {mu}"
                )));
            }
            if !(n >= 3 || m >= 2) {
                return Err(Error::Hypothesis("cases (ii)/(iii) require n >= 3 or (n = 2, m >= 2)".into()));
            }
            let t = derive_exponents(m, n, mu)?;
            if case == Thm45Case::II {
                Ok(Window {
                    lower: 2.0 * nf / ((nf + 1.0) * t.p1)
                        - (nf - 1.0) / (2.0 * (nf + 1.0))
                        - (6.0 + mf / mu) / ((mf + 2.0) * (nf + 1.0)),
                    lower_closed: false,
                    upper: 0.5,
                    upper_closed: true,
                })
            } else {
                Ok(Window {
                    lower: 0.5 - (6.0 + mf / mu) / (2.0 * (mf + 2.0) * nf),
                    lower_closed: false,
                    upper: 1.0 / t.q1,
                    upper_closed: false,
                })
            }
        }
    }
}

/// Regularity index attached to `q` in the given case.
pub fn thm45_gamma(case: Thm45Case, m: u32, n: u32, mu: f64, q: f64) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    match case {
        Thm45Case::I | Thm45Case::II => (nf + 1.0) / 2.0 * (0.5 - 1.0 / q) - mf / (2.0 * mu * (mf + 2.0)),
        Thm45Case::III => nf * (0.5 - 1.0 / q) - 1.0 / (mf + 2.0),
    }
}

/// Whether `q` is admissible in the case, and the matching `γ`.
pub fn admissible_range_thm45(case: Thm45Case, m: u32, n: u32, mu: f64, q: f64) -> Result<(bool, f64)> {
    let w = thm45_window(case, m, n, mu)?;
    Ok((w.contains(1.0 / q), thm45_gamma(case, m, n, mu, q)))
}

/// Full tuple for an admissible `q`. Case (i) fixes `1/p − 1/q`, case (ii)
/// fixes `r = 2` and case (iii) fixes `s = 2` together with the `r(p)`
/// relation; the remaining exponent comes from the scaling identity.
pub fn thm45_tuple(case: Thm45Case, m: u32, n: u32, mu: f64, q: f64) -> Result<StrichartzTuple> {
    let (ok, gamma) = admissible_range_thm45(case, m, n, mu, q)?;
    if !ok {
        return Err(Error::Hypothesis(format!("q = {q} lies outside the admissible window of case {case:?}")));
    }
    let (mf, nf) = (m as f64, n as f64);
    let hom = (mf + 2.0) * nf / 2.0;
    let (s, r, p) = match case {
        Thm45Case::I => {
            let s = 1.0 / inv_s_sub(m, n, mu, q);
            let inv_p = 1.0 / q + 4.0 * (1.0 + mf / (2.0 * mu)) / ((mf + 2.0) * (nf + 1.0));
            let inv_r = 2.0 + 1.0 / s - hom * (inv_p - 1.0 / q);
            (s, 1.0 / inv_r, 1.0 / inv_p)
        }
        Thm45Case::II => {
            let s = 1.0 / inv_s_sub(m, n, mu, q);
            let inv_p = 1.0 / q + (2.0 + 1.0 / s - 0.5) / hom;
            (s, 2.0, 1.0 / inv_p)
        }
        Thm45Case::III => {
            let inv_p =
                (hom / q + 1.5 + mf / (4.0 * mu) - (mf + 2.0) * (nf - 1.0) / 8.0) / ((mf + 2.0) * (nf + 1.0) / 4.0);
            let inv_r = 1.0 - mf / (4.0 * mu) - (mf + 2.0) * (nf - 1.0) / 4.0 * (inv_p - 0.5);
            (2.0, 1.0 / inv_r, 1.0 / inv_p)
        }
    };
    Ok(StrichartzTuple {
        s,
        q,
        r,
        p,
        gamma,
        mu,
        kind: match case {
            Thm45Case::I => TupleKind::Thm45I,
            Thm45Case::II => TupleKind::Thm45II,
            Thm45Case::III => TupleKind::Thm45III,
        },
    })
}

/// Exponents of the product estimate with source `fg`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BilinearExponents {
    pub rho: f64,
    pub sigma: f64,
    pub s: f64,
    pub delta: f64,
    pub gamma: f64,
}

pub fn corollary46_exponents(m: u32, n: u32, mu: f64, q: f64) -> Result<BilinearExponents> {
    let (mf, nf) = (m as f64, n as f64);
    let ms = mu_star(m, n);
    if mu < ms - TOL {
        return Err(Error::Hypothesis(format!("the product estimate requires mu >= mu* = {ms}, got {mu}")));
    }
    if 2.0 * mu <= mf * nf {
        return Err(Error::Hypothesis(format!("the product estimate requires 2 mu > m n, got mu = {mu}")));
    }
    let rho = mu * (mf + 2.0) * (nf + 1.0) / (2.0 * (2.0 * mu + mf));
    let sigma = mu * (nf + 1.0) / (2.0 * mu - mf * nf);
    let inv_s = inv_s_sub(m, n, mu, q);
    let inv_delta = 1.0 / q + 2.0 / ((mf + 2.0) * nf) * (inv_s - mf / (4.0 * mu));
    Ok(BilinearExponents {
        rho,
        sigma,
        s: 1.0 / inv_s,
        delta: 1.0 / inv_delta,
        gamma: thm45_gamma(Thm45Case::I, m, n, mu, q),
    })
}

/// Exponent of `2^j` in the dyadic source-to-solution estimate for
/// `p ∈ (p₁, 2]` with `r` paired to `p`:
/// `E = (1/p − 1/2)(n+1) − m/(μ(m+2)) − 2/(m+2) − Re α`.
pub fn dyadic_exponent(m: u32, n: u32, mu: f64, p: f64, re_alpha: f64) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    (1.0 / p - 0.5) * (nf + 1.0) - mf / (mu * (mf + 2.0)) - 2.0 / (mf + 2.0) - re_alpha
}

/// Time exponent `r` paired with `p` in the dyadic estimate:
/// `1/r = 1 − m/(4μ) − ((m+2)(n−1)/4)(1/p − 1/2)`.
pub fn dyadic_time_exponent(m: u32, n: u32, mu: f64, p: f64) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    1.0 / (1.0 - mf / (4.0 * mu) - (mf + 2.0) * (nf - 1.0) / 4.0 * (1.0 / p - 0.5))
}

/// `Re α` at which [`dyadic_exponent`] vanishes.
pub fn dyadic_critical_alpha(m: u32, n: u32, mu: f64, p: f64) -> f64 {
    dyadic_exponent(m, n, mu, p, 0.0)
}

/// Conjugate exponent `p/(p−1)`.
pub fn conjugate(p: f64) -> f64 {
    conj(p)
}
