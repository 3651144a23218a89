//! Time quadrature on sampled grids: cumulative integrals, composite
//! Simpson weights and fourth-order second differences.

use std::ops::{Add, Mul};

use crate::error::{Error, Result};

// Per-interval weights (×1/1440) of the quintic interpolant through six
// consecutive samples, for each of the five intervals the stencil spans.
const W6: [[f64; 6]; 5] = [
    [475.0, 1427.0, -798.0, 482.0, -173.0, 27.0],
    [-27.0, 637.0, 1022.0, -258.0, 77.0, -11.0],
    [11.0, -93.0, 802.0, 802.0, -93.0, 11.0],
    [-11.0, 77.0, -258.0, 1022.0, 637.0, -27.0],
    [27.0, -173.0, 482.0, -798.0, 1427.0, 475.0],
];

/// Weights producing `∫_{t_l}^{t_{l+1}} g` for every interval `l`.
///
/// Uniform grids with at least six samples use the sixth-order rule: the
/// centered stencil in the interior, shifted stencils at the two ends. The
/// local error is `O(h⁷)` everywhere, so cumulative sums have an error that
/// is smooth in `t` and survives differencing. Other grids fall back to the
/// trapezoid rule.
#[derive(Debug, Clone)]
pub struct CumulativeRule {
    intervals: Vec<(usize, Vec<f64>)>,
}

impl CumulativeRule {
    pub fn new(times: &[f64]) -> Result<Self> {
        check_times(times)?;
        let m = times.len() - 1;
        let mut intervals = Vec::with_capacity(m);
        match uniform_step(times) {
            Some(h) if m >= 5 => {
                for l in 0..m {
                    let start = l.saturating_sub(2).min(m - 5);
                    let w = W6[l - start].iter().map(|w| w * h / 1440.0).collect();
                    intervals.push((start, w));
                }
            }
            _ => {
                for l in 0..m {
                    let h = times[l + 1] - times[l];
                    intervals.push((l, vec![0.5 * h, 0.5 * h]));
                }
            }
        }
        Ok(CumulativeRule { intervals })
    }

    /// `G(t_i) = ∫_0^{t_i} g` for every sample index.
    pub fn apply<T>(&self, g: &[T], zero: T) -> Vec<T>
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut acc = zero;
        out.push(acc);
        for (start, w) in &self.intervals {
            let mut s = zero;
            for (j, &wj) in w.iter().enumerate() {
                s = s + g[start + j] * wj;
            }
            acc = acc + s;
            out.push(acc);
        }
        out
    }
}

pub fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidParams("no sample times".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("sample times must be strictly increasing".into()));
    }
    Ok(())
}

/// Step of an equally spaced grid (to 1e−12 relative), `None` otherwise.
pub fn uniform_step(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let span = times[times.len() - 1] - times[0];
    let h = span / (times.len() - 1) as f64;
    times.iter().enumerate().all(|(i, &t)| (t - times[0] - i as f64 * h).abs() <= 1e-12 * span).then_some(h)
}

/// Weights for `∫_{t_0}^{t_k} g` from the samples `0..=k`: composite
/// Simpson on uniform grids (3/8 rule on the last three intervals when `k`
/// is odd), trapezoid otherwise or when `k = 1`.
pub fn simpson_weights(times: &[f64], k: usize) -> Vec<f64> {
    let mut w = vec![0.0; k + 1];
    if k == 0 {
        return w;
    }
    let h = match uniform_step(&times[..=k]) {
        Some(h) if k >= 2 => h,
        _ => {
            for l in 0..k {
                let h = times[l + 1] - times[l];
                w[l] += 0.5 * h;
                w[l + 1] += 0.5 * h;
            }
            return w;
        }
    };
    let simpson_end = if k % 2 == 0 { k } else { k - 3 };
    for l in (0..simpson_end).step_by(2) {
        w[l] += h / 3.0;
        w[l + 1] += 4.0 * h / 3.0;
        w[l + 2] += h / 3.0;
    }
    if k % 2 == 1 {
        let s = simpson_end;
        for (j, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[s + j] += 3.0 * h / 8.0 * c;
        }
    }
    w
}

/// Fourth-order central second difference at index `i` (needs `2 ≤ i ≤ len−3`).
#[inline]
pub fn second_difference<T>(u: &[T], i: usize, h: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let c = 1.0 / (12.0 * h * h);
    u[i - 2] * (-c) + u[i - 1] * (16.0 * c) + u[i] * (-30.0 * c) + u[i + 1] * (16.0 * c) + u[i + 2] * (-c)
}
