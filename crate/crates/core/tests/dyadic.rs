use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tricomi_core::dyadic::{
    apply_wj_alpha, check_dyadic_tuple, homogeneous_probe, project_dyadic, square_function_ratio, theta,
    uniformity_probe, DyadicOperator, DyadicPartition, FioKernelSpec, HomogeneousConfig, KernelKind, Localization,
    ScaledGrid, UniformityConfig,
};
use tricomi_core::exponents::{derive_exponents, dyadic_critical_alpha, dyadic_time_exponent, TupleKind};
use tricomi_core::linear::LinearSolver;
use tricomi_core::propagator::{propagator, symbol_b};
use tricomi_core::spectral::{
    mixed_norm_physical, sobolev_norm, time_norm, transform_forward, Grid, PhysicalField, SpaceGrid, SpaceTimeField,
    SpectralField,
};
use tricomi_core::StrichartzTuple;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn random_space_time(grid: &Grid, seed: u64) -> SpaceTimeField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slices = grid
        .times
        .iter()
        .map(|_| {
            let vals: Vec<f64> = (0..grid.space.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            transform_forward(&PhysicalField::from_real(grid.space, &vals).unwrap()).unwrap()
        })
        .collect();
    SpaceTimeField::new(grid, slices).unwrap()
}

fn max_diff(a: &SpaceTimeField, b: &SpaceTimeField) -> f64 {
    a.slices
        .iter()
        .zip(&b.slices)
        .flat_map(|(x, y)| x.coeffs.iter().zip(&y.coeffs).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max)
}

fn max_abs(a: &SpaceTimeField) -> f64 {
    a.slices.iter().flat_map(|s| s.coeffs.iter().map(|c| c.norm())).fold(0.0, f64::max)
}

// Independent re-derivations for the dense oracle.

fn cutoff_eta(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = (-1.0 / (2.0 - r)).exp();
        let b = (-1.0 / (r - 1.0)).exp();
        a / (a + b)
    }
}

fn shell_weight(r: f64, j: i32) -> f64 {
    let x = r / 2f64.powi(j);
    cutoff_eta(x) - cutoff_eta(2.0 * x)
}

fn phase(t: f64, m: u32) -> f64 {
    2.0 / (m as f64 + 2.0) * t.powf((m as f64 + 2.0) / 2.0)
}

/// Weights of `∫_0^{t_k}` on a uniform grid: Simpson pairs, a closing 3/8
/// panel when `k` is odd, trapezoid for `k = 1`.
fn quadrature_row(h: f64, k: usize) -> Vec<f64> {
    let mut w = vec![0.0; k + 1];
    match k {
        0 => {}
        1 => {
            w[0] = h / 2.0;
            w[1] = h / 2.0;
        }
        _ => {
            let pairs = if k % 2 == 0 { k / 2 } else { (k - 3) / 2 };
            for p in 0..pairs {
                w[2 * p] += h / 3.0;
                w[2 * p + 1] += 4.0 * h / 3.0;
                w[2 * p + 2] += h / 3.0;
            }
            if k % 2 == 1 {
                let s = 2 * pairs;
                w[s] += 3.0 * h / 8.0;
                w[s + 1] += 9.0 * h / 8.0;
                w[s + 2] += 9.0 * h / 8.0;
                w[s + 3] += 3.0 * h / 8.0;
            }
        }
    }
    w
}

/// Dense evaluation in physical space: for every `(t_i, τ_l)` pair build the
/// convolution kernel `G(x−y) = N^{−n} Σ_k M(ξ_k) e^{iξ_k·(x−y)}` by direct
/// summation and apply it as a matrix.
fn dense_oracle<M: Fn(f64, f64, f64) -> Complex64>(
    f: &[PhysicalField],
    sp: SpaceGrid,
    times: &[f64],
    multiplier: M,
) -> Vec<Vec<Complex64>> {
    let n = sp.points;
    let npts = sp.len();
    let h = times[1] - times[0];
    let freq = |i: usize| {
        let s = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
        2.0 * PI / sp.extent * s
    };
    let modes: Vec<(f64, f64)> = (0..npts).map(|k| (freq(k / n), freq(k % n))).collect();
    let pts: Vec<(f64, f64)> = (0..npts).map(|a| ((a / n) as f64 * sp.dx(), (a % n) as f64 * sp.dx())).collect();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); npts]; times.len()];
    for (i, row) in out.iter_mut().enumerate() {
        let w = quadrature_row(h, i);
        for l in 0..=i {
            let mult: Vec<Complex64> =
                modes.iter().map(|&(a, b)| multiplier(times[i], times[l], (a * a + b * b).sqrt())).collect();
            for a in 0..npts {
                let mut acc = Complex64::new(0.0, 0.0);
                for b in 0..npts {
                    let (dx, dy) = (pts[a].0 - pts[b].0, pts[a].1 - pts[b].1);
                    let mut g = Complex64::new(0.0, 0.0);
                    for (k, &(p, q)) in modes.iter().enumerate() {
                        g += mult[k] * (I * (p * dx + q * dy)).exp();
                    }
                    acc += g * f[l].values[b];
                }
                row[a] += acc * (w[l] / npts as f64);
            }
        }
    }
    out
}

fn compare_with_dense(kind: KernelKind, j: i32, alpha: Complex64) -> f64 {
    let m = 1;
    let mu = 4.0;
    let sp = SpaceGrid::new(2, 2.0 * PI, 8).unwrap();
    let grid = Grid::uniform(sp, 1.5, 15).unwrap();
    let f = random_space_time(&grid, 11);
    let spec = FioKernelSpec { kind, m, mu, alpha };
    let got = apply_wj_alpha(&f, j, spec).unwrap().to_physical().unwrap();
    let want = dense_oracle(&f.to_physical().unwrap(), sp, &grid.times, |t, tau, r| {
        let cut = shell_weight(r, j);
        if cut == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let b = match kind {
            KernelKind::Synthetic => {
                let d = (phase(t, m) - phase(tau, m)).abs() * r;
                Complex64::new((1.0 + d).powf(-1.0 / 12.0) * r.powf(-2.0 / 3.0), 0.0)
            }
            KernelKind::Physical => symbol_b(2, t, r, m).unwrap() * symbol_b(3, tau, r, m).unwrap(),
            KernelKind::Unit => Complex64::new(1.0, 0.0),
        };
        (I * (phase(t, m) - phase(tau, m)) * r).exp() * b * cut * (-alpha * r.ln()).exp()
    });
    let mut err = 0.0f64;
    let mut scale = 0.0f64;
    for (g, w) in got.iter().zip(&want) {
        for (a, b) in g.values.iter().zip(w) {
            err = err.max((a - b).norm());
            scale = scale.max(b.norm());
        }
    }
    assert!(scale > 1e-3, "oracle output vanished");
    err / scale
}

#[test]
fn synthetic_kernel_matches_dense_summation() {
    for (j, alpha) in [(1, Complex64::new(0.0, 0.0)), (1, Complex64::new(0.4, 0.3)), (0, Complex64::new(-0.2, 0.0))] {
        let e = compare_with_dense(KernelKind::Synthetic, j, alpha);
        assert!(e <= 1e-10, "j={j} alpha={alpha}: {e:e}");
    }
}

#[test]
fn physical_kernel_matches_dense_summation() {
    let e = compare_with_dense(KernelKind::Physical, 1, Complex64::new(0.25, 0.0));
    assert!(e <= 1e-10, "{e:e}");
}

#[test]
fn partition_resums_to_identity_on_fields() {
    let sp = SpaceGrid::new(2, 9.0, 64).unwrap();
    let grid = Grid::uniform(sp, 1.0, 1).unwrap();
    let mut f = random_space_time(&grid, 5).slices.remove(0);
    f.coeffs[0] = Complex64::new(0.0, 0.0);
    let part = DyadicPartition::covering(&sp);
    let mut sum = SpectralField::zeros(sp);
    for j in part.iter() {
        sum = sum.axpy(1.0, &project_dyadic(&f, j));
    }
    let err = sum.coeffs.iter().zip(&f.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let top = f.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    assert!(err <= 1e-12 * top, "{err:e}");
}

#[test]
fn shell_supported_field_has_three_nonzero_projections() {
    let sp = SpaceGrid::new(2, 2.0 * PI, 64).unwrap();
    let j = 3;
    let mut f = SpectralField::zeros(sp);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..sp.len() {
        let r = sp.xi_mag(k);
        if r >= 2f64.powi(j - 1) && r <= 2f64.powi(j + 1) {
            f.coeffs[k] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    for jj in -2..8 {
        let norm = project_dyadic(&f, jj).l2_norm();
        if (j - 1..=j + 1).contains(&jj) {
            assert!(norm > 0.0, "j={jj}");
        } else {
            assert_eq!(norm, 0.0, "j={jj}");
        }
    }
}

#[test]
fn output_vanishes_outside_the_shell() {
    let sp = SpaceGrid::new(2, 2.0 * PI, 32).unwrap();
    let grid = Grid::uniform(sp, 1.0, 10).unwrap();
    // Only |ξ| ≤ 1 modes: the j = 2 shell is (2, 8).
    let mut f = random_space_time(&grid, 4);
    for sl in f.slices.iter_mut() {
        for (k, c) in sl.coeffs.iter_mut().enumerate() {
            if sp.xi_mag(k) > 1.0 {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }
    let w = apply_wj_alpha(&f, 2, FioKernelSpec::synthetic(1, 4.0, 0.0)).unwrap();
    assert_eq!(max_abs(&w), 0.0);
}

#[test]
fn output_spectrum_lies_in_the_shell() {
    let sp = SpaceGrid::new(2, 2.0 * PI, 32).unwrap();
    let grid = Grid::uniform(sp, 1.0, 8).unwrap();
    let f = random_space_time(&grid, 9);
    let j = 2;
    let w = apply_wj_alpha(&f, j, FioKernelSpec::physical(1, 4.0, 0.0)).unwrap();
    for s in &w.slices {
        for (k, c) in s.coeffs.iter().enumerate() {
            let r = sp.xi_mag(k);
            if r <= 2f64.powi(j - 1) || r >= 2f64.powi(j + 1) {
                assert_eq!(*c, Complex64::new(0.0, 0.0), "r={r}");
            }
        }
    }
    assert!(max_abs(&w) > 0.0);
}

#[test]
fn phase_cancellation_identity() {
    for m in [1, 2] {
        let sp = SpaceGrid::new(2, 2.0 * PI, 16).unwrap();
        let grid = Grid::uniform(sp, 2.0, 20).unwrap();
        // Mode (0, 2) has |ξ| = 2 = 2^1, where Θ = 1.
        let k0 = 2;
        assert_eq!(sp.xi_mag(k0), 2.0);
        let slices = grid
            .times
            .iter()
            .map(|&tau| {
                let mut s = SpectralField::zeros(sp);
                s.coeffs[k0] = (I * phase(tau, m) * 2.0).exp();
                s
            })
            .collect();
        let f = SpaceTimeField::new(&grid, slices).unwrap();
        let spec = FioKernelSpec { kind: KernelKind::Unit, m, mu: 4.0, alpha: Complex64::new(0.0, 0.0) };
        let w = apply_wj_alpha(&f, 1, spec).unwrap();
        for (i, &t) in grid.times.iter().enumerate() {
            let want = (I * phase(t, m) * 2.0).exp() * t;
            assert!((w.slices[i].coeffs[k0] - want).norm() <= 1e-12, "m={m} t={t}");
        }
    }
}

#[test]
fn full_operator_is_the_sum_of_shells() {
    let sp = SpaceGrid::new(2, 5.0, 16).unwrap();
    let grid = Grid::uniform(sp, 1.0, 12).unwrap();
    let spec = FioKernelSpec::synthetic(1, 4.0, 0.1);
    let f = random_space_time(&grid, 21);
    let full = DyadicOperator::new(&grid, spec, Localization::Full).unwrap().apply(&f).unwrap();
    let mut sum = SpaceTimeField::zeros(&grid);
    for j in DyadicPartition::covering(&sp).iter() {
        sum = sum.axpy(1.0, &apply_wj_alpha(&f, j, spec).unwrap());
    }
    assert!(max_diff(&full, &sum) <= 1e-12 * max_abs(&full));
}

#[test]
fn littlewood_paley_square_function_bounds() {
    // With Σ_j Θ_j = 1 and 0 ≤ Θ_j, 1/2 ≤ Σ_j Θ_j² ≤ 1 pointwise, so the
    // ratio is confined to [1/√2, 1].
    let sp = SpaceGrid::new(2, 12.0, 64).unwrap();
    let grid = Grid::uniform(sp, 1.0, 1).unwrap();
    let part = DyadicPartition::covering(&sp);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for seed in 0..8 {
        let mut f = random_space_time(&grid, 100 + seed).slices.remove(0);
        f.coeffs[0] = Complex64::new(0.0, 0.0);
        let ratio = square_function_ratio(&f, &part);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    eprintln!("square function ratio over random fields: [{lo:.4}, {hi:.4}]");
    assert!(lo >= 0.5f64.sqrt() - 1e-12 && hi <= 1.0 + 1e-12);
    // Spectrum only at |ξ| = 2^j: every mode sees a single Θ_j = 1.
    let part_unit = DyadicPartition::new(-2, 8).unwrap();
    let unit_grid = SpaceGrid::new(2, 2.0 * PI, 64).unwrap();
    let mut h = SpectralField::zeros(unit_grid);
    for k in 0..unit_grid.len() {
        let r = unit_grid.xi_mag(k);
        if r > 0.0 && (r.log2() - r.log2().round()).abs() < 1e-12 {
            h.coeffs[k] = Complex64::new(1.0, 0.0);
        }
    }
    assert!((square_function_ratio(&h, &part_unit) - 1.0).abs() <= 1e-12);
}

#[test]
fn operator_and_shell_pieces_are_consistent() {
    // ‖Wf‖ against (Σ_j‖W_jf‖²)^{1/2}. In L²_tL²_x the ratio is at most √2
    // by the same pointwise bound on Σ_jΘ_j²; other norms are reported.
    let sp = SpaceGrid::new(2, 8.0, 32).unwrap();
    let grid = Grid::uniform(sp, 1.0, 16).unwrap();
    let spec = FioKernelSpec::synthetic(1, 4.0, 0.0);
    let part = DyadicPartition::covering(&sp);
    let op = DyadicOperator::new(&grid, spec, Localization::Full).unwrap();
    let shells: Vec<DyadicOperator> =
        part.iter().map(|j| DyadicOperator::new(&grid, spec, Localization::Shell(j)).unwrap()).collect();
    let mut worst = 0.0f64;
    let mut worst_other = 0.0f64;
    for seed in 0..4 {
        let f = random_space_time(&grid, 300 + seed);
        let w = op.apply(&f).unwrap();
        let pieces: Vec<SpaceTimeField> = shells.iter().map(|o| o.apply(&f).unwrap()).collect();
        let ratio = |s: f64, q: f64| {
            let whole = w.mixed_norm(s, q).unwrap();
            let sq: f64 = pieces.iter().map(|p| p.mixed_norm(s, q).unwrap().powi(2)).sum();
            whole / sq.sqrt()
        };
        worst = worst.max(ratio(2.0, 2.0));
        worst_other = worst_other.max(ratio(4.0, 4.0));
    }
    eprintln!("‖Wf‖/(Σ‖W_jf‖²)^(1/2): L2L2 {worst:.4}, L4L4 {worst_other:.4}");
    assert!(worst <= 2f64.sqrt() * (1.0 + 1e-12));
    assert!(worst_other.is_finite());
}

#[test]
fn out_of_range_tuples_name_the_hypothesis() {
    let table = derive_exponents(1, 2, 4.0).unwrap();
    let err = check_dyadic_tuple(1, 2, 4.0, table.p1.max(1.0) * 0.99, None).unwrap_err();
    assert!(err.to_string().contains("p <= 2"), "{err}");
    let err = check_dyadic_tuple(1, 2, 4.0, 1.9, Some(7.0)).unwrap_err();
    assert!(err.to_string().contains("pairs"), "{err}");
    assert!(check_dyadic_tuple(1, 2, 4.0, 2.5, None).is_err());
    let sp = SpaceGrid::new(2, 1.0, 8).unwrap();
    let grid = Grid::uniform(sp, 1.0, 4).unwrap();
    let err = DyadicOperator::new(&grid, FioKernelSpec::synthetic(6, 2.5, 0.0), Localization::Full).unwrap_err();
    assert!(err.to_string().contains("mu >= max"), "{err}");
}

fn dyadic_tuple(p: f64) -> StrichartzTuple {
    let r = dyadic_time_exponent(1, 2, 4.0, p);
    StrichartzTuple { s: f64::NAN, q: f64::NAN, r, p, gamma: f64::NAN, mu: 4.0, kind: TupleKind::Custom }
}

fn small_uniformity(p: f64, offset: f64) -> tricomi_core::dyadic::UniformityReport {
    let alpha = dyadic_critical_alpha(1, 2, 4.0, p);
    let cfg = UniformityConfig {
        j_list: vec![-1, 0, 1, 2],
        trials: 2,
        seed: 7,
        grid: ScaledGrid { dim: 2, points: 32, base_extent: 32.0, base_time: 4.0, steps: 24 },
        exponent_offset: offset,
    };
    uniformity_probe(&FioKernelSpec::synthetic(1, 4.0, alpha), 2, &dyadic_tuple(p), &cfg).unwrap()
}

#[test]
fn uniformity_probe_on_dilated_grids() {
    let rep = small_uniformity(1.8, 0.0);
    assert!(rep.exponent.abs() < 1e-12);
    assert_eq!(rep.rows.len(), 8);
    assert!(rep.spread <= 3.0, "spread {}", rep.spread);
    assert!(rep.slope.abs() < 0.1, "slope {}", rep.slope);
    eprintln!("uniformity spread {:.6} slope {:.2e}", rep.spread, rep.slope);
    let plancherel = small_uniformity(2.0, 0.0);
    assert!(plancherel.max_per_j.iter().all(|(_, v)| v.is_finite() && *v > 0.0));
}

#[test]
fn uniformity_negative_control_trends() {
    let rep = small_uniformity(1.8, 0.5);
    assert!((rep.slope.abs() - 0.5).abs() <= 0.1, "slope {}", rep.slope);
    // Four rungs at slope 1/2: max/min = 2^{3/2}.
    assert!((rep.spread / 2f64.powf(1.5) - 1.0).abs() < 0.2, "spread {}", rep.spread);
}

fn homogeneous_cfg(shift: f64) -> HomogeneousConfig {
    HomogeneousConfig {
        ladder: vec![1.0, 10f64.sqrt(), 10.0],
        trials: 2,
        seed: 3,
        grid: ScaledGrid { dim: 2, points: 32, base_extent: 40.0, base_time: 2.0, steps: 24 },
        gamma_shift: shift,
    }
}

fn critical_tuple() -> StrichartzTuple {
    StrichartzTuple { s: 4.0, q: 4.0, r: f64::NAN, p: f64::NAN, gamma: 1.0 / 3.0, mu: 4.0, kind: TupleKind::Custom }
}

#[test]
fn homogeneous_probe_scale_critical_and_control() {
    let rep = homogeneous_probe(1, &critical_tuple(), &homogeneous_cfg(0.0)).unwrap();
    assert!(rep.variation <= 3.0, "variation {}", rep.variation);
    let ctl = homogeneous_probe(1, &critical_tuple(), &homogeneous_cfg(-0.2)).unwrap();
    assert!(ctl.monotone_increasing, "{:?}", ctl.max_per_rung);
    assert!((ctl.slope - 0.2).abs() < 0.05, "slope {}", ctl.slope);
}

#[test]
fn single_mode_homogeneous_ratio_in_closed_form() {
    let m = 1;
    let l = 2.0 * PI;
    let sp = SpaceGrid::new(2, l, 16).unwrap();
    let grid = Grid::uniform(sp, 2.0, 40).unwrap();
    let solver = LinearSolver::new(m, &grid).unwrap();
    let amp = 0.7;
    // φ = amp·cos(3x₁): |ξ| = 3.
    let phi = transform_forward(&PhysicalField::from_fn(sp, |x| amp * (3.0 * x[0]).cos())).unwrap();
    let psi = SpectralField::zeros(sp);
    let v = solver.homogeneous(&phi, &psi).unwrap();
    let (s, q, gamma) = (4.0, 4.0, 1.0 / 3.0);
    let got = mixed_norm_physical(&v.to_physical().unwrap(), &grid.times, s, q) / sobolev_norm(&phi, gamma).unwrap();
    // ‖cos‖_{L⁴(T²)} = (3L²/8)^{1/4}, ‖cos‖_{L²} = L/√2.
    let v0: Vec<f64> = grid.times.iter().map(|&t| propagator(t, 3.0, m).unwrap().v0.re.abs()).collect();
    let lq = (3.0 * l * l / 8.0).powf(0.25);
    let want = time_norm(&v0, &grid.times, s) * amp * lq / (3f64.powf(gamma) * amp * l / 2f64.sqrt());
    assert!((got / want - 1.0).abs() <= 1e-6, "{got} vs {want}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dyadic_operator_is_linear(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0, j in -1i32..3) {
        let sp = SpaceGrid::new(2, 6.0, 16).unwrap();
        let grid = Grid::uniform(sp, 1.0, 8).unwrap();
        let op = DyadicOperator::new(&grid, FioKernelSpec::synthetic(1, 4.0, 0.2), Localization::Shell(j)).unwrap();
        let f = random_space_time(&grid, seed);
        let g = random_space_time(&grid, seed + 5000);
        let lhs = op.apply(&f.scale(a).axpy(b, &g)).unwrap();
        let rhs = op.apply(&f).unwrap().scale(a).axpy(b, &op.apply(&g).unwrap());
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12 * (1.0 + max_abs(&rhs)));
    }

    #[test]
    fn theta_partition_of_unity(x in -20.0f64..20.0) {
        let r = 2f64.powf(x);
        let s: f64 = (-30..=30).map(|j| theta(r / 2f64.powi(j))).sum();
        prop_assert!((s - 1.0).abs() <= 1e-12);
        prop_assert!((shell_weight(r, 0) - theta(r)).abs() <= 1e-15);
    }
}
