use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use staggered_nystrom::assembly::{assemble_w_block, build_grid};
use staggered_nystrom::dense_solver::{cond2, lu_solve, vec_norm, ComplexMatrix};
use staggered_nystrom::experiments::{ExperimentKind, RunConfig};
use staggered_nystrom::geometry::{ParametricCurve, ScattererConfig, Vec2};
use staggered_nystrom::kernels::{adjoint_dlp_kernel, dlp_at, v1, v2};
use staggered_nystrom::potential::{evaluate_potential, DensitySolution};
use staggered_nystrom::spectral::{apply_dn, apply_hilbert, fourier_coeffs, sobolev_norm, FourierVector};
use staggered_nystrom::{Curve, Matrix};

fn ellipses() -> Vec<Curve> {
    RunConfig::two_ellipses(ExperimentKind::Convergence, 1.0 / 6.0).curves().unwrap()
}

fn random_matrix(n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_vector(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

fn svd_cond(a: &Matrix) -> f64 {
    let m = DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)]);
    let sv = m.singular_values();
    sv.max() / sv.min()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kernels_are_reciprocal(s in 0.0..1.0f64, t in 0.0..1.0f64, p in 0usize..2, q in 0usize..2) {
        let c = ellipses();
        prop_assume!(p != q || (s - t).abs() > 1e-6);
        prop_assert_eq!(v1(&c[p], &c[q], s, t, 1.0).unwrap(), v1(&c[q], &c[p], t, s, 1.0).unwrap());
        prop_assert_eq!(v2(&c[p], &c[q], s, t, 1.0).unwrap(), v2(&c[q], &c[p], t, s, 1.0).unwrap());
    }

    #[test]
    fn circle_blocks_are_circulant(n in 6usize..40, eps in -0.49..0.5f64, k in 0.2..4.0f64) {
        prop_assume!(eps.abs() > 0.01);
        let c = ParametricCurve::circle(Vec2::new(0.3, -0.2), 1.3).unwrap();
        let g = build_grid(n, eps).unwrap();
        let w = assemble_w_block(&c, &c, &g, &g, k).unwrap();
        let scale = w.max_abs();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((w[(i, j)] - w[((i + 1) % n, (j + 1) % n)]).norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn eps_and_eps_plus_integer_agree(n in 6usize..30, eps in -0.49..0.5f64, m in -3i32..4) {
        prop_assume!(eps.abs() > 0.01);
        let c = ellipses();
        let a = build_grid(n, eps).unwrap();
        let b = build_grid(n, eps + m as f64).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(
            assemble_w_block(&c[0], &c[1], &a, &a, 1.0).unwrap(),
            assemble_w_block(&c[0], &c[1], &b, &b, 1.0).unwrap()
        );
    }

    #[test]
    fn potential_superposes_over_curves(seed in any::<u64>()) {
        let c = ellipses();
        let both = ScattererConfig::uniform(c.clone(), 1.0, 12, 1.0 / 6.0).unwrap();
        let x = random_vector(24, seed);
        let grids = vec![build_grid(12, 1.0 / 6.0).unwrap(); 2];
        let sol = DensitySolution::new(both, grids.clone(), &x).unwrap();
        let z = Vec2::new(-4.0, -4.0);
        let mut parts = Complex64::new(0.0, 0.0);
        for p in 0..2 {
            let one = ScattererConfig::uniform(vec![c[p].clone()], 1.0, 12, 1.0 / 6.0).unwrap();
            let s = DensitySolution::new(one, vec![grids[p]], &x[12 * p..12 * (p + 1)]).unwrap();
            parts += evaluate_potential(&s, z).unwrap();
        }
        let whole = evaluate_potential(&sol, z).unwrap();
        prop_assert!((whole - parts).norm() <= 1e-15 * whole.norm().max(1.0));
    }

    #[test]
    fn parseval_for_band_limited_samples(seed in any::<u64>(), m in 4usize..64) {
        let band = (m - 1) / 2;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coef: Vec<(i64, Complex64)> = (-(band as i64)..=band as i64)
            .map(|k| (k, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
            .collect();
        let samples: Vec<Complex64> = (0..m)
            .map(|j| {
                let t = j as f64 / m as f64;
                coef.iter().map(|&(k, c)| c * Complex64::new(0.0, std::f64::consts::TAU * k as f64 * t).exp()).sum()
            })
            .collect();
        let u = fourier_coeffs(&samples).unwrap();
        let rms = (samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / m as f64).sqrt();
        prop_assert!((sobolev_norm(&u, 0.0) - rms).abs() <= 1e-12 * rms.max(1.0));
        let h2 = apply_hilbert(&apply_hilbert(&u));
        for (k, c) in u.modes() {
            let want = if k == 0 { Complex64::new(0.0, 0.0) } else { c };
            prop_assert_eq!(h2.get(k), want);
        }
        let back = apply_dn(&apply_dn(&u, 1), -1);
        for (k, c) in u.modes() {
            let want = if k == 0 { Complex64::new(0.0, 0.0) } else { c };
            prop_assert!((back.get(k) - want).norm() <= 1e-14);
        }
    }

    #[test]
    fn cond2_invariants(seed in any::<u64>(), n in 2usize..12, re in -5.0..5.0f64, im in -5.0..5.0f64) {
        prop_assume!(re.abs() + im.abs() > 0.1);
        let a = random_matrix(n, seed);
        let k = cond2(&a).unwrap();
        prop_assert!(k.value >= 1.0);
        let ks = cond2(&a.scale(Complex64::new(re, im))).unwrap();
        prop_assert!((k.value - ks.value).abs() <= 1e-4 * k.value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn adjoint_kernel_is_a_reflected_double_layer(s in 0.0..1.0f64, t in 0.0..1.0f64, p in 0usize..2, q in 0usize..2, k in 0.1..5.0f64) {
        prop_assume!(p != q || (s - t).abs() > 1e-4);
        let c = ellipses();
        let (x, nx) = c[p].frame(s);
        let y = c[q].point(t);
        // normal moved to the observation point, difference vector reversed
        let reflected = -dlp_at(y, x, nx, k).unwrap();
        let adj = adjoint_dlp_kernel(&c[p], s, &c[q], t, k).unwrap();
        prop_assert!((adj - reflected).norm() <= 1e-15 * adj.norm().max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lu_residual_bound(seed in any::<u64>(), size in prop::sample::select(vec![8usize, 64, 256])) {
        let a = random_matrix(size, seed);
        let b = random_vector(size, seed);
        let x = lu_solve(&a, &b).unwrap();
        let r: Vec<Complex64> = a.matvec(&x).unwrap().iter().zip(&b).map(|(p, q)| p - q).collect();
        let rel = vec_norm(&r) / (a.frobenius_norm() * vec_norm(&x) + vec_norm(&b));
        prop_assert!(rel <= 1e-12, "relative residual {rel:e}");
    }
}

#[test]
fn manufactured_solution_is_recovered() {
    let a = random_matrix(100, 2024);
    let x_star = random_vector(100, 7);
    let b = a.matvec(&x_star).unwrap();
    let x = lu_solve(&a, &b).unwrap();
    let err: Vec<Complex64> = x.iter().zip(&x_star).map(|(p, q)| p - q).collect();
    assert!(vec_norm(&err) <= 1e-10 * vec_norm(&x_star));
}

#[test]
fn cond2_matches_svd() {
    for (n, seed) in [(5usize, 1u64), (20, 2), (60, 3), (120, 4)] {
        let a = random_matrix(n, seed);
        let est = cond2(&a).unwrap();
        let exact = svd_cond(&a);
        assert!(est.converged);
        assert!((est.value - exact).abs() <= 5e-3 * exact, "n={n}: {} vs {exact}", est.value);
    }
}

#[test]
fn cond2_matches_svd_on_assembled_system() {
    let cfg = RunConfig::two_ellipses(ExperimentKind::Cond, 1.0 / 6.0);
    let sc = cfg.scatterer(40, cfg.eps).unwrap();
    let (blocks, _) = staggered_nystrom::assembly::assemble_blocks(&sc).unwrap();
    let w = ComplexMatrix::from_blocks(&blocks).unwrap();
    let exact = svd_cond(&w);
    let est = cond2(&w).unwrap().value;
    assert!((est - exact).abs() <= 5e-3 * exact, "{est} vs {exact}");
}

#[test]
fn fourier_window_layout() {
    let v = FourierVector::<f64>::zeros(7);
    assert_eq!(v.modes().map(|(m, _)| m).collect::<Vec<_>>(), vec![-3, -2, -1, 0, 1, 2, 3]);
}
