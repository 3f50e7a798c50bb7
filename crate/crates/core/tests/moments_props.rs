use hybrid_zeta::arith::arithmetic_factor_a;
use hybrid_zeta::hybrid::Part;
use hybrid_zeta::moments::{
    chebyshev_moment_bound, dirichlet_product, integrate_moment, mv_diagonal_bruteforce, mv_diagonal_raw,
    pairwise_sum, power_mean, prediction_p, prediction_z, random_sparse_coefficients, st_error_budget,
    st_identity_check, st_kernel, tail_measures, GridSpec, Integrand,
};
use hybrid_zeta::special::rmt_factor_g;
use hybrid_zeta::zeta::find_zeros;
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn prediction_product_identity() {
    // P-prediction × Z-prediction = a(k) g(k) (log T)^{k^2}
    for k in [1i64, 2] {
        for (x, t) in [(10.0, 1e5), (100.0, 1e8)] {
            let kf = k as f64;
            let lhs = prediction_p(kf, x).unwrap() * prediction_z(k, x, t).unwrap();
            let a = arithmetic_factor_a(kf, 1_000_000, 1e-16).unwrap().value;
            let rhs = a * rmt_factor_g(k).unwrap() * f64::ln(t).powf(kf * kf);
            assert!((lhs / rhs - 1.0).abs() < 1e-12, "k={k} X={x}: {lhs} vs {rhs}");
        }
    }
    assert!(prediction_z(1, 1.0, 1e5).is_err());
}

#[test]
fn chebyshev_moments_against_diagonal_bound() {
    let g = GridSpec::new(1e5, 1.2e5, 0.02).unwrap();
    let m1 = chebyshev_moment_bound(1, 30.0, &g).unwrap();
    assert!((m1.empirical_moment / m1.bound - 1.0).abs() < 0.05, "{m1:?}");
    for m in 2..=3 {
        let r = chebyshev_moment_bound(m, 30.0, &g).unwrap();
        assert!(r.empirical_moment <= 1.05 * r.bound + 3.0 * r.std_error, "{r:?}");
    }
    assert!(chebyshev_moment_bound(7, 30.0, &g).is_err());
}

#[test]
fn product_moment_matches_zeta_moment() {
    let g = GridSpec::new(1e4, 1.05e4, 0.02).unwrap();
    let z = integrate_moment(&Integrand::Zeta, 2.0, &g, true).unwrap();
    let pz = integrate_moment(&Integrand::PZProduct { x: 10.0 }, 2.0, &g, true).unwrap();
    let r = pz.value / z.value;
    assert!((0.5..=2.0).contains(&r), "{r}");
}

#[test]
fn exclusion_mask_drops_points() {
    let g = GridSpec::new(1000.0, 1010.0, 0.01).unwrap();
    let full = integrate_moment(&Integrand::Constant, 2.0, &g, false).unwrap();
    let cut = integrate_moment(&Integrand::Constant, 2.0, &g.clone().excluding(vec![(1002.0, 1003.0)]), false).unwrap();
    assert_eq!(full.n_points, 1000);
    assert_eq!(cut.n_points, 900);
}

#[test]
fn st_kernel_limit_and_budget() {
    let lx = 1000f64.ln();
    assert_eq!(st_kernel(0.0, lx), Complex64::new(0.0, lx));
    for u in [1e-12, 1e-9, 1e-6] {
        assert!((st_kernel(u, lx) - Complex64::new(0.0, lx)).norm() < 1e-4);
    }
    // (1 - X^{-iu})/u directly
    for u in [0.01, 0.5, 3.0, -2.0] {
        let direct = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -u * lx)) / u;
        assert!((st_kernel(u, lx) - direct).norm() < 1e-12);
    }
    let mut prev = f64::INFINITY;
    for y in [5.0, 10.0, 25.0, 50.0, 200.0] {
        let b = st_error_budget(1000.0, y, 1e4);
        assert!(b < prev);
        prev = b;
    }
}

#[test]
fn st_identity_settles_for_long_windows() {
    let zeros = find_zeros(0.0, 4200.0).unwrap();
    let r = st_identity_check(3000.0, 100.0, 1000.0, &zeros).unwrap();
    assert!(r.diff < 0.02, "{r:?}");
    assert!(st_identity_check(3000.0, 100.0, 2000.0, &zeros).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn power_mean_nondecreasing(v in prop::collection::vec(-10.0f64..10.0, 1..200), p in 0.5f64..4.0, dp in 0.0f64..4.0) {
        let lo = power_mean(&v, p);
        let hi = power_mean(&v, p + dp);
        prop_assert!(lo <= hi * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn pairwise_sum_accurate(v in prop::collection::vec(-1e6f64..1e6, 0..5000)) {
        let naive: f64 = v.iter().sum();
        let scale: f64 = v.iter().map(|x| x.abs()).sum::<f64>() + 1.0;
        prop_assert!((pairwise_sum(&v) - naive).abs() <= 1e-10 * scale);
        let ints: Vec<f64> = v.iter().map(|x| x.round()).collect();
        prop_assert_eq!(pairwise_sum(&ints), ints.iter().sum::<f64>());
    }

    #[test]
    fn tail_fraction_nonincreasing(x in 2.0f64..200.0, t0 in 1e3f64..1e6, vs in prop::collection::vec(0.0f64..4.0, 1..8)) {
        let mut vs = vs;
        vs.sort_by(f64::total_cmp);
        let g = GridSpec::new(t0, t0 + 50.0, 0.05).unwrap();
        let re = tail_measures(&vs, x, Part::Real, &g).unwrap();
        let full = tail_measures(&vs, x, Part::Full, &g).unwrap();
        for w in re.windows(2) {
            prop_assert!(w[1].fraction <= w[0].fraction);
        }
        for (a, b) in re.iter().zip(&full) {
            prop_assert!(a.fraction <= b.fraction);
            prop_assert!((0.0..=1.0).contains(&b.fraction));
        }
    }

    #[test]
    fn diagonal_matches_brute_force(len in 1usize..300, n_max in 1u64..2000, seed in any::<u64>()) {
        let c = random_sparse_coefficients(len, n_max, seed);
        prop_assert_eq!(c.len(), len.min(n_max as usize));
        let (fast, slow) = (mv_diagonal_raw(&c), mv_diagonal_bruteforce(&c));
        prop_assert!((fast - slow).abs() <= 1e-12 * (1.0 + slow));
    }

    #[test]
    fn coprime_blocks_factor(a2 in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..8),
                             a3 in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..8)) {
        // supports on powers of 2 and powers of 3
        let a: Vec<(u64, Complex64)> = a2.iter().enumerate().map(|(i, &(r, im))| (1u64 << i, Complex64::new(r, im))).collect();
        let b: Vec<(u64, Complex64)> = a3.iter().enumerate().map(|(i, &(r, im))| (3u64.pow(i as u32), Complex64::new(r, im))).collect();
        let ab = dirichlet_product(&a, &b);
        prop_assert_eq!(ab.len(), a.len() * b.len());
        let lhs = mv_diagonal_raw(&ab);
        let rhs = mv_diagonal_raw(&a) * mv_diagonal_raw(&b);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }
}
