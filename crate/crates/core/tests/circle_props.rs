use num::complex::Complex64;
use num::integer::gcd;
use num::rational::BigRational;
use num::{BigInt, Signed};
use proptest::prelude::*;
use sdflab::arith::is_prime;
use sdflab::circle::{bump_eval, gauss_sum, rational_approx, SquareWeight};
use std::f64::consts::TAU;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rational_approx_satisfies_dirichlet(theta in -3.0f64..3.0, qcap in 1u64..1_000_000) {
        let (a, q) = rational_approx(theta, qcap).unwrap();
        prop_assert!(q >= 1 && q <= qcap);
        prop_assert_eq!(gcd(a, q), 1);
        let t = BigRational::from_float(theta.rem_euclid(1.0)).unwrap();
        let diff = (t - BigRational::new(BigInt::from(a), BigInt::from(q))).abs();
        prop_assert!(diff <= BigRational::new(BigInt::from(1), BigInt::from(q as u128 * qcap as u128)));
    }

    #[test]
    fn gauss_sums_have_modulus_sqrt_p(p in 3u64..400, a in 1i64..10_000) {
        prop_assume!(is_prime(p) && a % p as i64 != 0);
        let g = gauss_sum(a, p).unwrap();
        prop_assert!((g.norm() - (p as f64).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn bump_stays_in_range(x in -2.0f64..2.0) {
        let w = bump_eval(x);
        prop_assert!((0.0..=1.0).contains(&w));
        if x.abs() >= 1.0 {
            prop_assert_eq!(w, 0.0);
        }
        if x.abs() <= 0.5 {
            prop_assert!(w >= 0.5);
        }
    }

    #[test]
    fn square_weight_lives_on_squares(x in 1u64..5000, n in -6000i64..6000) {
        let g = SquareWeight::new(x).unwrap();
        let m = n.unsigned_abs();
        let t = (m as f64).sqrt().round() as u64;
        if t >= 1 && t * t == m && m < x {
            let expected = t as f64 * bump_eval(m as f64 / x as f64);
            prop_assert!((g.eval(n) - expected).abs() <= 1e-12 * expected.max(1.0));
        } else {
            prop_assert_eq!(g.eval(n), 0.0);
        }
    }

    #[test]
    fn spectrum_is_the_transform_of_the_weight(x in 2u64..3000, theta in -1.0f64..1.0) {
        let g = SquareWeight::new(x).unwrap();
        let direct: Complex64 = (-(x as i64)..=x as i64)
            .map(|n| Complex64::from_polar(g.eval(n), -TAU * (theta * n as f64).rem_euclid(1.0)))
            .sum();
        let s = g.spectrum(theta);
        prop_assert!((direct.re - s).abs() <= 1e-9 * (x as f64));
        prop_assert!(direct.im.abs() <= 1e-9 * (x as f64));
    }
}
