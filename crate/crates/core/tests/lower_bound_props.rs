use proptest::prelude::*;
use sdflab::arith::{is_prime, legendre};
use sdflab::lower_bound::{build_lower_bound, square_correlation_routes, LowerBoundOptions, PrimeLocalWeight};

fn prime_1_mod_4() -> impl Strategy<Value = u64> {
    (5u64..600).prop_filter("prime 1 mod 4", |&p| p % 4 == 1 && is_prime(p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn local_weight_shape(p in prime_1_mod_4(), eps in 0.0f64..=1.0) {
        let w = PrimeLocalWeight::new(p, eps).unwrap();
        prop_assert_eq!(legendre(w.s, p), -1);
        let vals: Vec<f64> = (0..p).map(|x| w.value(x)).collect();
        prop_assert!(vals.iter().all(|&v| (-1e-15..=1.0 + 1e-15).contains(&v)));
        let mean = vals.iter().sum::<f64>() / p as f64;
        prop_assert!((mean - 1.0 / (1.0 + eps)).abs() <= 1e-12);
    }

    #[test]
    fn correlation_routes_agree(p in prime_1_mod_4(), eps in 0.0f64..=1.0) {
        let (direct, fourier) = square_correlation_routes(p, eps).unwrap();
        prop_assert!((direct - fourier).abs() <= 1e-12 * direct.abs().max(1e-300));
    }

    #[test]
    fn truncated_construction_is_periodic_with_exact_mean(
        t in 20u64..60,
        k in 1usize..3,
        frac in 0.2f64..1.0,
        reps in 1u64..4,
    ) {
        let opts = LowerBoundOptions { t: Some(t), c_big: 1.5, prime_count: Some(k), strict: false };
        let f = build_lower_bound(1, 1e-3, &opts).unwrap();
        let n: u64 = f.primes.iter().product();
        let x = n * reps + 7;
        let alpha = frac * (1.0 + f.epsilon).powi(-(f.m as i32));
        let f = build_lower_bound(x, alpha, &opts).unwrap();
        let ws = f.weights();
        let eps = f.epsilon;
        let mean_psi = (1..=n).map(|y| f.psi_n(y)).sum::<f64>() / n as f64;
        prop_assert!((mean_psi - (1.0 + eps).powi(-(f.m as i32))).abs() <= 1e-12);
        for y in (1..=n).step_by(((n / 50) as usize).max(1)) {
            let crt: f64 = ws.iter().map(|w| w.value(y % w.p)).product();
            prop_assert!((f.psi_n(y) - crt).abs() <= 1e-12);
            prop_assert!((f.psi_n(y) - f.psi_n(y + n)).abs() <= 1e-12);
        }
        let vals = f.values();
        prop_assert!(vals.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let mean = vals.iter().sum::<f64>() / x as f64;
        prop_assert!((mean - alpha).abs() <= 1e-12);
    }
}
