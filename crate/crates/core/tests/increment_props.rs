use num::rational::BigRational;
use num::BigInt;
use proptest::prelude::*;
use sdflab::increment::{
    extract_increment, parseval_sides, weighted_square_count, BalancedFunction, IncrementClause, IncrementWitness,
};
use sdflab::sets::IntegerSet;

fn is_square(n: u64) -> bool {
    let r = (n as f64).sqrt() as u64;
    (r.saturating_sub(1)..=r + 1).any(|s| s * s == n)
}

fn set_in(x_lo: u64, x_hi: u64, max_len: usize) -> impl Strategy<Value = (IntegerSet, u64)> {
    (x_lo..x_hi).prop_flat_map(move |x| {
        prop::collection::btree_set(1..=x, 1..max_len.min(x as usize).max(2))
            .prop_map(move |s| (IntegerSet::new(s.into_iter().collect(), x).unwrap(), x))
    })
}

fn recount(a: &IntegerSet, x: u64, w: &IncrementWitness) -> bool {
    let p = &w.progression;
    if !is_square(p.step) || p.start < 1 || p.length == 0 || p.start + p.step * (p.length - 1) > x {
        return false;
    }
    let hits = (0..p.length).filter(|i| a.contains(p.start + i * p.step)).count() as u64;
    hits * w.density_den == w.density_num * p.length
        && BigRational::new(BigInt::from(hits), BigInt::from(p.length)) >= BigRational::from_float(w.claimed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn balanced_function_sums_to_zero((a, x) in set_in(1, 2000, 400)) {
        let f = BalancedFunction::new(&a, x).unwrap();
        prop_assert_eq!(f.total(), num::rational::Ratio::from_integer(0));
    }

    #[test]
    fn coefficients_bounded_by_twice_alpha_x((a, x) in set_in(2, 1500, 200), theta in 0.0f64..1.0) {
        let f = BalancedFunction::new(&a, x).unwrap();
        prop_assume!(f.alpha_f64() <= 0.5);
        prop_assert!(f.fourier(theta).norm() <= 2.0 * f.alpha_f64() * x as f64 * (1.0 + 1e-12));
    }

    #[test]
    fn zero_count_iff_square_difference_free((a, x) in set_in(4, 800, 30)) {
        let count = weighted_square_count(&a, x).unwrap();
        let v = a.elements();
        let mut near = false;
        let mut any = false;
        for (i, &p) in v.iter().enumerate() {
            for &q in &v[..i] {
                if is_square(p - q) {
                    any = true;
                    near |= p - q <= x / 2;
                }
            }
        }
        if !any {
            prop_assert_eq!(count, 0.0);
        }
        if near {
            prop_assert!(count > 0.0);
        }
    }

    #[test]
    fn class_sum_orthogonality((a, x) in set_in(1, 1000, 200), q in 1u64..30, xi in -0.01f64..0.01) {
        let f = BalancedFunction::new(&a, x).unwrap();
        let (l, r) = parseval_sides(&f, q, xi);
        prop_assert!((l - r).abs() <= 1e-9 * r.max(1.0));
    }

    #[test]
    fn extracted_witnesses_recount_exactly((a, x) in set_in(50, 1500, 600), q in 1u64..6, k in -5i64..=5) {
        let f = BalancedFunction::new(&a, x).unwrap();
        let xi = k as f64 / (40.0 * x as f64);
        let alpha = f.alpha_f64();
        prop_assume!(alpha > 0.0 && alpha < 1.0);
        let coeffs: Vec<f64> = (0..q).map(|b| f.fourier(b as f64 / q as f64 + xi).norm()).collect();
        let single = coeffs.iter().cloned().fold(0.0, f64::max) / (alpha * x as f64);
        let mass = coeffs.iter().map(|c| c * c).sum::<f64>() / (alpha * alpha * (x * x) as f64);
        for (clause, eta) in [(IncrementClause::Single, single), (IncrementClause::L2, mass)] {
            let eta = (eta * 0.999).min(0.999);
            if eta <= 1e-6 {
                continue;
            }
            if let Ok(w) = extract_increment(&f, q, xi, eta, clause) {
                prop_assert!(recount(&a, x, &w), "witness {:?}", w);
            }
        }
    }
}
