use num::complex::Complex64;
use proptest::prelude::*;
use sdflab::fourier::{apply_multiplier, derivative, forward, GroupFunction, ModulusSet, MultiplierSpec};

const POOL: &[&[u64]] = &[&[5], &[2, 3], &[4, 3], &[2, 3, 5], &[3, 4, 5], &[2, 9, 5], &[2, 3, 5, 7]];
const TOL: f64 = 1e-10;

fn group_function() -> impl Strategy<Value = GroupFunction> {
    (0..POOL.len()).prop_flat_map(|k| {
        let q = ModulusSet::new(POOL[k].to_vec()).unwrap();
        let n = q.product() as usize;
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(move |v| {
            GroupFunction::new(q.clone(), v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
        })
    })
}

fn with_mask() -> impl Strategy<Value = (GroupFunction, u32)> {
    group_function().prop_flat_map(|f| {
        let k = f.moduli().len();
        (Just(f), 0u32..(1 << k))
    })
}

fn add(acc: &mut [Complex64], g: &GroupFunction, sign: f64) {
    for (a, b) in acc.iter_mut().zip(g.values()) {
        *a += b * sign;
    }
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_is_alternating_sum_of_averages((f, mask) in with_mask()) {
        let q = f.moduli().clone();
        let s = q.moduli_in(mask);
        let l = apply_multiplier(&MultiplierSpec::Laplacian(s), &f).unwrap();
        let mut acc = vec![Complex64::new(0.0, 0.0); f.len()];
        for t in 0..(1u32 << q.len()) {
            if t & !mask != 0 {
                continue;
            }
            let e = apply_multiplier(&MultiplierSpec::Average(q.moduli_in(t)), &f).unwrap();
            add(&mut acc, &e, if t.count_ones() % 2 == 0 { 1.0 } else { -1.0 });
        }
        prop_assert!(max_diff(l.values(), &acc) < TOL);
    }

    #[test]
    fn average_is_conditional_mean((f, mask) in with_mask()) {
        let q = f.moduli().clone();
        let e = apply_multiplier(&MultiplierSpec::Average(q.moduli_in(mask)), &f).unwrap();
        let m = q.moduli();
        let free: Vec<usize> = (0..m.len()).filter(|k| mask >> k & 1 == 0).collect();
        for i in 0..f.len() {
            let ci = q.coords_of_index(i);
            let (mut sum, mut count) = (Complex64::new(0.0, 0.0), 0usize);
            for j in 0..f.len() {
                let cj = q.coords_of_index(j);
                if free.iter().all(|&k| ci[k] == cj[k]) {
                    sum += f.values()[j];
                    count += 1;
                }
            }
            prop_assert!((e.values()[i] - sum / count as f64).norm() < TOL);
        }
    }

    #[test]
    fn derivative_shifts_level((f, mask) in with_mask(), d in 0i64..4, seed in 0u64..1000) {
        let q = f.moduli().clone();
        let s = q.moduli_in(mask);
        let point: Vec<u64> = s.iter().enumerate().map(|(i, &m)| (seed / (i as u64 + 1)) % m).collect();
        let lhs = derivative(&s, &point, &apply_multiplier(&MultiplierSpec::Level(d), &f).unwrap()).unwrap();
        let df = derivative(&s, &point, &f).unwrap();
        let rhs = apply_multiplier(&MultiplierSpec::Level(d - s.len() as i64), &df).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < TOL);
    }

    #[test]
    fn parseval(f in group_function()) {
        let lhs = f.norm2().powi(2);
        let rhs = forward(&f).energy();
        prop_assert!((lhs - rhs).abs() < TOL * lhs.max(1.0));
    }

    #[test]
    fn levels_sum_to_identity(f in group_function()) {
        let mut acc = vec![Complex64::new(0.0, 0.0); f.len()];
        for d in 0..=f.moduli().len() as i64 {
            add(&mut acc, &apply_multiplier(&MultiplierSpec::Level(d), &f).unwrap(), 1.0);
        }
        prop_assert!(max_diff(f.values(), &acc) < TOL);
    }

    #[test]
    fn noise_is_weighted_level_sum(f in group_function(), rho in 0.0f64..1.0) {
        let t = apply_multiplier(&MultiplierSpec::Noise(rho), &f).unwrap();
        let mut acc = vec![Complex64::new(0.0, 0.0); f.len()];
        for d in 0..=f.moduli().len() as i64 {
            add(&mut acc, &apply_multiplier(&MultiplierSpec::Level(d), &f).unwrap(), rho.powi(d as i32));
        }
        prop_assert!(max_diff(t.values(), &acc) < TOL);
    }
}
