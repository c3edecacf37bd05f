use proptest::prelude::*;
use sdflab::sets::{find_square_difference, greedy_sequence, is_square_difference_free, max_sdf_exact, IntegerSet};

fn is_square(n: u64) -> bool {
    let r = (n as f64).sqrt() as u64;
    (r.saturating_sub(1)..=r + 1).any(|s| s * s == n)
}

fn has_square_difference(v: &[u64]) -> bool {
    v.iter().enumerate().any(|(i, &a)| v[..i].iter().any(|&b| a != b && is_square(a.abs_diff(b))))
}

fn small_set() -> impl Strategy<Value = IntegerSet> {
    (1u64..300).prop_flat_map(|x| {
        prop::collection::btree_set(1..=x, 0..40)
            .prop_map(move |s| IntegerSet::new(s.into_iter().collect(), x).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_prefix_is_stable(l1 in 0u64..3000, extra in 0u64..3000) {
        let long = greedy_sequence(l1 + extra);
        let short = greedy_sequence(l1);
        let cut = long.truncated(l1);
        prop_assert_eq!(cut.elements(), short.elements());
    }

    #[test]
    fn detection_matches_pairwise_scan(a in small_set()) {
        let bad = has_square_difference(a.elements());
        prop_assert_eq!(is_square_difference_free(&a), !bad);
        if let Some(w) = find_square_difference(&a) {
            prop_assert!(a.contains(w.a1) && a.contains(w.a2));
            prop_assert_eq!(w.a1 - w.a2, w.n * w.n);
            prop_assert!(w.n >= 1);
        }
    }

    #[test]
    fn exact_optimum_is_monotone_and_witnessed(x in 1u64..60) {
        let s = max_sdf_exact(x).unwrap();
        let t = max_sdf_exact(x + 1).unwrap();
        prop_assert!(s.size <= t.size && t.size <= s.size + 1);
        prop_assert!(s.size as u64 <= x);
        let w = s.witness.elements();
        prop_assert_eq!(w.len(), s.size);
        prop_assert!(w.iter().all(|&a| (1..=x).contains(&a)));
        prop_assert!(!has_square_difference(w));
    }
}
