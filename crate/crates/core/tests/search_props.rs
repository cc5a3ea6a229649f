use bidsynth::search::{
    discovery_orderings, search_cons_bound, search_robust_check, search_rob_bound, synthesize_search, SearchRandParams,
    SignedPrediction,
};
use proptest::prelude::*;

fn signed_prediction(max_k: usize, max_abs: f64) -> impl Strategy<Value = SignedPrediction> {
    (1..=max_k)
        .prop_flat_map(move |k| {
            (
                prop::collection::vec((1.0..max_abs, any::<bool>()), k),
                prop::collection::vec(0.05f64..1.0, k),
            )
        })
        .prop_filter_map("distinct positions", |(pos, w)| {
            let total: f64 = w.iter().sum();
            let pairs: Vec<(f64, f64)> =
                pos.iter().zip(&w).map(|(&(m, right), &p)| (if right { m } else { -m }, p / total)).collect();
            SignedPrediction::from_pairs(&pairs).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn synthesized_search_is_robust(mu in signed_prediction(3, 50.0), r in 9.0f64..15.0) {
        let s = synthesize_search(&mu, r).unwrap();
        prop_assert!(search_robust_check(&s.strategy, r));
        let terms = s.strategy.terms(s.strategy.magnitudes().len() + 200);
        prop_assert_eq!(terms.len(), s.strategy.magnitudes().len() + 200);
        let ext = &terms[s.strategy.magnitudes().len() - 1..];
        prop_assert!(ext.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(terms.windows(3).all(|w| w[2] >= w[0] * (1.0 - 1e-9)));
        prop_assert!(s.consistency >= 1.0 - 1e-12);
        prop_assert!(s.expected_cost <= s.lp_value * (1.0 + 1e-7));
    }

    #[test]
    fn larger_budget_never_hurts(mu in signed_prediction(2, 30.0), r in 9.0f64..13.0, dr in 0.0f64..3.0) {
        let a = synthesize_search(&mu, r).unwrap();
        let b = synthesize_search(&mu, r + dr).unwrap();
        prop_assert!(b.consistency <= a.consistency * (1.0 + 1e-7));
    }
}

proptest! {
    #[test]
    fn orderings_are_realizable(mu in signed_prediction(7, 100.0)) {
        let orders = discovery_orderings(&mu);
        prop_assert!(orders.len() <= 1 << mu.len());
        for order in &orders {
            let mut seen = vec![false; mu.len()];
            for &i in order {
                let p = mu.points()[i].position;
                // Every nearer point on the same side is already found.
                let frontier = mu.points().iter().enumerate().all(|(j, q)| {
                    seen[j] || q.position.signum() != p.signum() || q.position.abs() >= p.abs()
                });
                prop_assert!(frontier);
                seen[i] = true;
            }
            prop_assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn bounds_coincide_without_randomness_budget(a in 1.0001f64..100.0) {
        let p = SearchRandParams::new(0.0, a).unwrap();
        let expected = 1.0 + (1.0 + a) / a.ln();
        prop_assert!((search_cons_bound(p) - expected).abs() <= 1e-12 * expected);
        prop_assert!((search_rob_bound(p) - expected).abs() <= 1e-12 * expected);
    }
}
