use proptest::prelude::*;
use robust_psd::specfun::{digamma, harmonic_partial, trigamma};
use robust_psd::spectrum::{quantile_select, sample_quantile_with, QuantileRule};
use robust_psd::taper::{edof, normalized_taper, EdofMode, TaperKind};
use robust_psd::theory::{
    bias_digamma, bias_harmonic, bias_limit, resolve_case, variance_limit, variance_theory, QuantileCase,
};

fn rule() -> impl Strategy<Value = QuantileRule> {
    prop_oneof![Just(QuantileRule::Linear), Just(QuantileRule::Parzen)]
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e6f64..1e6, 1..60)
}

proptest! {
    #[test]
    fn quantile_within_sample_range(v in sample(), q in 0.0f64..=1.0, r in rule()) {
        let x = sample_quantile_with(&v, q, r).unwrap();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= x && x <= hi);
    }

    #[test]
    fn quantile_monotone_in_q(v in sample(), a in 0.0f64..=1.0, b in 0.0f64..=1.0, r in rule()) {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let qa = sample_quantile_with(&v, a, r).unwrap();
        let qb = sample_quantile_with(&v, b, r).unwrap();
        prop_assert!(qa <= qb + 1e-9 * qb.abs().max(1.0));
    }

    #[test]
    fn quantile_permutation_invariant(v in sample(), q in 0.0f64..=1.0, r in rule()) {
        let mut rev = v.clone();
        rev.reverse();
        prop_assert_eq!(
            sample_quantile_with(&v, q, r).unwrap(),
            sample_quantile_with(&rev, q, r).unwrap()
        );
    }

    #[test]
    fn quantile_scale_equivariant(v in sample(), q in 0.0f64..=1.0, c in 0.01f64..100.0, r in rule()) {
        let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
        let a = c * sample_quantile_with(&v, q, r).unwrap();
        let b = sample_quantile_with(&scaled, q, r).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn select_agrees_with_sort(v in sample(), q in 0.0f64..=1.0, r in rule()) {
        let mut work = v.clone();
        prop_assert_eq!(quantile_select(&mut work, q, r), sample_quantile_with(&v, q, r).unwrap());
    }

    #[test]
    fn digamma_recurrence(x in 0.05f64..1e5) {
        let lhs = digamma(x + 1.0).unwrap();
        let rhs = digamma(x).unwrap() + 1.0 / x;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn trigamma_recurrence(x in 0.05f64..1e5) {
        let lhs = trigamma(x + 1.0).unwrap();
        let rhs = trigamma(x).unwrap() - 1.0 / (x * x);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn harmonic_partial_is_digamma_difference(a in 1u64..500, len in 0u64..500) {
        let b = a + len;
        let h = harmonic_partial(a, b).unwrap();
        let d = digamma((b + 1) as f64).unwrap() - digamma(a as f64).unwrap();
        prop_assert!((h - d).abs() < 1e-11);
    }

    #[test]
    fn resolved_counts_are_consistent(k in 1.0f64..500.0, q in 0.0f64..=1.0) {
        let s = resolve_case(k, q).unwrap();
        let kr = k.round() as u64;
        prop_assert_eq!(s.k_rounded(), kr);
        match s.case {
            QuantileCase::ExactMatch => prop_assert_eq!(s.alpha + s.beta + 1, kr),
            QuantileCase::Between => prop_assert_eq!(s.alpha + s.beta, kr),
        }
    }

    #[test]
    fn bias_factors_positive(k in 2.0f64..400.0, q in 0.01f64..0.99) {
        let s = resolve_case(k, q).unwrap();
        if s.alpha > 0 {
            prop_assert!(bias_harmonic(&s).unwrap() > 0.0);
        }
        prop_assert!(bias_digamma(k, q).unwrap() > 0.0);
        prop_assert!(bias_limit(q).unwrap() > 0.0);
    }

    #[test]
    fn variances_positive(k in 2.0f64..400.0, q in 0.01f64..0.99) {
        let s = resolve_case(k, q).unwrap();
        if s.alpha > 0 {
            prop_assert!(variance_theory(&s, 1.0).unwrap() > 0.0);
        }
        prop_assert!(variance_limit(k, q, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn edof_between_k_and_2k(k in 1usize..200, overlap in 0usize..200) {
        let taper = normalized_taper(TaperKind::Hann, 256).unwrap();
        let nu = edof(&taper, k, overlap, EdofMode::Squared).unwrap();
        prop_assert!(nu > 0.0 && nu <= 2.0 * k as f64 + 1e-9);
        if overlap <= 128 {
            // Hann lag correlations at ≥ half a window are at most 1/6
            prop_assert!(nu >= k as f64);
        }
    }
}
