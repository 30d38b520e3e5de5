//! Property-based invariants over the quantitative primitives.

use covar_lab::backtest::{loss_la, loss_lm, lr_uc, HitSequence};
use covar_lab::copulas::{copula_cdf, CopulaFamily};
use covar_lab::covar::{covar_eq_gaussian, covar_leq_mixture};
use covar_lab::gsib::{bps_score, gsib_score, IndicatorPanel, WeightVector};
use covar_lab::mvmodels::BivariateLaw;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn copula_cdf_bounds(
        u in 1e-6..1.0f64,
        v in 1e-6..1.0f64,
        rho in -0.95..0.95f64,
    ) {
        let c = copula_cdf(&CopulaFamily::Normal { rho }, u, v);
        // Frechet bounds
        prop_assert!(c <= u.min(v) + 1e-12);
        prop_assert!(c >= (u + v - 1.0).max(0.0) - 1e-12);
    }

    #[test]
    fn copula_cdf_monotone_in_u(
        u in 0.01..0.98f64,
        v in 0.01..0.99f64,
        theta in 0.2..3.0f64,
        delta in 1.05..3.0f64,
    ) {
        let fam = CopulaFamily::Bb1 { theta, delta };
        prop_assert!(copula_cdf(&fam, u + 0.01, v) >= copula_cdf(&fam, u, v) - 1e-12);
    }

    #[test]
    fn covar_eq_deeper_than_var_when_correlated(
        rho in 0.05..0.95f64,
        alpha in 0.01..0.2f64,
    ) {
        use statrs::distribution::{ContinuousCDF, Normal};
        let q = Normal::standard().inverse_cdf(alpha);
        prop_assert!(covar_eq_gaussian(rho, alpha, alpha) < q);
    }

    #[test]
    fn covar_leq_monotone_in_beta(
        rho in -0.5..0.9f64,
        beta in 0.02..0.2f64,
    ) {
        let law = BivariateLaw::gaussian(rho);
        let lo = covar_leq_mixture(&law, 0.05, beta).unwrap();
        let hi = covar_leq_mixture(&law, 0.05, beta + 0.05).unwrap();
        prop_assert!(lo < hi);
    }

    #[test]
    fn lr_uc_nonnegative_and_zero_at_nominal(
        bits in proptest::collection::vec(0u8..2, 50..300),
    ) {
        let x: usize = bits.iter().filter(|&&b| b == 1).count();
        prop_assume!(x > 0);
        let h = HitSequence { bits: bits.clone(), nominal_p: 0.1 };
        prop_assert!(lr_uc(&h).statistic >= -1e-12);
        // statistic vanishes when the nominal rate equals the observed rate
        let observed = bits.iter().filter(|&&b| b == 1).count() as f64 / bits.len() as f64;
        prop_assume!(observed > 0.0 && observed < 1.0);
        let h2 = HitSequence { bits, nominal_p: observed };
        prop_assert!(lr_uc(&h2).statistic.abs() < 1e-9);
    }

    #[test]
    fn losses_are_nonnegative(
        data in proptest::collection::vec((-0.1..0.1f64, -0.15..-0.01f64), 20..200),
    ) {
        let y: Vec<f64> = data.iter().map(|(a, _)| *a).collect();
        let f: Vec<f64> = data.iter().map(|(_, b)| *b).collect();
        prop_assert!(loss_lm(&y, &f).unwrap() >= 0.0);
        prop_assert!(loss_la(&y, &f, 0.05).unwrap() >= 0.0);
    }

    #[test]
    fn bps_scores_sum_to_ten_thousand(
        values in proptest::collection::vec(0.1..1e6f64, 2..20),
    ) {
        let scores = bps_score(&values).unwrap();
        let total: f64 = scores.iter().sum();
        prop_assert!((total - 10_000.0).abs() < 1e-6 * 10_000.0);
    }

    #[test]
    fn gsib_score_scale_invariant(
        scale in 0.1..100.0f64,
        vals in proptest::collection::vec(1.0..500.0f64, 4),
    ) {
        let n = vals.len();
        let make = |s: f64| {
            let mut categories: [Vec<f64>; 5] = Default::default();
            for (c, cat) in categories.iter_mut().enumerate() {
                *cat = vals.iter().map(|v| s * v * (c + 1) as f64).collect();
            }
            IndicatorPanel {
                years: vec![2024; n],
                banks: (0..n).map(|i| format!("B{i}")).collect(),
                categories,
            }
        };
        let a = gsib_score(&make(1.0), &WeightVector::equal());
        let b = gsib_score(&make(scale), &WeightVector::equal());
        prop_assert_eq!(a, b);
    }
}
