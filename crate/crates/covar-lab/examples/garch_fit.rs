//! Simulate an AR-GJR-GARCH path, fit it by QMLE and by skew-t MLE, and
//! produce a one-step VaR forecast.

use covar_lab::garch::{fit_gjr, simulate_gjr, GjrParams, Likelihood, SkewTShape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let truth = GjrParams {
        c: 0.0002,
        a: Some(0.05),
        alpha0: 2e-6,
        alpha1: 0.04,
        gamma: 0.35,
        beta1: 0.90,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (path, _) = simulate_gjr(&truth, Some(SkewTShape { nu: 8.0, xi: 0.9 }), 3000, &mut rng);

    for (name, lik) in [("qmle", Likelihood::Normal), ("skew-t", Likelihood::SkewT)] {
        let fit = fit_gjr(&path, lik).expect("fit failed");
        let p = &fit.params;
        println!("{name}:");
        println!(
            "  c={:+.6}  a={}  alpha0={:.3e}  alpha1={:.4}  gamma={:+.4}  beta1={:.4}",
            p.c,
            p.a.map(|a| format!("{a:+.4}")).unwrap_or_else(|| "dropped".into()),
            p.alpha0,
            p.alpha1,
            p.gamma,
            p.beta1
        );
        if let Some(s) = &fit.shape {
            println!("  nu={:.3}  xi={:.3}", s.nu, s.xi);
        }
        println!("  loglik={:.2}  persistence={:.4}", fit.loglik, p.persistence());

        let sigma_next = fit.forecast_sigma();
        let dist = match &fit.shape {
            Some(s) => covar_lab::unidist::InnovationDist::skew_t(s.nu, s.xi),
            None => covar_lab::unidist::InnovationDist::normal(),
        };
        let q = dist.quantile(0.05).unwrap();
        println!(
            "  sigma forecast={:.5}  5% VaR forecast={:+.5}",
            sigma_next,
            fit.var_forecast(sigma_next, q)
        );
    }
}
