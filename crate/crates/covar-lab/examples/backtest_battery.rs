//! Exercise the full backtest battery on a correctly specified forecaster
//! and on one that understates risk.

use covar_lab::backtest::{
    dq_test, hit_sequence, ks_pvalue, loss_la, loss_lm, lr_cc, lr_ind, lr_uc,
};
use covar_lab::unidist::InnovationDist;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() {
    let alpha = 0.05;
    let n = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();

    let dist = InnovationDist::normal();
    let q = dist.quantile(alpha).unwrap();
    let good: Vec<f64> = vec![q; n];
    let bad: Vec<f64> = vec![q * 0.6; n];

    for (name, forecasts) in [("calibrated", &good), ("too shallow", &bad)] {
        let hits = hit_sequence(&y, forecasts, alpha).unwrap();
        println!("{name}: {} violations out of {} ({:.2}% nominal {:.0}%)",
            hits.violations(), hits.n(), 100.0 * hits.coverage(), 100.0 * alpha);
        for (test, r) in [
            ("LR_uc", lr_uc(&hits)),
            ("LR_ind", lr_ind(&hits)),
            ("LR_cc", lr_cc(&hits)),
            ("DQ(4)", dq_test(&hits, forecasts, 4)),
        ] {
            println!("  {test:<7} stat={:8.4}  df={}  p={:.4}", r.statistic, r.df, r.p_value);
        }
        println!("  LM loss {:.5}  LA loss {:.5}",
            loss_lm(&y, forecasts).unwrap(), loss_la(&y, forecasts, alpha).unwrap());
        println!();
    }

    println!("KS p-value of the sample against N(0,1): {:.4}", ks_pvalue(&y, &dist));
}
