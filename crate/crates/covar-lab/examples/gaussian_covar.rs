//! CoVaR under a bivariate Gaussian: the mixture route, the copula route and
//! the closed form agree, and the stress/median gap gives delta CoVaR.

use covar_lab::copulas::{CopulaFamily, CopulaFit};
use covar_lab::covar::{covar_eq_gaussian, covar_leq_copula, covar_leq_mixture, delta_covar};
use covar_lab::mvmodels::BivariateLaw;
use covar_lab::unidist::InnovationDist;

fn main() {
    let (alpha, beta) = (0.05, 0.05);
    println!(
        "{:>5} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "rho", "mixture", "copula", "covar_eq", "median", "delta"
    );
    for rho in [0.0, 0.2, 0.4, 0.6, 0.8] {
        let law = BivariateLaw::gaussian(rho);
        let stress = covar_leq_mixture(&law, alpha, beta).unwrap();
        let median = covar_leq_mixture(&law, 0.5, beta).unwrap();

        let fit = CopulaFit {
            family: CopulaFamily::Normal { rho },
            loglik: 0.0,
            aic: 0.0,
        };
        let via_copula = covar_leq_copula(&fit, &InnovationDist::normal(), alpha, beta).unwrap();
        let eq = covar_eq_gaussian(rho, alpha, beta);

        println!(
            "{rho:>5.2} {stress:>12.6} {via_copula:>12.6} {eq:>12.6} {median:>12.6} {:>12.6}",
            delta_covar(stress, median)
        );
    }
}
