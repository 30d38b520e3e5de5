//! CoVaR computation in standardized-innovation space.
//!
//! CoVaR<= solves P(y_sys <= c, y_j <= VaR_alpha) = alpha beta, either as a
//! rectangle probability under a bivariate mixture law or through the copula
//! form C(F_sys(c), alpha) = alpha beta. CoVaR= is the Gaussian closed form.
//! Results map to return units by the fitted AR-GARCH location and scale.

use thiserror::Error;

use crate::copulas::{copula_cdf, CopulaFit};
use crate::garch::GarchFit;
use crate::mvmodels::BivariateLaw;
use crate::numerics::root::brent;
use crate::unidist::InnovationDist;

#[derive(Debug, Error)]
pub enum CovarError {
    #[error("no sign change on the root bracket [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("invalid tail level {0}, need (0,1)")]
    BadLevel(f64),
}

const BRACKET: (f64, f64) = (-15.0, 15.0);
const WIDE_BRACKET: (f64, f64) = (-30.0, 30.0);
const ROOT_TOL: f64 = 1e-10;

fn check_level(p: f64) -> Result<(), CovarError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(CovarError::BadLevel(p))
    }
}

/// Solve f(c) = 0 on the standard bracket, widening once before giving up.
fn solve_bracketed<F: Fn(f64) -> f64>(f: F) -> Result<f64, CovarError> {
    for (lo, hi) in [BRACKET, WIDE_BRACKET] {
        if let Ok(root) = brent(&f, lo, hi, ROOT_TOL) {
            return Ok(root);
        }
    }
    Err(CovarError::BracketFailure { lo: WIDE_BRACKET.0, hi: WIDE_BRACKET.1 })
}

/// CoVaR<= under a bivariate mixture law: c with
/// rectangle_prob(c, q_alpha) = alpha beta, where q_alpha is the alpha
/// quantile of the bank margin (y component).
pub fn covar_leq_mixture(law: &BivariateLaw, alpha: f64, beta: f64) -> Result<f64, CovarError> {
    check_level(alpha)?;
    check_level(beta)?;
    let q_alpha = law.margin_y().quantile(alpha);
    let target = alpha * beta;
    solve_bracketed(|c| law.rectangle_prob(c, q_alpha) - target)
}

/// CoVaR<= through the copula form: u with C(u, alpha) = alpha beta, then
/// one quantile inversion of the system margin.
pub fn covar_leq_copula(
    fit: &CopulaFit,
    margin_sys: &InnovationDist,
    alpha: f64,
    beta: f64,
) -> Result<f64, CovarError> {
    check_level(alpha)?;
    check_level(beta)?;
    let target = alpha * beta;
    // root in u-space on (0,1); C(., alpha) is nondecreasing from 0 to alpha
    let f = |u: f64| copula_cdf(&fit.family, u.clamp(0.0, 1.0), alpha) - target;
    let u = brent(&f, 1e-12, 1.0 - 1e-12, 1e-14)
        .map_err(|_| CovarError::BracketFailure { lo: 0.0, hi: 1.0 })?;
    margin_sys
        .quantile(u)
        .map_err(|_| CovarError::BracketFailure { lo: BRACKET.0, hi: BRACKET.1 })
}

/// Gaussian CoVaR=: conditional law of the system given the bank sits exactly
/// at its VaR, c = rho q_alpha + sqrt(1 - rho^2) q_beta.
pub fn covar_eq_gaussian(rho: f64, alpha: f64, beta: f64) -> f64 {
    assert!(rho.abs() < 1.0);
    use statrs::distribution::ContinuousCDF;
    let n = statrs::distribution::Normal::standard();
    rho * n.inverse_cdf(alpha) + (1.0 - rho * rho).sqrt() * n.inverse_cdf(beta)
}

/// Map a standardized-space value into return units with the system fit.
pub fn to_return_space(c_standardized: f64, fit: &GarchFit, sigma_next: f64) -> f64 {
    fit.params.c + fit.params.ar() * fit.last_return + sigma_next * c_standardized
}

pub fn delta_covar(covar_stress: f64, covar_median: f64) -> f64 {
    covar_stress - covar_median
}

/// One day of risk measures for one (bank, model, alpha, beta) tuple.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RiskRecord {
    pub date: String,
    pub ticker: String,
    pub model: String,
    pub alpha: f64,
    pub beta: f64,
    pub var: f64,
    pub covar: f64,
    pub covar_median: f64,
    pub delta_covar: f64,
}

/// Per-day risk measure paths for one (bank, model, alpha, beta) tuple.
#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
pub struct RiskSeries {
    pub dates: Vec<String>,
    pub var_j: Vec<f64>,
    pub covar: Vec<f64>,
    pub covar_median: Vec<f64>,
    pub delta_covar: Vec<f64>,
}

impl RiskSeries {
    pub fn push(&mut self, date: String, var_j: f64, covar: f64, covar_median: f64) {
        self.dates.push(date);
        self.var_j.push(var_j);
        self.covar.push(covar);
        self.covar_median.push(covar_median);
        self.delta_covar.push(delta_covar(covar, covar_median));
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}
