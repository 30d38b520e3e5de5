//! AR(1)-GJR-GARCH(1,1) estimation, filtering, and one-step VaR forecasts.
//!
//! The conditional mean is y_t = a y_{t-1} + sigma_t eps_t + c and the
//! variance recursion is
//!
//! sigma_t^2 = alpha0
//!     + alpha1 (|sigma_{t-1} eps_{t-1}| - gamma sigma_{t-1} eps_{t-1})^2
//!     + beta1 sigma_{t-1}^2
//!
//! so negative shocks raise variance more than positive ones when gamma > 0.
//! Estimation maximizes either the normal quasi likelihood or the skew-t
//! likelihood via Nelder-Mead from five deterministic starting points, with
//! constraints handled by reparameterization. The AR term is dropped and the
//! model refit when its sandwich t-statistic falls below 1.96.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::nelder_mead::nelder_mead;
use crate::unidist::SkewT;

#[derive(Debug, Error)]
pub enum GarchError {
    #[error("optimizer failed to converge: {0}")]
    NonConvergent(String),
    #[error("series is degenerate (zero or non-finite variance)")]
    DegenerateSeries,
    #[error("series too short: {0} observations, need at least 250")]
    SeriesTooShort(usize),
}

/// Likelihood used by `fit_gjr`. Normal gives the QMLE route; the skew-t
/// likelihood is maximized directly (two extra shape parameters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Likelihood {
    Normal,
    SkewT,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GjrParams {
    pub c: f64,
    /// AR(1) coefficient; `None` once the term is dropped as insignificant
    pub a: Option<f64>,
    pub alpha0: f64,
    pub alpha1: f64,
    pub gamma: f64,
    pub beta1: f64,
}

impl GjrParams {
    pub fn persistence(&self) -> f64 {
        self.alpha1 * (1.0 + self.gamma * self.gamma) + self.beta1
    }

    pub fn is_valid(&self) -> bool {
        self.alpha0 > 0.0
            && self.alpha1 >= 0.0
            && self.beta1 >= 0.0
            && self.gamma.abs() <= 1.0
            && self.persistence() < 1.0
    }

    pub fn ar(&self) -> f64 {
        self.a.unwrap_or(0.0)
    }
}

/// Fitted skew-t shape, present only for `Likelihood::SkewT`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SkewTShape {
    pub nu: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GarchFit {
    pub params: GjrParams,
    pub shape: Option<SkewTShape>,
    /// conditional volatility per day, aligned with `residuals`
    pub sigma_path: Vec<f64>,
    /// standardized innovations (y_t - a y_{t-1} - c) / sigma_t
    pub residuals: Vec<f64>,
    pub loglik: f64,
    pub ar_dropped: bool,
    /// sandwich standard errors in the order (c, a?, alpha0, alpha1, gamma, beta1)
    pub stderrs: Vec<f64>,
    /// last observed return, kept for forecasting
    pub last_return: f64,
}

impl GarchFit {
    /// One-step-ahead conditional volatility from the ends of the filtered
    /// paths, applying the variance recursion once.
    pub fn forecast_sigma(&self) -> f64 {
        let s = *self.sigma_path.last().unwrap();
        let e = *self.residuals.last().unwrap();
        step_sigma2(&self.params, s, e).sqrt()
    }

    /// One-step-ahead VaR: c + a y_t + sigma_next * q, with q the alpha
    /// quantile of the standardized innovation distribution.
    pub fn var_forecast(&self, sigma_next: f64, eps_quantile: f64) -> f64 {
        self.params.c + self.params.ar() * self.last_return + sigma_next * eps_quantile
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "c": self.params.c,
            "a": self.params.a,
            "alpha0": self.params.alpha0,
            "alpha1": self.params.alpha1,
            "gamma": self.params.gamma,
            "beta1": self.params.beta1,
            "loglik": self.loglik,
            "ar_dropped": self.ar_dropped,
        })
        .to_string()
    }
}

fn step_sigma2(p: &GjrParams, sigma: f64, eps: f64) -> f64 {
    let shock = sigma * eps;
    let dev = shock.abs() - p.gamma * shock;
    p.alpha0 + p.alpha1 * dev * dev + p.beta1 * sigma * sigma
}

/// Run the variance recursion over a series. With the AR term present the
/// first observation is consumed as the lag, so outputs are one shorter than
/// the input; without it outputs match the input length. sigma_1^2 starts at
/// the sample variance of the window.
pub fn filter(params: &GjrParams, series: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let start = if params.a.is_some() { 1 } else { 0 };
    let n_out = series.len() - start;
    let mut sigma = sample_variance(series).sqrt();
    let mut sigmas = Vec::with_capacity(n_out);
    let mut resids = Vec::with_capacity(n_out);
    for t in start..series.len() {
        if t > start {
            sigma = step_sigma2(params, sigmas[t - start - 1], resids[t - start - 1]).sqrt();
        }
        let prev = if start == 1 { series[t - 1] } else { 0.0 };
        let eps = (series[t] - params.ar() * prev - params.c) / sigma;
        sigmas.push(sigma);
        resids.push(eps);
    }
    (sigmas, resids)
}

fn sample_variance(series: &[f64]) -> f64 {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    series.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / (n - 1.0)
}

// --------------------------------------------------------- estimation -----

struct Acc {
    with_ar: bool,
    likelihood: Likelihood,
}

impl Acc {
    /// Unconstrained vector -> constrained parameters. Persistence is capped
    /// below one by a logistic map, with a second logistic splitting it
    /// between the ARCH and GARCH pieces.
    fn decode(&self, p: &[f64]) -> (GjrParams, Option<SkewTShape>) {
        let mut i = 0;
        let c = p[i];
        i += 1;
        let a = if self.with_ar {
            let v = p[i];
            i += 1;
            Some(v)
        } else {
            None
        };
        let alpha0 = p[i].exp();
        let persistence = 0.9999 * logistic(p[i + 1]);
        let split = logistic(p[i + 2]);
        let gamma = p[i + 3].tanh();
        let beta1 = persistence * split;
        let alpha1 = persistence * (1.0 - split) / (1.0 + gamma * gamma);
        let shape = if self.likelihood == Likelihood::SkewT {
            Some(SkewTShape { nu: 2.05 + p[i + 4].exp(), xi: p[i + 5].exp() })
        } else {
            None
        };
        (GjrParams { c, a, alpha0, alpha1, gamma, beta1 }, shape)
    }

    fn encode(&self, params: &GjrParams, shape: Option<&SkewTShape>) -> Vec<f64> {
        let mut p = vec![params.c];
        if self.with_ar {
            p.push(params.ar());
        }
        p.push(params.alpha0.ln());
        let pers = params.persistence().clamp(1e-6, 0.9998) / 0.9999;
        p.push(logit(pers));
        let split = (params.beta1 / params.persistence()).clamp(1e-6, 1.0 - 1e-6);
        p.push(logit(split));
        p.push(params.gamma.clamp(-0.999, 0.999).atanh());
        if let Some(s) = shape {
            p.push((s.nu - 2.05).max(1e-3).ln());
            p.push(s.xi.ln());
        }
        p
    }

    /// Per-observation log-likelihood contributions.
    fn obs_loglik(&self, p: &[f64], series: &[f64]) -> Vec<f64> {
        let (params, shape) = self.decode(p);
        let (sigmas, resids) = filter(&params, series);
        match shape {
            None => sigmas
                .iter()
                .zip(&resids)
                .map(|(s, e)| -0.5 * (2.0 * std::f64::consts::PI).ln() - s.ln() - 0.5 * e * e)
                .collect(),
            Some(sh) => {
                let dist = SkewT::new(sh.nu, sh.xi);
                sigmas
                    .iter()
                    .zip(&resids)
                    .map(|(s, e)| dist.pdf(*e).max(1e-300).ln() - s.ln())
                    .collect()
            }
        }
    }

    fn neg_loglik(&self, p: &[f64], series: &[f64]) -> f64 {
        let total: f64 = self.obs_loglik(p, series).iter().sum();
        if total.is_finite() {
            -total
        } else {
            1e12
        }
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn starting_points(acc: &Acc, series: &[f64]) -> Vec<Vec<f64>> {
    let var = sample_variance(series);
    let combos = [
        (0.05, 0.0, 0.90),
        (0.10, 0.3, 0.85),
        (0.03, 0.5, 0.93),
        (0.15, 0.0, 0.75),
        (0.08, -0.3, 0.88),
    ];
    combos
        .iter()
        .map(|&(alpha1, gamma, beta1)| {
            let pers = alpha1 * (1.0 + gamma * gamma) + beta1;
            let params = GjrParams {
                c: 0.0,
                a: if acc.with_ar { Some(0.0) } else { None },
                alpha0: var * (1.0 - pers),
                alpha1,
                gamma,
                beta1,
            };
            let shape = SkewTShape { nu: 8.0, xi: 1.0 };
            acc.encode(&params, Some(&shape).filter(|_| acc.likelihood == Likelihood::SkewT))
        })
        .collect()
}

fn optimize(acc: &Acc, series: &[f64]) -> Result<Vec<f64>, GarchError> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in starting_points(acc, series) {
        let res = nelder_mead(
            |p| acc.neg_loglik(p, series),
            &start,
            0.25,
            1e-8,
            2000,
        );
        if res.fmin.is_finite() && best.as_ref().map_or(true, |(f, _)| res.fmin < *f) {
            best = Some((res.fmin, res.x));
        }
    }
    // Nelder-Mead can stall on the coupled reparameterization; restart from the
    // incumbent with a fresh, smaller simplex until no further improvement.
    for _ in 0..3 {
        let Some((fmin, x)) = best.clone() else { break };
        let res = nelder_mead(|p| acc.neg_loglik(p, series), &x, 0.05, 1e-9, 2000);
        if res.fmin.is_finite() && res.fmin < fmin - 1e-7 {
            best = Some((res.fmin, res.x));
        } else {
            break;
        }
    }
    let (fmin, x) = best.ok_or_else(|| {
        GarchError::NonConvergent("no starting point produced a finite likelihood".into())
    })?;
    if fmin >= 1e12 {
        return Err(GarchError::NonConvergent("likelihood never finite".into()));
    }
    Ok(x)
}

/// Sandwich (QMLE-robust) standard errors H^-1 S H^-1 with H the numerical
/// Hessian of the mean log-likelihood and S the outer product of scores.
fn sandwich_stderrs(acc: &Acc, p: &[f64], series: &[f64]) -> Vec<f64> {
    use nalgebra::DMatrix;
    let k = p.len();
    let n = acc.obs_loglik(p, series).len();
    let h = 1e-4;
    // per-observation scores by central differences
    let mut scores = DMatrix::zeros(n, k);
    for j in 0..k {
        let mut pp = p.to_vec();
        pp[j] += h;
        let up = acc.obs_loglik(&pp, series);
        pp[j] = p[j] - h;
        let dn = acc.obs_loglik(&pp, series);
        for i in 0..n {
            scores[(i, j)] = (up[i] - dn[i]) / (2.0 * h);
        }
    }
    let mut hess = DMatrix::zeros(k, k);
    let f0 = -acc.neg_loglik(p, series);
    for i in 0..k {
        for j in i..k {
            let mut pp = p.to_vec();
            pp[i] += h;
            pp[j] += h;
            let fpp = -acc.neg_loglik(&pp, series);
            pp[j] = p[j] - h;
            let fpm = -acc.neg_loglik(&pp, series);
            pp[i] = p[i] - h;
            let fmm = -acc.neg_loglik(&pp, series);
            pp[j] = p[j] + h;
            let fmp = -acc.neg_loglik(&pp, series);
            let v = if i == j {
                let mut pi = p.to_vec();
                pi[i] += h;
                let fu = -acc.neg_loglik(&pi, series);
                pi[i] = p[i] - h;
                let fd = -acc.neg_loglik(&pi, series);
                (fu - 2.0 * f0 + fd) / (h * h)
            } else {
                (fpp - fpm - fmp + fmm) / (4.0 * h * h)
            };
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let opg = scores.transpose() * &scores;
    let cov_uncon = match hess.try_inverse() {
        Some(hinv) => &hinv * opg * &hinv,
        None => return vec![f64::NAN; k],
    };
    // delta method: jacobian of the constrained parameters in the
    // unconstrained coordinates
    let (base, _) = acc.decode(p);
    let natural = |q: &[f64]| -> Vec<f64> {
        let (g, _) = acc.decode(q);
        let mut v = vec![g.c];
        if acc.with_ar {
            v.push(g.ar());
        }
        v.extend_from_slice(&[g.alpha0, g.alpha1, g.gamma, g.beta1]);
        v
    };
    let m = natural(p).len();
    let mut jac = DMatrix::zeros(m, k);
    for j in 0..k {
        let mut pp = p.to_vec();
        pp[j] += h;
        let up = natural(&pp);
        pp[j] = p[j] - h;
        let dn = natural(&pp);
        for i in 0..m {
            jac[(i, j)] = (up[i] - dn[i]) / (2.0 * h);
        }
    }
    let cov = &jac * cov_uncon * jac.transpose();
    let _ = base;
    (0..m).map(|i| cov[(i, i)].max(0.0).sqrt()).collect()
}

/// Fit the AR(1)-GJR-GARCH(1,1) model. The AR term is kept only when its
/// robust t-statistic reaches 1.96; otherwise the model is refit without it
/// and `ar_dropped` is set.
pub fn fit_gjr(series: &[f64], likelihood: Likelihood) -> Result<GarchFit, GarchError> {
    if series.len() < 250 {
        return Err(GarchError::SeriesTooShort(series.len()));
    }
    if series.iter().any(|y| !y.is_finite()) {
        return Err(GarchError::DegenerateSeries);
    }
    let var = sample_variance(series);
    if !(var.is_finite() && var > 0.0) {
        return Err(GarchError::DegenerateSeries);
    }
    let (lo, hi) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &y| (l.min(y), h.max(y)));
    if hi - lo <= 1e-10 * (hi.abs() + lo.abs() + 1e-12) {
        return Err(GarchError::DegenerateSeries);
    }

    let acc_ar = Acc { with_ar: true, likelihood };
    let p_ar = optimize(&acc_ar, series)?;
    let se_ar = sandwich_stderrs(&acc_ar, &p_ar, series);
    let (params_ar, _) = acc_ar.decode(&p_ar);
    let t_stat = params_ar.ar() / se_ar[1];

    let (acc, p, stderrs, ar_dropped) = if t_stat.abs() >= 1.96 && se_ar[1].is_finite() {
        (acc_ar, p_ar, se_ar, false)
    } else {
        let acc0 = Acc { with_ar: false, likelihood };
        let p0 = optimize(&acc0, series)?;
        let se0 = sandwich_stderrs(&acc0, &p0, series);
        (acc0, p0, se0, true)
    };

    let (params, shape) = acc.decode(&p);
    let loglik = -acc.neg_loglik(&p, series);
    let (sigma_path, residuals) = filter(&params, series);
    Ok(GarchFit {
        params,
        shape,
        sigma_path,
        residuals,
        loglik,
        ar_dropped,
        stderrs,
        last_return: *series.last().unwrap(),
    })
}

/// Simulate a GJR path with normal or skew-t innovations; used by tests and
/// examples as the recovery oracle.
pub fn simulate_gjr<R: rand::Rng + ?Sized>(
    params: &GjrParams,
    shape: Option<SkewTShape>,
    n: usize,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    use rand_distr::{Distribution, StandardNormal};
    let skewt = shape.map(|s| SkewT::new(s.nu, s.xi));
    let uncond = params.alpha0 / (1.0 - params.persistence());
    let mut sigma = uncond.sqrt();
    let mut y_prev = 0.0;
    let burn = 500;
    let mut path = Vec::with_capacity(n);
    let mut eps_path = Vec::with_capacity(n);
    for t in 0..n + burn {
        let eps = match &skewt {
            None => {
                let z: f64 = StandardNormal.sample(rng);
                z
            }
            Some(st) => st.quantile(rng.gen::<f64>().clamp(1e-12, 1.0 - 1e-12)),
        };
        let y = params.ar() * y_prev + sigma * eps + params.c;
        if t >= burn {
            path.push(y);
            eps_path.push(eps);
        }
        sigma = step_sigma2(params, sigma, eps).sqrt();
        y_prev = y;
    }
    (path, eps_path)
}
