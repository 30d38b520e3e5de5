//! Hit-sequence backtests for VaR and CoVaR forecasts: Kupiec unconditional
//! coverage, Markov independence, their joint test, the dynamic quantile
//! regression test, the LM and LA loss functions, and a KS goodness-of-fit
//! check for fitted innovation distributions.
//!
//! CoVaR forecasts are evaluated in two stages: the first-stage hit sequence
//! flags the bank's own VaR violations; the second stage restricts to those
//! distress days and compares the realized system return with the CoVaR path.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::unidist::InnovationDist;

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no distress days: the conditioning subset is empty")]
    EmptySubset,
}

#[derive(Debug, Clone)]
pub struct HitSequence {
    pub bits: Vec<u8>,
    pub nominal_p: f64,
}

impl HitSequence {
    pub fn n(&self) -> usize {
        self.bits.len()
    }

    pub fn violations(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub fn coverage(&self) -> f64 {
        self.violations() as f64 / self.n() as f64
    }

    /// Fewer than 20 observations leaves the second-stage tests with little
    /// power; callers should surface this flag in reports.
    pub fn low_power(&self) -> bool {
        self.n() < 20
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TestResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// set when a degenerate or collinear term was dropped
    pub degenerate: bool,
}

fn chi_sq_pvalue(statistic: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    let chi = ChiSquared::new(df as f64).unwrap();
    (1.0 - chi.cdf(statistic)).clamp(0.0, 1.0)
}

fn result(statistic: f64, df: usize, degenerate: bool) -> TestResult {
    let statistic = statistic.max(0.0);
    TestResult { statistic, df, p_value: chi_sq_pvalue(statistic, df), degenerate }
}

/// bit_t = 1 iff realized_t < forecast_t (losses modeled as negative values,
/// a breach means falling below the forecast; ties are not violations).
pub fn hit_sequence(
    realized: &[f64],
    forecasts: &[f64],
    nominal_p: f64,
) -> Result<HitSequence, BacktestError> {
    if realized.len() != forecasts.len() {
        return Err(BacktestError::LengthMismatch(realized.len(), forecasts.len()));
    }
    assert!(!realized.is_empty());
    let bits = realized
        .iter()
        .zip(forecasts)
        .map(|(y, f)| u8::from(y < f))
        .collect();
    Ok(HitSequence { bits, nominal_p })
}

/// Second-stage sequence: restrict to the bank's distress days and compare
/// the realized system return with the CoVaR forecast there.
pub fn conditional_subset(
    bank_hits: &HitSequence,
    realized_sys: &[f64],
    covar_forecasts: &[f64],
    beta: f64,
) -> Result<HitSequence, BacktestError> {
    if realized_sys.len() != bank_hits.n() {
        return Err(BacktestError::LengthMismatch(realized_sys.len(), bank_hits.n()));
    }
    if covar_forecasts.len() != bank_hits.n() {
        return Err(BacktestError::LengthMismatch(covar_forecasts.len(), bank_hits.n()));
    }
    let mut bits = Vec::new();
    for t in 0..bank_hits.n() {
        if bank_hits.bits[t] == 1 {
            bits.push(u8::from(realized_sys[t] < covar_forecasts[t]));
        }
    }
    if bits.is_empty() {
        return Err(BacktestError::EmptySubset);
    }
    Ok(HitSequence { bits, nominal_p: beta })
}

fn xlnx(x: f64, ln_arg: f64) -> f64 {
    // 0 * ln(0) = 0 convention for likelihood terms
    if x == 0.0 {
        0.0
    } else {
        x * ln_arg.ln()
    }
}

/// Kupiec proportion-of-failures test.
pub fn lr_uc(h: &HitSequence) -> TestResult {
    let n = h.n() as f64;
    let x = h.violations() as f64;
    let p = h.nominal_p;
    let pi = x / n;
    let ll_null = xlnx(n - x, 1.0 - p) + xlnx(x, p);
    let ll_alt = xlnx(n - x, 1.0 - pi) + xlnx(x, pi);
    result(-2.0 * (ll_null - ll_alt), 1, false)
}

/// First-order Markov independence test on the hit sequence.
pub fn lr_ind(h: &HitSequence) -> TestResult {
    assert!(h.n() >= 2);
    let mut n00 = 0.0;
    let mut n01 = 0.0;
    let mut n10 = 0.0;
    let mut n11 = 0.0;
    for w in h.bits.windows(2) {
        match (w[0], w[1]) {
            (0, 0) => n00 += 1.0,
            (0, 1) => n01 += 1.0,
            (1, 0) => n10 += 1.0,
            _ => n11 += 1.0,
        }
    }
    let total = n00 + n01 + n10 + n11;
    let pi = (n01 + n11) / total;
    let mut ll_alt = 0.0;
    let mut degenerate = false;
    if n00 + n01 > 0.0 {
        let pi01 = n01 / (n00 + n01);
        ll_alt += xlnx(n00, 1.0 - pi01) + xlnx(n01, pi01);
    } else {
        degenerate = true;
    }
    if n10 + n11 > 0.0 {
        let pi11 = n11 / (n10 + n11);
        ll_alt += xlnx(n10, 1.0 - pi11) + xlnx(n11, pi11);
    } else {
        degenerate = true;
    }
    let ll_null = xlnx(n00 + n10, 1.0 - pi) + xlnx(n01 + n11, pi);
    result(-2.0 * (ll_null - ll_alt), 1, degenerate)
}

/// Joint coverage and independence test: statistic is the exact sum of the
/// two components, two degrees of freedom.
pub fn lr_cc(h: &HitSequence) -> TestResult {
    let uc = lr_uc(h);
    let ind = lr_ind(h);
    result(uc.statistic + ind.statistic, 2, ind.degenerate)
}

/// Dynamic quantile test: regress the demeaned hits on an intercept, lagged
/// hits, and the contemporaneous forecast; the statistic is a chi-square
/// quadratic form in the OLS coefficients.
pub fn dq_test(h: &HitSequence, forecasts: &[f64], lags: usize) -> TestResult {
    use nalgebra::{DMatrix, DVector};
    assert_eq!(forecasts.len(), h.n());
    assert!(h.n() > lags + 2, "need more than lags + 2 observations");
    let p = h.nominal_p;
    let rows = h.n() - lags;
    let full_cols = lags + 2;
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(full_cols);
    cols.push(vec![1.0; rows]);
    for lag in 1..=lags {
        cols.push((lags..h.n()).map(|t| h.bits[t - lag] as f64).collect());
    }
    cols.push((lags..h.n()).map(|t| forecasts[t]).collect());

    // drop collinear columns by greedy Gram-Schmidt on the column set
    let mut kept: Vec<usize> = Vec::new();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for (j, col) in cols.iter().enumerate() {
        let mut v = DVector::from_column_slice(col);
        for b in &basis {
            let proj = v.dot(b);
            v -= b * proj;
        }
        if v.norm() > 1e-8 * (rows as f64).sqrt().max(1.0) {
            basis.push(v.normalize());
            kept.push(j);
        }
    }
    let degenerate = kept.len() < full_cols;
    let k = kept.len();
    let mut x = DMatrix::zeros(rows, k);
    for (out_j, &j) in kept.iter().enumerate() {
        for i in 0..rows {
            x[(i, out_j)] = cols[j][i];
        }
    }
    let y = DVector::from_iterator(rows, (lags..h.n()).map(|t| h.bits[t] as f64 - p));
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let ghat = match xtx.clone().cholesky() {
        Some(ch) => ch.solve(&xty),
        None => return result(0.0, 0, true),
    };
    let stat = (ghat.transpose() * xtx * &ghat)[(0, 0)] / (p * (1.0 - p));
    result(stat, k, degenerate)
}

/// Magnitude loss: 1 + squared exceedance on violation days, zero otherwise,
/// averaged over the window.
pub fn loss_lm(realized: &[f64], forecasts: &[f64]) -> Result<f64, BacktestError> {
    if realized.len() != forecasts.len() {
        return Err(BacktestError::LengthMismatch(realized.len(), forecasts.len()));
    }
    let total: f64 = realized
        .iter()
        .zip(forecasts)
        .map(|(y, f)| if y < f { 1.0 + (y - f) * (y - f) } else { 0.0 })
        .sum();
    Ok(total / realized.len() as f64)
}

/// Asymmetric loss: violation days cost P (1 + |y - VaR|) with P penalizing
/// over-coverage, other days cost the distance |y - VaR|; averaged.
pub fn loss_la(
    realized: &[f64],
    forecasts: &[f64],
    nominal_p: f64,
) -> Result<f64, BacktestError> {
    if realized.len() != forecasts.len() {
        return Err(BacktestError::LengthMismatch(realized.len(), forecasts.len()));
    }
    let n = realized.len() as f64;
    let coverage = realized.iter().zip(forecasts).filter(|(y, f)| y < f).count() as f64 / n;
    let penalty = if coverage > nominal_p {
        ((coverage - nominal_p) / nominal_p).exp()
    } else {
        1.0
    };
    let total: f64 = realized
        .iter()
        .zip(forecasts)
        .map(|(y, f)| {
            let d = (y - f).abs();
            if y < f {
                penalty * (1.0 + d)
            } else {
                d
            }
        })
        .sum();
    Ok(total / n)
}

/// Kolmogorov-Smirnov statistic of residuals against a fitted innovation
/// distribution.
pub fn ks_statistic(residuals: &[f64], dist: &InnovationDist) -> f64 {
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let f = dist.cdf(*x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Asymptotic Kolmogorov p-value: 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2) with
/// lambda = sqrt(n) D. No correction for estimated parameters, so this is
/// anti-conservative when the distribution was fitted on the same sample.
pub fn ks_pvalue(residuals: &[f64], dist: &InnovationDist) -> f64 {
    assert!(residuals.len() >= 30, "need at least 30 residuals");
    let d = ks_statistic(residuals, dist);
    kolmogorov_pvalue(d, residuals.len())
}

pub fn kolmogorov_pvalue(d: f64, n: usize) -> f64 {
    let lambda = (n as f64).sqrt() * d;
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
