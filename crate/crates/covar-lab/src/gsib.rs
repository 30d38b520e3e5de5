//! GSIB-style systemic importance scores: basis-point normalization,
//! category-weighted scores, delta-CoVaR scores, the average relative
//! percentage error, and minimum-distance category weights on the simplex.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CATEGORIES: [&str; 5] =
    ["size", "interconnectedness", "substitutability", "complexity", "cja"];

#[derive(Debug, Error)]
pub enum GsibError {
    #[error("sample total is zero")]
    ZeroTotal,
    #[error("no observations for year {0}")]
    EmptyYear(i32),
    #[error("target score is zero at position {0}")]
    ZeroTarget(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("weight search failed to converge")]
    NonConvergent,
}

/// Five-category indicator scores per bank and year, in basis points of the
/// sample total (each category column sums to 10000 per year within
/// rounding).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndicatorPanel {
    pub years: Vec<i32>,
    pub banks: Vec<String>,
    /// categories[c][row] aligned with (years, banks) rows
    pub categories: [Vec<f64>; 5],
}

impl IndicatorPanel {
    pub fn n_rows(&self) -> usize {
        self.years.len()
    }

    pub fn validate(&self) -> Result<(), GsibError> {
        for c in &self.categories {
            if c.len() != self.years.len() || self.banks.len() != self.years.len() {
                return Err(GsibError::LengthMismatch(c.len(), self.years.len()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub w: [f64; 5],
}

impl WeightVector {
    pub fn equal() -> Self {
        WeightVector { w: [0.2; 5] }
    }

    pub fn new(w: [f64; 5]) -> Self {
        let v = WeightVector { w };
        assert!(v.is_valid(), "weights must be nonnegative and sum to one: {w:?}");
        v
    }

    pub fn is_valid(&self) -> bool {
        self.w.iter().all(|x| *x >= -1e-12) && (self.w.iter().sum::<f64>() - 1.0).abs() < 1e-9
    }
}

/// Express positive per-bank values as basis points of their total.
pub fn bps_score(values: &[f64]) -> Result<Vec<f64>, GsibError> {
    assert!(values.iter().all(|v| *v >= 0.0), "negative raw indicator value");
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(GsibError::ZeroTotal);
    }
    Ok(values.iter().map(|v| v / total * 10_000.0).collect())
}

/// Weighted category average per row, rounded to the nearest basis point.
pub fn gsib_score(panel: &IndicatorPanel, w: &WeightVector) -> Vec<f64> {
    (0..panel.n_rows())
        .map(|r| {
            let raw: f64 = (0..5).map(|c| w.w[c] * panel.categories[c][r]).sum();
            raw.round()
        })
        .collect()
}

/// Annual-mean delta-CoVaR per bank expressed in basis points. Magnitudes of
/// the annual means are used so that deeper (more negative) CoVaR maps to a
/// larger share; pass `signed = true` to skip the absolute value.
pub fn dcovar_score(
    series_per_bank: &[(String, Vec<f64>)],
    year: i32,
    signed: bool,
) -> Result<Vec<(String, f64)>, GsibError> {
    let mut means = Vec::with_capacity(series_per_bank.len());
    for (bank, series) in series_per_bank {
        if series.is_empty() {
            return Err(GsibError::EmptyYear(year));
        }
        let m = series.iter().sum::<f64>() / series.len() as f64;
        means.push((bank.clone(), if signed { m } else { m.abs() }));
    }
    let scores = bps_score(&means.iter().map(|(_, m)| *m).collect::<Vec<_>>())?;
    Ok(means
        .into_iter()
        .zip(scores)
        .map(|((bank, _), s)| (bank, s))
        .collect())
}

/// Average relative percentage error between target and candidate scores.
pub fn arpe(target: &[f64], candidate: &[f64]) -> Result<f64, GsibError> {
    if target.len() != candidate.len() {
        return Err(GsibError::LengthMismatch(target.len(), candidate.len()));
    }
    let mut total = 0.0;
    for (i, (t, c)) in target.iter().zip(candidate).enumerate() {
        if *t <= 0.0 {
            return Err(GsibError::ZeroTarget(i));
        }
        total += (t - c).abs() / t;
    }
    Ok(total / target.len() as f64)
}

fn project_to_simplex(v: &[f64; 5]) -> [f64; 5] {
    // Euclidean projection onto the probability simplex
    let mut sorted = *v;
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let mut tau = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        acc += x;
        let t = (acc - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            tau = t;
        }
    }
    let mut out = [0.0; 5];
    for i in 0..5 {
        out[i] = (v[i] - tau).max(0.0);
    }
    out
}

fn arpe_at(panel: &IndicatorPanel, target: &[f64], w: &[f64; 5]) -> f64 {
    let scores = gsib_score(panel, &WeightVector { w: *w });
    arpe(target, &scores).unwrap_or(f64::INFINITY)
}

/// Weights minimizing the ARPE against a target score vector, searched over
/// the probability simplex by projected coordinate descent from the simplex
/// vertices, the centroid, and 20 low-discrepancy interior points.
pub fn min_distance_weights(
    panel: &IndicatorPanel,
    target: &[f64],
) -> Result<WeightVector, GsibError> {
    panel.validate()?;
    if target.len() != panel.n_rows() {
        return Err(GsibError::LengthMismatch(target.len(), panel.n_rows()));
    }
    let mut starts: Vec<[f64; 5]> = Vec::new();
    for i in 0..5 {
        let mut v = [0.0; 5];
        v[i] = 1.0;
        starts.push(v);
    }
    starts.push([0.2; 5]);
    // additive-recurrence low-discrepancy sequence, projected to the simplex
    let alpha = [0.6180339887498949, 0.7548776662466927, 0.5698402909980532, 0.822875655532364, 0.2882297539194154];
    for k in 1..=20 {
        let mut v = [0.0; 5];
        for i in 0..5 {
            v[i] = (alpha[i] * k as f64).fract();
        }
        let s: f64 = v.iter().sum();
        for x in v.iter_mut() {
            *x /= s;
        }
        starts.push(v);
    }

    let mut best: Option<([f64; 5], f64)> = None;
    for start in starts {
        let mut w = start;
        let mut f = arpe_at(panel, target, &w);
        let mut step = 0.25;
        while step > 1e-6 {
            let mut improved = false;
            for i in 0..5 {
                for dir in [1.0, -1.0] {
                    let mut cand = w;
                    cand[i] += dir * step;
                    let cand = project_to_simplex(&cand);
                    let fc = arpe_at(panel, target, &cand);
                    if fc < f - 1e-14 {
                        w = cand;
                        f = fc;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if best.as_ref().map_or(true, |(_, bf)| f < *bf) {
            best = Some((w, f));
        }
    }
    let (w, f) = best.ok_or(GsibError::NonConvergent)?;
    if !f.is_finite() {
        return Err(GsibError::NonConvergent);
    }
    // feasibility guarantee: never worse than equal weights
    debug_assert!(f <= arpe_at(panel, target, &[0.2; 5]) + 1e-12);
    Ok(WeightVector { w })
}

/// The adjusted score is simply the GSIB score under the minimum-distance
/// weights.
pub fn adjusted_score(panel: &IndicatorPanel, w_min: &WeightVector) -> Vec<f64> {
    gsib_score(panel, w_min)
}
