//! Characteristic-function inversion onto a tabulated density/CDF pair.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::numerics::quad::{cumulative_integral, trapezoid};

use super::UnidistError;

/// Tabulated CDF on a uniform grid. `cdf_values` are nondecreasing,
/// essentially 0 at the left end and 1 at the right end.
#[derive(Debug, Clone)]
pub struct CdfTable {
    pub grid: Vec<f64>,
    pub cdf_values: Vec<f64>,
    pub pdf_values: Vec<f64>,
}

impl CdfTable {
    pub fn dx(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// Linear interpolation of the CDF; clamps outside the grid hull.
    pub fn cdf(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x <= g[0] {
            return self.cdf_values[0];
        }
        if x >= *g.last().unwrap() {
            return 1.0;
        }
        let idx = ((x - g[0]) / self.dx()) as usize;
        let idx = idx.min(g.len() - 2);
        let w = (x - g[idx]) / self.dx();
        self.cdf_values[idx] * (1.0 - w) + self.cdf_values[idx + 1] * w
    }

    /// Linear interpolation of the density; 0 outside the grid hull.
    pub fn pdf(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x <= g[0] || x >= *g.last().unwrap() {
            return 0.0;
        }
        let idx = (((x - g[0]) / self.dx()) as usize).min(g.len() - 2);
        let w = (x - g[idx]) / self.dx();
        self.pdf_values[idx] * (1.0 - w) + self.pdf_values[idx + 1] * w
    }

    /// Inverse CDF: bisection on the grid hull, then one interpolation step
    /// inside the bracketing cell.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.cdf_values.len();
        let (mut lo, mut hi) = (0usize, n - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.cdf_values[mid] < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (c0, c1) = (self.cdf_values[lo], self.cdf_values[hi]);
        if c1 <= c0 {
            return self.grid[lo];
        }
        let w = ((p - c0) / (c1 - c0)).clamp(0.0, 1.0);
        self.grid[lo] * (1.0 - w) + self.grid[hi] * w
    }

    /// Numerical mean and variance of the tabulated density.
    pub fn moments(&self) -> (f64, f64) {
        let dx = self.dx();
        let m1: Vec<f64> = self.grid.iter().zip(&self.pdf_values).map(|(x, f)| x * f).collect();
        let mean = trapezoid(&m1, dx);
        let m2: Vec<f64> =
            self.grid.iter().zip(&self.pdf_values).map(|(x, f)| x * x * f).collect();
        (mean, trapezoid(&m2, dx) - mean * mean)
    }

    /// Dump as `x,cdf` rows for debugging.
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,cdf")?;
        for (x, c) in self.grid.iter().zip(&self.cdf_values) {
            writeln!(w, "{x},{c}")?;
        }
        Ok(())
    }
}

/// Invert a characteristic function to a density/CDF table on
/// [-halfwidth, halfwidth] with `n_points` grid points (power of two).
///
/// The density comes from the discrete Fourier sum over u_k = k*pi/halfwidth;
/// negative ripple is clipped at zero and the mass renormalized. A pre-clip
/// mass further than 1e-3 from one means the domain or resolution does not
/// resolve the distribution.
pub fn cf_to_cdf_table<F>(cf: F, n_points: usize, halfwidth: f64) -> Result<CdfTable, UnidistError>
where
    F: Fn(f64) -> Complex64,
{
    assert!(n_points.is_power_of_two() && n_points >= 64);
    assert!(halfwidth > 0.0);
    let n = n_points;
    let l = halfwidth;
    let dx = 2.0 * l / n as f64;
    let du = std::f64::consts::PI / l;

    // s_k = w_k * phi(u_k) * (-1)^k ; forward DFT gives the density on the grid
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| {
            let w = if k == 0 { 0.5 } else { 1.0 };
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            cf(k as f64 * du) * w * sign
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let scale = du / std::f64::consts::PI;
    let mut pdf: Vec<f64> = buf.iter().map(|c| c.re * scale).collect();

    let raw_mass = trapezoid(&pdf, dx);
    if !(raw_mass - 1.0).abs().is_finite() || (raw_mass - 1.0).abs() > 1e-3 {
        return Err(UnidistError::NumericalFailure(format!(
            "pre-normalization density mass {raw_mass} deviates from 1"
        )));
    }
    // Aliasing wraps off-domain mass back to unit total, so the mass check
    // alone cannot see it; compare the table mean against the CF-implied mean.
    let h = 1e-3 * du;
    let mean_cf = cf(h).im / h;
    let mean_table: f64 = pdf
        .iter()
        .enumerate()
        .map(|(j, p)| (-l + j as f64 * dx) * p * dx)
        .sum();
    if !mean_cf.is_finite() || (mean_cf - mean_table).abs() > 0.05 * l {
        return Err(UnidistError::NumericalFailure(format!(
            "density mean {mean_table} far from cf-implied mean {mean_cf}; domain too narrow"
        )));
    }
    for p in pdf.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let mass = trapezoid(&pdf, dx);
    for p in pdf.iter_mut() {
        *p /= mass;
    }

    let mut cdf = cumulative_integral(&pdf, dx);
    let last = *cdf.last().unwrap();
    let mut prev = 0.0f64;
    for c in cdf.iter_mut() {
        *c = (*c / last).clamp(0.0, 1.0).max(prev);
        prev = *c;
    }

    let grid: Vec<f64> = (0..n).map(|j| -l + j as f64 * dx).collect();
    Ok(CdfTable { grid, cdf_values: cdf, pdf_values: pdf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn normal_cf(u: f64) -> Complex64 {
        Complex64::new((-0.5 * u * u).exp(), 0.0)
    }

    #[test]
    fn normal_cf_recovers_analytic_cdf() {
        let t = cf_to_cdf_table(normal_cf, 1 << 14, 40.0).unwrap();
        let n = Normal::new(0.0, 1.0).unwrap();
        let mut sup = 0.0f64;
        for (x, c) in t.grid.iter().zip(&t.cdf_values) {
            sup = sup.max((c - n.cdf(*x)).abs());
        }
        assert!(sup < 1e-8, "sup error {sup}");
    }

    #[test]
    fn endpoints_and_monotonicity() {
        let t = cf_to_cdf_table(normal_cf, 1 << 12, 30.0).unwrap();
        assert!(t.cdf_values[0] < 1e-6);
        assert!(*t.cdf_values.last().unwrap() > 1.0 - 1e-6);
        assert!(t.cdf_values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn doubling_resolution_is_converged() {
        let a = cf_to_cdf_table(normal_cf, 1 << 13, 40.0).unwrap();
        let b = cf_to_cdf_table(normal_cf, 1 << 14, 40.0).unwrap();
        let sup = a
            .grid
            .iter()
            .zip(&a.cdf_values)
            .map(|(x, c)| (c - b.cdf(*x)).abs())
            .fold(0.0f64, f64::max);
        assert!(sup < 1e-6, "sup {sup}");
    }

    #[test]
    fn quantile_round_trip() {
        let t = cf_to_cdf_table(normal_cf, 1 << 14, 40.0).unwrap();
        for x in [-5.0, -2.0, -0.3, 0.0, 1.0, 4.5] {
            let p = t.cdf(x);
            assert!((t.quantile(p) - x).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_unresolvable_cf() {
        // far-off-center distribution: most mass outside the domain
        let shifted = |u: f64| (Complex64::new(0.0, 100.0 * u) - Complex64::new(0.5 * u * u, 0.0)).exp();
        assert!(cf_to_cdf_table(shifted, 1 << 10, 10.0).is_err());
    }
}
