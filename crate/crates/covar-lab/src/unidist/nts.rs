//! Standardized normal tempered stable law.
//!
//! X = beta (T - 1) + gamma sqrt(T) Z with Z standard normal and T a tempered
//! stable subordinator with E[T] = 1 and Laplace transform
//! E[exp(-uT)] = exp(-(2 theta^{1-a/2}/a)((theta+u)^{a/2} - theta^{a/2})).
//! gamma^2 = 1 - beta^2 (2-a)/(2 theta) pins the variance at one.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct NtsParams {
    /// tail index, in (0, 2)
    pub alpha: f64,
    /// tempering, > 0
    pub theta: f64,
    /// skew loading
    pub beta: f64,
}

impl NtsParams {
    pub fn new(alpha: f64, theta: f64, beta: f64) -> Self {
        assert!(alpha > 0.0 && alpha < 2.0, "NTS alpha must be in (0,2), got {alpha}");
        assert!(theta > 0.0, "NTS theta must be > 0, got {theta}");
        let p = NtsParams { alpha, theta, beta };
        assert!(
            p.gamma_sq() >= 0.0,
            "NTS skew too large: beta^2 (2-alpha)/(2 theta) must be <= 1"
        );
        p
    }

    /// Variance of the subordinator T.
    pub fn subordinator_variance(&self) -> f64 {
        (2.0 - self.alpha) / (2.0 * self.theta)
    }

    pub fn gamma_sq(&self) -> f64 {
        1.0 - self.beta * self.beta * self.subordinator_variance()
    }

    fn laplace_coeff(&self) -> f64 {
        2.0 * self.theta.powf(1.0 - self.alpha / 2.0) / self.alpha
    }

    /// Laplace transform of T at complex argument s (Re extended analytically).
    pub fn subordinator_laplace(&self, s: Complex64) -> Complex64 {
        let c = self.laplace_coeff();
        let half = self.alpha / 2.0;
        (-c * ((Complex64::new(self.theta, 0.0) + s).powf(half) - self.theta.powf(half))).exp()
    }

    /// Characteristic function of the subordinator T.
    pub fn subordinator_cf(&self, u: f64) -> Complex64 {
        self.subordinator_laplace(Complex64::new(0.0, -u))
    }

    /// Characteristic function of the standardized NTS variable.
    pub fn cf(&self, u: f64) -> Complex64 {
        let g2 = self.gamma_sq();
        let s = Complex64::new(0.5 * u * u * g2, -u * self.beta);
        (Complex64::new(0.0, -u * self.beta)).exp() * self.subordinator_laplace(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cf_at_zero_is_one() {
        let p = NtsParams::new(1.2, 0.8, -0.3);
        let c = p.cf(0.0);
        assert!((c.re - 1.0).abs() < 1e-14 && c.im.abs() < 1e-14);
    }

    #[test]
    fn cf_is_hermitian() {
        let p = NtsParams::new(0.8, 1.5, 0.4);
        for u in [0.3, 1.7, 5.0] {
            let a = p.cf(u);
            let b = p.cf(-u);
            assert!((a.re - b.re).abs() < 1e-13 && (a.im + b.im).abs() < 1e-13);
        }
    }

    #[test]
    fn moments_from_cf_derivatives() {
        // central finite differences of the CF at 0: mean ~ 0, variance ~ 1
        let p = NtsParams::new(1.4, 1.0, 0.6);
        let h = 1e-4;
        let mean = (p.cf(h) - p.cf(-h)).im / (2.0 * h);
        let var = -(p.cf(h) + p.cf(-h) - Complex64::new(2.0, 0.0)).re / (h * h);
        assert!(mean.abs() < 1e-8, "mean {mean}");
        assert!((var - 1.0).abs() < 1e-6, "var {var}");
    }

    #[test]
    fn symmetric_when_unskewed() {
        let p = NtsParams::new(1.1, 0.9, 0.0);
        for u in [0.5, 2.0] {
            assert!(p.cf(u).im.abs() < 1e-14);
        }
    }
}
