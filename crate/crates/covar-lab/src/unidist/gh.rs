//! Standardized generalized hyperbolic law: normal mean-variance mixture
//! Y = skew * W + sqrt(W) Z with W ~ GIG(lambda, chi, psi), shifted and scaled
//! to zero mean and unit variance via closed-form GIG moments.

use num_complex::Complex64;

use crate::numerics::bessel::{bessel_k_complex, log_bessel_k};

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct GhParams {
    pub lambda: f64,
    pub chi: f64,
    pub psi: f64,
    /// skew loading on the mixing variable
    pub skew: f64,
}

/// Closed-form GIG moment E[W^r] as a Bessel-K ratio.
pub fn gig_moment(lambda: f64, chi: f64, psi: f64, r: f64) -> f64 {
    assert!(chi > 0.0 && psi > 0.0);
    let omega = (chi * psi).sqrt();
    (0.5 * r * (chi / psi).ln() + log_bessel_k(lambda + r, omega) - log_bessel_k(lambda, omega))
        .exp()
}

impl GhParams {
    pub fn new(lambda: f64, chi: f64, psi: f64, skew: f64) -> Self {
        assert!(chi > 0.0, "GH chi must be > 0, got {chi}");
        assert!(psi > 0.0, "GH psi must be > 0, got {psi}");
        GhParams { lambda, chi, psi, skew }
    }

    pub fn mixing_mean(&self) -> f64 {
        gig_moment(self.lambda, self.chi, self.psi, 1.0)
    }

    pub fn mixing_variance(&self) -> f64 {
        let m1 = self.mixing_mean();
        gig_moment(self.lambda, self.chi, self.psi, 2.0) - m1 * m1
    }

    /// Mean and standard deviation of the unstandardized mixture Y.
    pub fn raw_location_scale(&self) -> (f64, f64) {
        let ew = self.mixing_mean();
        let vw = self.mixing_variance();
        let mean = self.skew * ew;
        let var = ew + self.skew * self.skew * vw;
        (mean, var.sqrt())
    }

    /// GIG Laplace transform E[exp(-sW)] at complex argument.
    pub fn gig_laplace(&self, s: Complex64) -> Complex64 {
        let omega = (self.chi * self.psi).sqrt();
        let zs = Complex64::new(self.psi, 0.0) + 2.0 * s;
        let arg = (Complex64::new(self.chi, 0.0) * zs).sqrt();
        let log_k0 = log_bessel_k(self.lambda, omega);
        // (psi/(psi+2s))^{lambda/2} * K_lambda(sqrt(chi (psi+2s))) / K_lambda(omega)
        let pref = (Complex64::new(self.psi, 0.0) / zs).powf(0.5 * self.lambda);
        pref * bessel_k_complex(self.lambda, arg) * (-log_k0).exp()
    }

    /// Characteristic function of the standardized GH variable.
    pub fn cf(&self, u: f64) -> Complex64 {
        let (loc, scale) = self.raw_location_scale();
        let us = u / scale;
        let s = Complex64::new(0.5 * us * us, -us * self.skew);
        Complex64::new(0.0, -u * loc / scale).exp() * self.gig_laplace(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gig_moment_reference() {
        // W ~ GIG(-0.5, chi, psi) is inverse Gaussian with mean sqrt(chi/psi)
        let m = gig_moment(-0.5, 2.0, 3.0, 1.0);
        assert!((m - (2.0f64 / 3.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn cf_at_zero_and_hermitian() {
        let p = GhParams::new(-0.5, 1.2, 0.9, -0.4);
        assert!((p.cf(0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let (a, b) = (p.cf(1.3), p.cf(-1.3));
        assert!((a - b.conj()).norm() < 1e-10);
    }

    #[test]
    fn standardized_moments_from_cf() {
        let p = GhParams::new(1.0, 0.8, 1.5, 0.7);
        let h = 1e-4;
        let mean = (p.cf(h) - p.cf(-h)).im / (2.0 * h);
        let var = -(p.cf(h) + p.cf(-h) - Complex64::new(2.0, 0.0)).re / (h * h);
        assert!(mean.abs() < 1e-7, "mean {mean}");
        assert!((var - 1.0).abs() < 1e-5, "var {var}");
    }
}
