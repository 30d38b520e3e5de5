//! Fernandez–Steel skew-t, standardized to zero mean and unit variance.
//!
//! The symmetric building block is the unit-variance Student t; skewing
//! rescales the two half-densities by xi and 1/xi, and the final location and
//! scale shift restores the first two moments in closed form.

use statrs::distribution::{Continuous, ContinuousCDF, StudentsT};
use statrs::function::gamma::ln_gamma;

#[derive(Debug, Clone, Copy)]
pub struct SkewT {
    pub nu: f64,
    pub xi: f64,
    /// mean of the unstandardized skewed variable
    loc: f64,
    /// std dev of the unstandardized skewed variable
    scale: f64,
    t: StudentsT,
}

impl SkewT {
    pub fn new(nu: f64, xi: f64) -> Self {
        assert!(nu > 2.0, "skew-t needs nu > 2, got {nu}");
        assert!(xi > 0.0, "skew-t needs xi > 0, got {xi}");
        // M1 = 2 * integral of z * g(z) over z > 0 for the unit-variance t
        let m1 = 2.0 * (nu - 2.0).sqrt() / ((nu - 1.0) * std::f64::consts::PI.sqrt())
            * (ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0)).exp();
        let mean = m1 * (xi - 1.0 / xi);
        let ex2 = (xi.powi(3) + xi.powi(-3)) / (xi + 1.0 / xi);
        let var = ex2 - mean * mean;
        SkewT {
            nu,
            xi,
            loc: mean,
            scale: var.sqrt(),
            t: StudentsT::new(0.0, 1.0, nu).unwrap(),
        }
    }

    /// Density of the unit-variance symmetric t.
    fn g_pdf(&self, z: f64) -> f64 {
        let s = (self.nu / (self.nu - 2.0)).sqrt();
        self.t.pdf(z * s) * s
    }

    fn g_cdf(&self, z: f64) -> f64 {
        self.t.cdf(z * (self.nu / (self.nu - 2.0)).sqrt())
    }

    fn g_quantile(&self, p: f64) -> f64 {
        self.t.inverse_cdf(p) / (self.nu / (self.nu - 2.0)).sqrt()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let z = self.scale * x + self.loc;
        let k = 2.0 / (self.xi + 1.0 / self.xi);
        let half = if z >= 0.0 { self.g_pdf(z / self.xi) } else { self.g_pdf(z * self.xi) };
        self.scale * k * half
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = self.scale * x + self.loc;
        let k = 2.0 / (self.xi + 1.0 / self.xi);
        if z < 0.0 {
            k / self.xi * self.g_cdf(z * self.xi)
        } else {
            1.0 - k * self.xi * (1.0 - self.g_cdf(z / self.xi))
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let p0 = 1.0 / (1.0 + self.xi * self.xi);
        let z = if p <= p0 {
            self.g_quantile(p * (1.0 + self.xi * self.xi) / 2.0) / self.xi
        } else {
            self.xi * self.g_quantile(1.0 - (1.0 - p) * (1.0 + 1.0 / (self.xi * self.xi)) / 2.0)
        };
        (z - self.loc) / self.scale
    }
}
