//! Samplers for the mixing laws. These sit on independent routes from the
//! quadrature/FFT evaluation paths, so tests can use them as Monte-Carlo
//! oracles: the tempered stable draw is exponential tilting of a
//! Chambers-Mallows-Stuck positive stable draw, and the GIG draw inverts the
//! closed-form density numerically.

use rand::Rng;

use super::mixing::GigDensity;

/// One draw of the tempered stable subordinator with E[T] = 1 and tail index
/// `alpha` in (0,2), tempering `theta` > 0 (the law behind `NtsParams`).
pub fn sample_tempered_stable<R: Rng + ?Sized>(alpha: f64, theta: f64, rng: &mut R) -> f64 {
    let a = alpha / 2.0; // stable index of the subordinator
    let c = 2.0 * theta.powf(1.0 - a) / alpha; // Laplace coefficient
    let scale = c.powf(1.0 / a);
    loop {
        let s = scale * positive_stable(a, rng);
        // accept with probability exp(-theta * s): exponential tilting
        if rng.gen::<f64>() < (-theta * s).exp() {
            return s;
        }
    }
}

/// Chambers-Mallows-Stuck draw of a positive stable variable with index
/// `a` in (0,1) and Laplace transform exp(-u^a).
fn positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let v = rng.gen_range(-FRAC_PI_2..FRAC_PI_2);
    let e: f64 = -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln();
    let t = a * (v + FRAC_PI_2);
    (t.sin() / v.cos().powf(1.0 / a)) * ((v - t).cos() / e).powf((1.0 - a) / a)
}

/// Inverse-CDF sampler state for GIG(lambda, chi, psi).
pub struct GigSampler {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl GigSampler {
    pub fn new(lambda: f64, chi: f64, psi: f64) -> Self {
        let dens = GigDensity::new(lambda, chi, psi);
        let hi = dens.upper_cutoff();
        let n = 1 << 16;
        let dx = hi / n as f64;
        let grid: Vec<f64> = (1..=n).map(|i| i as f64 * dx).collect();
        let mut cdf = Vec::with_capacity(n);
        let mut acc = 0.0;
        let mut prev = 0.0;
        for w in &grid {
            let p = dens.pdf(*w);
            acc += 0.5 * (prev + p) * dx;
            prev = p;
            cdf.push(acc);
        }
        let total = *cdf.last().unwrap();
        for c in cdf.iter_mut() {
            *c /= total;
        }
        GigSampler { grid, cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let idx = self.cdf.partition_point(|c| *c < u);
        if idx == 0 {
            return self.grid[0];
        }
        if idx >= self.grid.len() {
            return *self.grid.last().unwrap();
        }
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.grid[idx - 1] * (1.0 - w) + self.grid[idx] * w
    }
}
