//! Mixing laws for normal mean-variance mixtures: a degenerate point mass
//! (the multivariate normal case), GIG (the MGH case) and the tempered stable
//! subordinator (the MNTS case, density recovered by Fourier inversion).

use std::sync::Arc;

use num_complex::Complex64;

use crate::numerics::bessel::log_bessel_k;
use crate::numerics::quad::adaptive_quad;
use crate::unidist::NtsParams;

/// Tabulated subordinator density on a uniform positive grid.
#[derive(Debug)]
pub struct SubordinatorTable {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub dx: f64,
}

#[derive(Debug, Clone)]
pub enum MixingLaw {
    /// W = 1 almost surely; the mixture collapses to multivariate normal.
    Degenerate,
    /// W ~ GIG(lambda, chi, psi).
    Gig { lambda: f64, chi: f64, psi: f64 },
    /// Tempered stable subordinator with E[W] = 1.
    TemperedStable { alpha: f64, theta: f64, table: Arc<SubordinatorTable> },
}

impl MixingLaw {
    pub fn gig(lambda: f64, chi: f64, psi: f64) -> Self {
        assert!(chi > 0.0 && psi > 0.0);
        MixingLaw::Gig { lambda, chi, psi }
    }

    /// GIG constrained to E[W] = 1, parameterized by (lambda, omega).
    pub fn gig_unit_mean(lambda: f64, omega: f64) -> Self {
        let (chi, psi) = gig_unit_mean_chi_psi(lambda, omega);
        MixingLaw::Gig { lambda, chi, psi }
    }

    pub fn tempered_stable(alpha: f64, theta: f64) -> Self {
        let params = NtsParams::new(alpha, theta, 0.0);
        let table = build_subordinator_table(&params);
        MixingLaw::TemperedStable { alpha, theta, table: Arc::new(table) }
    }

    pub fn mean(&self) -> f64 {
        match self {
            MixingLaw::Degenerate => 1.0,
            MixingLaw::Gig { lambda, chi, psi } => {
                crate::unidist::gig_moment(*lambda, *chi, *psi, 1.0)
            }
            // E[W] = 1 by construction
            MixingLaw::TemperedStable { .. } => 1.0,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            MixingLaw::Degenerate => 0.0,
            MixingLaw::Gig { lambda, chi, psi } => {
                let m = crate::unidist::gig_moment(*lambda, *chi, *psi, 1.0);
                crate::unidist::gig_moment(*lambda, *chi, *psi, 2.0) - m * m
            }
            MixingLaw::TemperedStable { alpha, theta, .. } => (2.0 - alpha) / (2.0 * theta),
        }
    }

    /// ∫ h(w) dG(w) over the mixing law, to roughly 1e-10 for smooth h.
    pub fn integrate<F: Fn(f64) -> f64>(&self, h: F) -> f64 {
        match self {
            MixingLaw::Degenerate => h(1.0),
            MixingLaw::Gig { lambda, chi, psi } => {
                let dens = GigDensity::new(*lambda, *chi, *psi);
                let hi = dens.upper_cutoff();
                adaptive_quad(&|w: f64| h(w) * dens.pdf(w), 1e-12, hi, 1e-11)
            }
            MixingLaw::TemperedStable { table, .. } => {
                let mut acc = 0.0;
                for (w, g) in table.grid.iter().zip(&table.density) {
                    // the subordinator density vanishes at w = 0 but many
                    // integrands are singular there, so skip the origin node
                    if *w > 0.0 {
                        acc += h(*w) * g;
                    }
                }
                acc * table.dx
            }
        }
    }

    /// Density evaluations used by the MNTS E-step.
    pub fn density_grid(&self) -> Option<&SubordinatorTable> {
        match self {
            MixingLaw::TemperedStable { table, .. } => Some(table),
            _ => None,
        }
    }
}

/// chi and psi for a GIG with E[W] = 1 and sqrt(chi psi) = omega.
pub fn gig_unit_mean_chi_psi(lambda: f64, omega: f64) -> (f64, f64) {
    assert!(omega > 0.0);
    let log_ratio = log_bessel_k(lambda, omega) - log_bessel_k(lambda + 1.0, omega);
    let r = log_ratio.exp(); // K_l / K_{l+1} = sqrt(psi/chi)
    (omega * r, omega / r)
}

/// Closed-form GIG density with a cached normalizer.
pub struct GigDensity {
    lambda: f64,
    chi: f64,
    psi: f64,
    log_norm: f64,
}

impl GigDensity {
    pub fn new(lambda: f64, chi: f64, psi: f64) -> Self {
        let omega = (chi * psi).sqrt();
        let log_norm =
            0.5 * lambda * (psi / chi).ln() - std::f64::consts::LN_2 - log_bessel_k(lambda, omega);
        GigDensity { lambda, chi, psi, log_norm }
    }

    pub fn log_pdf(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.log_norm + (self.lambda - 1.0) * w.ln() - 0.5 * (self.chi / w + self.psi * w)
    }

    pub fn pdf(&self, w: f64) -> f64 {
        self.log_pdf(w).exp()
    }

    /// Point beyond which the density tail mass is below ~1e-12.
    pub fn upper_cutoff(&self) -> f64 {
        let mean = crate::unidist::gig_moment(self.lambda, self.chi, self.psi, 1.0);
        let var = crate::unidist::gig_moment(self.lambda, self.chi, self.psi, 2.0) - mean * mean;
        let by_moments = mean + 12.0 * var.sqrt();
        // exponential tail e^{-psi w / 2} needs w > 2*60/psi
        by_moments.max(120.0 / self.psi).max(2.0 * mean)
    }
}

/// Tabulated tempered stable subordinator density by Fourier inversion of the
/// subordinator characteristic function.
fn build_subordinator_table(params: &NtsParams) -> SubordinatorTable {
    let theta = params.theta;
    let std = params.subordinator_variance().sqrt();
    // tail ~ e^{-theta w}; cutoff keeps truncated mass below ~1e-10
    let w_max = (1.0 + 12.0 * std).max(30.0 / theta).max(8.0);
    let n: usize = 1 << 13;
    let du = std::f64::consts::PI / w_max;
    let dx = 2.0 * w_max / n as f64;

    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| {
            let w = if k == 0 { 0.5 } else { 1.0 };
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            params.subordinator_cf(k as f64 * du) * w * sign
        })
        .collect();
    rustfft::FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = du / std::f64::consts::PI;

    // keep the positive half; clip ringing and renormalize to unit mass
    let mut grid = Vec::with_capacity(n / 2);
    let mut density = Vec::with_capacity(n / 2);
    for (j, c) in buf.iter().enumerate() {
        let x = -w_max + j as f64 * dx;
        if x >= 0.0 {
            grid.push(x);
            density.push((c.re * scale).max(0.0));
        }
    }
    let mass: f64 = density.iter().sum::<f64>() * dx;
    for d in density.iter_mut() {
        *d /= mass;
    }
    SubordinatorTable { grid, density, dx }
}
