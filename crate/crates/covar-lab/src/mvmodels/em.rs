//! EM estimation of MGH and MNTS mixtures on standardized residual matrices.
//!
//! MGH E-step moments are closed-form GIG Bessel-K ratios, evaluated on an
//! interpolation grid over the per-observation Mahalanobis term to keep the
//! cost linear. MNTS conditional moments come from numerical integration
//! against the subordinator density recovered by Fourier inversion of its
//! characteristic function. In both cases E[W] = 1 is enforced through the
//! mixing-parameter parameterization, which resolves the scale degeneracy
//! without touching the likelihood.

use nalgebra::{DMatrix, DVector};

use crate::numerics::bessel::log_bessel_k;
use crate::numerics::nelder_mead::nelder_mead;
use crate::unidist::gig_moment;

use super::mixing::{gig_unit_mean_chi_psi, MixingLaw};
use super::{MixtureFamily, MixtureFit, MvError};

#[derive(Debug, Clone, Copy)]
pub struct EmConfig {
    /// stop when the relative log-likelihood increase falls below this
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig { rel_tol: 1e-7, max_iter: 500 }
    }
}

/// Multivariate normal special case: sample mean and sample correlation with
/// degenerate mixing.
pub fn fit_mnormal(residuals: &DMatrix<f64>) -> Result<MixtureFit, MvError> {
    let (n, d) = residuals.shape();
    assert!(n > d, "need more rows than columns");
    let mu = column_means(residuals);
    let corr = sample_correlation(residuals)?;
    let chol = corr
        .clone()
        .cholesky()
        .ok_or(MvError::SingularDispersion(f64::INFINITY))?;
    let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let mut loglik = 0.0;
    for r in 0..n {
        let x = residuals.row(r).transpose() - &mu;
        let q = x.dot(&chol.solve(&x));
        loglik += -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + q);
    }
    Ok(MixtureFit {
        family: MixtureFamily::MNormal,
        mu,
        gamma_vec: DVector::zeros(d),
        dispersion: corr,
        mixing: MixingLaw::Degenerate,
        loglik,
        n_iter: 0,
    })
}

/// Fit an MGH or MNTS mixture by EM. The observed-data log-likelihood is
/// checked to be nondecreasing (within 1e-8 slack) at every iteration.
pub fn fit_em(
    residuals: &DMatrix<f64>,
    family: MixtureFamily,
    config: &EmConfig,
) -> Result<MixtureFit, MvError> {
    let (n, d) = residuals.shape();
    assert!(n >= 20 * d, "need n >= 20 d observations, got {n}x{d}");
    check_conditioning(residuals)?;
    match family {
        MixtureFamily::MNormal => fit_mnormal(residuals),
        MixtureFamily::Mgh => fit_mgh(residuals, config),
        MixtureFamily::Mnts => fit_mnts(residuals, config),
    }
}

fn check_conditioning(residuals: &DMatrix<f64>) -> Result<(), MvError> {
    let corr = sample_correlation(residuals)?;
    let eig = corr.symmetric_eigenvalues();
    let max = eig.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.iter().cloned().fold(f64::MAX, f64::min);
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    if cond > 1e10 {
        return Err(MvError::SingularDispersion(cond));
    }
    Ok(())
}

fn column_means(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows() as f64;
    DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.sum() / n))
}

fn sample_correlation(m: &DMatrix<f64>) -> Result<DMatrix<f64>, MvError> {
    let (n, d) = m.shape();
    let mu = column_means(m);
    let mut cov = DMatrix::zeros(d, d);
    for r in 0..n {
        let x = m.row(r).transpose() - &mu;
        cov += &x * x.transpose();
    }
    cov /= n as f64 - 1.0;
    let sd: Vec<f64> = (0..d).map(|k| cov[(k, k)].sqrt()).collect();
    if sd.iter().any(|s| !s.is_finite() || *s <= 0.0) {
        return Err(MvError::SingularDispersion(f64::INFINITY));
    }
    let mut corr = cov;
    for i in 0..d {
        for j in 0..d {
            corr[(i, j)] /= sd[i] * sd[j];
        }
    }
    Ok(corr)
}

struct Quadratics {
    /// Mahalanobis terms (x - mu)' Sigma^-1 (x - mu)
    q: Vec<f64>,
    /// cross terms (x - mu)' Sigma^-1 gamma
    c: Vec<f64>,
    /// gamma' Sigma^-1 gamma
    k: f64,
    log_det: f64,
}

fn quadratics(
    residuals: &DMatrix<f64>,
    mu: &DVector<f64>,
    gamma: &DVector<f64>,
    sigma: &DMatrix<f64>,
) -> Result<Quadratics, MvError> {
    let chol = sigma
        .clone()
        .cholesky()
        .ok_or(MvError::SingularDispersion(f64::INFINITY))?;
    let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let solved_gamma = chol.solve(gamma);
    let k = gamma.dot(&solved_gamma);
    let n = residuals.nrows();
    let mut q = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    for r in 0..n {
        let x = residuals.row(r).transpose() - mu;
        let sx = chol.solve(&x);
        q.push(x.dot(&sx));
        c.push(x.dot(&solved_gamma));
    }
    Ok(Quadratics { q, c, k, log_det })
}

// ---------------------------------------------------------------- MGH -----

/// Interpolator over q for the conditional-GIG quantities the M-step needs.
/// Nodes are uniform in sqrt(q), which matches the curvature of the Bessel
/// ratios.
struct CondGigInterp {
    sq_max: f64,
    eta: Vec<f64>,
    delta: Vec<f64>,
    xi: Vec<f64>,
    log_norm: Vec<f64>,
}

const INTERP_NODES: usize = 800;

impl CondGigInterp {
    fn build(lambda_cond: f64, chi: f64, psi_plus_k: f64, q_max: f64) -> Self {
        let sq_max = q_max.sqrt().max(1e-6);
        let mut eta = Vec::with_capacity(INTERP_NODES + 1);
        let mut delta = Vec::with_capacity(INTERP_NODES + 1);
        let mut xi = Vec::with_capacity(INTERP_NODES + 1);
        let mut log_norm = Vec::with_capacity(INTERP_NODES + 1);
        for i in 0..=INTERP_NODES {
            let sq = sq_max * i as f64 / INTERP_NODES as f64;
            let cq = chi + sq * sq;
            eta.push(gig_moment(lambda_cond, cq, psi_plus_k, 1.0));
            delta.push(gig_moment(lambda_cond, cq, psi_plus_k, -1.0));
            let h = 1e-4;
            let lp = gig_moment(lambda_cond, cq, psi_plus_k, h).ln();
            let lm = gig_moment(lambda_cond, cq, psi_plus_k, -h).ln();
            xi.push((lp - lm) / (2.0 * h));
            // log of int w^{lambda_cond - 1} exp(-(cq/w + psi_plus_k w)/2) dw
            let omega = (cq * psi_plus_k).sqrt();
            log_norm.push(
                std::f64::consts::LN_2
                    + 0.5 * lambda_cond * (cq / psi_plus_k).ln()
                    + log_bessel_k(lambda_cond, omega),
            );
        }
        CondGigInterp { sq_max, eta, delta, xi, log_norm }
    }

    fn lookup(&self, q: f64, field: &[f64]) -> f64 {
        let pos = q.sqrt().min(self.sq_max) / self.sq_max * INTERP_NODES as f64;
        let idx = (pos as usize).min(INTERP_NODES - 1);
        let w = pos - idx as f64;
        field[idx] * (1.0 - w) + field[idx + 1] * w
    }

    fn eta(&self, q: f64) -> f64 {
        self.lookup(q, &self.eta)
    }
    fn delta(&self, q: f64) -> f64 {
        self.lookup(q, &self.delta)
    }
    fn xi(&self, q: f64) -> f64 {
        self.lookup(q, &self.xi)
    }
    fn log_norm(&self, q: f64) -> f64 {
        self.lookup(q, &self.log_norm)
    }
}

fn fit_mgh(residuals: &DMatrix<f64>, config: &EmConfig) -> Result<MixtureFit, MvError> {
    let (n, d) = residuals.shape();
    let nf = n as f64;
    let mut mu = column_means(residuals);
    let mut gamma = DVector::zeros(d);
    let mut sigma = sample_correlation(residuals)?;
    // GIG parameterized by (lambda, omega) with E[W] = 1
    let mut lambda = -0.5;
    let mut log_omega = 0.0f64;

    let mut prev_ll = f64::NEG_INFINITY;
    let mut n_iter = 0;
    for iter in 0..config.max_iter {
        n_iter = iter + 1;
        let (chi, psi) = gig_unit_mean_chi_psi(lambda, log_omega.exp());
        let quad = quadratics(residuals, &mu, &gamma, &sigma)?;
        let lambda_cond = lambda - 0.5 * d as f64;
        let q_max = quad.q.iter().cloned().fold(0.0, f64::max);
        let interp = CondGigInterp::build(lambda_cond, chi, psi + quad.k, q_max);

        // observed log-likelihood at the current parameters
        let omega = (chi * psi).sqrt();
        let base = 0.5 * lambda * (psi / chi).ln()
            - 0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln()
            - 0.5 * quad.log_det
            - std::f64::consts::LN_2
            - log_bessel_k(lambda, omega);
        let mut ll = 0.0;
        for i in 0..n {
            ll += base + quad.c[i] + interp.log_norm(quad.q[i]);
        }
        if ll + 1e-8 * (1.0 + ll.abs()) < prev_ll {
            return Err(MvError::NonConvergent(format!(
                "log-likelihood decreased at iteration {iter}: {prev_ll} -> {ll}"
            )));
        }
        let rel = (ll - prev_ll).abs() / (1.0 + ll.abs());
        if iter > 0 && rel < config.rel_tol {
            prev_ll = ll;
            break;
        }
        prev_ll = ll;

        // E-step moments
        let eta: Vec<f64> = quad.q.iter().map(|&q| interp.eta(q)).collect();
        let delta: Vec<f64> = quad.q.iter().map(|&q| interp.delta(q)).collect();
        let xi: Vec<f64> = quad.q.iter().map(|&q| interp.xi(q)).collect();

        // M-step: location, skew, dispersion
        let (new_mu, new_gamma, new_sigma) =
            location_skew_dispersion_step(residuals, &eta, &delta)?;
        mu = new_mu;
        gamma = new_gamma;
        sigma = new_sigma;

        // M-step: mixing parameters (lambda, omega), unit-mean constrained
        let sum_eta: f64 = eta.iter().sum();
        let sum_delta: f64 = delta.iter().sum();
        let sum_xi: f64 = xi.iter().sum();
        let objective = |p: &[f64]| {
            let l = p[0];
            let om = p[1].exp();
            if !(0.01..=200.0).contains(&om) || l.abs() > 20.0 {
                return 1e12;
            }
            let (ch, ps) = gig_unit_mean_chi_psi(l, om);
            let log_norm =
                std::f64::consts::LN_2 + log_bessel_k(l, om) - 0.5 * l * (ps / ch).ln();
            // negative expected complete-data log-likelihood of the GIG part
            -((l - 1.0) * sum_xi - 0.5 * ch * sum_delta - 0.5 * ps * sum_eta
                - nf * log_norm)
        };
        let res = nelder_mead(objective, &[lambda, log_omega], 0.2, 1e-10, 300);
        if res.fmin < objective(&[lambda, log_omega]) {
            lambda = res.x[0];
            log_omega = res.x[1];
        }
    }

    let (chi, psi) = gig_unit_mean_chi_psi(lambda, log_omega.exp());
    Ok(MixtureFit {
        family: MixtureFamily::Mgh,
        mu,
        gamma_vec: gamma,
        dispersion: sigma,
        mixing: MixingLaw::Gig { lambda, chi, psi },
        loglik: prev_ll,
        n_iter,
    })
}

/// Shared (mu, gamma, Sigma) M-step given conditional moments
/// eta_i = E[W|x_i] and delta_i = E[1/W|x_i].
fn location_skew_dispersion_step(
    residuals: &DMatrix<f64>,
    eta: &[f64],
    delta: &[f64],
) -> Result<(DVector<f64>, DVector<f64>, DMatrix<f64>), MvError> {
    let (n, d) = residuals.shape();
    let nf = n as f64;
    let eta_bar = eta.iter().sum::<f64>() / nf;
    let delta_bar = delta.iter().sum::<f64>() / nf;
    let xbar = column_means(residuals);
    let mut delta_x = DVector::zeros(d);
    for r in 0..n {
        delta_x += residuals.row(r).transpose() * delta[r];
    }
    delta_x /= nf;

    let denom = delta_bar * eta_bar - 1.0;
    let gamma = if denom.abs() > 1e-10 {
        (&xbar * delta_bar - &delta_x) / denom
    } else {
        DVector::zeros(d)
    };
    let mu = (&delta_x - &gamma) / delta_bar;

    let mut sigma = DMatrix::zeros(d, d);
    for r in 0..n {
        let x = residuals.row(r).transpose() - &mu;
        sigma += &x * x.transpose() * delta[r];
    }
    sigma /= nf;
    sigma -= &gamma * gamma.transpose() * eta_bar;
    // symmetrize against accumulation noise
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    if sigma.clone().cholesky().is_none() {
        return Err(MvError::SingularDispersion(f64::INFINITY));
    }
    Ok((mu, gamma, sigma))
}

// --------------------------------------------------------------- MNTS -----

/// E-step grid stride over the tabulated subordinator density.
const MNTS_GRID_STRIDE: usize = 8;

fn fit_mnts(residuals: &DMatrix<f64>, config: &EmConfig) -> Result<MixtureFit, MvError> {
    let (n, d) = residuals.shape();
    let mut mu = column_means(residuals);
    let mut gamma = DVector::zeros(d);
    let mut sigma = sample_correlation(residuals)?;
    let mut alpha = 1.2f64;
    let mut theta = 1.0f64;

    let mut prev_ll = f64::NEG_INFINITY;
    let mut n_iter = 0;
    for iter in 0..config.max_iter {
        n_iter = iter + 1;
        let mixing = MixingLaw::tempered_stable(alpha, theta);
        let table = mixing.density_grid().unwrap();
        let nodes: Vec<(f64, f64)> = table
            .grid
            .iter()
            .zip(&table.density)
            .step_by(MNTS_GRID_STRIDE)
            .filter(|(w, _)| **w > 1e-8)
            .map(|(w, g)| (*w, *g * table.dx * MNTS_GRID_STRIDE as f64))
            .collect();

        let quad = quadratics(residuals, &mu, &gamma, &sigma)?;
        let log_base = -0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * quad.log_det;
        let half_d = 0.5 * d as f64;

        let mut ll = 0.0;
        let mut eta = vec![0.0; n];
        let mut delta = vec![0.0; n];
        // summed posterior over the grid, for the mixing-parameter update
        let mut posterior_mass = vec![0.0; nodes.len()];
        for i in 0..n {
            let mut norm = 0.0;
            let mut m1 = 0.0;
            let mut m_1 = 0.0;
            let mut row = vec![0.0; nodes.len()];
            for (g_idx, (w, weight)) in nodes.iter().enumerate() {
                let log_cond =
                    -half_d * w.ln() - 0.5 * quad.q[i] / w + quad.c[i] - 0.5 * quad.k * w;
                let val = log_cond.exp() * weight;
                row[g_idx] = val;
                norm += val;
                m1 += val * w;
                m_1 += val / w;
            }
            if norm <= 0.0 || !norm.is_finite() {
                return Err(MvError::NumericalFailure(format!(
                    "vanishing conditional likelihood at observation {i}"
                )));
            }
            ll += log_base + norm.ln();
            eta[i] = m1 / norm;
            delta[i] = m_1 / norm;
            for (g_idx, val) in row.iter().enumerate() {
                posterior_mass[g_idx] += val / norm;
            }
        }

        if ll + 1e-8 * (1.0 + ll.abs()) < prev_ll {
            return Err(MvError::NonConvergent(format!(
                "log-likelihood decreased at iteration {iter}: {prev_ll} -> {ll}"
            )));
        }
        let rel = (ll - prev_ll).abs() / (1.0 + ll.abs());
        if iter > 0 && rel < config.rel_tol {
            prev_ll = ll;
            break;
        }
        prev_ll = ll;

        let (new_mu, new_gamma, new_sigma) =
            location_skew_dispersion_step(residuals, &eta, &delta)?;
        mu = new_mu;
        gamma = new_gamma;
        sigma = new_sigma;

        // conditional maximization of the subordinator parameters against the
        // summed posterior: candidate (alpha, theta) is scored by the expected
        // log subordinator density over the posterior mass
        let w_nodes: Vec<f64> = nodes.iter().map(|(w, _)| *w).collect();
        let objective = |p: &[f64]| {
            let a = 0.05 + 1.9 / (1.0 + (-p[0]).exp());
            let th = p[1].exp();
            if !(1e-3..=1e3).contains(&th) {
                return 1e12;
            }
            let cand = MixingLaw::tempered_stable(a, th);
            let t = cand.density_grid().unwrap();
            let mut score = 0.0;
            for (w, mass) in w_nodes.iter().zip(&posterior_mass) {
                if *mass <= 0.0 {
                    continue;
                }
                let dens = interp_table(t, *w).max(1e-300);
                score += mass * dens.ln();
            }
            -score
        };
        let p0 = [((alpha - 0.05) / 1.9 / (1.0 - (alpha - 0.05) / 1.9)).ln(), theta.ln()];
        let cur = objective(&p0);
        let res = nelder_mead(objective, &p0, 0.15, 1e-8, 60);
        if res.fmin < cur {
            alpha = 0.05 + 1.9 / (1.0 + (-res.x[0]).exp());
            theta = res.x[1].exp();
        }
    }

    Ok(MixtureFit {
        family: MixtureFamily::Mnts,
        mu,
        gamma_vec: gamma,
        dispersion: sigma,
        mixing: MixingLaw::tempered_stable(alpha, theta),
        loglik: prev_ll,
        n_iter,
    })
}

fn interp_table(t: &super::SubordinatorTable, w: f64) -> f64 {
    if w <= t.grid[0] || w >= *t.grid.last().unwrap() {
        return 0.0;
    }
    let pos = (w - t.grid[0]) / t.dx;
    let idx = (pos as usize).min(t.grid.len() - 2);
    let frac = pos - idx as f64;
    t.density[idx] * (1.0 - frac) + t.density[idx + 1] * frac
}

// ------------------------------------------------------------- sampling ----

/// Simulate n draws from a d-dimensional mixture law; the test-side oracle
/// for parameter recovery.
pub fn simulate_mixture<R: rand::Rng + ?Sized>(
    fit: &MixtureFit,
    n: usize,
    rng: &mut R,
) -> DMatrix<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let d = fit.dim();
    let chol = fit.dispersion.clone().cholesky().expect("dispersion not PD").l();
    let sampler = match &fit.mixing {
        MixingLaw::Gig { lambda, chi, psi } => {
            Some(super::sampling::GigSampler::new(*lambda, *chi, *psi))
        }
        _ => None,
    };
    let mut out = DMatrix::zeros(n, d);
    for r in 0..n {
        let w = match &fit.mixing {
            MixingLaw::Degenerate => 1.0,
            MixingLaw::Gig { .. } => sampler.as_ref().unwrap().sample(rng),
            MixingLaw::TemperedStable { alpha, theta, .. } => {
                super::sampling::sample_tempered_stable(*alpha, *theta, rng)
            }
        };
        let z = DVector::from_iterator(d, (0..d).map(|_| {
            let v: f64 = StandardNormal.sample(rng);
            v
        }));
        let x = &fit.mu + &fit.gamma_vec * w + &chol * z * w.sqrt();
        out.set_row(r, &x.transpose());
    }
    out
}
