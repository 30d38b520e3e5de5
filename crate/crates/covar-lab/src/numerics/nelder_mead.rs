//! Nelder–Mead simplex minimizer. Derivative-free, deterministic given the
//! starting point, which is what the multi-start estimation layers need.

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fmin: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize `f` starting from `x0`. `scale` sets the initial simplex edge per
/// coordinate. Stops when the relative spread of simplex values falls below
/// `tol` or after `max_iter` iterations.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    scale: f64,
    tol: f64,
    max_iter: usize,
) -> NelderMeadResult {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += if p[i].abs() > 1e-8 { scale * p[i].abs() } else { scale };
        simplex.push(p);
    }
    let mut fvals: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;

    for it in 0..max_iter {
        iterations = it;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap_or(std::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let spread = (fvals[worst] - fvals[best]).abs();
        if spread <= tol * (1.0 + fvals[best].abs()) {
            converged = true;
            break;
        }

        // centroid of all but the worst
        let mut centroid = vec![0.0; n];
        for (i, p) in simplex.iter().enumerate() {
            if i != worst {
                for k in 0..n {
                    centroid[k] += p[k] / n as f64;
                }
            }
        }

        let reflect: Vec<f64> = (0..n)
            .map(|k| centroid[k] + alpha * (centroid[k] - simplex[worst][k]))
            .collect();
        let fr = f(&reflect);

        if fr < fvals[best] {
            let expand: Vec<f64> = (0..n)
                .map(|k| centroid[k] + gamma * (reflect[k] - centroid[k]))
                .collect();
            let fe = f(&expand);
            if fe < fr {
                simplex[worst] = expand;
                fvals[worst] = fe;
            } else {
                simplex[worst] = reflect;
                fvals[worst] = fr;
            }
        } else if fr < fvals[second_worst] {
            simplex[worst] = reflect;
            fvals[worst] = fr;
        } else {
            let contract: Vec<f64> = if fr < fvals[worst] {
                (0..n).map(|k| centroid[k] + rho * (reflect[k] - centroid[k])).collect()
            } else {
                (0..n).map(|k| centroid[k] + rho * (simplex[worst][k] - centroid[k])).collect()
            };
            let fc = f(&contract);
            if fc < fvals[worst].min(fr) {
                simplex[worst] = contract;
                fvals[worst] = fc;
            } else {
                // shrink toward the best vertex
                let best_pt = simplex[best].clone();
                for i in 0..=n {
                    if i == best {
                        continue;
                    }
                    for k in 0..n {
                        simplex[i][k] = best_pt[k] + sigma * (simplex[i][k] - best_pt[k]);
                    }
                    fvals[i] = f(&simplex[i]);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if fvals[i] < fvals[best] {
            best = i;
        }
    }
    NelderMeadResult {
        x: simplex[best].clone(),
        fmin: fvals[best],
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let f = |p: &[f64]| {
            let (x, y) = (p[0], p[1]);
            (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2)
        };
        let r = nelder_mead(f, &[-1.2, 1.0], 0.5, 1e-12, 5000);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn quadratic_bowl() {
        let r = nelder_mead(|p| p.iter().map(|x| x * x).sum(), &[3.0, -2.0, 1.0], 0.5, 1e-14, 2000);
        assert!(r.fmin < 1e-10);
    }
}
