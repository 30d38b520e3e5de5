//! Adaptive Gauss–Kronrod quadrature and grid integration helpers.

// G7/K15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let fsum = f(c - x) + f(c + x);
        resk += WGK[j] * fsum;
        if j % 2 == 1 {
            resg += WG[j / 2] * fsum;
        }
    }
    (resk * h, ((resk - resg) * h).abs())
}

/// Adaptive G7/K15 quadrature of `f` on [a, b] to absolute tolerance `tol`.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    // interval stack; depth cap keeps pathological integrands from spinning
    let mut stack = vec![(a, b, tol.max(1e-15), 0u32)];
    let mut total = 0.0;
    while let Some((a, b, tol, depth)) = stack.pop() {
        let (val, err) = gk15(f, a, b);
        if err <= tol || depth >= 40 {
            total += val;
        } else {
            let m = 0.5 * (a + b);
            stack.push((a, m, 0.5 * tol, depth + 1));
            stack.push((m, b, 0.5 * tol, depth + 1));
        }
    }
    total
}

/// Trapezoid rule on a uniform grid with spacing `dx`.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    dx * (0.5 * values[0] + inner + 0.5 * values[values.len() - 1])
}

/// Cumulative integral of densely sampled `values` on a uniform grid.
///
/// Trapezoid sums with the Euler–Maclaurin endpoint correction (equivalently a
/// piecewise-cubic rule), so smooth integrands converge at fourth order; the
/// plain trapezoid rule is two orders short of the CDF tolerances used here.
pub fn cumulative_integral(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    let mut acc = 0.0;
    for j in 0..n - 1 {
        let seg = if j >= 1 && j + 2 < n {
            dx * (-values[j - 1] + 13.0 * values[j] + 13.0 * values[j + 1] - values[j + 2]) / 24.0
        } else if n >= 4 && j == 0 {
            // one-sided cubic rule keeps the boundary segments at fourth order
            dx * (9.0 * values[0] + 19.0 * values[1] - 5.0 * values[2] + values[3]) / 24.0
        } else if n >= 4 {
            dx * (9.0 * values[n - 1] + 19.0 * values[n - 2] - 5.0 * values[n - 3]
                + values[n - 4])
                / 24.0
        } else {
            dx * 0.5 * (values[j] + values[j + 1])
        };
        acc += seg;
        out[j + 1] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_of_gaussian_density() {
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let v = adaptive_quad(&f, -10.0, 10.0, 1e-12);
        assert!((v - 1.0).abs() < 1e-11);
    }

    #[test]
    fn quadrature_polynomial_exact() {
        let v = adaptive_quad(&|x| x * x * x - x, 0.0, 2.0, 1e-14);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cumulative_integral_is_fourth_order() {
        let n = 2001;
        let dx = 10.0 / (n as f64 - 1.0);
        let vals: Vec<f64> = (0..n).map(|i| (-5.0 + i as f64 * dx).sin()).collect();
        let cum = cumulative_integral(&vals, dx);
        for (i, c) in cum.iter().enumerate() {
            let x = -5.0 + i as f64 * dx;
            let exact = (-5f64).cos() - x.cos();
            assert!((c - exact).abs() < 1e-9, "i={i} err={}", (c - exact).abs());
        }
    }
}
