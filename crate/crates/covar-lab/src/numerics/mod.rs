//! Shared numerical kernels: root finding, quadrature, simplex optimization,
//! modified Bessel functions and bivariate elliptical CDFs.

pub mod bessel;
pub mod bvn;
pub mod nelder_mead;
pub mod quad;
pub mod root;

pub use bessel::{bessel_k, bessel_k_complex, log_bessel_k};
pub use bvn::{bvn_cdf, bvt_cdf};
pub use nelder_mead::{nelder_mead, NelderMeadResult};
pub use quad::{adaptive_quad, cumulative_integral, trapezoid};
pub use root::{bisect_on, brent, BracketError};
