//! Zero-mean unit-variance innovation distributions: normal, skew-t,
//! standardized NTS and standardized GH, the last two backed by a cached
//! CDF table from Fourier inversion of the characteristic function.

mod gh;
mod nts;
mod skewt;
mod table;

pub use gh::{gig_moment, GhParams};
pub use nts::NtsParams;
pub use skewt::SkewT;
pub use table::{cf_to_cdf_table, CdfTable};

use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UnidistError {
    #[error("probability {0} outside (0,1)")]
    OutOfRange(f64),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

/// FFT defaults: heavy tails need a wide support; convergence is asserted by
/// the grid-doubling test.
pub const DEFAULT_FFT_POINTS: usize = 1 << 14;
pub const DEFAULT_FFT_HALFWIDTH: f64 = 40.0;

#[derive(Debug, Clone)]
pub enum InnovationDist {
    Normal,
    SkewT(SkewT),
    StdNts { params: NtsParams, table: CdfTable },
    StdGh { params: GhParams, table: CdfTable },
}

impl InnovationDist {
    pub fn normal() -> Self {
        InnovationDist::Normal
    }

    pub fn skew_t(nu: f64, xi: f64) -> Self {
        InnovationDist::SkewT(SkewT::new(nu, xi))
    }

    pub fn std_nts(params: NtsParams) -> Result<Self, UnidistError> {
        Self::std_nts_with(params, DEFAULT_FFT_POINTS, DEFAULT_FFT_HALFWIDTH)
    }

    pub fn std_nts_with(
        params: NtsParams,
        n_points: usize,
        halfwidth: f64,
    ) -> Result<Self, UnidistError> {
        let table = cf_to_cdf_table(|u| params.cf(u), n_points, halfwidth)?;
        Ok(InnovationDist::StdNts { params, table })
    }

    pub fn std_gh(params: GhParams) -> Result<Self, UnidistError> {
        Self::std_gh_with(params, DEFAULT_FFT_POINTS, DEFAULT_FFT_HALFWIDTH)
    }

    pub fn std_gh_with(
        params: GhParams,
        n_points: usize,
        halfwidth: f64,
    ) -> Result<Self, UnidistError> {
        let table = cf_to_cdf_table(|u| params.cf(u), n_points, halfwidth)?;
        Ok(InnovationDist::StdGh { params, table })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            InnovationDist::Normal => std_normal().pdf(x),
            InnovationDist::SkewT(st) => st.pdf(x),
            InnovationDist::StdNts { table, .. } | InnovationDist::StdGh { table, .. } => {
                table.pdf(x)
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            InnovationDist::Normal => std_normal().cdf(x),
            InnovationDist::SkewT(st) => st.cdf(x),
            InnovationDist::StdNts { table, .. } | InnovationDist::StdGh { table, .. } => {
                table.cdf(x)
            }
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64, UnidistError> {
        if !(0.0 < p && p < 1.0) {
            return Err(UnidistError::OutOfRange(p));
        }
        Ok(match self {
            InnovationDist::Normal => std_normal().inverse_cdf(p),
            InnovationDist::SkewT(st) => st.quantile(p),
            InnovationDist::StdNts { table, .. } | InnovationDist::StdGh { table, .. } => {
                table.quantile(p)
            }
        })
    }

    /// Numerical mean/variance; exact families report their analytic values.
    pub fn moments(&self) -> (f64, f64) {
        match self {
            InnovationDist::Normal => (0.0, 1.0),
            InnovationDist::SkewT(_) => {
                let pdf = |x: f64| self.pdf(x);
                let m = crate::numerics::adaptive_quad(&|x| x * pdf(x), -60.0, 60.0, 1e-10);
                let v = crate::numerics::adaptive_quad(&|x| x * x * pdf(x), -60.0, 60.0, 1e-10);
                (m, v - m * m)
            }
            InnovationDist::StdNts { table, .. } | InnovationDist::StdGh { table, .. } => {
                table.moments()
            }
        }
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}
