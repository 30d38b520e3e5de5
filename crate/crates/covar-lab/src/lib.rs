//! Systemic-risk estimation for bank equity panels: VaR, CoVaR and ΔCoVaR under
//! AR-GJR-GARCH margins with four dependence models (multivariate normal,
//! generalized hyperbolic, normal tempered stable, bivariate copulas),
//! a violation-based backtesting battery, and GSIB-style scoring.

pub mod backtest;
pub mod copulas;
pub mod covar;
pub mod garch;
pub mod gsib;
pub mod ingest;
pub mod mvmodels;
pub mod numerics;
pub mod runner;
pub mod unidist;
