//! Independent numerical routes used to cross-check the series results:
//! a grid propagator, grid overlaps and adaptive quadrature.

pub mod checks;
pub mod propagator;
pub mod quadrature;

pub use checks::{run_suite, OracleCheck, SuiteConfig};
pub use propagator::{overlap, propagate, CrankNicolson, GridState};
pub use quadrature::{
    adaptive_quadrature, confined_regime_constant, free_regime_constant, integrate_adaptive,
    quadrature_with, Domain, Integrand, QuadratureResult,
};
