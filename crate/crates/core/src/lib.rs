//! Survival and escape of a particle after a sudden expansion of an
//! infinite square well from width 1 to `1 + Δ`.
//!
//! Units are `2m = ħ = 1`. The initial state is the ground state of the
//! unit well; after the quench it is a superposition of the wide-well
//! eigenstates, and the survival amplitude is a quadratic-phase series
//! whose small-`Δ` limit is the universal function `F(ξ)`.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fractal;
pub mod numeric;
pub mod oracle;
pub mod spectral;
pub mod survival;
pub mod universal;

pub use error::{QuenchError, Result};
pub use spectral::{mode_coefficient, ModeCoefficients, Observable, WellConfig};
pub use survival::{
    asymptote_confined, asymptote_free, escape_integral, escape_probability_exact,
    escape_small_delta, survival_amplitude, transition_time, Method, SurvivalSeries,
};
pub use universal::{universal_f, UniversalCurve};
