//! Log-periodic power-law (LPPL) toolkit: fit the model
//!
//! ```text
//! p(t) = A + B·(tc − t)^α + (tc − t)^α·(C1·cos(ω ln(tc − t)) + C2·sin(ω ln(tc − t)))
//! ```
//!
//! to a price series, locate the critical time tc by separable least
//! squares (exact linear solve profiled inside a multistart grid search
//! with simplex refinement), scan fitting windows for tc stability, and
//! turn critical times into calendar crash-window forecasts.

// `!(x > 0.0)` guards reject NaN alongside out-of-range values; indexed
// loops in the numeric kernels mirror the textbook algorithm statements
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod fitting;
pub mod forecast;
pub mod model;
pub mod series;
pub mod synth;
pub mod timebase;
pub mod windows;

pub use error::{Error, Result};
