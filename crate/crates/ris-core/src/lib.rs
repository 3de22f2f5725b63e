//! Remaining-power analysis for reconfigurable intelligent surface (RIS)
//! pixels whose reflection amplitude depends on the configured phase, under
//! uniform and von Mises phase errors, together with a near-field
//! line-of-sight channel and spectral-efficiency bounds.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circular_noise;
pub mod error;
pub mod nf_channel;
pub mod pda;
// Kronrod nodes are tabulated to more digits than f64 holds.
#[allow(clippy::excessive_precision)]
pub mod quadrature;
pub mod remaining_power;
pub mod se_bounds;
pub mod special_functions;

pub use error::{Result, RisError};
