//! Electromagnetic response of a coherently driven, incoherently pumped
//! five-level dense atomic gas with Lorentz-Lorenz local-field feedback.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atomsys;
pub mod error;
pub mod steady;
pub mod units;

pub use error::{Error, Result};
pub mod response;
pub mod index;
pub mod sweep;
