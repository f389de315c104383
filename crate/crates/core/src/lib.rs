//! Arbitrary-order Grad and regularized moment methods for the
//! Boltzmann-BGK equation.

// index loops over several coefficient arrays read better than zipped iterators;
// `!(x > 0.0)` is used on purpose so that NaN is rejected
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod dvm;
pub mod error;
pub mod flux;
pub mod hermite;
pub mod projection;
pub mod regularization;
pub mod scenarios;
pub mod solver;
pub mod state;

pub use error::{Error, Result};
