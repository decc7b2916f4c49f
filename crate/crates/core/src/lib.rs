//! Coupled agent-based epidemic and two-region input–output economy.

// `!(x >= 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod contacts;
pub mod coupling;
pub mod econ;
pub mod econio;
pub mod epidemic;
pub mod error;
pub mod industry;
pub mod output;
pub mod population;
pub mod rng;
pub mod shocks;
pub mod world;

pub use error::{Error, Result};
