// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod canonical;
pub mod cli;
pub mod convergence;
pub mod dynamics;
pub mod error;
pub mod ibm;
pub mod invasion;
pub mod io;
pub mod model;
pub mod numerics;
pub mod rng;
pub mod scenario;
pub mod tss;

pub use error::{Error, Result};
