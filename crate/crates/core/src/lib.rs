#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod bench;
pub mod density;
pub mod dirac;
pub mod dist;
pub mod error;
pub mod expr;
pub mod mc;
pub mod metrics;
pub mod pprvg;
pub mod quad;
pub mod rng;
pub mod special;
pub mod transform;

pub use error::{Error, Result};
