//! Numerical core for variable-exponent harmonic analysis on discretized boxes.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
pub mod atoms;
pub mod error;
pub mod fit;
pub mod grid;
pub mod lebesgue;
pub mod maximal;
pub mod potentials;
pub mod random;
pub mod verdict;
pub mod weights;

pub use error::{Error, Result};
pub use verdict::Verdict;
