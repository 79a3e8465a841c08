//! Adaptive network pruning for decentralized consensus and optimization.

// Negated comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod analysis;
pub mod error;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod mixing;
pub mod problems;
pub mod pruning;
pub mod stream;

pub use error::{Error, Result};
