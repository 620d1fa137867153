//! Computational laboratory for the GPY prime-tuples sieve
//! method: sieve weights, singular series, exact combinatorial kernels,
//! asymptotic main terms and Bombieri–Vinogradov-type statistics.

// Range checks are written as `!(x > a)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod bv;
pub mod combinatorics;
pub mod error;
pub mod oracle;
pub mod par;
pub mod prime_engine;
pub mod sieve_weights;
pub mod singular_series;
pub mod sum;
pub mod tuple_core;

pub use error::{Error, Result};
