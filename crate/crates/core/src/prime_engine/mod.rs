//! Exact prime generation and Chebyshev-type prime statistics.
//!
//! θ-sums are accumulated with compensated summation in a fixed segment
//! order. `log p` is taken in double precision from the exact integer, so a
//! sum of n terms carries a relative error of at most about n·2^-50.

pub mod cache;
mod sieve;
mod theta;

pub use sieve::{map_segments, sieve_range, PrimeTable, MAX_SIEVE_HI, SEGMENT_ENTRIES, SEGMENT_SPAN};
pub use theta::{
    ap_error, ap_error_star, ap_error_star_many, ap_error_star_with, theta_all_classes,
    theta_progression, theta_sum,
};
