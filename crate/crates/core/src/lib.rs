//! Analysis toolkit for dual-hop relay links over cascaded (n*Rayleigh) fading.
//!
//! The crate evaluates outage probability for selective decode-and-forward
//! ([`sdf`]) and selective amplify-and-forward ([`saf`]) relay selection,
//! high-SNR diversity order and coding gain, statistical-CSI power allocation
//! ([`power_alloc`]), and Naive Bayes classification of the cascade order
//! ([`classifier`]). Every closed form is paired with the seeded Monte-Carlo
//! engine in [`montecarlo`], which simulates the protocols over the exact
//! product-of-Rayleigh channel.
//!
//! All quantities in the library are linear (powers, SNRs, mean channel
//! gains). Decibel conversion happens only at the CLI boundary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod classifier;
pub mod cli;
mod error;
pub mod montecarlo;
pub mod numeric;
pub mod order_stats;
pub mod power_alloc;
pub mod saf;
pub mod sdf;
pub mod special;

pub use error::{Error, Result};

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to decibels.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
