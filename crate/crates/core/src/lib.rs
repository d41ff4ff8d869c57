//! Link-level models for a time-index-modulated (TIM) symbiotic radio in which
//! a self-powered reconfigurable intelligent surface (RIS) harvests energy,
//! assists the primary link and piggybacks one bit per block.
//!
//! The crate is `no_std` and only needs `alloc`. Every routine that draws
//! randomness takes an explicit [`rand::Rng`], so callers control the streams.
//!
//! * [`channel`]: path loss, Rician draws and per-block channel realizations.
//! * [`txphy`]: constellations, index codebooks, TIM framing.
//! * [`ris`]: phase sets, reflection vectors, rectenna and power budgets.
//! * [`rx`]: noisy observations, the joint ML detector and the LLR pipeline.

#![no_std]
// `!(x >= 0.0)` guards are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod channel;
pub mod error;
mod math;
pub mod ris;
pub mod rx;
pub mod txphy;

pub use error::Error;
pub use num_complex::Complex64;

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    math::powf(10.0, (dbm - 30.0) / 10.0)
}

/// Converts a power in watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * math::log10(watts) + 30.0
}

/// Converts a ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    math::powf(10.0, db / 10.0)
}

/// Converts a linear ratio to dB.
pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * math::log10(ratio)
}
