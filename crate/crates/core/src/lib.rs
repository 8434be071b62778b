//! Link-level Monte Carlo building blocks for a massive-MIMO NOMA downlink
//! that can shape its multicarrier pulses either with a conventional
//! cyclic-prefix FFT-OFDM bank or with an orthonormal discrete wavelet
//! filter bank.
//!
//! The crate is organised around the signal chain:
//!
//! ```text
//! bits -> [modem] -> symbols -> [noma] superposition -> [ofdm|wavelet] block
//!      -> [channel] ZF beamforming + fading + AWGN -> equalization
//!      -> [ofdm|wavelet] demodulation -> [noma] SIC -> [metrics]
//! ```
//!
//! Everything is deterministic given explicit seeds; see [`sim`] for the
//! seed-derivation and sweep orchestration contracts.

pub mod channel;
pub mod error;
pub mod metrics;
pub mod modem;
pub mod noma;
pub mod ofdm;
pub mod signal;
pub mod sim;
pub mod wavelet;

pub use error::{Error, Result};

/// Complex baseband sample type used throughout the crate.
pub type C64 = num_complex::Complex64;
