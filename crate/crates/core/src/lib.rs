//! Link-level simulation and diversity analysis for bit-interleaved coded
//! multiple beamforming over OFDM (BICMB-OFDM) in distributed-subarray
//! millimeter-wave MIMO channels.
//!
//! The simulation chain per Monte Carlo trial is
//! [`channel`] → [`beamforming`] → [`bicmb`] → [`codec`], orchestrated by
//! [`harness`]. Closed-form PEP and union bounds, diversity prediction and
//! slope estimation live in [`analysis`].

pub mod analysis;
pub mod beamforming;
pub mod bicmb;
pub mod channel;
pub mod codec;
pub mod config;
mod error;
pub mod harness;
pub mod validate;

pub use config::SystemConfig;
pub use error::{Error, Result};

pub use num_complex::Complex64;
