//! Key-rate analysis and pulse-level simulation for twin-field quantum key
//! distribution.
//!
//! * [`quantities`]: entropy, transmittance, channel parameters, phase slices.
//! * [`bounds`]: repeaterless and single-repeater capacity bounds.
//! * [`rates`]: the shared detection model, closed-form key rates, intensity
//!   optimisation and rate-versus-distance curves.
//! * [`engine`]: seeded Monte Carlo of TF/PM, NPP/PM-MDI and SNS runs.
//! * [`phase`]: fiber phase drift, compensation and interference error.
//! * [`stats`]: binomial errors, KS and χ² tests used to check simulations.

pub mod bounds;
pub mod engine;
pub mod error;
pub mod phase;
pub mod quadrature;
pub mod quantities;
pub mod rates;
pub mod stats;

pub use error::{Error, Result};
pub use quantities::{binary_entropy, channel_transmittance, ChannelParams, Phase, PhaseSliceIndex};
