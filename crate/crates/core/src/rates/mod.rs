//! Analytic key-rate models and the per-distance intensity search.

pub mod config;
pub mod curve;
pub mod detection;
pub mod formulas;
pub mod optimize;

pub use config::{Protocol, ProtocolConfig, SnsCondition};
pub use curve::{generate_rate_curve, CurveOptions, RateCurvePoint};
pub use detection::{model_detection_stats, model_detection_stats_with, DetectionStats, PhaseSpread};
pub use formulas::{pm_rate, pmmdi_rate, tf_gllp_rate, tfstar_rate};
pub use optimize::{optimize_intensity, IntensityOptimum};

use crate::quantities::ChannelParams;

/// Closed-form rate at the configured intensity. `None` for protocols whose
/// rate is only available from simulated tallies (NPP and SNS).
pub fn analytic_rate(channel: &ChannelParams, config: &ProtocolConfig) -> Option<f64> {
    let stats = || model_detection_stats(channel, config).ok();
    match config.variant {
        Protocol::TfGllp => Some(stats().map_or(0.0, |s| tf_gllp_rate(&s, config))),
        Protocol::TfStar => Some(stats().map_or(0.0, |s| {
            tfstar_rate(config.sifting_factor * s.gain, s.phase_error_x, s.qber_z, config.ec_efficiency)
        })),
        Protocol::Pm => Some(stats().map_or(0.0, |s| pm_rate(&s, config))),
        Protocol::PmMdi => {
            let (ta, tb) = channel.detection_transmittance();
            Some(pmmdi_rate(config.signal_intensity, ta * tb))
        }
        Protocol::Npp | Protocol::Sns => None,
    }
}

/// Optimises the closed-form rate over the signal intensity.
pub fn optimized_rate(channel: &ChannelParams, config: &ProtocolConfig) -> Option<IntensityOptimum> {
    analytic_rate(channel, config)?;
    Some(optimize_intensity(|mu| {
        analytic_rate(channel, &config.with_signal_intensity(mu)).unwrap_or(0.0)
    }))
}
