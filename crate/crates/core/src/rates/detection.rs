//! Threshold-detector model shared by the analytic rate formulas.
//!
//! Each party sends a coherent pulse of half the configured intensity. After
//! the arms (fiber loss times detector efficiency), the middle beam splitter
//! sends mean photon numbers
//! `n₀ = (a + b + 2√(ab)·cos Δφ)/2` and `n₁ = (a + b − 2√(ab)·cos Δφ)/2`
//! to the two detectors, and each detector clicks with probability
//! `1 − (1 − p_d)·e^{−nᵢ}`. Quantities are averaged over the relative-phase
//! distribution of the relevant pulse group with adaptive quadrature.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quadrature::integrate;
use crate::quantities::ChannelParams;
use crate::rates::config::{Protocol, ProtocolConfig};

const REL_TOL: f64 = 1e-10;

/// Gains and error rates of the signal pulses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionStats {
    /// Probability of exactly one click per signal pulse pair, Q_μ.
    pub gain: f64,
    /// Bit error rate of the sifted key, E^Z.
    pub qber_z: f64,
    /// Phase error rate, E^X.
    pub phase_error_x: f64,
    /// Q₁,μ = μ e^{−μ} Y₁.
    pub single_photon_gain: f64,
    /// e₁.
    pub single_photon_qber: f64,
    /// Y₁.
    pub single_photon_yield: f64,
}

/// Distribution of the relative phase Δφ between the two pulses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseSpread {
    /// Deterministic Δφ.
    Fixed(f64),
    /// Both random phases drawn from the same one of `M` slices, giving a
    /// triangular Δφ on `[−2π/M, 2π/M]`.
    SameSlice(u32),
    /// Independent uniform phases.
    Uniform,
}

impl PhaseSpread {
    /// Expectation of `f(Δφ)`.
    pub fn mean<F: Fn(f64) -> f64>(self, f: F) -> f64 {
        match self {
            Self::Fixed(d) => f(d),
            Self::Uniform => {
                (integrate(&f, 0.0, PI, REL_TOL) + integrate(&f, PI, TAU, REL_TOL)) / TAU
            }
            Self::SameSlice(m) => {
                let w = TAU / m as f64;
                let density = |x: f64| (1.0 - x.abs() / w) / w;
                integrate(|x| f(x) * density(x), -w, 0.0, REL_TOL)
                    + integrate(|x| f(x) * density(x), 0.0, w, REL_TOL)
            }
        }
    }
}

/// Probabilities of (only D0, only D1) for given detector mean photon numbers.
pub(crate) fn single_clicks(n0: f64, n1: f64, dark: f64) -> (f64, f64) {
    let silent0 = (1.0 - dark) * (-n0).exp();
    let silent1 = (1.0 - dark) * (-n1).exp();
    ((1.0 - silent0) * silent1, (1.0 - silent1) * silent0)
}

/// Mean photon numbers at (D0, D1) for post-arm intensities `a`, `b`.
pub(crate) fn detector_means(a: f64, b: f64, delta_phi: f64) -> (f64, f64) {
    let cross = 2.0 * (a * b).sqrt() * delta_phi.cos();
    (((a + b + cross) / 2.0).max(0.0), ((a + b - cross) / 2.0).max(0.0))
}

/// `a(1−b) + b(1−a)`: composition of two independent bit flips.
pub(crate) fn flip_compose(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

struct Pair {
    a: f64,
    b: f64,
    dark: f64,
}

impl Pair {
    fn new(channel: &ChannelParams, intensity_a: f64, intensity_b: f64) -> Self {
        let (ta, tb) = channel.detection_transmittance();
        Self {
            a: ta * intensity_a,
            b: tb * intensity_b,
            dark: channel.dark_count_prob,
        }
    }

    fn clicks(&self, delta_phi: f64) -> (f64, f64) {
        let (n0, n1) = detector_means(self.a, self.b, delta_phi);
        single_clicks(n0, n1, self.dark)
    }

    fn gain(&self, spread: PhaseSpread) -> f64 {
        spread.mean(|d| {
            let (r, w) = self.clicks(d);
            r + w
        })
    }

    /// Fraction of single clicks landing on the detector opposite to the one
    /// selected by Δφ = 0.
    fn wrong_fraction(&self, spread: PhaseSpread) -> f64 {
        let total = self.gain(spread);
        if total <= 0.0 {
            return 0.5;
        }
        spread.mean(|d| self.clicks(d).1) / total
    }
}

/// Mean of `(1 − cos θ)/2` for θ uniform on `[−π/M, π/M]`.
pub fn slice_discretization_error(slice_count: u32) -> f64 {
    let half = PI / slice_count as f64;
    (1.0 - half.sin() / half) / 2.0
}

/// Relative-phase distributions of (all signal pairs, sifted key pairs).
fn default_spreads(config: &ProtocolConfig) -> (PhaseSpread, PhaseSpread) {
    match config.variant {
        Protocol::TfGllp | Protocol::Pm => {
            (PhaseSpread::Uniform, PhaseSpread::SameSlice(config.slice_count))
        }
        Protocol::TfStar | Protocol::Npp | Protocol::PmMdi | Protocol::Sns => {
            (PhaseSpread::Fixed(0.0), PhaseSpread::Fixed(0.0))
        }
    }
}

/// Model statistics for the configured protocol.
pub fn model_detection_stats(channel: &ChannelParams, config: &ProtocolConfig) -> Result<DetectionStats> {
    let (gain_spread, key_spread) = default_spreads(config);
    compute(channel, config, gain_spread, key_spread)
}

/// Model statistics with a forced relative-phase distribution for both the
/// gain and the sifted key.
pub fn model_detection_stats_with(
    channel: &ChannelParams,
    config: &ProtocolConfig,
    spread: PhaseSpread,
) -> Result<DetectionStats> {
    compute(channel, config, spread, spread)
}

fn compute(
    channel: &ChannelParams,
    config: &ProtocolConfig,
    gain_spread: PhaseSpread,
    key_spread: PhaseSpread,
) -> Result<DetectionStats> {
    channel.validate()?;
    config.validate()?;
    let mu = config.signal_intensity;
    let dark = channel.dark_count_prob;
    let e_d = channel.misalignment;

    let (gain, qber_z) = if config.variant == Protocol::Sns {
        sns_z_basis(channel, config)
    } else {
        let pair = Pair::new(channel, mu / 2.0, mu / 2.0);
        let gain = pair.gain(gain_spread);
        let qber = flip_compose(pair.wrong_fraction(key_spread), e_d);
        (gain, qber)
    };

    let dark_only = 2.0 * dark * (1.0 - dark);
    let dark_fraction = if gain > 0.0 { (dark_only / gain).min(1.0) } else { 1.0 };
    let interference = flip_compose(slice_discretization_error(config.slice_count), e_d);
    let phase_error_x = (1.0 - dark_fraction) * interference + dark_fraction / 2.0;

    let (ta, tb) = channel.detection_transmittance();
    let t = 0.5 * (ta + tb);
    let y0 = 1.0 - (1.0 - dark).powi(2);
    let y1 = 1.0 - (1.0 - t) * (1.0 - dark).powi(2);
    let single_interference = flip_compose(key_spread.mean(|d| (1.0 - d.cos()) / 2.0), e_d);
    let e1 = if y1 > 0.0 {
        (y0 / 2.0 + (y1 - y0) * single_interference) / y1
    } else {
        0.5
    };

    Ok(DetectionStats {
        gain,
        qber_z,
        phase_error_x,
        single_photon_gain: mu * (-mu).exp() * y1,
        single_photon_qber: e1,
        single_photon_yield: y1,
    })
}

/// Z-basis gain and bit error rate for sending-or-not-sending. An error needs
/// both or neither party to send; misalignment cannot flip a Z bit.
fn sns_z_basis(channel: &ChannelParams, config: &ProtocolConfig) -> (f64, f64) {
    let eps = config.send_prob;
    let half = config.signal_intensity / 2.0;
    let single = |pair: Pair, spread| pair.gain(spread);
    let both = single(Pair::new(channel, half, half), PhaseSpread::Uniform);
    let alice = single(Pair::new(channel, half, 0.0), PhaseSpread::Fixed(0.0));
    let bob = single(Pair::new(channel, 0.0, half), PhaseSpread::Fixed(0.0));
    let none = single(Pair::new(channel, 0.0, 0.0), PhaseSpread::Fixed(0.0));
    let wrong = eps * eps * both + (1.0 - eps) * (1.0 - eps) * none;
    let right = eps * (1.0 - eps) * (alice + bob);
    let gain = wrong + right;
    let qber = if gain > 0.0 { wrong / gain } else { 0.5 };
    (gain, qber)
}
