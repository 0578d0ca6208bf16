//! Elementary quantities shared by the rate models, the simulator and the
//! phase-channel tools: binary entropy, fiber transmittance, channel
//! parameters and phase-slice arithmetic.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Binary Shannon entropy in bits, with the limit convention `0·log 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain("binary entropy argument", x, "[0, 1]"));
    }
    Ok(entropy_unchecked(x))
}

/// Entropy for arguments already known to lie in `[0, 1]`; values outside are
/// clamped. Used inside rate formulas where error rates come from models.
pub(crate) fn entropy_unchecked(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// Fiber transmittance `10^(−α·L/10)` for a length in km and loss in dB/km.
pub fn channel_transmittance(length_km: f64, loss_db_per_km: f64) -> f64 {
    db_to_transmittance(loss_db_per_km * length_km)
}

/// Converts an attenuation in dB to a power transmittance.
pub fn db_to_transmittance(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// Symmetric-link channel description between a user and the middle node.
///
/// `length_km` is the full Alice–Bob distance; each arm covers half of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub length_km: f64,
    pub loss_db_per_km: f64,
    pub detector_efficiency: f64,
    pub dark_count_prob: f64,
    pub misalignment: f64,
    /// Extra loss applied to Bob's arm only.
    #[serde(default)]
    pub asymmetry_db: f64,
}

impl ChannelParams {
    /// The parameter set used for the reference key-rate figure:
    /// 0.2 dB/km fiber, 40 % detectors, 10⁻⁷ dark counts, 1.5 % misalignment.
    pub fn reference(length_km: f64) -> Self {
        Self {
            length_km,
            loss_db_per_km: 0.2,
            detector_efficiency: 0.4,
            dark_count_prob: 1e-7,
            misalignment: 0.015,
            asymmetry_db: 0.0,
        }
    }

    /// Lossless fiber, perfect detectors, no noise.
    pub fn ideal(length_km: f64, loss_db_per_km: f64) -> Self {
        Self {
            length_km,
            loss_db_per_km,
            detector_efficiency: 1.0,
            dark_count_prob: 0.0,
            misalignment: 0.0,
            asymmetry_db: 0.0,
        }
    }

    pub fn with_length(mut self, length_km: f64) -> Self {
        self.length_km = length_km;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_km >= 0.0 && self.length_km.is_finite()) {
            return Err(domain("length_km", self.length_km, "[0, ∞)"));
        }
        if !(self.loss_db_per_km >= 0.0 && self.loss_db_per_km.is_finite()) {
            return Err(domain("loss_db_per_km", self.loss_db_per_km, "[0, ∞)"));
        }
        if !(0.0..=1.0).contains(&self.detector_efficiency) {
            return Err(domain(
                "detector_efficiency",
                self.detector_efficiency,
                "[0, 1]",
            ));
        }
        if !(0.0..1.0).contains(&self.dark_count_prob) {
            return Err(domain("dark_count_prob", self.dark_count_prob, "[0, 1)"));
        }
        if !(0.0..=0.5).contains(&self.misalignment) {
            return Err(domain("misalignment", self.misalignment, "[0, 0.5]"));
        }
        if !self.asymmetry_db.is_finite() {
            return Err(Error::InvalidConfig("asymmetry_db must be finite".into()));
        }
        Ok(())
    }

    /// Total fiber transmittance η between Alice and Bob.
    pub fn eta(&self) -> f64 {
        channel_transmittance(self.length_km, self.loss_db_per_km)
    }

    /// Fiber-only transmittance of (Alice's arm, Bob's arm).
    pub fn arm_transmittance(&self) -> (f64, f64) {
        let arm = self.eta().sqrt();
        (arm, arm * db_to_transmittance(self.asymmetry_db))
    }

    /// Arm transmittance including the detector efficiency.
    pub fn detection_transmittance(&self) -> (f64, f64) {
        let (a, b) = self.arm_transmittance();
        (a * self.detector_efficiency, b * self.detector_efficiency)
    }
}

/// A phase reduced to `[0, 2π)` at construction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Phase(f64);

impl Phase {
    pub fn new(radians: f64) -> Self {
        let r = radians.rem_euclid(TAU);
        // rem_euclid can round up to exactly 2π for tiny negative inputs
        Self(if r >= TAU { 0.0 } else { r })
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

impl From<f64> for Phase {
    fn from(value: f64) -> Self {
        Self::new(value)
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_signed(radians: f64) -> f64 {
    let r = Phase::new(radians).radians();
    if r > std::f64::consts::PI {
        r - TAU
    } else {
        r
    }
}

/// One of `M` equal sectors of `[0, 2π)`; slice `k` covers `[2πk/M, 2π(k+1)/M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PhaseSliceIndex {
    index: u32,
    slice_count: u32,
}

impl PhaseSliceIndex {
    pub fn index(self) -> u32 {
        self.index
    }

    pub fn slice_count(self) -> u32 {
        self.slice_count
    }

    /// Lower edge of the slice in radians.
    pub fn lower_edge(self) -> f64 {
        TAU * self.index as f64 / self.slice_count as f64
    }

    /// The slice diametrically opposite (shifted by π).
    pub fn opposite(self) -> Self {
        Self {
            index: (self.index + self.slice_count / 2) % self.slice_count,
            slice_count: self.slice_count,
        }
    }
}

pub fn validate_slice_count(slice_count: u32) -> Result<()> {
    if slice_count < 2 || slice_count % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "slice count must be even and at least 2, got {slice_count}"
        )));
    }
    Ok(())
}

/// Maps a phase to the slice containing it.
pub fn slice_of_phase(phase: Phase, slice_count: u32) -> Result<PhaseSliceIndex> {
    validate_slice_count(slice_count)?;
    Ok(slice_unchecked(phase, slice_count))
}

pub(crate) fn slice_unchecked(phase: Phase, slice_count: u32) -> PhaseSliceIndex {
    let raw = (phase.radians() * slice_count as f64 / TAU).floor() as u32;
    PhaseSliceIndex {
        index: raw.min(slice_count - 1),
        slice_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn entropy_reference_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // 30-digit evaluation: 0.499915958164527995...
        assert_relative_eq!(
            binary_entropy(0.11).unwrap(),
            0.499_915_958_164_528,
            epsilon = 1e-14
        );
    }

    #[test]
    fn entropy_rejects_out_of_range() {
        assert!(binary_entropy(-1e-9).is_err());
        assert!(binary_entropy(1.0 + 1e-9).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn transmittance_values() {
        assert_eq!(channel_transmittance(0.0, 0.2), 1.0);
        assert_relative_eq!(channel_transmittance(50.0, 0.2), 0.1, max_relative = 1e-14);
        assert_relative_eq!(channel_transmittance(100.0, 0.2), 0.01, max_relative = 1e-14);
    }

    #[test]
    fn symmetric_arms_are_root_eta() {
        let ch = ChannelParams::reference(200.0);
        let (a, b) = ch.arm_transmittance();
        assert_relative_eq!(a, ch.eta().sqrt(), max_relative = 1e-15);
        assert_eq!(a, b);
        let asym = ChannelParams {
            asymmetry_db: 10.0,
            ..ch
        };
        let (a2, b2) = asym.arm_transmittance();
        assert_relative_eq!(b2 / a2, 0.1, max_relative = 1e-14);
    }

    #[test]
    fn channel_validation() {
        assert!(ChannelParams::reference(10.0).validate().is_ok());
        let bad = ChannelParams {
            misalignment: 0.7,
            ..ChannelParams::reference(10.0)
        };
        assert!(bad.validate().is_err());
        let bad = ChannelParams {
            dark_count_prob: 1.0,
            ..ChannelParams::reference(10.0)
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn slice_examples() {
        assert_eq!(slice_of_phase(Phase::new(0.0), 16).unwrap().index(), 0);
        assert_eq!(slice_of_phase(Phase::new(PI), 16).unwrap().index(), 8);
        assert_eq!(
            slice_of_phase(Phase::new(TAU - 1e-12), 16).unwrap().index(),
            15
        );
        assert!(slice_of_phase(Phase::new(1.0), 15).is_err());
        assert!(slice_of_phase(Phase::new(1.0), 0).is_err());
    }

    #[test]
    fn phase_reduction_is_canonical() {
        assert_eq!(Phase::new(TAU).radians(), 0.0);
        assert_eq!(Phase::new(-1e-300).radians(), 0.0);
        assert_relative_eq!(Phase::new(-PI / 2.0).radians(), 1.5 * PI);
        assert_relative_eq!(wrap_signed(1.5 * PI), -0.5 * PI, epsilon = 1e-15);
        assert_eq!(wrap_signed(PI), PI);
    }

    #[test]
    fn opposite_slice() {
        let s = slice_of_phase(Phase::new(0.1), 16).unwrap();
        assert_eq!(s.opposite().index(), 8);
        assert_eq!(s.opposite().opposite(), s);
    }

    #[test]
    fn slice_histogram_is_uniform() {
        use rand::{Rng, SeedableRng};
        let m = 16u32;
        let n = 1_000_000u64;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut hist = vec![0u64; m as usize];
        for _ in 0..n {
            let p = Phase::new(rng.random::<f64>() * TAU);
            hist[slice_unchecked(p, m).index() as usize] += 1;
        }
        let p = 1.0 / m as f64;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for count in hist {
            assert!((count as f64 - n as f64 * p).abs() < 5.0 * sigma);
        }
    }

    proptest! {
        #[test]
        fn entropy_is_symmetric(x in 0.0f64..=1.0) {
            let a = binary_entropy(x).unwrap();
            let b = binary_entropy(1.0 - x).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn transmittance_is_multiplicative(l1 in 0.0f64..400.0, l2 in 0.0f64..400.0, alpha in 0.0f64..0.5) {
            let joint = channel_transmittance(l1 + l2, alpha);
            let split = channel_transmittance(l1, alpha) * channel_transmittance(l2, alpha);
            prop_assert!((joint - split).abs() <= 1e-12 * joint.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn slice_contains_its_phase(x in -20.0f64..20.0, half in 1u32..64) {
            let m = 2 * half;
            let p = Phase::new(x);
            let s = slice_of_phase(p, m).unwrap();
            let lo = s.lower_edge();
            let hi = TAU * (s.index() + 1) as f64 / m as f64;
            prop_assert!(p.radians() >= lo - 1e-12 && p.radians() < hi + 1e-12);
        }
    }
}
