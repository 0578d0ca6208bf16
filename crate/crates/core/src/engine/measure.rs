//! The middle node: a balanced beam splitter followed by two threshold
//! detectors.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::quantities::ChannelParams;
use crate::rates::detection::detector_means;

/// Detector pattern of one pulse pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    NoClick,
    D0Only,
    D1Only,
    DoubleClick,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [Self::NoClick, Self::D0Only, Self::D1Only, Self::DoubleClick];

    pub fn is_single(self) -> bool {
        matches!(self, Self::D0Only | Self::D1Only)
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }

    fn swapped(self) -> Self {
        match self {
            Self::D0Only => Self::D1Only,
            Self::D1Only => Self::D0Only,
            other => other,
        }
    }
}

/// Per-run detector constants, so the transmittances are computed once.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Detector {
    arm_a: f64,
    arm_b: f64,
    dark: f64,
    misalignment: f64,
}

impl Detector {
    pub(crate) fn new(channel: &ChannelParams) -> Self {
        let (arm_a, arm_b) = channel.detection_transmittance();
        Self {
            arm_a,
            arm_b,
            dark: channel.dark_count_prob,
            misalignment: channel.misalignment,
        }
    }

    /// Samples photon arrivals, dark counts and the misalignment flip.
    pub(crate) fn measure<R: Rng + ?Sized>(&self, intensity_a: f64, intensity_b: f64, delta_phi: f64, rng: &mut R) -> Outcome {
        let (n0, n1) = detector_means(self.arm_a * intensity_a, self.arm_b * intensity_b, delta_phi);
        let total = n0 + n1;
        let photons = if total > 0.0 {
            Poisson::new(total).map_or(0.0, |p| p.sample(rng))
        } else {
            0.0
        };
        // split the photons between the two output ports
        let (hit0, hit1) = if photons > 0.0 {
            let all_at_d1 = (n1 / total).powf(photons);
            let all_at_d0 = (n0 / total).powf(photons);
            let u: f64 = rng.random();
            if u < all_at_d1 {
                (false, true)
            } else if u < all_at_d1 + all_at_d0 {
                (true, false)
            } else {
                (true, true)
            }
        } else {
            (false, false)
        };
        let click0 = hit0 || rng.random::<f64>() < self.dark;
        let click1 = hit1 || rng.random::<f64>() < self.dark;
        let outcome = match (click0, click1) {
            (false, false) => Outcome::NoClick,
            (true, false) => Outcome::D0Only,
            (false, true) => Outcome::D1Only,
            (true, true) => Outcome::DoubleClick,
        };
        if outcome.is_single() && self.misalignment > 0.0 && rng.random::<f64>() < self.misalignment {
            outcome.swapped()
        } else {
            outcome
        }
    }
}

/// Samples Charlie's outcome for per-arm intensities (before the channel)
/// and relative phase `delta_phi`.
pub fn charlie_measure<R: Rng + ?Sized>(
    intensity_a: f64,
    intensity_b: f64,
    delta_phi: f64,
    channel: &ChannelParams,
    rng: &mut R,
) -> Outcome {
    Detector::new(channel).measure(intensity_a, intensity_b, delta_phi, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn noiseless(length_km: f64) -> ChannelParams {
        ChannelParams::ideal(length_km, 0.2)
    }

    #[test]
    fn constructive_interference_silences_d1() {
        let ch = noiseless(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let o = charlie_measure(1.0, 1.0, 0.0, &ch, &mut rng);
            assert!(!matches!(o, Outcome::D1Only | Outcome::DoubleClick));
            let o = charlie_measure(1.0, 1.0, PI, &ch, &mut rng);
            assert!(!matches!(o, Outcome::D0Only | Outcome::DoubleClick));
        }
    }

    #[test]
    fn dark_counts_only() {
        let mut ch = noiseless(10.0);
        ch.dark_count_prob = 0.1;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 200_000;
        let d0 = (0..n)
            .filter(|_| charlie_measure(0.0, 0.0, 0.0, &ch, &mut rng) == Outcome::D0Only)
            .count() as f64;
        let p = 0.1 * 0.9;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((d0 / n as f64 - p).abs() < 5.0 * sigma);
    }

    #[test]
    fn click_frequencies_follow_the_model() {
        let ch = ChannelParams::reference(20.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, b, phi) = (2.0, 1.0, 1.1);
        let det = Detector::new(&ch);
        let (n0, n1) = detector_means(det.arm_a * a, det.arm_b * b, phi);
        let (p0, p1) = crate::rates::detection::single_clicks(n0, n1, ch.dark_count_prob);
        let n = 400_000;
        let mut counts = [0u64; 4];
        for _ in 0..n {
            counts[charlie_measure(a, b, phi, &ch, &mut rng).index()] += 1;
        }
        let e = ch.misalignment;
        let expect0 = p0 * (1.0 - e) + p1 * e;
        let expect1 = p1 * (1.0 - e) + p0 * e;
        for (k, p) in [(1, expect0), (2, expect1)] {
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((counts[k] as f64 / n as f64 - p).abs() < 5.0 * sigma, "{k}: {counts:?} vs {p}");
        }
    }
}
