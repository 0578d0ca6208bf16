//! Closed-form asymptotic key rates. Every rate is per pulse pair and clamped
//! at zero.

use crate::quantities::entropy_unchecked as h2;
use crate::rates::config::ProtocolConfig;
use crate::rates::detection::DetectionStats;

fn clamp(rate: f64) -> f64 {
    if rate.is_nan() {
        0.0
    } else {
        rate.max(0.0)
    }
}

/// Tagging-style twin-field rate `q{Q₁[1 − H(e₁)] − f·Q·H(E)}`.
pub fn tf_gllp_rate(stats: &DetectionStats, config: &ProtocolConfig) -> f64 {
    let positive = stats.single_photon_gain * (1.0 - h2(stats.single_photon_qber));
    let leaked = config.ec_efficiency * stats.gain * h2(stats.qber_z);
    clamp(config.sifting_factor * (positive - leaked))
}

/// One-way skeleton `N·[1 − H(e_ph)] − f·N·H(E)` with `N` the sifted
/// fraction per pulse.
pub fn tfstar_rate(sifted_fraction: f64, phase_error: f64, qber: f64, f: f64) -> f64 {
    clamp(sifted_fraction * (1.0 - h2(phase_error)) - f * sifted_fraction * h2(qber))
}

/// Phase-matching rate `(2/M)·Q·[1 − H(E^Z) − H(E^X)]`.
pub fn pm_rate(stats: &DetectionStats, config: &ProtocolConfig) -> f64 {
    let sifting = 2.0 / config.slice_count as f64;
    clamp(sifting * stats.gain * (1.0 - h2(stats.qber_z) - h2(stats.phase_error_x)))
}

/// Loss-only rate of the key/test-state protocol:
/// `(1 − e^{−2μ√η})·[1 − H((1 − e^{−4μ(1−√η)e^{−2μ√η}})/2)]`.
pub fn pmmdi_rate(mu: f64, eta: f64) -> f64 {
    let s = eta.sqrt();
    let gain = -(-2.0 * mu * s).exp_m1();
    let phase_error = -(-4.0 * mu * (1.0 - s) * (-2.0 * mu * s).exp()).exp_m1() / 2.0;
    clamp(gain * (1.0 - h2(phase_error)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::srb_bound;
    use crate::quantities::ChannelParams;
    use crate::rates::config::Protocol;
    use crate::rates::detection::{model_detection_stats, model_detection_stats_with, PhaseSpread};
    use crate::rates::optimize::optimize_intensity;
    use approx::assert_relative_eq;

    #[test]
    fn tfstar_examples() {
        assert_eq!(tfstar_rate(0.01, 0.0, 0.0, 1.15), 0.01);
        assert_eq!(tfstar_rate(0.01, 0.5, 0.01, 1.15), 0.0);
        // 30-digit reference evaluation
        assert_relative_eq!(
            tfstar_rate(0.01, 0.03, 0.01, 1.15),
            0.007_126_960_358_881_260,
            max_relative = 1e-12
        );
    }

    #[test]
    fn pmmdi_examples() {
        assert_relative_eq!(pmmdi_rate(0.3, 1.0), 1.0 - (-0.6f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(pmmdi_rate(0.1, 0.01), 0.007_791_969_564_562_379, max_relative = 1e-12);
    }

    #[test]
    fn pmmdi_square_root_asymptote() {
        for eta in [1e-6, 1e-7, 1e-8] {
            let opt = optimize_intensity(|mu| pmmdi_rate(mu, eta));
            let ratio = opt.rate / eta.sqrt();
            assert!((ratio - 0.0714).abs() < 0.002, "η={eta}: {ratio}");
        }
    }

    #[test]
    fn pmmdi_optimum_matches_dense_scan() {
        let eta = 1e-4;
        let opt = optimize_intensity(|mu| pmmdi_rate(mu, eta));
        let (lo, hi) = (1e-4f64.ln(), 10f64.ln());
        let best = (0..10_000)
            .map(|i| pmmdi_rate((lo + (hi - lo) * i as f64 / 9_999.0).exp(), eta))
            .fold(0.0, f64::max);
        assert!((opt.rate / best - 1.0).abs() < 1e-3);
        assert!(opt.rate >= best * (1.0 - 1e-12));
    }

    #[test]
    fn pmmdi_below_single_repeater_bound_on_curve_grid() {
        // the curve feeds the formula the detector-inclusive η·η_d²
        for step in 0..=120 {
            let ch = ChannelParams::reference(5.0 * step as f64);
            let (ta, tb) = ch.detection_transmittance();
            let r = optimize_intensity(|mu| pmmdi_rate(mu, ta * tb)).rate;
            let bound = crate::bounds::BoundKind::Srb.curve_value(ch.eta());
            assert!(r <= bound, "L={}", ch.length_km);
        }
    }

    #[test]
    fn pmmdi_can_exceed_srb_at_equal_transmittance() {
        // at short range the loss-only formula is not capped by the bound
        let eta = 0.2;
        let r = optimize_intensity(|mu| pmmdi_rate(mu, eta)).rate;
        assert!(r > srb_bound(eta).unwrap());
        let eta = 1e-3;
        assert!(optimize_intensity(|mu| pmmdi_rate(mu, eta)).rate < srb_bound(eta).unwrap());
    }

    #[test]
    fn pm_examples() {
        let cfg = ProtocolConfig::reference(Protocol::Pm);
        let stats = DetectionStats {
            gain: 1e-3,
            qber_z: 0.0,
            phase_error_x: 0.0,
            single_photon_gain: 0.0,
            single_photon_qber: 0.0,
            single_photon_yield: 0.0,
        };
        assert_relative_eq!(pm_rate(&stats, &cfg), 2.0 / 16.0 * 1e-3, max_relative = 1e-15);
        let noisy = DetectionStats { qber_z: 0.5, ..stats };
        assert_eq!(pm_rate(&noisy, &cfg), 0.0);
    }

    #[test]
    fn tf_gllp_ideal_limit() {
        let ch = ChannelParams::ideal(100.0, 0.2);
        for mu in [0.3, 1.0] {
            let cfg = ProtocolConfig::reference(Protocol::TfGllp).with_signal_intensity(mu);
            let stats = model_detection_stats_with(&ch, &cfg, PhaseSpread::Fixed(0.0)).unwrap();
            let expected = mu * (-mu).exp() * ch.eta().sqrt();
            assert_relative_eq!(tf_gllp_rate(&stats, &cfg), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn tf_gllp_reference_regression() {
        let ch = ChannelParams::reference(300.0);
        let cfg = ProtocolConfig::reference(Protocol::TfGllp);
        let opt = optimize_intensity(|mu| {
            let c = cfg.with_signal_intensity(mu);
            model_detection_stats(&ch, &c).map(|s| tf_gllp_rate(&s, &c)).unwrap_or(0.0)
        });
        assert!(opt.rate > 0.0);
        assert!(opt.rate < srb_bound(ch.eta()).unwrap());
    }
}
