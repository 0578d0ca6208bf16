//! Visibility-to-error mapping: a pair with relative phase Δφ sends the
//! fractions `(1 ± cos Δφ)/2` to the two detectors, so the error rate of the
//! interference is `ε = E[(1 − cos Δφ)/2] = (1 − V)/2`.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::quadrature::integrate;

const REL_TOL: f64 = 1e-6;
/// Gaussian tails beyond this many standard deviations are dropped.
const GAUSS_SPAN: f64 = 12.0;

#[derive(Debug, Clone, PartialEq)]
pub enum DeltaPhiDistribution {
    Fixed(f64),
    Gaussian { mean: f64, std: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Empirical samples, weighted equally.
    Samples(Vec<f64>),
}

fn error_at(delta_phi: f64) -> f64 {
    (1.0 - delta_phi.cos()) / 2.0
}

/// Mean interference error over a Δφ distribution.
pub fn interference_error(dist: &DeltaPhiDistribution) -> Result<f64> {
    Ok(match dist {
        DeltaPhiDistribution::Fixed(d) => error_at(*d),
        DeltaPhiDistribution::Gaussian { mean, std } => {
            if !(*std >= 0.0 && std.is_finite()) {
                return Err(domain("Gaussian phase spread", *std, "[0, ∞)"));
            }
            if *std == 0.0 {
                return Ok(error_at(*mean));
            }
            let norm = 1.0 / (std * (2.0 * PI).sqrt());
            let f = |x: f64| error_at(x) * norm * (-(x - mean).powi(2) / (2.0 * std * std)).exp();
            // split at the mean so the peak sits on a panel edge
            integrate(f, mean - GAUSS_SPAN * std, *mean, REL_TOL) + integrate(f, *mean, mean + GAUSS_SPAN * std, REL_TOL)
        }
        DeltaPhiDistribution::Uniform { lo, hi } => {
            if !(hi >= lo) {
                return Err(domain("uniform phase upper edge", *hi, "≥ lower edge"));
            }
            if hi == lo {
                return Ok(error_at(*lo));
            }
            integrate(error_at, *lo, *hi, REL_TOL) / (hi - lo)
        }
        DeltaPhiDistribution::Samples(s) => {
            if s.is_empty() {
                return Err(domain("sample count", 0.0, "≥ 1"));
            }
            s.iter().map(|&d| error_at(d)).sum::<f64>() / s.len() as f64
        }
    })
}

/// Closed form for a centred Gaussian: `(1 − e^{−σ²/2})/2`.
pub fn gaussian_error_closed_form(std: f64) -> f64 {
    -(-std * std / 2.0).exp_m1() / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn deterministic_offsets() {
        assert_eq!(interference_error(&DeltaPhiDistribution::Fixed(0.0)).unwrap(), 0.0);
        assert!((interference_error(&DeltaPhiDistribution::Fixed(FRAC_PI_2)).unwrap() - 0.5).abs() < 1e-15);
        assert!((interference_error(&DeltaPhiDistribution::Fixed(PI)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_matches_closed_form() {
        let e = interference_error(&DeltaPhiDistribution::Gaussian { mean: 0.0, std: 0.3 }).unwrap();
        assert!((e - 0.022_001_259_186_8).abs() < 1e-9);
        assert!((e - gaussian_error_closed_form(0.3)).abs() < 1e-9);
    }

    #[test]
    fn uniform_window() {
        let w = 0.4;
        let e = interference_error(&DeltaPhiDistribution::Uniform { lo: -w, hi: w }).unwrap();
        assert!((e - (1.0 - w.sin() / w) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn monotone_in_spread_and_bounded() {
        let mut prev = 0.0;
        for i in 1..60 {
            let std = i as f64 * 0.05;
            let e = interference_error(&DeltaPhiDistribution::Gaussian { mean: 0.0, std }).unwrap();
            assert!(e > prev && e <= 0.5);
            prev = e;
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(interference_error(&DeltaPhiDistribution::Samples(vec![])).is_err());
        assert!(interference_error(&DeltaPhiDistribution::Gaussian { mean: 0.0, std: -1.0 }).is_err());
    }
}
