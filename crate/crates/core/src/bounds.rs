//! Secret-key capacity bounds of the pure-loss channel.
//!
//! The strict functions reject transmittances at the singular endpoints. Curve
//! generation goes through [`BoundKind::curve_value`], which returns `+∞` at
//! η = 1 and `0` at η = 0 so that endpoints still render.

use std::f64::consts::LN_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quantities::ChannelParams;

fn open_unit(eta: f64) -> Result<f64> {
    if eta > 0.0 && eta < 1.0 {
        Ok(eta)
    } else {
        Err(domain("transmittance", eta, "(0, 1)"))
    }
}

fn neg_log2_one_minus(x: f64) -> f64 {
    -(-x).ln_1p() / LN_2
}

/// Reverse-coherent-information lower bound `−log₂(1−η)`.
pub fn rci_lower_bound(eta: f64) -> Result<f64> {
    plob_bound(eta)
}

/// Repeaterless capacity `−log₂(1−η)`.
pub fn plob_bound(eta: f64) -> Result<f64> {
    open_unit(eta).map(neg_log2_one_minus)
}

/// Squashed-entanglement upper bound `log₂((1+η)/(1−η))`.
pub fn tgw_bound(eta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eta) {
        return Err(domain("transmittance", eta, "[0, 1)"));
    }
    Ok((eta.ln_1p() - (-eta).ln_1p()) / LN_2)
}

/// Single-repeater bound `−log₂(1−√η)`.
pub fn srb_bound(eta: f64) -> Result<f64> {
    open_unit(eta).map(|e| neg_log2_one_minus(e.sqrt()))
}

/// Which transmittance a bound comparison uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundBasis {
    /// Fiber loss only; no device imperfections.
    #[default]
    FiberOnly,
    /// Fiber loss times detector efficiency.
    WithDetector,
}

impl BoundBasis {
    pub fn transmittance(self, channel: &ChannelParams) -> f64 {
        match self {
            Self::FiberOnly => channel.eta(),
            Self::WithDetector => channel.eta() * channel.detector_efficiency,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Plob,
    Srb,
    Tgw,
    Rci,
}

impl BoundKind {
    pub const ALL: [BoundKind; 4] = [Self::Plob, Self::Srb, Self::Tgw, Self::Rci];

    pub fn name(self) -> &'static str {
        match self {
            Self::Plob => "plob",
            Self::Srb => "srb",
            Self::Tgw => "tgw",
            Self::Rci => "rci",
        }
    }

    pub fn evaluate(self, eta: f64) -> Result<f64> {
        match self {
            Self::Plob => plob_bound(eta),
            Self::Srb => srb_bound(eta),
            Self::Tgw => tgw_bound(eta),
            Self::Rci => rci_lower_bound(eta),
        }
    }

    /// Total variant: `+∞` for η ≥ 1 and `0` for η ≤ 0.
    pub fn curve_value(self, eta: f64) -> f64 {
        if eta >= 1.0 {
            f64::INFINITY
        } else if eta <= 0.0 {
            0.0
        } else {
            // inside (0,1) every bound is defined
            self.evaluate(eta).unwrap_or(f64::NAN)
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BoundKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plob" => Ok(Self::Plob),
            "srb" => Ok(Self::Srb),
            "tgw" => Ok(Self::Tgw),
            "rci" => Ok(Self::Rci),
            other => Err(format!("unknown bound `{other}` (expected plob, srb, tgw, rci)")),
        }
    }
}

/// PLOB bound of the fiber alone, with no device imperfections counted.
/// Zero-length links return `+∞`.
pub fn absolute_plob(channel: &ChannelParams) -> f64 {
    plob_for_channel(channel, BoundBasis::FiberOnly)
}

/// PLOB bound evaluated on the chosen transmittance basis.
pub fn plob_for_channel(channel: &ChannelParams, basis: BoundBasis) -> f64 {
    BoundKind::Plob.curve_value(basis.transmittance(channel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::LOG2_E;

    #[test]
    fn exact_values() {
        assert!((plob_bound(0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((plob_bound(0.75).unwrap() - 2.0).abs() < 1e-12);
        assert!((rci_lower_bound(0.75).unwrap() - 2.0).abs() < 1e-12);
        assert!((tgw_bound(1.0 / 3.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((tgw_bound(0.6).unwrap() - 2.0).abs() < 1e-12);
        assert!((srb_bound(0.25).unwrap() - 1.0).abs() < 1e-12);
        assert!((srb_bound(9.0 / 16.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn direct_evaluation_oracles() {
        // 30-digit mpmath evaluations
        assert_relative_eq!(plob_bound(1e-6).unwrap(), 1.442_695_762_236_965e-6, max_relative = 1e-12);
        assert_relative_eq!(plob_bound(0.99).unwrap(), 6.643_856_189_774_725, max_relative = 1e-12);
        assert_relative_eq!(tgw_bound(1e-4).unwrap(), 2.885_390_091_395_894e-4, max_relative = 1e-12);
        assert_relative_eq!(srb_bound(1e-4).unwrap(), 1.449_956_969_511_508e-2, max_relative = 1e-12);
        assert_relative_eq!(rci_lower_bound(1e-4).unwrap(), 1.4427e-4, max_relative = 1e-4);
    }

    #[test]
    fn singular_endpoints() {
        for f in [plob_bound, srb_bound, rci_lower_bound] {
            assert!(f(0.0).is_err());
            assert!(f(1.0).is_err());
        }
        assert!(tgw_bound(1.0).is_err());
        assert_eq!(tgw_bound(0.0).unwrap(), 0.0);
        assert_eq!(BoundKind::Plob.curve_value(1.0), f64::INFINITY);
        assert_eq!(BoundKind::Srb.curve_value(0.0), 0.0);
    }

    #[test]
    fn channel_bounds() {
        let at_zero = ChannelParams::reference(0.0);
        assert_eq!(absolute_plob(&at_zero), f64::INFINITY);

        let ch = ChannelParams::reference(50.0);
        assert_relative_eq!(absolute_plob(&ch), 0.152_003_093_445_05, max_relative = 1e-10);
        assert_relative_eq!(
            plob_for_channel(&ch, BoundBasis::WithDetector),
            0.058_893_689_053_568_5,
            max_relative = 1e-10
        );
    }

    #[test]
    fn ordering_on_grid() {
        for i in 1..1000 {
            let eta = i as f64 / 1000.0;
            let plob = plob_bound(eta).unwrap();
            assert!(plob <= tgw_bound(eta).unwrap());
            assert!(plob <= srb_bound(eta).unwrap());
        }
    }

    #[test]
    fn small_eta_asymptotes() {
        let eta = 1e-6;
        assert!((plob_bound(eta).unwrap() / eta / LOG2_E - 1.0).abs() < 1e-4);
        // the srb ratio converges like 1 + √η/2, so 1e-4 needs η below 4e-8
        let eta = 1e-8;
        assert!((srb_bound(eta).unwrap() / eta.sqrt() / LOG2_E - 1.0).abs() < 1e-4);
    }

    #[test]
    fn parse_names() {
        assert_eq!("PLOB".parse::<BoundKind>().unwrap(), BoundKind::Plob);
        assert!("xyz".parse::<BoundKind>().is_err());
    }
}
