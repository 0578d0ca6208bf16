//! Phase-offset estimation from reference-pulse clicks.
//!
//! In-phase reference pulses hit D0 with probability `(1 + cos Δφ)/2`. A
//! second block carries a known −π/2 modulation, so its D0 probability is
//! `(1 + sin Δφ)/2`. Together they fix the sign that arccos alone loses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Click counts of one reference block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReferenceCounts {
    pub d0: u64,
    pub d1: u64,
}

impl ReferenceCounts {
    pub fn new(d0: u64, d1: u64) -> Self {
        Self { d0, d1 }
    }

    pub fn total(&self) -> u64 {
        self.d0 + self.d1
    }

    /// Visibility `(n₀ − n₁)/(n₀ + n₁)`.
    fn contrast(&self) -> f64 {
        (self.d0 as f64 - self.d1 as f64) / self.total() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseEstimate {
    /// Δφ̂ in (−π, π]; in [0, π] without a quadrature block.
    pub delta_phi: f64,
    /// Standard error from binomial propagation.
    pub std_err: f64,
}

/// Estimates Δφ from in-phase counts and an optional quadrature block.
pub fn estimate_phase_offset(in_phase: ReferenceCounts, quadrature: Option<ReferenceCounts>) -> Result<PhaseEstimate> {
    if in_phase.total() == 0 {
        return Err(Error::ZeroClicks);
    }
    let c = in_phase.contrast();
    let var_c = (1.0 - c * c) / in_phase.total() as f64;
    match quadrature {
        Some(q) if q.total() > 0 => {
            let s = q.contrast();
            let var_s = (1.0 - s * s) / q.total() as f64;
            let r2 = c * c + s * s;
            let std_err = if r2 > 0.0 {
                (c * c * var_s + s * s * var_c).sqrt() / r2
            } else {
                std::f64::consts::PI
            };
            // atan2 returns [−π, π]; fold −π onto π
            let d = s.atan2(c);
            let delta_phi = if d <= -std::f64::consts::PI { std::f64::consts::PI } else { d };
            Ok(PhaseEstimate { delta_phi, std_err })
        }
        _ => Ok(PhaseEstimate { delta_phi: c.clamp(-1.0, 1.0).acos(), std_err: 1.0 / (in_phase.total() as f64).sqrt() }),
    }
}
