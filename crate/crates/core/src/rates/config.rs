use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantities::validate_slice_count;

/// Protocol variants covered by the rate models and the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Original twin-field protocol with the tagging-style rate.
    TfGllp,
    /// Code-mode/test-mode twin-field variant with the one-way rate skeleton.
    TfStar,
    /// Phase matching.
    Pm,
    /// Key/test-state model with the closed-form loss-only rate.
    PmMdi,
    /// No phase post-selection.
    Npp,
    /// Sending or not sending.
    Sns,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Self::TfGllp => "tf_gllp",
            Self::TfStar => "tf_star",
            Self::Pm => "pm",
            Self::PmMdi => "pmmdi",
            Self::Npp => "npp",
            Self::Sns => "sns",
        }
    }

    /// Whether phases are post-selected by slice during reconciliation.
    pub fn uses_phase_slices(self) -> bool {
        matches!(self, Self::TfGllp | Self::Pm)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "tf_gllp" | "tf" => Ok(Self::TfGllp),
            "tf_star" | "tfstar" => Ok(Self::TfStar),
            "pm" => Ok(Self::Pm),
            "pmmdi" | "pm_mdi" => Ok(Self::PmMdi),
            "npp" => Ok(Self::Npp),
            "sns" => Ok(Self::Sns),
            other => Err(format!("unknown protocol `{other}`")),
        }
    }
}

/// Acceptance rule for sending-or-not-sending test pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnsCondition {
    /// `1 − |cos(ρ_A − ρ_B)| ≤ |λ|`: keeps pairs whose phases are nearly
    /// equal or nearly opposite.
    #[default]
    PhaseDifference,
    /// `1 − |cos ρ_A − cos ρ_B| ≤ |λ|`, evaluated exactly as written.
    CosineDifference,
}

impl SnsCondition {
    pub fn accepts(self, rho_a: f64, rho_b: f64, lambda: f64) -> bool {
        let lhs = match self {
            Self::PhaseDifference => 1.0 - (rho_a - rho_b).cos().abs(),
            Self::CosineDifference => 1.0 - (rho_a.cos() - rho_b.cos()).abs(),
        };
        lhs <= lambda.abs()
    }
}

/// Protocol parameters. Intensities are totals for the pulse pair; each party
/// sends half (`μ/2`, `ν/2`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub variant: Protocol,
    pub slice_count: u32,
    pub signal_intensity: f64,
    pub decoy_intensities: Vec<f64>,
    pub ec_efficiency: f64,
    pub sifting_factor: f64,
    /// Sending probability ε (SNS).
    pub send_prob: f64,
    /// Test-pair acceptance parameter λ (SNS).
    pub sns_test_param: f64,
    /// Test-state intensity μ′ (SNS).
    pub sns_test_intensity: f64,
    pub sns_condition: SnsCondition,
    /// Probability that a party picks the key (Z / code) mode (NPP, PM-MDI, SNS).
    pub key_mode_prob: f64,
    /// Selection weights over `[μ, decoys...]`; uniform when `None`.
    pub intensity_probs: Option<Vec<f64>>,
}

impl ProtocolConfig {
    /// Defaults from the reference key-rate figure (f = 1.15, M = 16) with
    /// decoys {0.1, 0} and ε = 0.1.
    pub fn reference(variant: Protocol) -> Self {
        Self {
            variant,
            slice_count: 16,
            signal_intensity: 0.4,
            decoy_intensities: vec![0.1, 0.0],
            ec_efficiency: 1.15,
            sifting_factor: 1.0,
            send_prob: 0.1,
            sns_test_param: 0.076,
            sns_test_intensity: 0.1,
            sns_condition: SnsCondition::PhaseDifference,
            key_mode_prob: 0.5,
            intensity_probs: None,
        }
    }

    pub fn with_variant(mut self, variant: Protocol) -> Self {
        self.variant = variant;
        self
    }

    /// Copy with a new signal intensity; decoys above it are dropped so the
    /// ordering invariant keeps holding during intensity scans.
    pub fn with_signal_intensity(&self, mu: f64) -> Self {
        let mut out = self.clone();
        out.signal_intensity = mu;
        if out.decoy_intensities.iter().any(|&d| d >= mu) {
            out.decoy_intensities.retain(|&d| d < mu);
            out.intensity_probs = None;
        }
        out
    }

    /// `[μ, decoys...]` in the order used for level indices.
    pub fn intensity_levels(&self) -> Vec<f64> {
        std::iter::once(self.signal_intensity)
            .chain(self.decoy_intensities.iter().copied())
            .collect()
    }

    /// Normalised selection weights for [`Self::intensity_levels`].
    pub fn level_weights(&self) -> Vec<f64> {
        let n = 1 + self.decoy_intensities.len();
        match &self.intensity_probs {
            Some(p) => {
                let total: f64 = p.iter().sum();
                p.iter().map(|w| w / total).collect()
            }
            None => vec![1.0 / n as f64; n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_slice_count(self.slice_count)?;
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.signal_intensity > 0.0 && self.signal_intensity.is_finite()) {
            return bad(format!("signal intensity must be positive, got {}", self.signal_intensity));
        }
        let mut previous = self.signal_intensity;
        for &d in &self.decoy_intensities {
            if !(d >= 0.0 && d < previous) {
                return bad(format!(
                    "decoy intensities must be distinct, non-negative and strictly decreasing below μ, got {:?}",
                    self.decoy_intensities
                ));
            }
            previous = d;
        }
        if !(self.ec_efficiency >= 1.0) {
            return bad(format!("error-correction efficiency must be ≥ 1, got {}", self.ec_efficiency));
        }
        if !(self.sifting_factor > 0.0 && self.sifting_factor <= 1.0) {
            return bad(format!("sifting factor must lie in (0, 1], got {}", self.sifting_factor));
        }
        if !(0.0..=1.0).contains(&self.send_prob) {
            return bad(format!("sending probability must lie in [0, 1], got {}", self.send_prob));
        }
        if !self.sns_test_param.is_finite() {
            return bad("sns_test_param must be finite".into());
        }
        if !(self.sns_test_intensity >= 0.0 && self.sns_test_intensity.is_finite()) {
            return bad(format!("SNS test intensity must be ≥ 0, got {}", self.sns_test_intensity));
        }
        if !(0.0..=1.0).contains(&self.key_mode_prob) {
            return bad(format!("key-mode probability must lie in [0, 1], got {}", self.key_mode_prob));
        }
        if let Some(p) = &self.intensity_probs {
            if p.len() != 1 + self.decoy_intensities.len() {
                return bad(format!(
                    "intensity_probs has {} entries but there are {} intensity levels",
                    p.len(),
                    1 + self.decoy_intensities.len()
                ));
            }
            if p.iter().any(|w| !(*w >= 0.0)) || p.iter().sum::<f64>() <= 0.0 {
                return bad("intensity_probs must be non-negative with a positive sum".into());
            }
        }
        Ok(())
    }
}
