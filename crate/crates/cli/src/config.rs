//! The run configuration file: a TOML document with `[channel]`,
//! `[protocol]` and `[simulation]` sections. Every key is required except
//! `protocol.intensity_probs`; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use twinfield::rates::{Protocol, ProtocolConfig, SnsCondition};
use twinfield::ChannelParams;

use crate::error::{CliError, CliResult};

pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub channel: ChannelSection,
    pub protocol: ProtocolSection,
    pub simulation: SimulationSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub loss_db_per_km: f64,
    pub detector_efficiency: f64,
    pub dark_count_prob: f64,
    pub misalignment: f64,
    pub asymmetry_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub slice_count: u32,
    pub signal_intensity: f64,
    pub decoy_intensities: Vec<f64>,
    pub ec_efficiency: f64,
    pub sifting_factor: f64,
    pub send_prob: f64,
    pub sns_test_param: f64,
    pub sns_test_intensity: f64,
    pub sns_condition: SnsCondition,
    pub key_mode_prob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity_probs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub pulses: u64,
    pub seed: u64,
}

impl RunConfig {
    /// Parses and validates a configuration document.
    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config {
            origin: origin.to_string(),
            message: e.message().to_string(),
        })?;
        config.validate(origin)?;
        Ok(config)
    }

    /// Reads `path`, or the bundled defaults when `None`.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Self::parse(DEFAULT_CONFIG, "<default>"),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| CliError::Io { path: p.to_path_buf(), source })?;
                Self::parse(&text, &p.display().to_string())
            }
        }
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    fn validate(&self, origin: &str) -> CliResult<()> {
        let wrap = |e: twinfield::Error| CliError::Config { origin: origin.to_string(), message: e.to_string() };
        self.channel(0.0).validate().map_err(wrap)?;
        self.protocol(Protocol::TfGllp).validate().map_err(wrap)?;
        if self.simulation.seed > i64::MAX as u64 {
            return Err(CliError::Config {
                origin: origin.to_string(),
                message: "simulation.seed must fit in a signed 64-bit integer".into(),
            });
        }
        Ok(())
    }

    pub fn channel(&self, length_km: f64) -> ChannelParams {
        let c = &self.channel;
        ChannelParams {
            length_km,
            loss_db_per_km: c.loss_db_per_km,
            detector_efficiency: c.detector_efficiency,
            dark_count_prob: c.dark_count_prob,
            misalignment: c.misalignment,
            asymmetry_db: c.asymmetry_db,
        }
    }

    pub fn protocol(&self, variant: Protocol) -> ProtocolConfig {
        let p = &self.protocol;
        ProtocolConfig {
            variant,
            slice_count: p.slice_count,
            signal_intensity: p.signal_intensity,
            decoy_intensities: p.decoy_intensities.clone(),
            ec_efficiency: p.ec_efficiency,
            sifting_factor: p.sifting_factor,
            send_prob: p.send_prob,
            sns_test_param: p.sns_test_param,
            sns_test_intensity: p.sns_test_intensity,
            sns_condition: p.sns_condition,
            key_mode_prob: p.key_mode_prob,
            intensity_probs: p.intensity_probs.clone(),
        }
    }

    /// Seed precedence: explicit flag (or `TWINFIELD_SEED`), then the file.
    pub fn seed(&self, flag: Option<u64>) -> CliResult<u64> {
        let seed = flag.unwrap_or(self.simulation.seed);
        if seed > i64::MAX as u64 {
            return Err(CliError::Usage(format!("seed {seed} exceeds 2^63 − 1")));
        }
        Ok(seed)
    }
}
