use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use twinfield::engine::{rate_from_tallies, simulate, tallies_to_stats, ChannelPhase, EstimatedStats, Simulation, TallyTable};
use twinfield::phase::{sample_phase_path, DriftModel};
use twinfield::rates::{model_detection_stats, Protocol};
use twinfield::Error;

use super::with_threads;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimProtocol {
    Tf,
    Npp,
    Sns,
}

impl SimProtocol {
    fn variant(self) -> Protocol {
        match self {
            Self::Tf => Protocol::TfGllp,
            Self::Npp => Protocol::Npp,
            Self::Sns => Protocol::Sns,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub protocol: SimProtocol,
    #[arg(long, default_value_t = 100.0)]
    pub length: f64,
    #[arg(long)]
    pub pulses: Option<u64>,
    #[arg(long, env = "TWINFIELD_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Standard deviation of the fiber phase drift rate in rad/ms.
    #[arg(long)]
    pub drift_rate: Option<f64>,
    /// Pulse repetition rate, used to place pulses on the drift path.
    #[arg(long, default_value_t = 1000.0)]
    pub clock_mhz: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Report {
    run: RunInfo,
    rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    empty_group: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<EstimatedStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<ModelInfo>,
    tallies: Vec<TallyRow>,
}

#[derive(Debug, Serialize)]
struct RunInfo {
    protocol: Protocol,
    length_km: f64,
    eta: f64,
    pulses: u64,
    seed: u64,
    drift_rate_rad_per_ms: f64,
    clock_mhz: f64,
}

#[derive(Debug, Serialize)]
struct ModelInfo {
    gain: f64,
    qber_z: f64,
    phase_error_x: f64,
}

#[derive(Debug, Serialize)]
struct TallyRow {
    alice_level: u8,
    bob_level: u8,
    alice_mode: twinfield::engine::Mode,
    bob_mode: twinfield::engine::Mode,
    relation: twinfield::engine::SliceRelation,
    bits_agree: bool,
    outcome: twinfield::engine::Outcome,
    count: u64,
}

fn tally_rows(table: &TallyTable) -> Vec<TallyRow> {
    table
        .entries()
        .map(|(k, count)| TallyRow {
            alice_level: k.alice_level,
            bob_level: k.bob_level,
            alice_mode: k.alice_mode,
            bob_mode: k.bob_mode,
            relation: k.relation,
            bits_agree: k.bits_agree,
            outcome: k.outcome,
            count,
        })
        .collect()
}

pub fn run(args: &SimulateArgs) -> CliResult<String> {
    let config = RunConfig::load(args.config.as_deref())?;
    let seed = config.seed(args.seed)?;
    let pulses = args.pulses.unwrap_or(config.simulation.pulses);
    if !(args.length >= 0.0 && args.length.is_finite()) {
        return Err(CliError::Usage("--length must be finite and non-negative".into()));
    }
    if !(args.clock_mhz > 0.0 && args.clock_mhz.is_finite()) {
        return Err(CliError::Usage("--clock-mhz must be positive".into()));
    }
    let channel = config.channel(args.length);
    let protocol = config.protocol(args.protocol.variant());
    channel.validate()?;

    let drift = args.drift_rate.unwrap_or(0.0);
    let pulse_period_us = 1.0 / args.clock_mhz;
    let channel_phase = if drift == 0.0 {
        ChannelPhase::Aligned
    } else {
        let model = DriftModel::new(drift);
        let duration_ms = (pulses as f64 * pulse_period_us / 1000.0).max(model.window_ms);
        ChannelPhase::Drifting { path: sample_phase_path(&model, duration_ms, seed)?, pulse_period_us }
    };
    let sim = Simulation::new(pulses, seed).with_channel_phase(channel_phase);
    let table = with_threads(args.threads, || simulate(&channel, &protocol, &sim))??;

    let (stats, rate, empty_group) = match tallies_to_stats(&table) {
        Ok(stats) => (Some(stats), rate_from_tallies(&table, &channel, &protocol)?, None),
        Err(Error::EmptyGroup { group }) => (None, 0.0, Some(group)),
        Err(e) => return Err(e.into()),
    };
    let model = model_detection_stats(&channel, &protocol)
        .ok()
        .map(|m| ModelInfo { gain: m.gain, qber_z: m.qber_z, phase_error_x: m.phase_error_x });
    let report = Report {
        run: RunInfo {
            protocol: protocol.variant,
            length_km: args.length,
            eta: channel.eta(),
            pulses,
            seed,
            drift_rate_rad_per_ms: drift,
            clock_mhz: args.clock_mhz,
        },
        rate,
        empty_group,
        stats,
        model,
        tallies: tally_rows(&table),
    };
    toml::to_string(&report).map_err(|e| CliError::Usage(format!("cannot serialise report: {e}")))
}
