//! Pulse-by-pulse Monte Carlo of the twin-field family.
//!
//! Pulses are grouped into chunks of [`CHUNK`] consecutive indices. Chunk `c`
//! draws from a ChaCha8 stream keyed by `(seed, c)`, so a pulse's randomness
//! depends only on the seed and its index. Runs are therefore identical for
//! any thread count, and a run split at a chunk boundary merges back to the
//! unsplit run exactly.

mod measure;
mod pmmdi;
mod sns;
mod tally;
mod tf;

pub use measure::{charlie_measure, Outcome};
pub use tally::{tallies_to_stats, Estimate, EstimatedStats, Mode, SliceRelation, TallyKey, TallyTable};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase::drift::PhasePath;
use crate::quantities::{ChannelParams, Phase};
use crate::rates::config::{Protocol, ProtocolConfig};
use crate::rates::detection::model_detection_stats;
use crate::rates::formulas::{pm_rate, tf_gllp_rate, tfstar_rate};
use crate::rates::DetectionStats;
use measure::Detector;

/// Pulses per random stream.
pub const CHUNK: u64 = 1024;

/// Phase picked up in the fiber, applied to Alice's arm relative to Bob's.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ChannelPhase {
    #[default]
    Aligned,
    Offset(f64),
    /// Pulse `i` sees `path.phase_at(i · period)`.
    Drifting { path: PhasePath, pulse_period_us: f64 },
}

impl ChannelPhase {
    fn at_pulse(&self, index: u64) -> f64 {
        match self {
            Self::Aligned => 0.0,
            Self::Offset(d) => *d,
            Self::Drifting { path, pulse_period_us } => path.phase_at(index as f64 * pulse_period_us / 1000.0),
        }
    }
}

/// Run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub pulses: u64,
    pub seed: u64,
    /// Index of the first pulse; must be a multiple of [`CHUNK`].
    pub first_pulse: u64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub channel_phase: ChannelPhase,
}

impl Simulation {
    pub fn new(pulses: u64, seed: u64) -> Self {
        Self { pulses, seed, first_pulse: 0, threads: None, channel_phase: ChannelPhase::Aligned }
    }

    pub fn starting_at(mut self, first_pulse: u64) -> Self {
        self.first_pulse = first_pulse;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn with_channel_phase(mut self, channel_phase: ChannelPhase) -> Self {
        self.channel_phase = channel_phase;
        self
    }
}

/// One party's settings for a pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartyChoice {
    /// Index into the protocol's intensity levels.
    pub level: u8,
    /// Intensity sent by this party (half the pair total).
    pub intensity: f64,
    /// α ∈ {0, π}.
    pub bit_phase: f64,
    /// β ∈ {0, π/2}.
    pub basis_phase: f64,
    /// ρ ∈ [0, 2π).
    pub random_phase: f64,
    pub mode: Mode,
    /// False only for the not-sending choice of SNS.
    pub sends: bool,
}

impl PartyChoice {
    /// φ = (α + β + ρ) mod 2π.
    pub fn total_phase(&self) -> Phase {
        Phase::new(self.bit_phase + self.basis_phase + self.random_phase)
    }
}

/// Everything sampled for one pulse pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRecord {
    pub alice: PartyChoice,
    pub bob: PartyChoice,
    /// (τ_A, τ_B).
    pub channel_phase: (f64, f64),
    pub outcome: Outcome,
}

/// Per-protocol encoding and sifting rules.
pub(crate) trait Scheme: Sync {
    fn choose(&self, rng: &mut ChaCha8Rng) -> (PartyChoice, PartyChoice);
    /// Slice relation and whether the encoded bits agree.
    fn classify(&self, alice: &PartyChoice, bob: &PartyChoice) -> (SliceRelation, bool);
    fn table(&self) -> TallyTable;
}

fn trial(scheme: &impl Scheme, det: &Detector, phase: &ChannelPhase, index: u64, rng: &mut ChaCha8Rng) -> TrialRecord {
    let (alice, bob) = scheme.choose(rng);
    let tau = (phase.at_pulse(index), 0.0);
    let delta = alice.total_phase().radians() + tau.0 - bob.total_phase().radians() - tau.1;
    let outcome = det.measure(alice.intensity, bob.intensity, delta, rng);
    TrialRecord { alice, bob, channel_phase: tau, outcome }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn check_start(sim: &Simulation) -> Result<()> {
    if sim.first_pulse % CHUNK != 0 {
        return Err(Error::InvalidConfig(format!(
            "first pulse index {} is not a multiple of {CHUNK}",
            sim.first_pulse
        )));
    }
    Ok(())
}

/// Pulse index ranges `[start, end)` of the chunks touched by a run.
fn chunk_spans(sim: &Simulation) -> Vec<(u64, u64, u64)> {
    let end = sim.first_pulse + sim.pulses;
    let mut spans = Vec::new();
    let mut start = sim.first_pulse;
    while start < end {
        let chunk = start / CHUNK;
        let stop = ((chunk + 1) * CHUNK).min(end);
        spans.push((chunk, start, stop));
        start = stop;
    }
    spans
}

pub(crate) fn run_scheme(scheme: &impl Scheme, channel: &ChannelParams, sim: &Simulation) -> Result<TallyTable> {
    check_start(sim)?;
    let det = Detector::new(channel);
    let spans = chunk_spans(sim);
    let work = || {
        spans
            .par_iter()
            .fold(
                || scheme.table(),
                |mut table, &(chunk, start, stop)| {
                    let mut rng = chunk_rng(sim.seed, chunk);
                    for index in start..stop {
                        let r = trial(scheme, &det, &sim.channel_phase, index, &mut rng);
                        let (relation, bits_agree) = scheme.classify(&r.alice, &r.bob);
                        table.record(TallyKey {
                            alice_level: r.alice.level,
                            bob_level: r.bob.level,
                            alice_mode: r.alice.mode,
                            bob_mode: r.bob.mode,
                            relation,
                            bits_agree,
                            outcome: r.outcome,
                        });
                    }
                    table
                },
            )
            .reduce(
                || scheme.table(),
                |mut a, b| {
                    a.merge(&b).expect("tables from one scheme are compatible");
                    a
                },
            )
    };
    match sim.threads {
        None => Ok(work()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::ThreadPool(e.to_string()))
            .map(|pool| pool.install(work)),
    }
}

fn records_of(scheme: &impl Scheme, channel: &ChannelParams, sim: &Simulation) -> Result<Vec<TrialRecord>> {
    check_start(sim)?;
    let det = Detector::new(channel);
    let mut out = Vec::with_capacity(sim.pulses as usize);
    for (chunk, start, stop) in chunk_spans(sim) {
        let mut rng = chunk_rng(sim.seed, chunk);
        out.extend((start..stop).map(|i| trial(scheme, &det, &sim.channel_phase, i, &mut rng)));
    }
    Ok(out)
}

fn validated(channel: &ChannelParams, config: &ProtocolConfig) -> Result<()> {
    channel.validate()?;
    config.validate()?;
    if config.decoy_intensities.len() > 15 {
        return Err(Error::InvalidConfig("at most 15 decoy intensities are supported".into()));
    }
    Ok(())
}

/// TF-QKD (or, for [`Protocol::Pm`], phase matching) with phase slices.
pub fn run_tfqkd(channel: &ChannelParams, config: &ProtocolConfig, sim: &Simulation) -> Result<TallyTable> {
    validated(channel, config)?;
    run_scheme(&tf::TwinField::new(config), channel, sim)
}

/// Key/test-state protocols: NPP, or PM-MDI for [`Protocol::PmMdi`].
pub fn run_pmmdi_npp(channel: &ChannelParams, config: &ProtocolConfig, sim: &Simulation) -> Result<TallyTable> {
    validated(channel, config)?;
    run_scheme(&pmmdi::KeyTest::new(config), channel, sim)
}

/// Sending or not sending.
pub fn run_sns(channel: &ChannelParams, config: &ProtocolConfig, sim: &Simulation) -> Result<TallyTable> {
    validated(channel, config)?;
    run_scheme(&sns::SendNotSend::new(config), channel, sim)
}

/// Dispatches on `config.variant`.
pub fn simulate(channel: &ChannelParams, config: &ProtocolConfig, sim: &Simulation) -> Result<TallyTable> {
    match config.variant {
        Protocol::TfGllp | Protocol::TfStar | Protocol::Pm => run_tfqkd(channel, config, sim),
        Protocol::Npp | Protocol::PmMdi => run_pmmdi_npp(channel, config, sim),
        Protocol::Sns => run_sns(channel, config, sim),
    }
}

/// The individual trials of a run, in pulse order. Meant for small runs.
pub fn sample_trials(channel: &ChannelParams, config: &ProtocolConfig, sim: &Simulation) -> Result<Vec<TrialRecord>> {
    validated(channel, config)?;
    match config.variant {
        Protocol::TfGllp | Protocol::TfStar | Protocol::Pm => records_of(&tf::TwinField::new(config), channel, sim),
        Protocol::Npp | Protocol::PmMdi => records_of(&pmmdi::KeyTest::new(config), channel, sim),
        Protocol::Sns => records_of(&sns::SendNotSend::new(config), channel, sim),
    }
}

/// Key rate implied by simulated tallies.
///
/// TF uses the tagging-style formula with `Q` and `E` from the tallies and the
/// single-photon terms from the detection model; PM uses its sifted formula;
/// the others feed sifted fraction, `E^X` and `E^Z` into the one-way skeleton.
pub fn rate_from_tallies(table: &TallyTable, channel: &ChannelParams, config: &ProtocolConfig) -> Result<f64> {
    let est = tallies_to_stats(table)?;
    let measured = |model: DetectionStats| DetectionStats {
        gain: est.gain.value,
        qber_z: est.qber_z.value,
        phase_error_x: est.phase_error_x.value,
        ..model
    };
    Ok(match table.protocol() {
        Protocol::TfGllp => {
            let stats = measured(model_detection_stats(channel, config)?);
            tf_gllp_rate(&stats, config)
        }
        Protocol::Pm => pm_rate(&measured(model_detection_stats(channel, config)?), config),
        Protocol::TfStar | Protocol::Npp | Protocol::PmMdi | Protocol::Sns => tfstar_rate(
            config.sifting_factor * est.sifted_fraction.value,
            est.phase_error_x.value,
            est.qber_z.value,
            config.ec_efficiency,
        ),
    })
}
