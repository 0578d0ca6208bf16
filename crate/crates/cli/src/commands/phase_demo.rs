use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use twinfield::phase::{
    apply_compensation, drift_rate_for_length, gaussian_error_closed_form, sample_phase_path, CompensationMode, DriftModel,
    Estimator, PulseTrainSchedule,
};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoMode {
    Active,
    PostSelect,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorKind {
    Perfect,
    Counting,
}

#[derive(Debug, Args)]
pub struct PhaseDemoArgs {
    /// Drift-rate standard deviation in rad/ms (default 6).
    #[arg(long, conflicts_with = "length")]
    pub drift_rate: Option<f64>,
    /// Take the drift rate from the fitted length dependence instead.
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long, default_value_t = 50.0)]
    pub signal_us: f64,
    #[arg(long, default_value_t = 50.0)]
    pub reference_us: f64,
    #[arg(long, default_value_t = 1.0)]
    pub recovery_us: f64,
    /// Mean reference photons reaching the detectors per window.
    #[arg(long, default_value_t = 1e4)]
    pub reference_intensity: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub duration_ms: f64,
    #[arg(long, value_enum, default_value = "both")]
    pub mode: DemoMode,
    #[arg(long, value_enum, default_value = "perfect")]
    pub estimator: EstimatorKind,
    #[arg(long, env = "TWINFIELD_SEED", default_value_t = 2020)]
    pub seed: u64,
    /// Histogram bins over (−π, π].
    #[arg(long, default_value_t = 32)]
    pub bins: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Report {
    drift_rate_rad_per_ms: f64,
    duration_ms: f64,
    seed: u64,
    schedule: PulseTrainSchedule,
    modes: Vec<ModeReport>,
}

#[derive(Debug, Serialize)]
struct ModeReport {
    mode: CompensationMode,
    blocks: usize,
    residual_rms: f64,
    epsilon: f64,
    /// ε of a Gaussian residual with the same rms.
    gaussian_epsilon: f64,
    histogram_edges: Vec<f64>,
    histogram_counts: Vec<u64>,
}

fn histogram(samples: &[f64], bins: usize) -> (Vec<f64>, Vec<u64>) {
    let width = 2.0 * PI / bins as f64;
    let edges = (0..=bins).map(|i| -PI + i as f64 * width).collect();
    let mut counts = vec![0u64; bins];
    for &s in samples {
        let i = ((s + PI) / width).floor() as usize;
        counts[i.min(bins - 1)] += 1;
    }
    (edges, counts)
}

pub fn run(args: &PhaseDemoArgs) -> CliResult<String> {
    if args.bins == 0 {
        return Err(CliError::Usage("--bins must be at least 1".into()));
    }
    let drift = match (args.drift_rate, args.length) {
        (Some(r), _) => r,
        (None, Some(l)) if l >= 0.0 && l.is_finite() => drift_rate_for_length(l),
        (None, Some(_)) => return Err(CliError::Usage("--length must be finite and non-negative".into())),
        (None, None) => 6.0,
    };
    let schedule = PulseTrainSchedule {
        signal_us: args.signal_us,
        reference_us: args.reference_us,
        recovery_us: args.recovery_us,
        reference_intensity: args.reference_intensity,
    };
    schedule.validate()?;
    let path = sample_phase_path(&DriftModel::new(drift), args.duration_ms, args.seed)?;
    let estimator = match args.estimator {
        EstimatorKind::Perfect => Estimator::Perfect,
        EstimatorKind::Counting => Estimator::Counting { seed: args.seed },
    };
    let modes: &[CompensationMode] = match args.mode {
        DemoMode::Active => &[CompensationMode::ActiveNpp],
        DemoMode::PostSelect => &[CompensationMode::PostSelect],
        DemoMode::Both => &[CompensationMode::ActiveNpp, CompensationMode::PostSelect],
    };
    let mut reports = Vec::new();
    for &mode in modes {
        let result = apply_compensation(mode, &path, &schedule, estimator)?;
        let (histogram_edges, histogram_counts) = histogram(&result.residuals, args.bins);
        let rms = result.rms();
        reports.push(ModeReport {
            mode,
            blocks: result.blocks(),
            residual_rms: rms,
            epsilon: result.error(),
            gaussian_epsilon: gaussian_error_closed_form(rms),
            histogram_edges,
            histogram_counts,
        });
    }
    let report = Report { drift_rate_rad_per_ms: drift, duration_ms: args.duration_ms, seed: args.seed, schedule, modes: reports };
    toml::to_string(&report).map_err(|e| CliError::Usage(format!("cannot serialise report: {e}")))
}
