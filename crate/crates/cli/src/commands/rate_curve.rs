use std::path::PathBuf;

use clap::Args;
use twinfield::bounds::{BoundBasis, BoundKind};
use twinfield::engine::Simulation;
use twinfield::rates::{generate_rate_curve, CurveOptions, Protocol, RateCurvePoint};

use super::with_threads;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::format::fixed6;

pub const HEADER: &str =
    "distance_km,eta,plob,srb,tgw,tf_gllp,pm,pmmdi,npp_mc,sns_mc,opt_mu_tf_gllp,opt_mu_pm,opt_mu_pmmdi";

const BOUNDS: [BoundKind; 3] = [BoundKind::Plob, BoundKind::Srb, BoundKind::Tgw];
const ANALYTIC: [Protocol; 3] = [Protocol::TfGllp, Protocol::Pm, Protocol::PmMdi];
const SIMULATED: [Protocol; 2] = [Protocol::Npp, Protocol::Sns];

#[derive(Debug, Args)]
pub struct RateCurveArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub start: f64,
    #[arg(long, default_value_t = 600.0)]
    pub stop: f64,
    #[arg(long, default_value_t = 10.0)]
    pub step: f64,
    /// Explicit comma-separated distances in km, ascending.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["start", "stop", "step"])]
    pub distances: Option<Vec<f64>>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Pulses per distance for the simulated columns; 0 skips them.
    #[arg(long)]
    pub pulses: Option<u64>,
    #[arg(long, env = "TWINFIELD_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Fold the detector efficiency into the bound transmittance.
    #[arg(long)]
    pub detector_in_bound: bool,
}

/// Inclusive arithmetic range; empty when `stop < start`.
pub fn distance_range(start: f64, stop: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) {
        return Err(CliError::Usage("--step must be positive and the range finite".into()));
    }
    if stop < start {
        return Ok(Vec::new());
    }
    let n = ((stop - start) / step + 1e-9).floor() as u64 + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

pub fn run(args: &RateCurveArgs) -> CliResult<String> {
    let config = RunConfig::load(args.config.as_deref())?;
    let distances = match &args.distances {
        Some(d) => d.clone(),
        None => distance_range(args.start, args.stop, args.step)?,
    };
    let pulses = args.pulses.unwrap_or(config.simulation.pulses);
    let seed = config.seed(args.seed)?;
    let mut protocols = ANALYTIC.to_vec();
    if pulses > 0 {
        protocols.extend(SIMULATED);
    }
    let options = CurveOptions {
        bounds: BOUNDS.to_vec(),
        basis: if args.detector_in_bound { BoundBasis::WithDetector } else { BoundBasis::FiberOnly },
        monte_carlo: (pulses > 0).then(|| Simulation::new(pulses, seed)),
    };
    let template = config.channel(0.0);
    let protocol_config = config.protocol(Protocol::TfGllp);
    let points = with_threads(args.threads, || {
        generate_rate_curve(&template, &protocol_config, &distances, &protocols, &options)
    })??;
    Ok(render(&points))
}

pub fn render(points: &[RateCurvePoint]) -> String {
    let mut out = String::with_capacity(HEADER.len() + 1 + points.len() * 160);
    out.push_str(HEADER);
    out.push('\n');
    let nan = f64::NAN;
    for p in points {
        let mut cells = vec![fixed6(p.distance_km), fixed6(p.eta)];
        cells.extend(BOUNDS.iter().map(|b| fixed6(p.bounds.get(b).copied().unwrap_or(nan))));
        cells.extend(ANALYTIC.iter().chain(&SIMULATED).map(|v| fixed6(p.rates.get(v).copied().unwrap_or(nan))));
        cells.extend(ANALYTIC.iter().map(|v| fixed6(p.optimal_mu.get(v).copied().unwrap_or(nan))));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
