//! Reference-pulse scheduling and drift compensation.
//!
//! The train repeats signal, reference and recovery windows. Each reference
//! window yields one phase estimate. Active compensation subtracts the
//! estimate of the previous reference window from the next signal block, a
//! latency of one block. Post-selection instead interpolates between the
//! reference windows on either side of a block.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::drift::PhasePath;
use crate::phase::estimate::{estimate_phase_offset, ReferenceCounts};
use crate::phase::interference::{interference_error, DeltaPhiDistribution};
use crate::quantities::wrap_signed;

const ESTIMATOR_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseTrainSchedule {
    pub signal_us: f64,
    pub reference_us: f64,
    pub recovery_us: f64,
    /// Mean detected reference clicks per reference window.
    pub reference_intensity: f64,
}

impl Default for PulseTrainSchedule {
    fn default() -> Self {
        Self { signal_us: 50.0, reference_us: 50.0, recovery_us: 1.0, reference_intensity: 1e4 }
    }
}

impl PulseTrainSchedule {
    pub fn period_us(&self) -> f64 {
        self.signal_us + self.reference_us + self.recovery_us
    }

    /// Fractions of the period spent in (signal, reference, recovery).
    pub fn duty_cycle(&self) -> (f64, f64, f64) {
        let p = self.period_us();
        (self.signal_us / p, self.reference_us / p, self.recovery_us / p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("signal_us", self.signal_us),
            ("reference_us", self.reference_us),
            ("recovery_us", self.recovery_us),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.reference_intensity > 0.0 && self.reference_intensity.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "reference_intensity must be positive, got {}",
                self.reference_intensity
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompensationMode {
    /// Feed-forward correction with one block of latency.
    ActiveNpp,
    /// Estimates are recorded and used when reconciling slices.
    PostSelect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    /// The exact mean phase over each reference window.
    Perfect,
    /// Poisson reference clicks split between an in-phase and a quadrature
    /// half, inverted with [`estimate_phase_offset`].
    Counting { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompensationResult {
    /// Residual Δφ in (−π, π], one sample per μs of signal, block after block.
    pub residuals: Vec<f64>,
    pub samples_per_block: usize,
    /// Phase estimate of every reference window.
    pub block_estimates: Vec<f64>,
}

impl CompensationResult {
    pub fn blocks(&self) -> usize {
        if self.samples_per_block == 0 {
            0
        } else {
            self.residuals.len() / self.samples_per_block
        }
    }

    pub fn block(&self, j: usize) -> &[f64] {
        &self.residuals[j * self.samples_per_block..(j + 1) * self.samples_per_block]
    }

    /// Interference error of the residuals.
    pub fn error(&self) -> f64 {
        interference_error(&DeltaPhiDistribution::Samples(self.residuals.clone())).unwrap_or(0.0)
    }

    /// Root-mean-square residual.
    pub fn rms(&self) -> f64 {
        (self.residuals.iter().map(|r| r * r).sum::<f64>() / self.residuals.len().max(1) as f64).sqrt()
    }
}

fn estimates(path: &PhasePath, schedule: &PulseTrainSchedule, periods: usize, estimator: Estimator) -> Vec<f64> {
    let p = schedule.period_us();
    let window = |j: usize| {
        let start = j as f64 * p + schedule.signal_us;
        (start / 1000.0, (start + schedule.reference_us) / 1000.0)
    };
    match estimator {
        Estimator::Perfect => (0..periods)
            .map(|j| {
                let (a, b) = window(j);
                path.mean_phase(a, b)
            })
            .collect(),
        Estimator::Counting { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(ESTIMATOR_STREAM);
            let half = Poisson::new(schedule.reference_intensity / 2.0).expect("positive intensity");
            let mut previous = 0.0;
            (0..periods)
                .map(|j| {
                    let (a, b) = window(j);
                    let truth = path.mean_phase(a, b);
                    let mut block = |p_d0: f64| {
                        let n = half.sample(&mut rng) as u64;
                        let d0 = Binomial::new(n, p_d0.clamp(0.0, 1.0)).expect("valid binomial").sample(&mut rng);
                        ReferenceCounts::new(d0, n - d0)
                    };
                    let in_phase = block((1.0 + truth.cos()) / 2.0);
                    let quadrature = block((1.0 + truth.sin()) / 2.0);
                    // an empty window keeps the last estimate
                    if let Ok(e) = estimate_phase_offset(in_phase, Some(quadrature)) {
                        previous = e.delta_phi;
                    }
                    previous
                })
                .collect()
        }
    }
}

/// Residual phase seen by the signal pulses after compensation. The first
/// block has no earlier reference and is skipped; the path must cover at
/// least two full periods.
pub fn apply_compensation(
    mode: CompensationMode,
    path: &PhasePath,
    schedule: &PulseTrainSchedule,
    estimator: Estimator,
) -> Result<CompensationResult> {
    schedule.validate()?;
    let p = schedule.period_us();
    let periods = (path.duration_ms() * 1000.0 / p + 1e-9).floor() as usize;
    if periods < 2 {
        return Err(Error::InvalidConfig(format!(
            "path of {} ms covers fewer than two {p} μs periods",
            path.duration_ms()
        )));
    }
    let est = estimates(path, schedule, periods, estimator);
    let samples_per_block = schedule.signal_us.floor().max(1.0) as usize;
    let step = schedule.signal_us / samples_per_block as f64;
    let centre = |j: usize| j as f64 * p + schedule.signal_us + schedule.reference_us / 2.0;
    let mut residuals = Vec::with_capacity((periods - 1) * samples_per_block);
    for j in 1..periods {
        let before = est[j - 1];
        let after = before + wrap_signed(est[j] - before);
        for k in 0..samples_per_block {
            let t = j as f64 * p + (k as f64 + 0.5) * step;
            let correction = match mode {
                CompensationMode::ActiveNpp => before,
                CompensationMode::PostSelect => {
                    before + (after - before) * (t - centre(j - 1)) / (centre(j) - centre(j - 1))
                }
            };
            residuals.push(wrap_signed(path.phase_at(t / 1000.0) - correction));
        }
    }
    Ok(CompensationResult { residuals, samples_per_block, block_estimates: est })
}
