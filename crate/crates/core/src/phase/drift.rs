//! Fiber phase drift: a piecewise-linear phase whose slope is redrawn from a
//! zero-mean Gaussian every window.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stream used for drift paths, kept clear of the simulator's chunk streams.
const PATH_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftModel {
    /// Standard deviation of the per-window drift rate.
    pub rate_std_rad_per_ms: f64,
    /// Length of the window over which the rate stays constant.
    pub window_ms: f64,
    /// Phase at t = 0.
    pub initial_phase: f64,
}

impl DriftModel {
    pub fn new(rate_std_rad_per_ms: f64) -> Self {
        Self { rate_std_rad_per_ms, window_ms: 1.0, initial_phase: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate_std_rad_per_ms >= 0.0 && self.rate_std_rad_per_ms.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "drift rate must be a finite value ≥ 0, got {}",
                self.rate_std_rad_per_ms
            )));
        }
        if !(self.window_ms > 0.0 && self.window_ms.is_finite()) {
            return Err(Error::InvalidConfig(format!("drift window must be positive, got {}", self.window_ms)));
        }
        Ok(())
    }
}

/// A sampled drift trajectory. Times are in ms; queries outside
/// `[0, duration]` are clamped to the ends.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePath {
    window_ms: f64,
    duration_ms: f64,
    /// Phase at the start of each window, plus the final phase.
    knots: Vec<f64>,
    rates: Vec<f64>,
}

impl PhasePath {
    pub fn duration_ms(&self) -> f64 {
        self.duration_ms
    }

    pub fn window_ms(&self) -> f64 {
        self.window_ms
    }

    /// Drift rate (rad/ms) of each window.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn locate(&self, t_ms: f64) -> (usize, f64) {
        let t = t_ms.clamp(0.0, self.duration_ms);
        let w = ((t / self.window_ms).floor() as usize).min(self.rates.len().saturating_sub(1));
        (w, t - w as f64 * self.window_ms)
    }

    pub fn phase_at(&self, t_ms: f64) -> f64 {
        if self.rates.is_empty() {
            return self.knots[0];
        }
        let (w, dt) = self.locate(t_ms);
        self.knots[w] + self.rates[w] * dt
    }

    /// Exact mean of the phase over `[t0, t1]`.
    pub fn mean_phase(&self, t0: f64, t1: f64) -> f64 {
        let (t0, t1) = (t0.clamp(0.0, self.duration_ms), t1.clamp(0.0, self.duration_ms));
        if t1 <= t0 || self.rates.is_empty() {
            return self.phase_at(t0);
        }
        let last = self.rates.len() - 1;
        let first = self.locate(t0).0;
        let mut area = 0.0;
        for w in first..=last {
            let a = t0.max(w as f64 * self.window_ms);
            let b = if w == last { t1 } else { t1.min((w + 1) as f64 * self.window_ms) };
            if b > a {
                // the trapezoid rule is exact on a linear piece
                let start = self.knots[w] + self.rates[w] * (a - w as f64 * self.window_ms);
                let end = self.knots[w] + self.rates[w] * (b - w as f64 * self.window_ms);
                area += 0.5 * (start + end) * (b - a);
            }
            if b >= t1 {
                break;
            }
        }
        area / (t1 - t0)
    }
}

/// Draws a path of the given duration, deterministic per seed.
pub fn sample_phase_path(model: &DriftModel, duration_ms: f64, seed: u64) -> Result<PhasePath> {
    model.validate()?;
    if !(duration_ms >= 0.0 && duration_ms.is_finite()) {
        return Err(Error::InvalidConfig(format!("path duration must be ≥ 0, got {duration_ms}")));
    }
    let windows = (duration_ms / model.window_ms).ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PATH_STREAM);
    let mut knots = Vec::with_capacity(windows + 1);
    let mut rates = Vec::with_capacity(windows);
    let mut phase = model.initial_phase;
    knots.push(phase);
    for w in 0..windows {
        let z: f64 = StandardNormal.sample(&mut rng);
        let rate = model.rate_std_rad_per_ms * z;
        let span = model.window_ms.min(duration_ms - w as f64 * model.window_ms);
        phase += rate * span;
        rates.push(rate);
        knots.push(phase);
    }
    Ok(PhasePath { window_ms: model.window_ms, duration_ms, knots, rates })
}

/// One measured drift-rate value.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct DriftAnchor {
    pub length_km: f64,
    pub rate_std_rad_per_ms: f64,
    pub source: String,
}

const ANCHORS_CSV: &str = include_str!("../../data/drift_anchors.csv");

/// The shipped anchor table, in file order.
pub fn drift_anchors() -> Vec<DriftAnchor> {
    csv::Reader::from_reader(ANCHORS_CSV.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .expect("bundled drift anchor table is well formed")
}

/// Pool-adjacent-violators fit: the non-decreasing sequence closest to `ys`
/// in least squares.
pub fn isotonic_fit(ys: &[f64]) -> Vec<f64> {
    // blocks of (mean, size)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(ys.len());
    for &y in ys {
        blocks.push((y, 1));
        while blocks.len() > 1 && blocks[blocks.len() - 2].0 > blocks[blocks.len() - 1].0 {
            let (m2, n2) = blocks.pop().unwrap();
            let (m1, n1) = blocks.pop().unwrap();
            let n = n1 + n2;
            blocks.push(((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n));
        }
    }
    blocks.into_iter().flat_map(|(m, n)| std::iter::repeat_n(m, n)).collect()
}

/// Drift-rate standard deviation at a fiber length, from the isotonic fit of
/// the anchors with linear interpolation. Beyond the last anchor the last
/// segment is extended.
pub fn drift_rate_for_length(length_km: f64) -> f64 {
    let mut anchors = drift_anchors();
    anchors.sort_by(|a, b| a.length_km.total_cmp(&b.length_km));
    let xs: Vec<f64> = anchors.iter().map(|a| a.length_km).collect();
    let ys = isotonic_fit(&anchors.iter().map(|a| a.rate_std_rad_per_ms).collect::<Vec<_>>());
    let l = length_km.max(0.0);
    let n = xs.len();
    let seg = (1..n).find(|&i| l <= xs[i]).unwrap_or(n - 1);
    let (x0, x1, y0, y1) = (xs[seg - 1], xs[seg], ys[seg - 1], ys[seg]);
    y0 + (y1 - y0) * (l - x0) / (x1 - x0)
}
