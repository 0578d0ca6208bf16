//! Per-distance intensity search: a log-spaced scan followed by a
//! golden-section refinement in log μ.

use serde::Serialize;

/// Lower end of the intensity search range.
pub const MU_MIN: f64 = 1e-4;
/// Upper end of the intensity search range.
pub const MU_MAX: f64 = 10.0;
/// Number of log-spaced points in the coarse scan.
pub const GRID_POINTS: usize = 64;
/// Relative tolerance on μ for the refinement.
pub const MU_REL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntensityOptimum {
    pub mu: f64,
    pub rate: f64,
    /// Set when the rate vanished at every grid point.
    pub degenerate: bool,
}

fn log_grid() -> impl Iterator<Item = f64> {
    let (lo, hi) = (MU_MIN.ln(), MU_MAX.ln());
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    (0..GRID_POINTS).map(move |i| (lo + step * i as f64).exp())
}

/// Maximises a rate function over μ ∈ [`MU_MIN`], [`MU_MAX`].
pub fn optimize_intensity<F: Fn(f64) -> f64>(rate_fn: F) -> IntensityOptimum {
    let grid: Vec<f64> = log_grid().collect();
    let values: Vec<f64> = grid.iter().map(|&mu| sanitize(rate_fn(mu))).collect();

    let (best, &best_rate) = values
        .iter()
        .enumerate()
        .fold((0, &values[0]), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
    if best_rate <= 0.0 {
        return IntensityOptimum {
            mu: (MU_MIN * MU_MAX).sqrt(),
            rate: 0.0,
            degenerate: true,
        };
    }

    let lo = grid[best.saturating_sub(1)].ln();
    let hi = grid[(best + 1).min(GRID_POINTS - 1)].ln();
    let objective = |log_mu: f64| sanitize(rate_fn(log_mu.exp()));
    let (log_mu, rate) = golden_section_max(objective, lo, hi, MU_REL_TOL);

    if rate >= best_rate {
        IntensityOptimum { mu: log_mu.exp(), rate, degenerate: false }
    } else {
        IntensityOptimum { mu: grid[best], rate: best_rate, degenerate: false }
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// Golden-section search for a maximum of `f` on `[a, b]`, stopping when the
/// bracket is narrower than `tol`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_photon_weight_peaks_at_one() {
        let opt = optimize_intensity(|mu| mu * (-mu).exp());
        assert!((opt.mu - 1.0).abs() < 1e-3);
        assert!((opt.rate - (-1f64).exp()).abs() < 1e-9);
        assert!(!opt.degenerate);
    }

    #[test]
    fn zero_rate_is_degenerate() {
        let opt = optimize_intensity(|_| 0.0);
        assert!(opt.degenerate);
        assert_eq!(opt.rate, 0.0);
        assert!((opt.mu - (MU_MIN * MU_MAX).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn boundary_maximum() {
        let opt = optimize_intensity(|mu| mu);
        assert!((opt.mu / MU_MAX - 1.0).abs() < 1e-3);
    }

    #[test]
    fn nan_rates_are_ignored() {
        let opt = optimize_intensity(|mu| if mu < 0.01 { f64::NAN } else { -(mu - 2.0).powi(2) + 1.0 });
        assert!((opt.mu - 2.0).abs() < 1e-3);
    }
}
