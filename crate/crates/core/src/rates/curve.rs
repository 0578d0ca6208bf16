//! Rate-versus-distance curves: bounds, optimised analytic rates and, for the
//! protocols without a closed form, simulated rates.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{BoundBasis, BoundKind};
use crate::engine::{rate_from_tallies, simulate, Simulation};
use crate::error::{Error, Result};
use crate::quantities::ChannelParams;
use crate::rates::config::{Protocol, ProtocolConfig};
use crate::rates::optimized_rate;

/// One row of a rate curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCurvePoint {
    pub distance_km: f64,
    pub eta: f64,
    pub rates: BTreeMap<Protocol, f64>,
    pub bounds: BTreeMap<BoundKind, f64>,
    /// Optimal signal intensity for the analytically optimised protocols.
    pub optimal_mu: BTreeMap<Protocol, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveOptions {
    pub bounds: Vec<BoundKind>,
    /// Transmittance the bounds are evaluated on.
    pub basis: BoundBasis,
    /// Settings for the simulated columns; NPP and SNS are skipped without it.
    pub monte_carlo: Option<Simulation>,
}

impl Default for CurveOptions {
    fn default() -> Self {
        Self {
            bounds: vec![BoundKind::Plob, BoundKind::Srb, BoundKind::Tgw],
            basis: BoundBasis::FiberOnly,
            monte_carlo: None,
        }
    }
}

fn point(
    template: &ChannelParams,
    config: &ProtocolConfig,
    distance_km: f64,
    protocols: &[Protocol],
    options: &CurveOptions,
) -> Result<RateCurvePoint> {
    let channel = template.with_length(distance_km);
    let bound_eta = options.basis.transmittance(&channel);
    let bounds = options.bounds.iter().map(|&b| (b, b.curve_value(bound_eta))).collect();
    let mut rates = BTreeMap::new();
    let mut optimal_mu = BTreeMap::new();
    for &protocol in protocols {
        let cfg = config.clone().with_variant(protocol);
        if let Some(opt) = optimized_rate(&channel, &cfg) {
            rates.insert(protocol, opt.rate);
            optimal_mu.insert(protocol, opt.mu);
        } else if let Some(sim) = &options.monte_carlo {
            let table = simulate(&channel, &cfg, sim)?;
            let rate = match rate_from_tallies(&table, &channel, &cfg) {
                Ok(r) => r,
                Err(Error::EmptyGroup { .. }) => 0.0,
                Err(e) => return Err(e),
            };
            rates.insert(protocol, rate);
        }
    }
    Ok(RateCurvePoint { distance_km, eta: channel.eta(), rates, bounds, optimal_mu })
}

/// Evaluates every distance (concurrently) and returns rows in input order.
pub fn generate_rate_curve(
    template: &ChannelParams,
    config: &ProtocolConfig,
    distances: &[f64],
    protocols: &[Protocol],
    options: &CurveOptions,
) -> Result<Vec<RateCurvePoint>> {
    template.validate()?;
    config.validate()?;
    if distances.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::InvalidConfig("distances must be finite and non-negative".into()));
    }
    if distances.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidConfig("distances must be sorted ascending".into()));
    }
    distances
        .par_iter()
        .map(|&d| point(template, config, d, protocols, options))
        .collect()
}
