//! Fairness and normalization metrics over received-rate vectors.

use crate::error::{Error, Result};
use crate::netgraph::{GraphOptions, LossParams, RoutingGraph};
use crate::routing::all_pair_routes;
use crate::spectrum::{generation_rates, ChannelGrid, SpectrumProfile};
use crate::topology::PhysicalTopology;

/// Jain's fairness index `(Σx)² / (k·Σx²)`. An all-zero vector counts as
/// perfectly equal and yields 1.
pub fn jain_index(received: &[f64]) -> f64 {
    let sum: f64 = received.iter().sum();
    let sq: f64 = received.iter().map(|x| x * x).sum();
    if sq == 0.0 {
        return 1.0;
    }
    sum * sum / (received.len() as f64 * sq)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub min_rate: f64,
    pub min_rate_normalized: f64,
    pub jain: f64,
    /// Set when every pair received nothing and `jain` is the convention.
    pub all_zero: bool,
}

impl MetricReport {
    pub fn new(received: &[f64], reference: f64) -> Result<Self> {
        if received.is_empty() {
            return Err(Error::InvalidParameter("no received rates".into()));
        }
        let min_rate = received.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(Self {
            min_rate,
            min_rate_normalized: normalized_min_rate(min_rate, reference)?,
            jain: jain_index(received),
            all_zero: received.iter().all(|&x| x == 0.0),
        })
    }
}

pub fn normalized_min_rate(min_rate: f64, reference: f64) -> Result<f64> {
    if !(reference > 0.0) {
        return Err(Error::Domain(format!("normalization reference must be > 0, got {reference}")));
    }
    Ok(min_rate / reference)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationReference {
    /// `min_s min_(i,j) η_(i,j)·Σ_x n̄_x`.
    pub value: f64,
    /// Placement and pair attaining the minimum.
    pub source: usize,
    pub pair: (usize, usize),
    /// Placements left out because some pair had no disjoint route.
    pub excluded: Vec<usize>,
}

/// Full-spectrum rate of the worst pair over every routable source
/// placement.
pub fn normalization_reference(
    topology: &PhysicalTopology,
    loss: &LossParams,
    grid: &ChannelGrid,
    profile: &SpectrumProfile,
    options: &GraphOptions,
) -> Result<NormalizationReference> {
    let total = generation_rates(grid, profile).total();
    let mut best: Option<(f64, usize, (usize, usize))> = None;
    let mut excluded = Vec::new();
    for s in 0..topology.node_count() {
        let graph = RoutingGraph::build(topology, s, loss, options)?;
        let routes = all_pair_routes(&graph)?;
        if !routes.is_feasible() {
            log::warn!(
                "source {} leaves {} pair(s) without disjoint routes; excluded from normalization",
                topology.node_id(s),
                routes.infeasible.len()
            );
            excluded.push(s);
            continue;
        }
        for plan in &routes.plans {
            let v = plan.eta * total;
            if best.is_none_or(|(b, _, _)| v < b) {
                best = Some((v, s, plan.pair));
            }
        }
    }
    let (value, source, pair) = best.ok_or_else(|| {
        Error::Infeasible("no source placement routes every pair".into())
    })?;
    Ok(NormalizationReference {
        value,
        source,
        pair,
        excluded,
    })
}
