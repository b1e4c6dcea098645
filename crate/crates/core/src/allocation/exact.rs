//! Depth-first branch and bound for the max-min channel partition.
//!
//! Channels are fixed largest first. At each node the remaining generation
//! mass is water-filled over the pairs' current values; that fractional
//! completion bounds every leaf below the node, and the pair missing the most
//! mass to reach that level is tried first. The search starts from the
//! better of the modified-LPT and matching allocations as incumbent.

use super::{check_order, greedy::modified_lpt, matching::bezakova_matching, received_rates, Allocation, AllocationInstance};
use crate::error::Result;
use crate::numeric::canonical_sum;

/// Relative slack applied to bounds before pruning, so that rounding in the
/// bound never discards a leaf that ties or beats the incumbent.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactLimits {
    /// Search nodes expanded before giving up.
    pub max_nodes: u64,
    /// Prune subtrees that cannot beat the incumbent by more than this
    /// relative margin. Zero proves optimality.
    pub relative_gap: f64,
}

impl Default for ExactLimits {
    fn default() -> Self {
        Self {
            max_nodes: 20_000_000,
            relative_gap: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactStatus {
    /// Search completed with zero gap.
    Optimal,
    /// Search completed; the result is within `relative_gap` of optimal.
    WithinGap,
    /// Node budget exhausted; the allocation is the best incumbent.
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub allocation: Allocation,
    pub status: ExactStatus,
    pub nodes: u64,
    /// Fractional bound at the root.
    pub upper_bound: f64,
}

struct Search<'a> {
    etas: &'a [f64],
    rates: &'a [f64],
    /// Channel indices, descending rate.
    order: Vec<usize>,
    /// `suffix[d]` is the generation mass of `order[d..]`.
    suffix: Vec<f64>,
    /// Position of each pair in the caller's pair order.
    rank: Vec<usize>,
    sums: Vec<f64>,
    assignment: Vec<usize>,
    best: f64,
    best_assignment: Vec<usize>,
    nodes: u64,
    limits: ExactLimits,
    exhausted: bool,
    scratch: Vec<(f64, f64)>,
}

impl Search<'_> {
    fn value(&self, p: usize) -> f64 {
        self.etas[p] * self.sums[p]
    }

    /// Largest `T` with `Σ_p max(0, (T - v_p)/η_p) <= remaining`.
    fn water_fill(&mut self, remaining: f64) -> f64 {
        self.scratch.clear();
        for p in 0..self.etas.len() {
            self.scratch.push((self.etas[p] * self.sums[p], 1.0 / self.etas[p]));
        }
        self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut mass = remaining;
        let mut inv = 0.0;
        for i in 0..self.scratch.len() {
            let (v, w) = self.scratch[i];
            mass += v * w;
            inv += w;
            let level = mass / inv;
            match self.scratch.get(i + 1) {
                Some(&(next, _)) if level > next => continue,
                _ => return level,
            }
        }
        unreachable!("loop returns on the last pair")
    }

    fn prunable(&self, bound: f64) -> bool {
        bound * (1.0 + BOUND_SLACK) <= self.best * (1.0 + self.limits.relative_gap)
    }

    fn leaf(&mut self) {
        let mut held = vec![Vec::new(); self.etas.len()];
        for (x, &p) in self.assignment.iter().enumerate() {
            held[p].push(self.rates[x]);
        }
        let min = held
            .into_iter()
            .zip(self.etas)
            .map(|(rates, e)| e * canonical_sum(rates))
            .fold(f64::INFINITY, f64::min);
        if min > self.best {
            self.best = min;
            self.best_assignment.copy_from_slice(&self.assignment);
        }
    }

    fn descend(&mut self, depth: usize) {
        if self.exhausted {
            return;
        }
        if depth == self.order.len() {
            self.leaf();
            return;
        }
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            self.exhausted = true;
            return;
        }
        let level = self.water_fill(self.suffix[depth]);
        if self.prunable(level) {
            return;
        }

        let x = self.order[depth];
        let rate = self.rates[x];
        // Equal-rate channels are interchangeable: their owners must come in
        // non-decreasing tie rank.
        let min_rank = match depth.checked_sub(1).map(|d| self.order[d]) {
            Some(prev) if self.rates[prev] == rate => self.rank[self.assignment[prev]],
            _ => 0,
        };
        // Largest mass still missing to reach the water level first.
        let mut candidates: Vec<(f64, usize)> = (0..self.etas.len())
            .filter(|&p| self.rank[p] >= min_rank)
            .map(|p| ((level - self.value(p)) / self.etas[p], p))
            .collect();
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(self.rank[a.1].cmp(&self.rank[b.1])));
        for (_, p) in candidates {
            let saved = self.sums[p];
            self.sums[p] += rate;
            self.assignment[x] = p;
            self.descend(depth + 1);
            self.sums[p] = saved;
            if self.exhausted {
                return;
            }
        }
    }
}

/// Exact max-min partition by branch and bound.
///
/// `pair_order` breaks ties between equally loaded pairs, so different
/// orders may return different optimal allocations.
pub fn exact_maxmin(
    instance: &AllocationInstance,
    pair_order: &[usize],
    limits: &ExactLimits,
) -> Result<ExactSolution> {
    let k = instance.pair_count();
    check_order(pair_order, k)?;
    let rates = instance.rates();
    let order = crate::spectrum::RateVector::new(rates.to_vec())?.descending_order();
    let mut suffix = vec![0.0; order.len() + 1];
    for d in (0..order.len()).rev() {
        suffix[d] = suffix[d + 1] + rates[order[d]];
    }
    let mut rank = vec![0; k];
    for (pos, &p) in pair_order.iter().enumerate() {
        rank[p] = pos;
    }

    let seed = [Some(modified_lpt(instance)?), bezakova_matching(instance).ok()]
        .into_iter()
        .flatten()
        .max_by(|a, b| a.min_rate().total_cmp(&b.min_rate()))
        .expect("modified LPT always yields an allocation");
    let mut search = Search {
        etas: instance.etas(),
        rates,
        order,
        suffix,
        rank,
        sums: vec![0.0; k],
        assignment: vec![0; rates.len()],
        best: seed.min_rate(),
        best_assignment: seed.assignment.clone(),
        nodes: 0,
        limits: *limits,
        exhausted: false,
        scratch: Vec::with_capacity(k),
    };
    // Start below the seed so an equal-valued leaf reached through the
    // caller's tie order replaces it.
    search.best = f64::min(search.best, search.best * (1.0 - BOUND_SLACK));
    let upper_bound = search.water_fill(search.suffix[0]);
    search.descend(0);

    let status = if search.exhausted {
        ExactStatus::BudgetExceeded
    } else if limits.relative_gap > 0.0 {
        ExactStatus::WithinGap
    } else {
        ExactStatus::Optimal
    };
    let received = received_rates(instance, &search.best_assignment)?;
    Ok(ExactSolution {
        allocation: Allocation {
            assignment: search.best_assignment,
            received,
        },
        status,
        nodes: search.nodes,
        upper_bound,
    })
}
