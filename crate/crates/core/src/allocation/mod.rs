//! Max-min fair partition of wavelength channels among node pairs.
//!
//! An instance holds one transmittance per pair and one generation rate per
//! channel. Pair `p` given channel set `A_p` receives `η_p · Σ_{x∈A_p} n̄_x`;
//! every strategy returns a total partition of the channels and is scored by
//! the smallest received rate.

mod exact;
mod greedy;
mod lp_round;
mod matching;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::canonical_sum;
use crate::spectrum::RateVector;

pub use exact::{exact_maxmin, ExactLimits, ExactSolution, ExactStatus};
pub use greedy::{first_fit, first_fit_pass, modified_lpt, random_balanced, round_robin};
pub use lp_round::lp_round;
pub use matching::bezakova_matching;

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationInstance {
    etas: Vec<f64>,
    rates: RateVector,
}

impl AllocationInstance {
    pub fn new(etas: Vec<f64>, rates: RateVector) -> Result<Self> {
        if etas.is_empty() {
            return Err(Error::InvalidParameter("instance needs at least one pair".into()));
        }
        if rates.is_empty() {
            return Err(Error::InvalidParameter("instance needs at least one channel".into()));
        }
        if let Some(eta) = etas.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return Err(Error::Domain(format!("transmittance {eta} outside (0, 1]")));
        }
        Ok(Self { etas, rates })
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    pub fn rates(&self) -> &[f64] {
        self.rates.as_slice()
    }

    pub fn pair_count(&self) -> usize {
        self.etas.len()
    }

    pub fn channel_count(&self) -> usize {
        self.rates.len()
    }

    /// Largest single-channel value any pair could get, `max η_p·n̄_x`.
    pub fn max_channel_value(&self) -> f64 {
        let eta = self.etas.iter().cloned().fold(0.0, f64::max);
        let rate = self.rates().iter().cloned().fold(0.0, f64::max);
        eta * rate
    }
}

/// A total channel-to-pair map plus the rates it delivers.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// `assignment[x]` is the pair that owns channel `x` (0-based).
    pub assignment: Vec<usize>,
    pub received: Vec<f64>,
}

impl Allocation {
    pub fn from_assignment(instance: &AllocationInstance, assignment: Vec<usize>) -> Result<Self> {
        let received = received_rates(instance, &assignment)?;
        Ok(Self {
            assignment,
            received,
        })
    }

    pub fn min_rate(&self) -> f64 {
        self.received.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn channel_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.received.len()];
        for &p in &self.assignment {
            counts[p] += 1;
        }
        counts
    }

    pub fn channels_of(&self, pair: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == pair)
            .map(|(x, _)| x)
            .collect()
    }
}

/// Received rate per pair: `η_p` times the summed rates of its channels.
/// Sums are canonical, so they depend only on which rates a pair holds.
pub fn received_rates(instance: &AllocationInstance, assignment: &[usize]) -> Result<Vec<f64>> {
    let k = instance.pair_count();
    if assignment.len() != instance.channel_count() {
        return Err(Error::Partition(format!(
            "{} of {} channels assigned",
            assignment.len(),
            instance.channel_count()
        )));
    }
    let mut held = vec![Vec::new(); k];
    for (x, &p) in assignment.iter().enumerate() {
        if p >= k {
            return Err(Error::Partition(format!("channel {} assigned to unknown pair {p}", x + 1)));
        }
        held[p].push(instance.rates()[x]);
    }
    Ok(held
        .into_iter()
        .zip(&instance.etas)
        .map(|(rates, eta)| eta * canonical_sum(rates))
        .collect())
}

/// Converts an `m × k` 0/1 matrix into a channel-to-pair map, rejecting
/// channels with no owner or more than one.
pub fn assignment_from_matrix(matrix: &[Vec<bool>]) -> Result<Vec<usize>> {
    matrix
        .iter()
        .enumerate()
        .map(|(x, row)| {
            let mut owners = row.iter().enumerate().filter(|(_, &b)| b).map(|(p, _)| p);
            match (owners.next(), owners.next()) {
                (Some(p), None) => Ok(p),
                (None, _) => Err(Error::Partition(format!("channel {} unassigned", x + 1))),
                (Some(_), Some(_)) => {
                    Err(Error::Partition(format!("channel {} assigned twice", x + 1)))
                }
            }
        })
        .collect()
}

/// Optimum of the fractional relaxation, `Σ n̄_x / Σ 1/η_p`.
///
/// Every pair values channel mass at its own constant rate `η_p`, so
/// fractions are interchangeable and the optimum equalizes all pairs.
pub fn fractional_optimum(instance: &AllocationInstance) -> f64 {
    let total: f64 = instance.rates().iter().sum();
    let inverse: f64 = instance.etas.iter().map(|e| 1.0 / e).sum();
    total / inverse
}

pub(crate) fn check_order(order: &[usize], k: usize) -> Result<()> {
    let mut seen = vec![false; k];
    if order.len() != k {
        return Err(Error::Argument(format!("pair order has {} entries, expected {k}", order.len())));
    }
    for &p in order {
        if p >= k || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Argument("pair order is not a permutation".into()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Exact,
    FirstFit,
    RoundRobin,
    Random,
    Lpt,
    BdMatching,
    LpRound,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::Exact,
        Strategy::FirstFit,
        Strategy::RoundRobin,
        Strategy::Random,
        Strategy::Lpt,
        Strategy::BdMatching,
        Strategy::LpRound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Exact => "exact",
            Strategy::FirstFit => "first-fit",
            Strategy::RoundRobin => "round-robin",
            Strategy::Random => "random",
            Strategy::Lpt => "lpt",
            Strategy::BdMatching => "bd-matching",
            Strategy::LpRound => "lp-round",
        }
    }

    /// Whether results depend on the pair order or a seed, and so get
    /// averaged over randomized runs.
    pub fn order_sensitive(self) -> bool {
        matches!(
            self,
            Strategy::Exact | Strategy::FirstFit | Strategy::RoundRobin | Strategy::Random
        )
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown strategy `{s}`")))
    }
}

/// Result of one strategy execution.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub allocation: Allocation,
    /// False when the exact search stopped at its node budget.
    pub complete: bool,
}

/// Runs `strategy` with the given pair order (used by order-sensitive
/// strategies) and seed (used by `random`).
pub fn run_strategy(
    strategy: Strategy,
    instance: &AllocationInstance,
    pair_order: &[usize],
    seed: u64,
    limits: &ExactLimits,
) -> Result<Outcome> {
    let done = |allocation| Outcome {
        allocation,
        complete: true,
    };
    Ok(match strategy {
        Strategy::Exact => {
            let sol = exact_maxmin(instance, pair_order, limits)?;
            Outcome {
                complete: sol.status != ExactStatus::BudgetExceeded,
                allocation: sol.allocation,
            }
        }
        Strategy::FirstFit => done(first_fit(instance, pair_order)?),
        Strategy::RoundRobin => done(round_robin(instance, pair_order)?),
        Strategy::Random => done(random_balanced(instance, seed)?),
        Strategy::Lpt => done(modified_lpt(instance)?),
        Strategy::BdMatching => done(bezakova_matching(instance)?),
        Strategy::LpRound => done(lp_round(instance)?),
    })
}
