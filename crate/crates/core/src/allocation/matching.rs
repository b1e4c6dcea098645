//! Round-based matching allocation with a `1/(m-k+1)` guarantee.
//!
//! Each round matches pairs to remaining channels so that the smallest
//! resulting cumulative rate is as large as possible. The first round alone
//! is a bottleneck matching, which already secures `T_opt/(m-k+1)`; later
//! rounds only add channels.
//!
//! Two refinements run on top of the plain rounds. A pair already at or
//! above the round's threshold may sit the round out, and among matchings
//! reaching the threshold the one handing out the least generation rate is
//! taken. A refined round is kept only if finishing the allocation with
//! plain rounds from there ends no lower than finishing with plain rounds
//! from the plain choice, so the final minimum never drops below that of
//! the plain algorithm.
//!
//! Pair `p` accepts remaining channel position `j` (positions sorted by
//! descending rate) at threshold `θ` iff `η_p·(s_p + n̄_j) >= θ`. Those
//! acceptable sets are prefixes of the position list, so Hall's condition
//! reduces to comparing sorted prefix lengths and no general matching
//! routine is needed.

use super::{Allocation, AllocationInstance};
use crate::error::{Error, Result};

#[derive(Clone)]
struct State<'a> {
    etas: &'a [f64],
    rates: &'a [f64],
    /// Unassigned channels, descending rate (ties: lower index first).
    remaining: Vec<usize>,
    sums: Vec<f64>,
    assignment: Vec<usize>,
}

impl<'a> State<'a> {
    fn new(instance: &'a AllocationInstance) -> Result<Self> {
        let rates = instance.rates();
        Ok(Self {
            etas: instance.etas(),
            rates,
            remaining: crate::spectrum::RateVector::new(rates.to_vec())?.descending_order(),
            sums: vec![0.0; instance.pair_count()],
            assignment: vec![usize::MAX; rates.len()],
        })
    }

    fn k(&self) -> usize {
        self.etas.len()
    }

    fn value(&self, p: usize) -> f64 {
        self.etas[p] * self.sums[p]
    }

    fn value_with(&self, p: usize, pos: usize) -> f64 {
        self.etas[p] * (self.sums[p] + self.rates[self.remaining[pos]])
    }

    fn min_value(&self) -> f64 {
        (0..self.k()).map(|p| self.value(p)).fold(f64::INFINITY, f64::min)
    }

    /// Number of leading positions pair `p` accepts at threshold `theta`.
    fn accepted(&self, p: usize, theta: f64) -> usize {
        let (mut lo, mut hi) = (0, self.remaining.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.value_with(p, mid) >= theta {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Applies `(pair, position)` choices and drops the used positions.
    fn apply(&mut self, choice: &[(usize, usize)]) {
        let mut used = vec![false; self.remaining.len()];
        for &(p, pos) in choice {
            let x = self.remaining[pos];
            self.sums[p] += self.rates[x];
            self.assignment[x] = p;
            used[pos] = true;
        }
        let mut i = 0;
        self.remaining.retain(|_| {
            i += 1;
            !used[i - 1]
        });
    }

    /// Every pair takes exactly one channel. Requires at least `k` channels.
    fn plain_round(&self) -> Vec<(usize, usize)> {
        let k = self.k();
        debug_assert!(self.remaining.len() >= k);
        // With prefix-shaped acceptance, all k pairs can be matched at θ iff
        // for every j at least k-j+1 pairs accept position j-1; so θ* is the
        // minimum over j of the (k-j+1)-th largest value_with(., j-1).
        let mut theta = f64::INFINITY;
        let mut vals = vec![0.0; k];
        for j in 1..=k {
            for (p, v) in vals.iter_mut().enumerate() {
                *v = self.value_with(p, j - 1);
            }
            // In ascending order the (k-j+1)-th largest sits at index j-1.
            let (_, v, _) = vals.select_nth_unstable_by(j - 1, |a, b| a.total_cmp(b));
            theta = theta.min(*v);
        }
        let pairs: Vec<usize> = (0..k).collect();
        assign_positions(self, &pairs, theta, (0..k).collect())
    }

    /// Largest threshold reachable when pairs already at the threshold may
    /// skip, with the cheapest position set. `None` if no threshold above
    /// the current minimum is reachable.
    fn refined_round(&self) -> Option<Vec<(usize, usize)>> {
        let k = self.k();
        let r = self.remaining.len();
        let mut candidates: Vec<f64> = Vec::with_capacity(k * r + k);
        for p in 0..k {
            candidates.push(self.value(p));
            for pos in 0..r {
                candidates.push(self.value_with(p, pos));
            }
        }
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();

        let feasible = |theta: f64| -> bool {
            let mut limits: Vec<usize> = (0..k)
                .filter(|&p| self.value(p) < theta)
                .map(|p| self.accepted(p, theta))
                .collect();
            if limits.len() > r {
                return false;
            }
            limits.sort_unstable();
            limits.iter().enumerate().all(|(i, &c)| c > i)
        };
        // Largest feasible candidate; the smallest candidate is always
        // feasible (nobody sits strictly below it).
        let (mut lo, mut hi) = (0, candidates.len());
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if feasible(candidates[mid]) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let theta = candidates[lo];
        if theta <= self.min_value() {
            return None;
        }

        let pairs: Vec<usize> = (0..k).filter(|&p| self.value(p) < theta).collect();
        let mut limits_desc: Vec<usize> = pairs.iter().map(|&p| self.accepted(p, theta)).collect();
        limits_desc.sort_unstable_by(|a, b| b.cmp(a));
        // Matroid greedy from the cheapest position upward.
        let mut chosen = Vec::with_capacity(pairs.len());
        for pos in (0..r).rev() {
            if chosen.len() == pairs.len() {
                break;
            }
            if pos < limits_desc[chosen.len()] {
                chosen.push(pos);
            }
        }
        chosen.reverse();
        Some(assign_positions(self, &pairs, theta, chosen))
    }

    /// Leftover channels, largest first, each to the currently poorest pair.
    fn finish_greedily(&mut self) {
        for x in std::mem::take(&mut self.remaining) {
            let p = (0..self.k())
                .min_by(|&a, &b| self.value(a).total_cmp(&self.value(b)).then(a.cmp(&b)))
                .expect("at least one pair");
            self.sums[p] += self.rates[x];
            self.assignment[x] = p;
        }
    }

    /// Completes with plain rounds; returns the final minimum.
    fn plain_completion(mut self) -> f64 {
        while !self.remaining.is_empty() {
            if self.remaining.len() >= self.k() {
                let round = self.plain_round();
                self.apply(&round);
            } else {
                self.finish_greedily();
            }
        }
        self.min_value()
    }
}

/// Matches `pairs` to the ascending position list `positions`: the pair
/// with the fewest acceptable positions takes the first one, and so on.
fn assign_positions(
    state: &State<'_>,
    pairs: &[usize],
    theta: f64,
    positions: Vec<usize>,
) -> Vec<(usize, usize)> {
    let mut ordered: Vec<(usize, usize)> = pairs
        .iter()
        .map(|&p| (state.accepted(p, theta), p))
        .collect();
    ordered.sort_unstable();
    debug_assert_eq!(ordered.len(), positions.len());
    ordered
        .into_iter()
        .zip(positions)
        .map(|((limit, p), pos)| {
            debug_assert!(pos < limit);
            (p, pos)
        })
        .collect()
}

/// Iterated max-min matching allocation. Needs at least as many channels
/// as pairs.
pub fn bezakova_matching(instance: &AllocationInstance) -> Result<Allocation> {
    let k = instance.pair_count();
    let m = instance.channel_count();
    if m < k {
        return Err(Error::Infeasible(format!(
            "{m} channels cannot give each of {k} pairs one"
        )));
    }
    let mut state = State::new(instance)?;
    while !state.remaining.is_empty() {
        let Some(refined) = state.refined_round() else {
            state.finish_greedily();
            break;
        };
        let mut with_refined = state.clone();
        with_refined.apply(&refined);

        let mut with_plain = state.clone();
        if state.remaining.len() >= k {
            let plain = state.plain_round();
            with_plain.apply(&plain);
        } else {
            with_plain.finish_greedily();
        }

        if with_refined.clone().plain_completion() >= with_plain.clone().plain_completion() {
            state = with_refined;
        } else {
            state = with_plain;
        }
    }
    Allocation::from_assignment(instance, state.assignment)
}
