//! Order-driven heuristics: first fit, round robin, random, modified LPT.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_order, fractional_optimum, Allocation, AllocationInstance};
use crate::error::Result;

/// One sequential pass at target `target`: channels in index order fill the
/// current pair until it receives at least `target`, then the next pair in
/// `order` takes over. Channels left after the last pair is served stay with
/// it. Returns `None` when channels run out first.
pub fn first_fit_pass(
    instance: &AllocationInstance,
    order: &[usize],
    target: f64,
) -> Option<Vec<usize>> {
    let etas = instance.etas();
    let k = order.len();
    let mut pos = 0;
    let mut sum = 0.0;
    let mut assignment = Vec::with_capacity(instance.channel_count());
    for &rate in instance.rates() {
        let p = order[pos];
        assignment.push(p);
        sum += rate;
        if pos + 1 < k && etas[p] * sum >= target {
            pos += 1;
            sum = 0.0;
        }
    }
    let last_served = pos + 1 == k && etas[order[pos]] * sum >= target;
    (last_served || target <= 0.0).then_some(assignment)
}

/// First fit with the largest target `T` the sequential pass can serve.
///
/// `T` is found by bisection over `[0, T_f]` down to a `1e-9·T_f` bracket;
/// feasibility of the pass is monotone in `T`.
pub fn first_fit(instance: &AllocationInstance, pair_order: &[usize]) -> Result<Allocation> {
    check_order(pair_order, instance.pair_count())?;
    let t_f = fractional_optimum(instance);
    if let Some(a) = first_fit_pass(instance, pair_order, t_f) {
        return Allocation::from_assignment(instance, a);
    }
    let (mut lo, mut hi) = (0.0, t_f);
    while hi - lo > 1e-9 * t_f {
        let mid = 0.5 * (lo + hi);
        if first_fit_pass(instance, pair_order, mid).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let assignment = first_fit_pass(instance, pair_order, lo).expect("lower bracket is feasible");
    Allocation::from_assignment(instance, assignment)
}

/// Deals channels in descending-rate order to pairs cyclically.
pub fn round_robin(instance: &AllocationInstance, pair_order: &[usize]) -> Result<Allocation> {
    let k = instance.pair_count();
    check_order(pair_order, k)?;
    let mut assignment = vec![0; instance.channel_count()];
    let order = crate::spectrum::RateVector::new(instance.rates().to_vec())?.descending_order();
    for (t, x) in order.into_iter().enumerate() {
        assignment[x] = pair_order[t % k];
    }
    Allocation::from_assignment(instance, assignment)
}

/// Uniformly shuffled channels dealt cyclically, so channel counts differ by
/// at most one. Uses ChaCha8 seeded from `seed`.
pub fn random_balanced(instance: &AllocationInstance, seed: u64) -> Result<Allocation> {
    let k = instance.pair_count();
    let mut channels: Vec<usize> = (0..instance.channel_count()).collect();
    channels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; channels.len()];
    for (t, x) in channels.into_iter().enumerate() {
        assignment[x] = t % k;
    }
    Allocation::from_assignment(instance, assignment)
}

/// Largest channel first, always to the pair with the smallest current
/// received rate (lowest index on ties).
pub fn modified_lpt(instance: &AllocationInstance) -> Result<Allocation> {
    let etas = instance.etas();
    let rates = instance.rates();
    let mut sums = vec![0.0; etas.len()];
    let mut assignment = vec![0; rates.len()];
    let order = crate::spectrum::RateVector::new(rates.to_vec())?.descending_order();
    for x in order {
        let p = argmin_value(etas, &sums);
        assignment[x] = p;
        sums[p] += rates[x];
    }
    Allocation::from_assignment(instance, assignment)
}

fn argmin_value(etas: &[f64], sums: &[f64]) -> usize {
    let mut best = 0;
    for p in 1..etas.len() {
        if etas[p] * sums[p] < etas[best] * sums[best] {
            best = p;
        }
    }
    best
}
