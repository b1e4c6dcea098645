//! Rounding of the fractional optimum.
//!
//! The fractional optimum gives pair `p` exactly `T_f/η_p` units of
//! generation mass. Laying the channels (index order) and the pairs' quotas
//! (pair order) along one line, every quota boundary cuts at most one
//! channel, so at most `k-1` channels are shared. Each shared channel then
//! goes wholly to one of the pairs sharing it.
//!
//! The owner is the sharer with the smallest integral rate so far, except
//! that a pair that already lost the channel at the start of its quota keeps
//! the one at its end. Each pair therefore loses at most one partial
//! channel, which bounds every received rate below by
//! `T_f - max_{p,x} η_p·n̄_x`.

use super::{fractional_optimum, Allocation, AllocationInstance};
use crate::error::Result;

/// One channel together with the pairs whose quota overlaps it.
struct Span {
    channel: usize,
    sharers: Vec<usize>,
}

pub fn lp_round(instance: &AllocationInstance) -> Result<Allocation> {
    let etas = instance.etas();
    let rates = instance.rates();
    let k = etas.len();
    let t_f = fractional_optimum(instance);

    // Quota boundaries along the mass line; the last one is pinned to the
    // total so rounding never leaves a sliver unowned.
    let total: f64 = rates.iter().sum();
    let mut bounds = Vec::with_capacity(k);
    let mut acc = 0.0;
    for (p, eta) in etas.iter().enumerate() {
        acc += t_f / eta;
        bounds.push(if p + 1 == k { f64::INFINITY } else { acc.min(total) });
    }

    let mut spans = Vec::with_capacity(rates.len());
    let mut start = 0.0;
    let mut p = 0;
    for (x, &rate) in rates.iter().enumerate() {
        let end = start + rate;
        // Skip quotas that end at or before this channel starts.
        while p + 1 < k && bounds[p] <= start {
            p += 1;
        }
        let mut sharers = vec![p];
        let mut q = p;
        while q + 1 < k && bounds[q] < end {
            q += 1;
            sharers.push(q);
        }
        spans.push(Span { channel: x, sharers });
        start = end;
    }

    let mut sums = vec![0.0; k];
    let mut assignment = vec![0; rates.len()];
    let mut shared = Vec::new();
    for span in spans {
        if let [only] = span.sharers[..] {
            assignment[span.channel] = only;
            sums[only] += rates[span.channel];
        } else {
            shared.push(span);
        }
    }

    // Shared channels in line order; `lost_start[p]` marks a pair whose
    // opening partial channel went to someone else.
    let mut lost_start = vec![false; k];
    for span in shared {
        let first = span.sharers[0];
        let owner = if lost_start[first] {
            first
        } else {
            *span
                .sharers
                .iter()
                .min_by(|&&a, &&b| (etas[a] * sums[a]).total_cmp(&(etas[b] * sums[b])).then(a.cmp(&b)))
                .expect("shared span has sharers")
        };
        let last = *span.sharers.last().expect("non-empty");
        if owner != last {
            lost_start[last] = true;
        }
        assignment[span.channel] = owner;
        sums[owner] += rates[span.channel];
    }
    Allocation::from_assignment(instance, assignment)
}
