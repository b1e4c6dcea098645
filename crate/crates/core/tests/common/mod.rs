//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use eprdist::allocation::AllocationInstance;
use eprdist::netgraph::RoutingGraph;
use eprdist::routing::canonical_sum;
use eprdist::spectrum::{generation_rates, ChannelGrid, RateVector, SpectrumProfile};
use eprdist::topology::PhysicalTopology;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

/// Connected topology on `n` nodes `N0..`: a random spanning tree plus
/// each remaining link with probability `extra`. Distances in (0.1, 10] km.
pub fn random_topology(rng: &mut ChaCha8Rng, n: usize, extra: f64) -> PhysicalTopology {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut links = Vec::new();
    let mut present = vec![vec![false; n]; n];
    for t in 1..n {
        let a = order[t];
        let b = order[rng.gen_range(0..t)];
        present[a][b] = true;
        present[b][a] = true;
        links.push((a, b));
    }
    for (a, row) in present.iter().enumerate() {
        for (b, &linked) in row.iter().enumerate().skip(a + 1) {
            if !linked && rng.gen_bool(extra) {
                links.push((a, b));
            }
        }
    }
    let text = json!({
        "name": "random",
        "nodes": (0..n).map(|i| json!({"id": format!("N{i}")})).collect::<Vec<_>>(),
        "links": links.iter().map(|&(a, b)| json!({
            "a": format!("N{a}"),
            "b": format!("N{b}"),
            "distance_km": 10.0 - rng.gen_range(0.0..9.9),
        })).collect::<Vec<_>>(),
    });
    PhysicalTopology::from_json_str(&text.to_string()).expect("generated topology is valid")
}

/// Every vertex-simple path from the generator to `target`, as edge ids.
pub fn simple_paths(graph: &RoutingGraph, target: usize) -> Vec<Vec<usize>> {
    fn walk(
        graph: &RoutingGraph,
        v: usize,
        target: usize,
        on_path: &mut Vec<bool>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if v == target {
            out.push(path.clone());
            return;
        }
        for &e in graph.out_edges(v) {
            let w = graph.edges()[e].to;
            if on_path[w] {
                continue;
            }
            on_path[w] = true;
            path.push(e);
            walk(graph, w, target, on_path, path, out);
            path.pop();
            on_path[w] = false;
        }
    }
    let mut on_path = vec![false; graph.vertex_count()];
    on_path[graph.generator()] = true;
    let mut out = Vec::new();
    walk(graph, graph.generator(), target, &mut on_path, &mut Vec::new(), &mut out);
    out
}

/// Loss of the cheapest path from every vertex to `target`, ignoring
/// disjointness, by Bellman-Ford relaxation. Unreachable vertices get
/// infinity.
pub fn distances_to(graph: &RoutingGraph, target: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.vertex_count()];
    dist[target] = 0.0;
    for _ in 0..graph.vertex_count() {
        let mut changed = false;
        for e in graph.edges() {
            let via = e.weight + dist[e.to];
            if via < dist[e.from] {
                dist[e.from] = via;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// Minimum total loss over all edge-disjoint pairs of simple paths from the
/// generator to the memories of `i` and `j`, by exhaustive depth-first
/// enumeration. Partial paths are dropped only when their loss plus a lower
/// bound on the rest already exceeds the best total; losses are nonnegative,
/// so no optimal pair is lost. Totals use the same canonical summation as
/// the library.
pub fn brute_force_pair_loss(graph: &RoutingGraph, i: usize, j: usize) -> Option<f64> {
    struct Walk<'a> {
        graph: &'a RoutingGraph,
        targets: [usize; 2],
        /// Per leg: cheapest completion from each vertex, plus for the
        /// first leg the cheapest whole second leg.
        remaining: [Vec<f64>; 2],
        second_leg: f64,
        on_path: Vec<bool>,
        used: Vec<bool>,
        paths: [Vec<usize>; 2],
        best: Option<f64>,
    }

    impl Walk<'_> {
        fn beaten(&self, estimate: f64) -> bool {
            self.best.is_some_and(|b| estimate > b * (1.0 + 1e-9) + 1e-9)
        }

        fn step(&mut self, leg: usize, v: usize, partial: f64) {
            let rest = self.remaining[leg][v] + if leg == 0 { self.second_leg } else { 0.0 };
            if rest.is_infinite() || self.beaten(partial + rest) {
                return;
            }
            if v == self.targets[leg] {
                if leg == 0 {
                    self.on_path.iter_mut().for_each(|b| *b = false);
                    let g = self.graph.generator();
                    self.on_path[g] = true;
                    self.step(1, g, partial);
                    // Restore the first leg's vertex marks.
                    self.on_path.iter_mut().for_each(|b| *b = false);
                    self.on_path[g] = true;
                    for &e in &self.paths[0] {
                        self.on_path[self.graph.edges()[e].to] = true;
                    }
                } else {
                    let edges = self.graph.edges();
                    let total = canonical_sum(self.paths[0].iter().chain(&self.paths[1]).map(|&e| edges[e].weight));
                    if self.best.is_none_or(|b| total < b) {
                        self.best = Some(total);
                    }
                }
                return;
            }
            let mut next: Vec<usize> = self.graph.out_edges(v).to_vec();
            let edges = self.graph.edges();
            let remaining = &self.remaining[leg];
            next.sort_by(|&a, &b| {
                (edges[a].weight + remaining[edges[a].to]).total_cmp(&(edges[b].weight + remaining[edges[b].to]))
            });
            for e in next {
                let edge = &self.graph.edges()[e];
                if self.on_path[edge.to] || self.used[e] {
                    continue;
                }
                self.on_path[edge.to] = true;
                self.used[e] = true;
                self.paths[leg].push(e);
                self.step(leg, edge.to, partial + edge.weight);
                self.paths[leg].pop();
                self.used[e] = false;
                self.on_path[edge.to] = false;
            }
        }
    }

    let targets = [graph.memory(i)?, graph.memory(j)?];
    let remaining = [distances_to(graph, targets[0]), distances_to(graph, targets[1])];
    let second_leg = remaining[1][graph.generator()];
    let mut walk = Walk {
        graph,
        targets,
        remaining,
        second_leg,
        on_path: vec![false; graph.vertex_count()],
        used: vec![false; graph.edges().len()],
        paths: [Vec::new(), Vec::new()],
        best: None,
    };
    walk.on_path[graph.generator()] = true;
    walk.step(0, graph.generator(), 0.0);
    walk.best
}

/// Rates of `m` channels under a Gaussian profile with random width and
/// pitch.
pub fn random_gaussian_rates(rng: &mut ChaCha8Rng, m: usize) -> RateVector {
    let grid = ChannelGrid {
        channel_count: m,
        channel_pitch_nm: rng.gen_range(0.1..2.0),
        ..ChannelGrid::default()
    };
    let profile = SpectrumProfile {
        fwhm_nm: rng.gen_range(0.5..9.0),
        peak_rate: rng.gen_range(0.5..2.0),
    };
    generation_rates(&grid, &profile)
}

/// Transmittance uniform in (0.001, 1].
pub fn random_eta(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.gen_range(0.0..0.999)
}

pub fn random_instance(rng: &mut ChaCha8Rng, k: usize, m: usize) -> AllocationInstance {
    let etas = (0..k).map(|_| random_eta(rng)).collect();
    AllocationInstance::new(etas, random_gaussian_rates(rng, m)).expect("valid instance")
}

/// Best minimum received rate over all `k^m` assignments. Each pair's rates
/// are summed smallest first, matching the library's canonical sums.
pub fn brute_force_maxmin(instance: &AllocationInstance) -> f64 {
    let k = instance.pair_count();
    let m = instance.channel_count();
    let rates = instance.rates();
    let etas = instance.etas();
    let mut assignment = vec![0usize; m];
    let mut best = f64::NEG_INFINITY;
    loop {
        let mut held = vec![Vec::new(); k];
        for (x, &p) in assignment.iter().enumerate() {
            held[p].push(rates[x]);
        }
        let min = held
            .iter_mut()
            .zip(etas)
            .map(|(h, e)| {
                h.sort_by(|a, b| a.partial_cmp(b).unwrap());
                e * h.iter().fold(0.0, |acc, r| acc + r)
            })
            .fold(f64::INFINITY, f64::min);
        best = best.max(min);
        // Odometer increment.
        let mut d = 0;
        loop {
            if d == m {
                return best;
            }
            assignment[d] += 1;
            if assignment[d] < k {
                break;
            }
            assignment[d] = 0;
            d += 1;
        }
    }
}

/// Max flow by repeated BFS augmentation on a dense capacity matrix.
pub fn max_flow(capacity: &mut [Vec<f64>], s: usize, t: usize) -> f64 {
    let n = capacity.len();
    let mut flow = 0.0;
    loop {
        let mut parent = vec![usize::MAX; n];
        parent[s] = s;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if parent[v] == usize::MAX && capacity[u][v] > 1e-300 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            return flow;
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = t;
        while v != s {
            bottleneck = bottleneck.min(capacity[parent[v]][v]);
            v = parent[v];
        }
        let mut v = t;
        while v != s {
            capacity[parent[v]][v] -= bottleneck;
            capacity[v][parent[v]] += bottleneck;
            v = parent[v];
        }
        flow += bottleneck;
    }
}

/// Whether a fractional assignment gives every pair at least `target`:
/// channel supply flows to pair demands `target/η_p` over a complete
/// bipartite network.
pub fn fractional_feasible(instance: &AllocationInstance, target: f64) -> bool {
    let k = instance.pair_count();
    let m = instance.channel_count();
    let (s, t) = (0, 1 + m + k);
    let mut cap = vec![vec![0.0; t + 1]; t + 1];
    for (x, &r) in instance.rates().iter().enumerate() {
        cap[s][1 + x] = r;
        for p in 0..k {
            cap[1 + x][1 + m + p] = f64::INFINITY;
        }
    }
    let mut demand = 0.0;
    for (p, &eta) in instance.etas().iter().enumerate() {
        cap[1 + m + p][t] = target / eta;
        demand += target / eta;
    }
    max_flow(&mut cap, s, t) >= demand * (1.0 - 1e-12)
}

/// Largest feasible fractional target by bisection.
pub fn fractional_oracle(instance: &AllocationInstance) -> f64 {
    let total: f64 = instance.rates().iter().sum();
    let max_eta = instance.etas().iter().cloned().fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, total * max_eta);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fractional_feasible(instance, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    lo
}
