//! Minimum-loss edge-disjoint routes from the generator to both memories of
//! every node pair.
//!
//! A pair `(i, j)` is routed by attaching a dummy sink fed by zero-weight
//! arcs from `mem(i)` and `mem(j)`, running Suurballe's two-path search from
//! the generator to the sink, and stripping the dummy arcs again.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::netgraph::{transmittance, RoutingGraph};
pub use crate::numeric::canonical_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// Plain weighted digraph; arc ids are insertion indices.
#[derive(Debug, Clone, Default)]
pub struct Digraph {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn with_vertices(n: usize) -> Self {
        Self {
            arcs: Vec::new(),
            out: vec![Vec::new(); n],
        }
    }

    pub fn add_vertex(&mut self) -> usize {
        self.out.push(Vec::new());
        self.out.len() - 1
    }

    pub fn add_arc(&mut self, from: usize, to: usize, weight: f64) -> usize {
        assert!(from < self.out.len() && to < self.out.len(), "arc endpoint out of range");
        self.arcs.push(Arc { from, to, weight });
        self.out[from].push(self.arcs.len() - 1);
        self.arcs.len() - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn out_arcs(&self, v: usize) -> &[usize] {
        &self.out[v]
    }
}

impl From<&RoutingGraph> for Digraph {
    fn from(graph: &RoutingGraph) -> Self {
        let mut g = Digraph::with_vertices(graph.vertex_count());
        for e in graph.edges() {
            g.add_arc(e.from, e.to, e.weight);
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisjointPair {
    /// Two arc-id sequences, each from the source to the sink.
    pub paths: [Vec<usize>; 2],
    pub weight: f64,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on (dist, vertex).
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Forward(usize),
    Backward(usize),
}

/// Dijkstra over a neighbor function yielding `(step, head, cost)`.
fn dijkstra<F, I>(n: usize, src: usize, mut neighbors: F) -> (Vec<f64>, Vec<Option<Step>>)
where
    F: FnMut(usize) -> I,
    I: IntoIterator<Item = (Step, usize, f64)>,
{
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(HeapEntry { dist: 0.0, vertex: src });
    while let Some(HeapEntry { dist: d, vertex: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for (step, v, cost) in neighbors(u) {
            let nd = d + cost;
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = Some(step);
                heap.push(HeapEntry { dist: nd, vertex: v });
            }
        }
    }
    (dist, pred)
}

/// Two arc-disjoint `src -> dst` paths of minimum total weight, or `None`
/// when no such pair exists. Weights must be nonnegative.
pub fn suurballe_disjoint_pair(
    graph: &Digraph,
    src: usize,
    dst: usize,
) -> Result<Option<DisjointPair>> {
    let n = graph.vertex_count();
    for v in [src, dst] {
        if v >= n {
            return Err(Error::UnknownVertex(v));
        }
    }
    if src == dst {
        return Err(Error::Argument("source and sink must differ".into()));
    }
    if let Some(a) = graph.arcs.iter().find(|a| !(a.weight >= 0.0)) {
        return Err(Error::Domain(format!("negative arc weight {}", a.weight)));
    }
    let arcs = &graph.arcs;

    // Pass 1: shortest-path tree.
    let (dist, pred) = dijkstra(n, src, |u| {
        graph.out[u]
            .iter()
            .map(move |&e| (Step::Forward(e), arcs[e].to, arcs[e].weight))
    });
    if !dist[dst].is_finite() {
        return Ok(None);
    }
    let first = trace(&pred, arcs, src, dst)?;

    let mut on_first = vec![false; arcs.len()];
    // P1 arcs entering each vertex, traversable backward in the residual.
    let mut reverse_in: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &e in &first {
        on_first[e] = true;
        reverse_in[arcs[e].to].push(e);
    }

    // Pass 2: residual graph under reduced costs w + d(u) - d(v).
    let (dist2, pred2) = dijkstra(n, src, |u| {
        let forward = graph.out[u].iter().filter_map(|&e| {
            let a = arcs[e];
            if on_first[e] || !dist[a.to].is_finite() {
                return None;
            }
            let reduced = (a.weight + dist[u] - dist[a.to]).max(0.0);
            Some((Step::Forward(e), a.to, reduced))
        });
        let backward = reverse_in[u]
            .iter()
            .map(|&e| (Step::Backward(e), arcs[e].from, 0.0));
        forward.chain(backward).collect::<Vec<_>>()
    });
    if !dist2[dst].is_finite() {
        return Ok(None);
    }

    // Interleave: drop P1 arcs that P2 walked backward, keep the rest.
    let mut keep = on_first.clone();
    let mut v = dst;
    while v != src {
        match pred2[v] {
            Some(Step::Forward(e)) => {
                keep[e] = true;
                v = arcs[e].from;
            }
            Some(Step::Backward(e)) => {
                keep[e] = false;
                v = arcs[e].to;
            }
            None => return Err(Error::Consistency("broken residual path".into())),
        }
    }

    let mut remaining: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, _) in keep.iter().enumerate().filter(|(_, k)| **k) {
        remaining[arcs[e].from].push(e);
    }
    for out in &mut remaining {
        out.reverse(); // pop() yields the smallest arc id first
    }
    let p = walk(&mut remaining, arcs, src, dst)?;
    let q = walk(&mut remaining, arcs, src, dst)?;
    let weight = canonical_sum(p.iter().chain(&q).map(|&e| arcs[e].weight));
    Ok(Some(DisjointPair {
        paths: [p, q],
        weight,
    }))
}

fn trace(pred: &[Option<Step>], arcs: &[Arc], src: usize, dst: usize) -> Result<Vec<usize>> {
    let mut path = Vec::new();
    let mut v = dst;
    while v != src {
        match pred[v] {
            Some(Step::Forward(e)) => {
                path.push(e);
                v = arcs[e].from;
            }
            _ => return Err(Error::Consistency("broken shortest-path tree".into())),
        }
    }
    path.reverse();
    Ok(path)
}

/// Follows unused arcs from `src` to `dst`, cutting out any closed loop.
fn walk(remaining: &mut [Vec<usize>], arcs: &[Arc], src: usize, dst: usize) -> Result<Vec<usize>> {
    let mut path: Vec<usize> = Vec::new();
    let mut visited = vec![src];
    let mut v = src;
    while v != dst {
        let e = remaining[v]
            .pop()
            .ok_or_else(|| Error::Consistency("flow decomposition stalled".into()))?;
        v = arcs[e].to;
        if let Some(pos) = visited.iter().position(|&u| u == v) {
            path.truncate(pos);
            visited.truncate(pos + 1);
        } else {
            path.push(e);
            visited.push(v);
        }
    }
    Ok(path)
}

/// Routes of one node pair. Paths are edge-id sequences in the
/// [`RoutingGraph`], from the generator to the respective memory.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutePlan {
    pub pair: (usize, usize),
    pub path_i: Vec<usize>,
    pub path_j: Vec<usize>,
    /// Sum of both paths' losses, dB.
    pub total_loss: f64,
    pub eta: f64,
}

impl RoutePlan {
    pub fn hops(&self, graph: &RoutingGraph, path: &[usize]) -> Vec<String> {
        let mut labels = vec![graph.vertex_label(graph.generator())];
        labels.extend(path.iter().map(|&e| graph.vertex_label(graph.edges()[e].to)));
        labels
    }
}

/// Routes the pair `(i, j)`. `Ok(None)` when no edge-disjoint pair exists.
pub fn pair_route(graph: &RoutingGraph, i: usize, j: usize) -> Result<Option<RoutePlan>> {
    pair_route_on(graph, &Digraph::from(graph), i, j)
}

fn pair_route_on(
    graph: &RoutingGraph,
    base: &Digraph,
    i: usize,
    j: usize,
) -> Result<Option<RoutePlan>> {
    if i == j {
        return Err(Error::Argument(format!("pair needs two distinct nodes, got ({i}, {i})")));
    }
    let (mem_i, mem_j) = match (graph.memory(i), graph.memory(j)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::UnknownNode(format!("#{}", i.max(j)))),
    };
    let mut g = base.clone();
    let dummy = g.add_vertex();
    let via_i = g.add_arc(mem_i, dummy, 0.0);
    let via_j = g.add_arc(mem_j, dummy, 0.0);

    let Some(found) = suurballe_disjoint_pair(&g, graph.generator(), dummy)? else {
        return Ok(None);
    };
    let [mut p, mut q] = found.paths;
    let (last_p, last_q) = (p.pop(), q.pop());
    let (path_i, path_j) = match (last_p, last_q) {
        (Some(a), Some(b)) if a == via_i && b == via_j => (p, q),
        (Some(a), Some(b)) if a == via_j && b == via_i => (q, p),
        _ => {
            return Err(Error::Consistency(format!(
                "both routes of pair ({}, {}) end in the same memory",
                graph.node_id(i),
                graph.node_id(j)
            )))
        }
    };
    let edges = graph.edges();
    let total_loss = canonical_sum(path_i.iter().chain(&path_j).map(|&e| edges[e].weight));
    let (path_i, path_j) = if i < j { (path_i, path_j) } else { (path_j, path_i) };
    Ok(Some(RoutePlan {
        pair: (i.min(j), i.max(j)),
        path_i,
        path_j,
        total_loss,
        eta: transmittance(total_loss)?,
    }))
}

/// Plans for every unordered pair `(i < j)`, lexicographic pair order.
#[derive(Debug, Clone, PartialEq)]
pub struct AllPairRoutes {
    pub plans: Vec<RoutePlan>,
    pub infeasible: Vec<(usize, usize)>,
}

impl AllPairRoutes {
    pub fn is_feasible(&self) -> bool {
        self.infeasible.is_empty()
    }

    pub fn etas(&self) -> Vec<f64> {
        self.plans.iter().map(|p| p.eta).collect()
    }
}

pub fn all_pair_routes(graph: &RoutingGraph) -> Result<AllPairRoutes> {
    let base = Digraph::from(graph);
    let n = graph.node_count();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let outcomes: Vec<Result<Option<RoutePlan>>> = pairs
        .par_iter()
        .map(|&(i, j)| pair_route_on(graph, &base, i, j))
        .collect();
    let mut plans = Vec::with_capacity(pairs.len());
    let mut infeasible = Vec::new();
    for (pair, outcome) in pairs.into_iter().zip(outcomes) {
        match outcome? {
            Some(plan) => plans.push(plan),
            None => infeasible.push(pair),
        }
    }
    Ok(AllPairRoutes { plans, infeasible })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::{build_routing_graph, LossParams};
    use crate::topology::{Link, Node, PhysicalTopology};

    fn star(dists: &[(usize, usize, f64)], n: usize) -> PhysicalTopology {
        let names = ["s", "a", "b", "c", "d", "e"];
        PhysicalTopology::new(
            "t",
            (0..n).map(|i| Node { id: names[i].into(), position: None }).collect(),
            dists
                .iter()
                .map(|&(a, b, d)| Link { a, b, distance_km: Some(d) })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn parallel_arcs() {
        let mut g = Digraph::with_vertices(2);
        g.add_arc(0, 1, 1.0);
        g.add_arc(0, 1, 2.0);
        let r = suurballe_disjoint_pair(&g, 0, 1).unwrap().unwrap();
        assert_eq!(r.weight, 3.0);
    }

    #[test]
    fn single_path_is_infeasible() {
        let mut g = Digraph::with_vertices(3);
        g.add_arc(0, 1, 1.0);
        g.add_arc(1, 2, 1.0);
        assert_eq!(suurballe_disjoint_pair(&g, 0, 2).unwrap(), None);
        assert!(matches!(suurballe_disjoint_pair(&g, 0, 9), Err(Error::UnknownVertex(9))));
    }

    #[test]
    fn trap_topology_needs_interleaving() {
        // Classic case where the single shortest path blocks a greedy
        // second path: 0-1-2-3 is shortest, but the optimal pair is
        // {0-1-3, 0-2-3}.
        let mut g = Digraph::with_vertices(4);
        g.add_arc(0, 1, 1.0);
        g.add_arc(1, 2, 1.0);
        g.add_arc(2, 3, 1.0);
        g.add_arc(0, 2, 3.0);
        g.add_arc(1, 3, 3.0);
        let r = suurballe_disjoint_pair(&g, 0, 3).unwrap().unwrap();
        assert_eq!(r.weight, 8.0);
        let mut paths = r.paths.to_vec();
        paths.sort();
        assert_eq!(paths, vec![vec![0, 4], vec![3, 2]]);
    }

    #[test]
    fn three_node_star_by_hand() {
        let t = star(&[(0, 1, 1.0), (0, 2, 1.0)], 3);
        let g = build_routing_graph(&t, "s", &LossParams::default()).unwrap();
        let plan = pair_route(&g, 1, 2).unwrap().unwrap();
        assert!((plan.total_loss - 48.8).abs() < 1e-9);
        assert!((plan.eta - 1.318e-5).abs() < 1e-8);
        let w = |p: &[usize]| p.iter().map(|&e| g.edges()[e].weight).sum::<f64>();
        assert!((w(&plan.path_i) - 24.4).abs() < 1e-9);
        assert!((w(&plan.path_j) - 24.4).abs() < 1e-9);
    }

    #[test]
    fn pair_with_source_memory() {
        let t = star(&[(0, 1, 1.0)], 2);
        let g = build_routing_graph(&t, "s", &LossParams::default()).unwrap();
        let plan = pair_route(&g, 0, 1).unwrap().unwrap();
        assert!((plan.total_loss - 32.4).abs() < 1e-9);
        assert_eq!(plan.path_i.len(), 1);
        assert_eq!(g.edges()[plan.path_i[0]].to, g.memory(0).unwrap());
        // Reversed argument order yields the same canonical plan.
        assert_eq!(pair_route(&g, 1, 0).unwrap().unwrap(), plan);
        assert!(matches!(pair_route(&g, 1, 1), Err(Error::Argument(_))));
    }

    #[test]
    fn bridge_makes_pairs_infeasible() {
        // s - a - {b, c}: both b and c sit behind the single fiber s->a.
        let t = star(&[(0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)], 4);
        let g = build_routing_graph(&t, "s", &LossParams::default()).unwrap();
        let all = all_pair_routes(&g).unwrap();
        assert!(!all.is_feasible());
        assert_eq!(all.infeasible, vec![(1, 2), (1, 3), (2, 3)]);
        assert_eq!(all.plans.len(), 3);
    }

    #[test]
    fn bundled_pair_counts() {
        for (name, k) in [("simple6", 15), ("ilec17", 136)] {
            let t = PhysicalTopology::bundled(name).unwrap();
            let src = t.node_id(0).to_string();
            let g = build_routing_graph(&t, &src, &LossParams::default()).unwrap();
            let all = all_pair_routes(&g).unwrap();
            assert!(all.is_feasible(), "{name}");
            assert_eq!(all.plans.len(), k);
        }
    }
}
