mod common;

use std::collections::{HashMap, HashSet};

use common::random_topology;
use eprdist::netgraph::{transmittance, EdgeKind, GraphOptions, LossParams, RoutingGraph, Vertex};
use eprdist::topology::PhysicalTopology;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Vertex and edge counts from the link list alone.
fn expected_counts(topology: &PhysicalTopology, source: usize, allow_u_turns: bool) -> (usize, usize) {
    let n = topology.node_count();
    let mut degree = vec![0usize; n];
    let mut touches_source = vec![false; n];
    for link in topology.links() {
        degree[link.a] += 1;
        degree[link.b] += 1;
        if link.a == source {
            touches_source[link.b] = true;
        }
        if link.b == source {
            touches_source[link.a] = true;
        }
    }
    let mut vertices = 1 + n + degree[source];
    let mut edges = degree[source] + 1;
    let mut fibers = degree[source];
    for c in (0..n).filter(|&c| c != source) {
        let ins = degree[c];
        let outs = degree[c] - usize::from(touches_source[c]);
        vertices += ins + outs;
        fibers += outs;
        // Every in-port reaches every out-port, and the memory.
        edges += ins * outs + ins;
        if !allow_u_turns {
            edges -= outs;
        }
    }
    (vertices, edges + fibers)
}

fn build(topology: &PhysicalTopology, source: usize, wss: f64, options: &GraphOptions) -> RoutingGraph {
    RoutingGraph::build(topology, source, &LossParams::with_wss(wss).unwrap(), options).unwrap()
}

proptest! {
    #[test]
    fn counts_match_independent_tally(seed in any::<u64>(), n in 2usize..9, extra in 0.0f64..1.0, u_turns in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topology = random_topology(&mut rng, n, extra);
        let source = rng.gen_range(0..n);
        let options = GraphOptions { allow_u_turns: u_turns };
        let g = build(&topology, source, 8.0, &options);
        let (v, e) = expected_counts(&topology, source, u_turns);
        prop_assert_eq!(g.vertex_count(), v);
        prop_assert_eq!(g.edges().len(), e);
        prop_assert_eq!(g.vertices().iter().filter(|v| **v == Vertex::Generator).count(), 1);
        for i in 0..n {
            prop_assert_eq!(g.vertices().iter().filter(|v| **v == Vertex::Memory(i)).count(), 1);
        }
    }

    #[test]
    fn weights_fall_in_three_classes(seed in any::<u64>(), n in 2usize..9, wss in 0.0f64..10.0, alpha in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topology = random_topology(&mut rng, n, 0.5);
        let source = rng.gen_range(0..n);
        let loss = LossParams::new(alpha, wss).unwrap();
        let g = RoutingGraph::build(&topology, source, &loss, &GraphOptions::default()).unwrap();
        for e in g.edges() {
            prop_assert!(e.weight >= 0.0);
            let expected = match (e.kind, g.vertices()[e.from], g.vertices()[e.to]) {
                (EdgeKind::Fiber, Vertex::OutPort { node, to }, Vertex::InPort { node: at, from }) => {
                    prop_assert_eq!((node, to), (from, at));
                    alpha * topology.link_distance(node, to).unwrap()
                }
                (EdgeKind::Launch | EdgeKind::PassThrough, _, _) => 2.0 * wss,
                (EdgeKind::SourceMemory | EdgeKind::Drop, _, _) => wss,
                other => panic!("unexpected edge {other:?}"),
            };
            prop_assert_eq!(e.weight, expected);
        }
    }

    #[test]
    fn generator_unreachable_and_memories_are_sinks(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topology = random_topology(&mut rng, n, 0.5);
        let source = rng.gen_range(0..n);
        let g = build(&topology, source, 4.0, &GraphOptions::default());
        for e in g.edges() {
            prop_assert_ne!(e.to, g.generator());
            prop_assert!(!matches!(g.vertices()[e.from], Vertex::Memory(_)));
            // Nothing is ever received at the source node.
            let into_source = matches!(g.vertices()[e.to], Vertex::InPort { node, .. } if node == source);
            prop_assert!(!into_source);
        }
        for i in 0..n {
            prop_assert!(g.out_edges(g.memory(i).unwrap()).is_empty());
        }
    }

    #[test]
    fn construction_is_deterministic(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topology = random_topology(&mut rng, n, 0.5);
        let source = rng.gen_range(0..n);
        let a = build(&topology, source, 8.0, &GraphOptions::default());
        let b = build(&topology.clone(), source, 8.0, &GraphOptions::default());
        prop_assert_eq!(a.vertices(), b.vertices());
        prop_assert_eq!(a.edges(), b.edges());
    }
}

#[test]
fn pass_through_and_drop_counts_per_consumer() {
    let topology = PhysicalTopology::bundled("ilec17").unwrap();
    let source = topology.node_index("P").unwrap();
    let g = build(&topology, source, 8.0, &GraphOptions { allow_u_turns: false });
    let mut pass: HashMap<usize, usize> = HashMap::new();
    let mut drops: HashMap<usize, usize> = HashMap::new();
    for e in g.edges() {
        if let Vertex::InPort { node, .. } = g.vertices()[e.from] {
            match e.kind {
                EdgeKind::PassThrough => *pass.entry(node).or_default() += 1,
                EdgeKind::Drop => *drops.entry(node).or_default() += 1,
                _ => unreachable!(),
            }
        }
    }
    for c in (0..topology.node_count()).filter(|&c| c != source) {
        let d = topology.degree(c);
        assert_eq!(drops[&c], d);
        if topology.link_between(c, source).is_none() {
            // Without U-turns a consumer away from the source has d(d-1).
            assert_eq!(pass[&c], d * (d - 1), "node {}", topology.node_id(c));
        } else {
            // The port facing the source transmits nothing.
            assert_eq!(pass[&c], (d - 1) * (d - 1), "node {}", topology.node_id(c));
        }
    }
}

#[test]
fn three_node_star_by_hand() {
    let topology = PhysicalTopology::from_json_str(
        r#"{"name":"star","nodes":[{"id":"s"},{"id":"a"},{"id":"b"}],
            "links":[{"a":"s","b":"a","distance_km":1},{"a":"s","b":"b","distance_km":1}]}"#,
    )
    .unwrap();
    let g = build(&topology, 0, 8.0, &GraphOptions::default());
    let labels: HashSet<String> = (0..g.vertex_count()).map(|v| g.vertex_label(v)).collect();
    let expected: HashSet<String> = ["gen(s)", "mem(s)", "mem(a)", "mem(b)", "out(s,a)", "out(s,b)", "in(a,s)", "in(b,s)"]
        .into_iter()
        .map(String::from)
        .collect();
    assert_eq!(labels, expected);
    // Two launches, one source drop, two fibers, two drops.
    assert_eq!(g.edges().len(), 7);
}

#[test]
fn link_distance_sources() {
    let topology = PhysicalTopology::from_json_str(
        r#"{"name":"geo","nodes":[{"id":"a","x_km":0,"y_km":0},{"id":"b","x_km":3,"y_km":4},{"id":"c","x_km":0,"y_km":1}],
            "links":[{"a":"a","b":"b"},{"a":"b","b":"c","distance_km":2.2}]}"#,
    )
    .unwrap();
    assert_eq!(topology.link_distance(0, 1).unwrap(), 5.0);
    assert_eq!(topology.link_distance(1, 2).unwrap(), 2.2);
    let bare = PhysicalTopology::from_json_str(
        r#"{"name":"bare","nodes":[{"id":"a"},{"id":"b"},{"id":"c"}],
            "links":[{"a":"a","b":"b","distance_km":1},{"a":"b","b":"c","distance_km":1}]}"#,
    )
    .unwrap();
    assert!(bare.link_distance(0, 2).is_err());
}

#[test]
fn transmittance_examples() {
    assert_eq!(transmittance(0.0).unwrap(), 1.0);
    assert!((transmittance(10.0).unwrap() - 0.1).abs() < 1e-15);
    assert!((transmittance(23.0).unwrap() - 0.005012).abs() < 5e-7);
    assert!(transmittance(-1.0).is_err());
}

#[test]
fn bundled_degree_profile() {
    let topology = PhysicalTopology::bundled("ilec17").unwrap();
    let degree = |id: &str| topology.degree(topology.node_index(id).unwrap());
    for id in ["A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "L"] {
        assert_eq!(degree(id), 14, "node {id}");
    }
    assert_eq!(degree("M"), 16);
    assert_eq!(degree("N"), 15);
    assert_eq!(degree("O"), 15);
    assert_eq!(degree("P"), 2);
    assert_eq!(degree("Q"), 4);
    assert_eq!(PhysicalTopology::bundled("simple6").unwrap().node_count(), 6);
}
