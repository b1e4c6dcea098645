//! Port-level directed loss graph for a given source placement.
//!
//! Every physical node contributes one quantum-memory vertex and, per
//! neighbor, an in-port and an out-port. Edge weights are losses in dB:
//! fibers cost `α·d`, a pass-through costs two WSS traversals, a drop into a
//! memory costs one. The source has a generator vertex feeding its
//! out-ports and its own memory, and no in-ports, so no route can transit it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::PhysicalTopology;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossParams {
    /// Fiber attenuation, dB/km.
    pub fiber_db_per_km: f64,
    /// Insertion loss of one WSS traversal, dB.
    pub wss_db: f64,
}

impl Default for LossParams {
    fn default() -> Self {
        Self {
            fiber_db_per_km: 0.4,
            wss_db: 8.0,
        }
    }
}

impl LossParams {
    pub fn new(fiber_db_per_km: f64, wss_db: f64) -> Result<Self> {
        let p = Self {
            fiber_db_per_km,
            wss_db,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_wss(wss_db: f64) -> Result<Self> {
        Self::new(Self::default().fiber_db_per_km, wss_db)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fiber_db_per_km >= 0.0) || !self.fiber_db_per_km.is_finite() {
            return Err(Error::InvalidParameter("fiber loss must be >= 0".into()));
        }
        if !(self.wss_db >= 0.0) || !self.wss_db.is_finite() {
            return Err(Error::InvalidParameter("WSS loss must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphOptions {
    /// Allow in-port(i,j) -> out-port(i,j), sending a photon back toward
    /// the node it came from.
    pub allow_u_turns: bool,
}

impl Default for GraphOptions {
    fn default() -> Self {
        Self {
            allow_u_turns: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vertex {
    Generator,
    Memory(usize),
    /// Port of `node` receiving from `from`.
    InPort { node: usize, from: usize },
    /// Port of `node` transmitting to `to`.
    OutPort { node: usize, to: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    /// Generator to a source out-port (two WSS).
    Launch,
    /// Generator to the source's own memory (one WSS).
    SourceMemory,
    Fiber,
    /// In-port to out-port inside a consumer (two WSS).
    PassThrough,
    /// In-port to the consumer's memory (one WSS).
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone)]
pub struct RoutingGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<usize>>,
    memories: Vec<usize>,
    source: usize,
    node_ids: Vec<String>,
}

/// Generator is always vertex 0.
pub const GENERATOR: usize = 0;

impl RoutingGraph {
    pub fn build(
        topology: &PhysicalTopology,
        source: usize,
        loss: &LossParams,
        options: &GraphOptions,
    ) -> Result<Self> {
        loss.validate()?;
        let n = topology.node_count();
        if source >= n {
            return Err(Error::UnknownNode(format!("#{source}")));
        }

        let mut vertices = vec![Vertex::Generator];
        let memories: Vec<usize> = (0..n)
            .map(|i| {
                vertices.push(Vertex::Memory(i));
                vertices.len() - 1
            })
            .collect();

        // Port vertices, grouped by node, neighbors ascending.
        let mut in_port = vec![Vec::new(); n];
        let mut out_port = vec![Vec::new(); n];
        for i in 0..n {
            for j in topology.neighbors(i) {
                if i != source {
                    vertices.push(Vertex::InPort { node: i, from: j });
                    in_port[i].push((j, vertices.len() - 1));
                }
                // Nothing is ever received by the source, so consumers have
                // no port facing it.
                if j != source {
                    vertices.push(Vertex::OutPort { node: i, to: j });
                    out_port[i].push((j, vertices.len() - 1));
                }
            }
        }
        let port = |table: &[Vec<(usize, usize)>], i: usize, j: usize| {
            table[i]
                .iter()
                .find(|&&(k, _)| k == j)
                .map(|&(_, v)| v)
                .expect("port exists")
        };

        let two_wss = 2.0 * loss.wss_db;
        let mut edges = Vec::new();
        for &(_, v) in &out_port[source] {
            edges.push(Edge {
                from: GENERATOR,
                to: v,
                weight: two_wss,
                kind: EdgeKind::Launch,
            });
        }
        edges.push(Edge {
            from: GENERATOR,
            to: memories[source],
            weight: loss.wss_db,
            kind: EdgeKind::SourceMemory,
        });

        for (i, ports) in out_port.iter().enumerate() {
            for &(j, out) in ports {
                let d = topology.link_distance(i, j)?;
                edges.push(Edge {
                    from: out,
                    to: port(&in_port, j, i),
                    weight: loss.fiber_db_per_km * d,
                    kind: EdgeKind::Fiber,
                });
            }
        }

        for i in (0..n).filter(|&i| i != source) {
            for &(j, inp) in &in_port[i] {
                for &(k, out) in &out_port[i] {
                    if j == k && !options.allow_u_turns {
                        continue;
                    }
                    edges.push(Edge {
                        from: inp,
                        to: out,
                        weight: two_wss,
                        kind: EdgeKind::PassThrough,
                    });
                }
                edges.push(Edge {
                    from: inp,
                    to: memories[i],
                    weight: loss.wss_db,
                    kind: EdgeKind::Drop,
                });
            }
        }

        let mut out_edges = vec![Vec::new(); vertices.len()];
        for (e, edge) in edges.iter().enumerate() {
            out_edges[edge.from].push(e);
        }

        let graph = Self {
            vertices,
            edges,
            out_edges,
            memories,
            source,
            node_ids: topology.nodes().iter().map(|n| n.id.clone()).collect(),
        };
        graph.check_invariants()?;
        Ok(graph)
    }

    fn check_invariants(&self) -> Result<()> {
        for (e, edge) in self.edges.iter().enumerate() {
            if !(edge.weight >= 0.0) || !edge.weight.is_finite() {
                return Err(Error::Construction(format!("edge {e} has weight {}", edge.weight)));
            }
            if edge.to == GENERATOR {
                return Err(Error::Construction("edge into the generator".into()));
            }
            if matches!(self.vertices[edge.from], Vertex::Memory(_)) {
                return Err(Error::Construction("edge out of a memory".into()));
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn generator(&self) -> usize {
        GENERATOR
    }

    pub fn memory(&self, node: usize) -> Option<usize> {
        self.memories.get(node).copied()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn node_count(&self) -> usize {
        self.memories.len()
    }

    pub fn node_id(&self, node: usize) -> &str {
        &self.node_ids[node]
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    /// Human-readable vertex label, e.g. `out(A,B)`.
    pub fn vertex_label(&self, v: usize) -> String {
        match self.vertices[v] {
            Vertex::Generator => format!("gen({})", self.node_ids[self.source]),
            Vertex::Memory(i) => format!("mem({})", self.node_ids[i]),
            Vertex::InPort { node, from } => {
                format!("in({},{})", self.node_ids[node], self.node_ids[from])
            }
            Vertex::OutPort { node, to } => {
                format!("out({},{})", self.node_ids[node], self.node_ids[to])
            }
        }
    }
}

/// Builds the loss graph with default options (U-turns allowed).
pub fn build_routing_graph(
    topology: &PhysicalTopology,
    source: &str,
    loss: &LossParams,
) -> Result<RoutingGraph> {
    let s = topology.node_index(source)?;
    RoutingGraph::build(topology, s, loss, &GraphOptions::default())
}

/// Power transmittance of a path with the given loss, `10^(-dB/10)`.
pub fn transmittance(loss_db: f64) -> Result<f64> {
    if !(loss_db >= 0.0) {
        return Err(Error::Domain(format!("loss must be >= 0 dB, got {loss_db}")));
    }
    Ok(10f64.powf(-loss_db / 10.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{Link, Node};

    fn two_node() -> PhysicalTopology {
        PhysicalTopology::new(
            "pair",
            vec![
                Node { id: "s".into(), position: None },
                Node { id: "a".into(), position: None },
            ],
            vec![Link { a: 0, b: 1, distance_km: Some(1.0) }],
        )
        .unwrap()
    }

    #[test]
    fn two_node_graph_by_hand() {
        let g = build_routing_graph(&two_node(), "s", &LossParams::default()).unwrap();
        let labels: Vec<String> = (0..g.vertex_count()).map(|v| g.vertex_label(v)).collect();
        assert_eq!(labels, ["gen(s)", "mem(s)", "mem(a)", "out(s,a)", "in(a,s)"]);
        let mut edges: Vec<(String, String, f64)> = g
            .edges()
            .iter()
            .map(|e| (g.vertex_label(e.from), g.vertex_label(e.to), e.weight))
            .collect();
        edges.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let expected = [
            ("gen(s)", "mem(s)", 8.0),
            ("gen(s)", "out(s,a)", 16.0),
            ("in(a,s)", "mem(a)", 8.0),
            ("out(s,a)", "in(a,s)", 0.4),
        ];
        assert_eq!(edges.len(), expected.len());
        for (got, want) in edges.iter().zip(expected) {
            assert_eq!(got.0, want.0);
            assert_eq!(got.1, want.1);
            assert!((got.2 - want.2).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_source() {
        assert!(matches!(
            build_routing_graph(&two_node(), "zz", &LossParams::default()),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn negative_losses_rejected() {
        assert!(LossParams::new(-0.1, 8.0).is_err());
        assert!(LossParams::new(0.4, -1.0).is_err());
    }

    #[test]
    fn transmittance_values() {
        assert_eq!(transmittance(0.0).unwrap(), 1.0);
        assert!((transmittance(10.0).unwrap() - 0.1).abs() < 1e-15);
        assert!((transmittance(23.0).unwrap() - 0.005012).abs() < 5e-7);
        assert!(matches!(transmittance(-1.0), Err(Error::Domain(_))));
    }
}
