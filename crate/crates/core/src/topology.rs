//! Physical fiber topologies and their JSON file format.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bundled topologies, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("simple6", include_str!("../data/simple6.json")),
    ("ilec17", include_str!("../data/ilec17.json")),
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyFile {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    nodes: Vec<NodeRecord>,
    links: Vec<LinkRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y_km: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkRecord {
    a: String,
    b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distance_km: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    /// Planar position in km.
    pub position: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    /// Stored fiber length; takes precedence over node positions.
    pub distance_km: Option<f64>,
}

/// Undirected fiber plant. Nodes are addressed by their index in `nodes`.
#[derive(Debug, Clone)]
pub struct PhysicalTopology {
    name: String,
    note: Option<String>,
    nodes: Vec<Node>,
    links: Vec<Link>,
    index: HashMap<String, usize>,
    /// Per node: (neighbor, link index), sorted by neighbor.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl PhysicalTopology {
    pub fn new(name: impl Into<String>, nodes: Vec<Node>, links: Vec<Link>) -> Result<Self> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id.clone(), i).is_some() {
                return Err(Error::Topology(format!("duplicate node id `{}`", node.id)));
            }
        }
        if nodes.is_empty() {
            return Err(Error::Topology("topology has no nodes".into()));
        }

        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut seen = BTreeSet::new();
        for (l, link) in links.iter().enumerate() {
            if link.a >= nodes.len() || link.b >= nodes.len() {
                return Err(Error::Topology(format!("link {l} references a missing node")));
            }
            if link.a == link.b {
                return Err(Error::Topology(format!(
                    "self-link on node `{}`",
                    nodes[link.a].id
                )));
            }
            if !seen.insert((link.a.min(link.b), link.a.max(link.b))) {
                return Err(Error::Topology(format!(
                    "duplicate link {}-{}",
                    nodes[link.a].id, nodes[link.b].id
                )));
            }
            adjacency[link.a].push((link.b, l));
            adjacency[link.b].push((link.a, l));
        }
        for (i, adj) in adjacency.iter_mut().enumerate() {
            if adj.is_empty() {
                return Err(Error::Topology(format!("node `{}` has no links", nodes[i].id)));
            }
            adj.sort_unstable();
        }

        let topo = Self {
            name: name.into(),
            note: None,
            nodes,
            links,
            index,
            adjacency,
        };
        for link in &topo.links {
            let d = topo.resolve_link_distance(link)?;
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Topology(format!(
                    "link {}-{} has non-positive distance {d}",
                    topo.nodes[link.a].id, topo.nodes[link.b].id
                )));
            }
        }
        Ok(topo)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: TopologyFile = serde_json::from_str(text).map_err(|e| Error::Json {
            path: "<topology>".into(),
            source: e,
        })?;
        Self::from_file_record(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: TopologyFile = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.into(),
            source: e,
        })?;
        Self::from_file_record(file)
    }

    pub fn bundled(name: &str) -> Result<Self> {
        let (_, text) = BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Topology(format!("no bundled topology named `{name}`")))?;
        Self::from_json_str(text)
    }

    /// Loads a bundled topology by name, or else a file path.
    pub fn open(name_or_path: &str) -> Result<Self> {
        if BUNDLED.iter().any(|(n, _)| *n == name_or_path) {
            Self::bundled(name_or_path)
        } else {
            Self::load(name_or_path)
        }
    }

    fn from_file_record(file: TopologyFile) -> Result<Self> {
        let mut nodes = Vec::with_capacity(file.nodes.len());
        for rec in file.nodes {
            let position = match (rec.x_km, rec.y_km) {
                (Some(x), Some(y)) => Some((x, y)),
                (None, None) => None,
                _ => {
                    return Err(Error::Topology(format!(
                        "node `{}` must give both x_km and y_km or neither",
                        rec.id
                    )))
                }
            };
            nodes.push(Node {
                id: rec.id,
                position,
            });
        }
        let lookup = |id: &str| {
            nodes
                .iter()
                .position(|n| n.id == id)
                .ok_or_else(|| Error::Topology(format!("link endpoint `{id}` is not a node")))
        };
        let mut links = Vec::with_capacity(file.links.len());
        for rec in &file.links {
            links.push(Link {
                a: lookup(&rec.a)?,
                b: lookup(&rec.b)?,
                distance_km: rec.distance_km,
            });
        }
        let mut topo = Self::new(file.name, nodes, links)?;
        topo.note = file.note;
        Ok(topo)
    }

    pub fn to_json(&self) -> String {
        let file = TopologyFile {
            name: self.name.clone(),
            note: self.note.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.id.clone(),
                    x_km: n.position.map(|p| p.0),
                    y_km: n.position.map(|p| p.1),
                })
                .collect(),
            links: self
                .links
                .iter()
                .map(|l| LinkRecord {
                    a: self.nodes[l.a].id.clone(),
                    b: self.nodes[l.b].id.clone(),
                    distance_km: l.distance_km,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("topology serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_id(&self, i: usize) -> &str {
        &self.nodes[i].id
    }

    pub fn node_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    /// Neighbors of `i` in ascending index order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[i].iter().map(|&(j, _)| j)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn link_between(&self, i: usize, j: usize) -> Option<&Link> {
        self.adjacency
            .get(i)?
            .iter()
            .find(|&&(n, _)| n == j)
            .map(|&(_, l)| &self.links[l])
    }

    fn resolve_link_distance(&self, link: &Link) -> Result<f64> {
        match link.distance_km {
            Some(d) => Ok(d),
            None => self.euclidean(link.a, link.b),
        }
    }

    fn euclidean(&self, i: usize, j: usize) -> Result<f64> {
        match (self.nodes[i].position, self.nodes[j].position) {
            (Some((xi, yi)), Some((xj, yj))) => Ok((xi - xj).hypot(yi - yj)),
            _ => Err(Error::Topology(format!(
                "no stored distance and no positions for {}-{}",
                self.nodes[i].id, self.nodes[j].id
            ))),
        }
    }

    /// Fiber length between `i` and `j`, km: the stored link distance when
    /// present, otherwise the straight-line distance between positions.
    pub fn link_distance(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.nodes.len() || j >= self.nodes.len() {
            return Err(Error::Topology(format!("node index out of range ({i}, {j})")));
        }
        match self.link_between(i, j) {
            Some(link) => self.resolve_link_distance(link),
            None => self.euclidean(i, j),
        }
    }
}
