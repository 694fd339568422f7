//! Finite undirected graphs with canonical string vertex identifiers.
//!
//! Vertices are kept sorted by identifier, so vertex indices order the same
//! way as identifiers and every traversal is reproducible. A graph may carry a
//! rotation system (counterclockwise neighbour order per vertex), per-vertex
//! tags and edge multiplicities left over from collapsing parallel edges.

mod ops;
pub mod planar;

pub use ops::{
    ball, boundary, components, cut_edges, distances_from, induced_subgraph, is_annulus,
    short_vertices, Annulus,
};
pub use planar::{dual_graph, face_walks, PlaneMap};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tag marking truncation frontier vertices.
pub const FRONTIER: &str = "frontier";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<Vec<usize>>,
    rotation: Option<Vec<Vec<usize>>>,
    tags: Vec<Vec<String>>,
    multiplicity: BTreeMap<(usize, usize), u32>,
}

impl Graph {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Looks up a vertex identifier, failing with an input error when absent.
    pub fn require(&self, name: &str) -> Result<usize> {
        self.id(name)
            .ok_or_else(|| Error::input(format!("unknown vertex `{name}`")))
    }

    pub fn require_all<'a, I>(&self, names: I) -> Result<BTreeSet<usize>>
    where
        I: IntoIterator<Item = &'a str>,
    {
        names.into_iter().map(|n| self.require(n)).collect()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as index pairs `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Number of parallel edges collapsed into `{u, v}` (1 for plain edges, 0 for non-edges).
    pub fn multiplicity(&self, u: usize, v: usize) -> u32 {
        if !self.has_edge(u, v) {
            return 0;
        }
        let key = if u < v { (u, v) } else { (v, u) };
        self.multiplicity.get(&key).copied().unwrap_or(1)
    }

    pub fn rotation(&self) -> Option<&[Vec<usize>]> {
        self.rotation.as_deref()
    }

    pub fn tags(&self, v: usize) -> &[String] {
        &self.tags[v]
    }

    pub fn has_tag(&self, v: usize, tag: &str) -> bool {
        self.tags[v].iter().any(|t| t == tag)
    }

    /// First tag value with the given prefix, e.g. `tag_value(v, "spine:")`.
    pub fn tag_value(&self, v: usize, prefix: &str) -> Option<&str> {
        self.tags[v].iter().find_map(|t| t.strip_prefix(prefix))
    }

    pub fn vertices_with_tag(&self, tag: &str) -> BTreeSet<usize> {
        (0..self.len()).filter(|&v| self.has_tag(v, tag)).collect()
    }

    pub fn frontier(&self) -> BTreeSet<usize> {
        self.vertices_with_tag(FRONTIER)
    }

    /// Rebuilds the graph through a builder, for surgery-style edits.
    pub fn to_builder(&self) -> GraphBuilder {
        let mut b = GraphBuilder::new();
        for (v, name) in self.names.iter().enumerate() {
            b.add_vertex(name);
            for t in &self.tags[v] {
                b.tag(name, t);
            }
        }
        for (u, v) in self.edges() {
            b.add_edge_with_multiplicity(&self.names[u], &self.names[v], self.multiplicity(u, v))
                .expect("existing edges are valid");
        }
        if let Some(rot) = &self.rotation {
            for (v, order) in rot.iter().enumerate() {
                b.set_rotation(
                    &self.names[v],
                    order.iter().map(|&w| self.names[w].clone()).collect(),
                );
            }
        }
        b
    }

    pub fn to_json_value(&self) -> GraphJson {
        let vertices = self.names.clone();
        let edges = self
            .edges()
            .map(|(u, v)| [self.names[u].clone(), self.names[v].clone()])
            .collect();
        let rotation = self.rotation.as_ref().map(|rot| {
            rot.iter()
                .enumerate()
                .map(|(v, order)| {
                    (
                        self.names[v].clone(),
                        order.iter().map(|&w| self.names[w].clone()).collect(),
                    )
                })
                .collect()
        });
        let labels: BTreeMap<String, String> = self
            .tags
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.is_empty())
            .map(|(v, t)| (self.names[v].clone(), t.join(",")))
            .collect();
        let multiplicity: BTreeMap<String, u32> = self
            .multiplicity
            .iter()
            .map(|(&(u, v), &m)| (format!("{}|{}", self.names[u], self.names[v]), m))
            .collect();
        GraphJson {
            vertices,
            edges,
            rotation,
            labels: (!labels.is_empty()).then_some(labels),
            multiplicity: (!multiplicity.is_empty()).then_some(multiplicity),
        }
    }

    /// Canonical JSON rendering: sorted keys, edges with `u < v`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Graph> {
        let raw: GraphJson = serde_json::from_str(text)?;
        Graph::from_json_value(raw)
    }

    pub fn from_json_value(raw: GraphJson) -> Result<Graph> {
        let mut b = GraphBuilder::new();
        for v in &raw.vertices {
            b.add_vertex(v);
        }
        for [u, v] in &raw.edges {
            for name in [u, v] {
                if !raw.vertices.contains(name) {
                    return Err(Error::input(format!("edge endpoint `{name}` is not a vertex")));
                }
            }
            b.add_edge(u, v)?;
        }
        if let Some(mult) = &raw.multiplicity {
            for (key, &m) in mult {
                let (u, v) = key
                    .split_once('|')
                    .ok_or_else(|| Error::input(format!("bad multiplicity key `{key}`")))?;
                b.set_multiplicity(u, v, m)?;
            }
        }
        if let Some(labels) = &raw.labels {
            for (v, tags) in labels {
                if !raw.vertices.contains(v) {
                    return Err(Error::input(format!("label for unknown vertex `{v}`")));
                }
                for t in tags.split(',').filter(|t| !t.is_empty()) {
                    b.tag(v, t);
                }
            }
        }
        if let Some(rot) = raw.rotation {
            for (v, order) in rot {
                b.set_rotation(&v, order);
            }
        }
        b.build()
    }
}

/// On-disk graph format. Field order is alphabetical so serialization is canonical.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub edges: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<BTreeMap<String, u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<BTreeMap<String, Vec<String>>>,
    pub vertices: Vec<String>,
}

/// Accumulates vertices and edges by name, then sorts and validates.
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    index: HashMap<String, usize>,
    names: Vec<String>,
    edges: BTreeMap<(usize, usize), u32>,
    tags: Vec<Vec<String>>,
    rotation: HashMap<usize, Vec<String>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        self.tags.push(Vec::new());
        i
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Adds an edge; repeated additions increase its multiplicity.
    pub fn add_edge(&mut self, u: &str, v: &str) -> Result<()> {
        self.add_edge_with_multiplicity(u, v, 1)
    }

    pub fn add_edge_with_multiplicity(&mut self, u: &str, v: &str, mult: u32) -> Result<()> {
        if u == v {
            return Err(Error::input(format!("self-loop at `{u}`")));
        }
        let a = self.add_vertex(u);
        let b = self.add_vertex(v);
        *self.edges.entry((a.min(b), a.max(b))).or_insert(0) += mult;
        Ok(())
    }

    pub fn set_multiplicity(&mut self, u: &str, v: &str, mult: u32) -> Result<()> {
        let (a, b) = match (self.index.get(u), self.index.get(v)) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(Error::input(format!("multiplicity for unknown edge {u}|{v}"))),
        };
        match self.edges.get_mut(&(a.min(b), a.max(b))) {
            Some(m) if mult >= 1 => {
                *m = mult;
                Ok(())
            }
            _ => Err(Error::input(format!("multiplicity for unknown edge {u}|{v}"))),
        }
    }

    pub fn tag(&mut self, v: &str, tag: &str) {
        let i = self.add_vertex(v);
        if !self.tags[i].iter().any(|t| t == tag) {
            self.tags[i].push(tag.to_string());
        }
    }

    pub fn set_rotation(&mut self, v: &str, order: Vec<String>) {
        let i = self.add_vertex(v);
        self.rotation.insert(i, order);
    }

    pub fn build(self) -> Result<Graph> {
        let n = self.names.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.names[a].cmp(&self.names[b]));
        let mut remap = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let names: Vec<String> = order.iter().map(|&o| self.names[o].clone()).collect();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect::<HashMap<_, _>>();
        let mut adj = vec![Vec::new(); n];
        let mut multiplicity = BTreeMap::new();
        for (&(a, b), &m) in &self.edges {
            let (u, v) = (remap[a], remap[b]);
            adj[u].push(v);
            adj[v].push(u);
            if m > 1 {
                multiplicity.insert((u.min(v), u.max(v)), m);
            }
        }
        for ns in &mut adj {
            ns.sort_unstable();
        }
        let tags = order.iter().map(|&o| self.tags[o].clone()).collect();

        let rotation = if self.rotation.is_empty() {
            None
        } else {
            let mut rot = vec![Vec::new(); n];
            for v in 0..n {
                let old = order[v];
                let given = self.rotation.get(&old).cloned().unwrap_or_default();
                let mut ids = Vec::with_capacity(given.len());
                for w in &given {
                    let wi = index.get(w).copied().ok_or_else(|| {
                        Error::Embedding(format!("rotation at `{}` names unknown `{w}`", names[v]))
                    })?;
                    ids.push(wi);
                }
                let mut sorted = ids.clone();
                sorted.sort_unstable();
                if sorted != adj[v] {
                    return Err(Error::Embedding(format!(
                        "rotation at `{}` is not a permutation of its neighbours",
                        names[v]
                    )));
                }
                rot[v] = ids;
            }
            Some(rot)
        };

        Ok(Graph {
            names,
            index,
            adj,
            rotation,
            tags,
            multiplicity,
        })
    }
}

/// A sequence of vertices, consecutive ones adjacent in the host graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chain(pub Vec<usize>);

impl Chain {
    pub fn new(g: &Graph, vertices: Vec<usize>) -> Result<Chain> {
        if let Some(w) = vertices.windows(2).find(|w| !g.has_edge(w[0], w[1])) {
            return Err(Error::input(format!(
                "chain step {} -> {} is not an edge",
                g.name(w[0]),
                g.name(w[1])
            )));
        }
        Ok(Chain(vertices))
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weighted_length(&self, masses: &[f64]) -> f64 {
        self.0.iter().map(|&v| masses[v]).sum()
    }

    pub fn names<'a>(&self, g: &'a Graph) -> Vec<&'a str> {
        self.0.iter().map(|&v| g.name(v)).collect()
    }
}

/// A connected vertex set of a host graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainSet {
    members: BTreeSet<usize>,
}

impl DomainSet {
    /// Validates connectivity within `g`.
    pub fn new(g: &Graph, members: BTreeSet<usize>) -> Result<DomainSet> {
        if members.iter().any(|&v| v >= g.len()) {
            return Err(Error::input("domain member out of range"));
        }
        if components(g, &members).len() > 1 {
            return Err(Error::input("domain is not connected"));
        }
        Ok(DomainSet { members })
    }

    pub(crate) fn from_component(members: BTreeSet<usize>) -> DomainSet {
        DomainSet { members }
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.contains(&v)
    }

    pub fn into_members(self) -> BTreeSet<usize> {
        self.members
    }
}

/// Small graphs used across tests and examples.
pub mod samples {
    use super::{Graph, GraphBuilder};

    pub fn path(n_vertices: usize) -> Graph {
        let mut b = GraphBuilder::new();
        for i in 0..n_vertices {
            b.add_vertex(&format!("v{i}"));
        }
        for i in 1..n_vertices {
            b.add_edge(&format!("v{}", i - 1), &format!("v{i}")).unwrap();
        }
        b.build().unwrap()
    }

    pub fn cycle(n: usize) -> Graph {
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.add_edge(&format!("v{i}"), &format!("v{}", (i + 1) % n)).unwrap();
        }
        b.build().unwrap()
    }

    /// Star with centre `c` and leaves `l0..`.
    pub fn star(leaves: usize) -> Graph {
        let mut b = GraphBuilder::new();
        b.add_vertex("c");
        for i in 0..leaves {
            b.add_edge("c", &format!("l{i}")).unwrap();
        }
        b.build().unwrap()
    }

    /// `(2r+1)^2` grid box of ℤ² with vertices `x,y` (no rotation).
    pub fn grid_box(r: i64) -> Graph {
        let name = |x: i64, y: i64| format!("z:{x}:{y}");
        let mut b = GraphBuilder::new();
        for x in -r..=r {
            for y in -r..=r {
                b.add_vertex(&name(x, y));
                if x < r {
                    b.add_edge(&name(x, y), &name(x + 1, y)).unwrap();
                }
                if y < r {
                    b.add_edge(&name(x, y), &name(x, y + 1)).unwrap();
                }
            }
        }
        b.build().unwrap()
    }

    /// The cube graph with a planar rotation system.
    pub fn cube() -> Graph {
        // Outer square a0..a3 (counterclockwise), inner square b0..b3.
        let mut b = GraphBuilder::new();
        for i in 0..4 {
            let j = (i + 1) % 4;
            b.add_edge(&format!("a{i}"), &format!("a{j}")).unwrap();
            b.add_edge(&format!("b{i}"), &format!("b{j}")).unwrap();
            b.add_edge(&format!("a{i}"), &format!("b{i}")).unwrap();
        }
        for i in 0..4 {
            let prev = (i + 3) % 4;
            let next = (i + 1) % 4;
            // Outer vertex: inner spoke, then the two rim neighbours, counterclockwise.
            b.set_rotation(
                &format!("a{i}"),
                vec![format!("a{next}"), format!("b{i}"), format!("a{prev}")],
            );
            b.set_rotation(
                &format!("b{i}"),
                vec![format!("b{next}"), format!("b{prev}"), format!("a{i}")],
            );
        }
        b.build().unwrap()
    }

    /// Triangle with counterclockwise rotations.
    pub fn triangle() -> Graph {
        let mut b = GraphBuilder::new();
        b.add_edge("a", "b").unwrap();
        b.add_edge("b", "c").unwrap();
        b.add_edge("c", "a").unwrap();
        b.set_rotation("a", vec!["b".into(), "c".into()]);
        b.set_rotation("b", vec!["c".into(), "a".into()]);
        b.set_rotation("c", vec!["a".into(), "b".into()]);
        b.build().unwrap()
    }
}
