//! Word-metric, connectivity and surgery operations.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{DomainSet, Graph, GraphBuilder};
use crate::error::{Error, Result};

/// Breadth-first distances, `usize::MAX` where unreachable.
pub(crate) fn bfs(g: &Graph, sources: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.len()];
    let mut queue = VecDeque::new();
    for s in sources {
        if dist[s] != 0 {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Word-metric distance to the nearest source, for every reachable vertex.
pub fn distances_from(g: &Graph, sources: &BTreeSet<usize>) -> Result<BTreeMap<usize, usize>> {
    if sources.is_empty() {
        return Err(Error::input("distances_from needs at least one source"));
    }
    if let Some(&s) = sources.iter().find(|&&s| s >= g.len()) {
        return Err(Error::input(format!("unknown source vertex index {s}")));
    }
    Ok(bfs(g, sources.iter().copied())
        .into_iter()
        .enumerate()
        .filter(|&(_, d)| d != usize::MAX)
        .collect())
}

/// Vertices within word distance `radius` of `centers`.
pub fn ball(g: &Graph, centers: &BTreeSet<usize>, radius: usize) -> BTreeSet<usize> {
    bfs(g, centers.iter().copied())
        .into_iter()
        .enumerate()
        .filter(|&(_, d)| d <= radius)
        .map(|(v, _)| v)
        .collect()
}

/// Vertices outside `d` adjacent to some vertex of `d`.
pub fn boundary(g: &Graph, d: &BTreeSet<usize>) -> BTreeSet<usize> {
    d.iter()
        .flat_map(|&v| g.neighbors(v).iter().copied())
        .filter(|w| !d.contains(w))
        .collect()
}

/// Connected pieces of `within`, ordered by smallest member.
pub fn components(g: &Graph, within: &BTreeSet<usize>) -> Vec<DomainSet> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &s in within {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = BTreeSet::from([s]);
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if within.contains(&w) && seen.insert(w) {
                    comp.insert(w);
                    stack.push(w);
                }
            }
        }
        out.push(DomainSet::from_component(comp));
    }
    out
}

/// An annulus together with the two domains of its complement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annulus {
    pub vertices: BTreeSet<usize>,
    /// Complementary domains, ordered by smallest member.
    pub domains: [DomainSet; 2],
    /// Whether the annulus set is itself connected (recorded, not required).
    pub connected: bool,
}

impl Annulus {
    /// The complementary domain containing `v`, if any.
    pub fn domain_of(&self, v: usize) -> Option<usize> {
        self.domains.iter().position(|d| d.contains(v))
    }
}

/// Succeeds iff the complement of `a` has exactly two components.
pub fn is_annulus(g: &Graph, a: &BTreeSet<usize>) -> Option<Annulus> {
    let rest: BTreeSet<usize> = (0..g.len()).filter(|v| !a.contains(v)).collect();
    let mut comps = components(g, &rest);
    if comps.len() != 2 {
        return None;
    }
    let second = comps.pop()?;
    let first = comps.pop()?;
    Some(Annulus {
        vertices: a.clone(),
        domains: [first, second],
        connected: components(g, a).len() <= 1,
    })
}

/// Identifies the vertices of `s` into one vertex named after the smallest
/// member. Parallel edges created by the merge add their multiplicities;
/// edges inside `s` disappear. Rotation is dropped.
pub fn short_vertices(g: &Graph, s: &BTreeSet<usize>) -> Result<Graph> {
    let Some(&rep) = s.iter().next() else {
        return Err(Error::input("cannot short an empty vertex set"));
    };
    if s.iter().any(|&v| v >= g.len()) {
        return Err(Error::input("shorted vertex out of range"));
    }
    let target = |v: usize| if s.contains(&v) { rep } else { v };
    let mut b = GraphBuilder::new();
    for v in 0..g.len() {
        if !s.contains(&v) || v == rep {
            b.add_vertex(g.name(v));
        }
    }
    for v in s {
        for t in g.tags(*v) {
            b.tag(g.name(rep), t);
        }
    }
    for v in (0..g.len()).filter(|v| !s.contains(v)) {
        for t in g.tags(v) {
            b.tag(g.name(v), t);
        }
    }
    for (u, v) in g.edges() {
        let (x, y) = (target(u), target(v));
        if x != y {
            b.add_edge_with_multiplicity(g.name(x), g.name(y), g.multiplicity(u, v))?;
        }
    }
    b.build()
}

/// Deletes the given edges (all parallel copies), keeping every vertex.
pub fn cut_edges(g: &Graph, removed: &[(usize, usize)]) -> Result<Graph> {
    let mut gone = BTreeSet::new();
    for &(u, v) in removed {
        if u >= g.len() || v >= g.len() || !g.has_edge(u, v) {
            return Err(Error::input(format!("cannot cut unknown edge ({u}, {v})")));
        }
        gone.insert((u.min(v), u.max(v)));
    }
    let keep = |u: usize, v: usize| !gone.contains(&(u.min(v), u.max(v)));
    let mut b = GraphBuilder::new();
    for v in 0..g.len() {
        b.add_vertex(g.name(v));
        for t in g.tags(v) {
            b.tag(g.name(v), t);
        }
    }
    for (u, v) in g.edges().filter(|&(u, v)| keep(u, v)) {
        b.add_edge_with_multiplicity(g.name(u), g.name(v), g.multiplicity(u, v))?;
    }
    if let Some(rot) = g.rotation() {
        for (v, order) in rot.iter().enumerate() {
            let kept = order
                .iter()
                .filter(|&&w| keep(v, w))
                .map(|&w| g.name(w).to_string())
                .collect();
            b.set_rotation(g.name(v), kept);
        }
    }
    b.build()
}

/// Subgraph induced on `keep`, with rotation and tags restricted.
pub fn induced_subgraph(g: &Graph, keep: &BTreeSet<usize>) -> Graph {
    let mut b = GraphBuilder::new();
    for &v in keep {
        b.add_vertex(g.name(v));
        for t in g.tags(v) {
            b.tag(g.name(v), t);
        }
    }
    for (u, v) in g.edges() {
        if keep.contains(&u) && keep.contains(&v) {
            b.add_edge_with_multiplicity(g.name(u), g.name(v), g.multiplicity(u, v))
                .expect("host edges are valid");
        }
    }
    if let Some(rot) = g.rotation() {
        for &v in keep {
            let kept = rot[v]
                .iter()
                .filter(|w| keep.contains(w))
                .map(|&w| g.name(w).to_string())
                .collect();
            b.set_rotation(g.name(v), kept);
        }
    }
    b.build().expect("restriction of a valid graph is valid")
}
