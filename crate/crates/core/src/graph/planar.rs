//! Dart-based rotation systems.
//!
//! Edge `e` owns darts `2e` (tail to head) and `2e + 1` (reverse), so the twin
//! of a dart is `d ^ 1`. Each vertex stores its outgoing darts in
//! counterclockwise order. Parallel edges and loops are allowed here, which the
//! collapsed [`Graph`] view cannot express.
//!
//! Face traversal: after arriving at `v` along `d`, leave along the dart that
//! follows `twin(d)` in the rotation at `v`. With counterclockwise rotations
//! every face lies to the right of its walk.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::{Graph, GraphBuilder};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlaneMap {
    names: Vec<String>,
    index: HashMap<String, usize>,
    tags: Vec<Vec<String>>,
    head: Vec<usize>,
    rot: Vec<Vec<usize>>,
    pos: Vec<usize>,
}

/// Face walks of a map: dart sequences plus the face owning each dart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Faces {
    pub walks: Vec<Vec<usize>>,
    pub face_of: Vec<usize>,
}

impl Faces {
    pub fn len(&self) -> usize {
        self.walks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walks.is_empty()
    }
}

impl PlaneMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, name: &str) -> usize {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        let v = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), v);
        self.tags.push(Vec::new());
        self.rot.push(Vec::new());
        v
    }

    /// Adds an edge without placing it in any rotation; returns the dart `u -> v`.
    pub fn add_edge(&mut self, u: usize, v: usize) -> usize {
        let d = self.head.len();
        self.head.push(v);
        self.head.push(u);
        self.pos.push(usize::MAX);
        self.pos.push(usize::MAX);
        d
    }

    /// Sets the counterclockwise order of outgoing darts at `v`.
    pub fn set_rotation(&mut self, v: usize, darts: Vec<usize>) {
        for (i, &d) in darts.iter().enumerate() {
            self.pos[d] = i;
        }
        self.rot[v] = darts;
    }

    /// Inserts dart `new` (outgoing at `v`) right after `after` in the rotation at `v`.
    pub fn insert_after(&mut self, v: usize, after: usize, new: usize) {
        let at = self.pos[after] + 1;
        self.rot[v].insert(at, new);
        self.reindex(v);
    }

    /// Appends dart `new` at the end of the rotation at `v`.
    pub fn push_rotation(&mut self, v: usize, new: usize) {
        self.rot[v].push(new);
        self.pos[new] = self.rot[v].len() - 1;
    }

    fn reindex(&mut self, v: usize) {
        for i in 0..self.rot[v].len() {
            let d = self.rot[v][i];
            self.pos[d] = i;
        }
    }

    pub fn tag(&mut self, v: usize, tag: &str) {
        if !self.tags[v].iter().any(|t| t == tag) {
            self.tags[v].push(tag.to_string());
        }
    }

    pub fn tags(&self, v: usize) -> &[String] {
        &self.tags[v]
    }

    pub fn has_tag(&self, v: usize, tag: &str) -> bool {
        self.tags[v].iter().any(|t| t == tag)
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn dart_count(&self) -> usize {
        self.head.len()
    }

    pub fn edge_count(&self) -> usize {
        self.head.len() / 2
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn head(&self, d: usize) -> usize {
        self.head[d]
    }

    pub fn tail(&self, d: usize) -> usize {
        self.head[d ^ 1]
    }

    pub fn twin(d: usize) -> usize {
        d ^ 1
    }

    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rot[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rot[v].len()
    }

    /// Next outgoing dart counterclockwise at the same tail.
    pub fn sigma(&self, d: usize) -> usize {
        let r = &self.rot[self.tail(d)];
        r[(self.pos[d] + 1) % r.len()]
    }

    pub fn sigma_inv(&self, d: usize) -> usize {
        let r = &self.rot[self.tail(d)];
        r[(self.pos[d] + r.len() - 1) % r.len()]
    }

    /// Successor of `d` along its face.
    pub fn face_next(&self, d: usize) -> usize {
        self.sigma(d ^ 1)
    }

    /// Checks that every dart sits exactly once in the rotation at its tail.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.head.len()];
        for (v, r) in self.rot.iter().enumerate() {
            for (i, &d) in r.iter().enumerate() {
                if d >= self.head.len() || self.tail(d) != v || self.pos[d] != i || seen[d] {
                    return Err(Error::Embedding(format!(
                        "rotation at `{}` is inconsistent",
                        self.names[v]
                    )));
                }
                seen[d] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Embedding("dart missing from rotation".into()));
        }
        Ok(())
    }

    /// Face walks, ordered by smallest dart; each walk starts at its smallest dart.
    pub fn faces(&self) -> Faces {
        let mut face_of = vec![usize::MAX; self.head.len()];
        let mut walks = Vec::new();
        for start in 0..self.head.len() {
            if face_of[start] != usize::MAX {
                continue;
            }
            let f = walks.len();
            let mut walk = Vec::new();
            let mut d = start;
            loop {
                face_of[d] = f;
                walk.push(d);
                d = self.face_next(d);
                if d == start {
                    break;
                }
            }
            walks.push(walk);
        }
        if self.head.is_empty() && self.names.len() == 1 {
            walks.push(Vec::new());
        }
        Faces { walks, face_of }
    }

    pub fn is_connected(&self) -> bool {
        if self.names.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.names.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &d in &self.rot[v] {
                let w = self.head[d];
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Face walks after checking V - E + F = 2 on a connected map.
    pub fn planar_faces(&self) -> Result<Faces> {
        self.validate()?;
        if !self.is_connected() {
            return Err(Error::Embedding("face traversal needs a connected map".into()));
        }
        let faces = self.faces();
        let chi = self.names.len() as i64 - self.edge_count() as i64 + faces.len() as i64;
        if chi != 2 {
            return Err(Error::Embedding(format!(
                "rotation is not planar (V - E + F = {chi})"
            )));
        }
        Ok(faces)
    }

    /// Dual map: one vertex per face, dual dart `d` runs from the face of `d`
    /// to the face of its twin. Rotation around a dual vertex is the face walk
    /// reversed.
    pub fn dual(&self) -> Result<PlaneMap> {
        let faces = self.planar_faces()?;
        let mut m = PlaneMap::new();
        for f in 0..faces.len() {
            m.add_vertex(&format!("f{f}"));
        }
        for e in 0..self.edge_count() {
            let d = 2 * e;
            m.add_edge(faces.face_of[d], faces.face_of[d ^ 1]);
        }
        for (f, walk) in faces.walks.iter().enumerate() {
            m.set_rotation(f, walk.iter().rev().copied().collect());
        }
        Ok(m)
    }

    /// Collapsed simple-graph view; parallel edges become multiplicities and
    /// loops are dropped. The rotation survives only when the map is simple.
    pub fn to_graph(&self) -> Result<Graph> {
        let mut b = GraphBuilder::new();
        let mut simple = true;
        let mut pairs = BTreeSet::new();
        for (v, name) in self.names.iter().enumerate() {
            b.add_vertex(name);
            for t in &self.tags[v] {
                b.tag(name, t);
            }
        }
        for e in 0..self.edge_count() {
            let (u, v) = (self.tail(2 * e), self.head(2 * e));
            if u == v {
                simple = false;
                continue;
            }
            if !pairs.insert((u.min(v), u.max(v))) {
                simple = false;
            }
            b.add_edge(&self.names[u], &self.names[v])?;
        }
        if simple {
            for (v, r) in self.rot.iter().enumerate() {
                b.set_rotation(
                    &self.names[v],
                    r.iter().map(|&d| self.names[self.head[d]].clone()).collect(),
                );
            }
        }
        b.build()
    }

    /// Map of a graph with a rotation system; edge `i` of `g.edges()` owns darts `2i`, `2i+1`.
    pub fn from_graph(g: &Graph) -> Result<PlaneMap> {
        let rot = g
            .rotation()
            .ok_or_else(|| Error::Embedding("graph has no rotation system".into()))?;
        let mut m = PlaneMap::new();
        for v in 0..g.len() {
            m.add_vertex(g.name(v));
            for t in g.tags(v) {
                m.tag(v, t);
            }
        }
        let mut dart = BTreeMap::new();
        for (u, v) in g.edges() {
            let d = m.add_edge(u, v);
            dart.insert((u, v), d);
            dart.insert((v, u), d ^ 1);
        }
        for (v, order) in rot.iter().enumerate() {
            m.set_rotation(v, order.iter().map(|&w| dart[&(v, w)]).collect());
        }
        m.validate()?;
        Ok(m)
    }

    /// Drops the given vertices and every dart touching them.
    pub fn remove_vertices(&self, gone: &BTreeSet<usize>) -> PlaneMap {
        let mut m = PlaneMap::new();
        let mut vmap = vec![usize::MAX; self.names.len()];
        for v in 0..self.names.len() {
            if !gone.contains(&v) {
                vmap[v] = m.add_vertex(&self.names[v]);
                m.tags[vmap[v]] = self.tags[v].clone();
            }
        }
        let mut dmap = vec![usize::MAX; self.head.len()];
        for e in 0..self.edge_count() {
            let (u, v) = (self.tail(2 * e), self.head(2 * e));
            if vmap[u] != usize::MAX && vmap[v] != usize::MAX {
                let d = m.add_edge(vmap[u], vmap[v]);
                dmap[2 * e] = d;
                dmap[2 * e + 1] = d ^ 1;
            }
        }
        for v in 0..self.names.len() {
            if vmap[v] != usize::MAX {
                let r = self.rot[v]
                    .iter()
                    .filter(|&&d| dmap[d] != usize::MAX)
                    .map(|&d| dmap[d])
                    .collect();
                m.set_rotation(vmap[v], r);
            }
        }
        m
    }

    /// Orientation-aware canonical code of a connected map.
    ///
    /// Darts are relabelled in breadth-first order from a start dart, exploring
    /// `sigma` then the twin; the code lists the relabelled `sigma` and twin of
    /// every dart. The minimum over start darts is an isomorphism invariant.
    /// With `mirror`, `sigma` is replaced by its inverse, which canonicalizes
    /// the reflected map.
    pub fn canonical_code(&self, mirror: bool) -> Vec<u32> {
        let n = self.head.len();
        if n == 0 {
            return vec![self.names.len() as u32];
        }
        let step = |d: usize| if mirror { self.sigma_inv(d) } else { self.sigma(d) };
        let faces = self.faces();
        let inv = |d: usize| {
            (
                self.degree(self.tail(d)),
                faces.walks[faces.face_of[d]].len(),
                self.degree(self.head(d)),
            )
        };
        let best_inv = (0..n).map(inv).min().expect("darts exist");
        let mut best: Option<Vec<u32>> = None;
        for start in (0..n).filter(|&d| inv(d) == best_inv) {
            let mut label = vec![u32::MAX; n];
            let mut order = Vec::with_capacity(n);
            let mut queue = VecDeque::from([start]);
            label[start] = 0;
            while let Some(d) = queue.pop_front() {
                order.push(d);
                for nb in [step(d), d ^ 1] {
                    if label[nb] == u32::MAX {
                        label[nb] = order.len() as u32 + queue.len() as u32;
                        queue.push_back(nb);
                    }
                }
            }
            let mut code = Vec::with_capacity(2 * n + 1);
            code.push(order.len() as u32);
            for &d in &order {
                code.push(label[step(d)]);
                code.push(label[d ^ 1]);
            }
            if best.as_ref().is_none_or(|b| code < *b) {
                best = Some(code);
            }
        }
        best.expect("at least one start dart")
    }

    /// Isomorphism of connected maps, orientation preserving.
    pub fn isomorphic(&self, other: &PlaneMap) -> bool {
        self.vertex_count() == other.vertex_count()
            && self.dart_count() == other.dart_count()
            && self.canonical_code(false) == other.canonical_code(false)
    }

    /// Isomorphism up to reflection.
    pub fn isomorphic_unoriented(&self, other: &PlaneMap) -> bool {
        self.isomorphic(other)
            || (self.vertex_count() == other.vertex_count()
                && self.dart_count() == other.dart_count()
                && self.canonical_code(false) == other.canonical_code(true))
    }
}

/// Face boundary walks of a plane graph as vertex sequences (walk tails).
pub fn face_walks(g: &Graph) -> Result<Vec<Vec<usize>>> {
    let m = PlaneMap::from_graph(g)?;
    let faces = m.planar_faces()?;
    Ok(faces
        .walks
        .iter()
        .map(|w| w.iter().map(|&d| m.tail(d)).collect())
        .collect())
}

/// Dual of a plane graph, parallel dual edges collapsed into multiplicities and
/// loops (from bridges) dropped.
pub fn dual_graph(g: &Graph) -> Result<Graph> {
    PlaneMap::from_graph(g)?.dual()?.to_graph()
}
