//! Speiser graphs dual to the triangulation spanned by a labelled plane tree,
//! and their extensions by half-cylinder lattices.
//!
//! Each triangle of the triangulation sits over one side of one tree edge, so
//! its dual vertex is a dart of the tree. Darts are joined across their tree
//! edge (the twin link) and across every corner of the contour (the corner
//! link, dual to the arc from that corner to infinity).

use std::collections::{BTreeMap, BTreeSet};

use super::{attach_lattice, EmbeddedTree};
use crate::error::{Error, Result};
use crate::graph::{Graph, PlaneMap, FRONTIER};

/// Label of the faces standing for the ideal vertex at infinity.
pub const INFINITY: &str = "inf";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpeiserClass {
    Cross,
    Circle,
}

#[derive(Clone, Debug)]
pub struct SpeiserGraph {
    pub map: PlaneMap,
    /// Collapsed view (parallel edges become multiplicities).
    pub graph: Graph,
    /// Face labels in their cyclic order.
    pub alphabet: Vec<String>,
    /// Label index per face of `map.faces()`.
    pub face_labels: Vec<Option<usize>>,
    pub classes: Vec<SpeiserClass>,
    /// Faces standing for faces with infinitely many sides.
    pub unbounded: BTreeSet<usize>,
}

pub fn build_speiser_from_tree(t: &EmbeddedTree) -> Result<SpeiserGraph> {
    let tg = &t.graph;
    let mut value = Vec::with_capacity(tg.len());
    for v in 0..tg.len() {
        value.push(t.value(v).ok_or_else(|| {
            Error::Label(format!("tree vertex `{}` has no 0/1 label", tg.name(v)))
        })?);
    }
    if let Some((u, v)) = tg.edges().find(|&(u, v)| value[u] == value[v]) {
        return Err(Error::Label(format!(
            "labels do not alternate along `{}`-`{}`",
            tg.name(u),
            tg.name(v)
        )));
    }
    let tmap = PlaneMap::from_graph(tg)?;
    let tfaces = tmap.planar_faces()?;
    if tg.len() < 2 {
        return Err(Error::input("tree needs at least one edge"));
    }

    let mut map = PlaneMap::new();
    for d in 0..tmap.dart_count() {
        let id = map.add_vertex(&format!(
            "s:{}>{}",
            tg.name(tmap.tail(d)),
            tg.name(tmap.head(d))
        ));
        debug_assert_eq!(id, d);
        if tg.has_tag(tmap.tail(d), FRONTIER) || tg.has_tag(tmap.head(d), FRONTIER) {
            map.tag(id, FRONTIER);
        }
    }
    // Candidate triangulation vertices on either side of each new edge; `None` is infinity.
    let mut sides: Vec<[Option<usize>; 2]> = Vec::new();
    let mut twin_link = vec![usize::MAX; tmap.dart_count()];
    for e in 0..tmap.edge_count() {
        let l = map.add_edge(2 * e, 2 * e + 1);
        twin_link[2 * e] = l;
        twin_link[2 * e + 1] = l ^ 1;
        sides.push([Some(tmap.tail(2 * e)), Some(tmap.head(2 * e))]);
    }
    let mut to_next = vec![usize::MAX; tmap.dart_count()];
    let mut to_prev = vec![usize::MAX; tmap.dart_count()];
    for walk in &tfaces.walks {
        for i in 0..walk.len() {
            let (a, b) = (walk[i], walk[(i + 1) % walk.len()]);
            let l = map.add_edge(a, b);
            to_next[a] = l;
            to_prev[b] = l ^ 1;
            sides.push([Some(tmap.head(a)), None]);
        }
    }
    for d in 0..tmap.dart_count() {
        map.set_rotation(d, vec![twin_link[d], to_prev[d], to_next[d]]);
    }
    let faces = map.planar_faces()?;

    let alphabet = vec!["0".to_string(), "1".to_string(), INFINITY.to_string()];
    let mut face_labels = Vec::with_capacity(faces.len());
    let mut unbounded = BTreeSet::new();
    for (f, walk) in faces.walks.iter().enumerate() {
        let mut cand: Option<BTreeSet<Option<usize>>> = None;
        for &d in walk {
            let here: BTreeSet<Option<usize>> = sides[d / 2].iter().copied().collect();
            cand = Some(match cand {
                None => here,
                Some(c) => c.intersection(&here).copied().collect(),
            });
        }
        let cand = cand.unwrap_or_default();
        if cand.len() != 1 {
            return Err(Error::Construction(format!("face {f} has no unique label")));
        }
        let label = match cand.into_iter().next().expect("one candidate") {
            Some(v) => value[v] as usize,
            None => {
                unbounded.insert(f);
                2
            }
        };
        face_labels.push(Some(label));
    }
    let classes = (0..tmap.dart_count())
        .map(|d| {
            if value[tmap.tail(d)] == 1 {
                SpeiserClass::Cross
            } else {
                SpeiserClass::Circle
            }
        })
        .collect();
    let graph = map.to_graph()?;
    Ok(SpeiserGraph {
        map,
        graph,
        alphabet,
        face_labels,
        classes,
        unbounded,
    })
}

/// True iff around every cross vertex the face labels run through the
/// alphabet counterclockwise, and clockwise around every circle vertex.
/// Frontier vertices are not checked.
pub fn check_label_compatibility(gamma: &SpeiserGraph) -> Result<bool> {
    let faces = gamma.map.faces();
    if gamma.face_labels.len() != faces.len() {
        return Err(Error::input("face label table does not match the faces"));
    }
    let q = gamma.alphabet.len();
    for v in 0..gamma.map.vertex_count() {
        if gamma.map.has_tag(v, FRONTIER) {
            continue;
        }
        let rot = gamma.map.rotation(v);
        if rot.len() != q {
            return Ok(false);
        }
        let mut seq = Vec::with_capacity(q);
        for &d in rot {
            seq.push(gamma.face_labels[faces.face_of[d]].ok_or_else(|| {
                Error::input(format!("face around `{}` is unlabelled", gamma.map.name(v)))
            })?);
        }
        let step = match gamma.classes[v] {
            SpeiserClass::Cross => 1,
            SpeiserClass::Circle => q - 1,
        };
        if (0..q).any(|i| seq[(i + 1) % q] != (seq[i] + step) % q) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub struct ExtendedSpeiser {
    pub map: PlaneMap,
    pub graph: Graph,
    /// Faces of `map.faces()` beyond the top row of a lattice.
    pub cap_faces: BTreeSet<usize>,
    /// Faces of the input that were replaced, with their sizes.
    pub replaced: BTreeMap<usize, usize>,
}

/// Replaces every face with `2k >= 2n` sides, and every face standing for an
/// unbounded one, by a lattice of height `depth` glued along the face walk.
/// Faces touching the truncation frontier get open strips instead.
pub fn build_extended_speiser(gamma: &SpeiserGraph, n: usize, depth: usize) -> Result<ExtendedSpeiser> {
    if n < 1 || depth < 1 {
        return Err(Error::input("lattice threshold and depth must be at least 1"));
    }
    let faces = gamma.map.planar_faces()?;
    let mut map = gamma.map.clone();
    let is_frontier = |m: &PlaneMap, v: usize| m.has_tag(v, FRONTIER);
    let mut replaced = BTreeMap::new();
    let mut lattice_vertices = BTreeSet::new();
    for (f, walk) in faces.walks.iter().enumerate() {
        let open = walk.iter().any(|&d| is_frontier(&gamma.map, gamma.map.tail(d)));
        if walk.len() % 2 == 1 && !open {
            return Err(Error::Invariant(format!(
                "face {f} has {} sides; the graph is not bipartite",
                walk.len()
            )));
        }
        if !(open || gamma.unbounded.contains(&f) || walk.len() >= 2 * n) {
            continue;
        }
        replaced.insert(f, walk.len());
        let fr: BTreeSet<usize> = walk
            .iter()
            .map(|&d| gamma.map.tail(d))
            .filter(|&v| is_frontier(&gamma.map, v))
            .collect();
        let strips = attach_lattice(&mut map, walk, depth, !open, &|v| fr.contains(&v), &mut |s, c, d| {
            format!("x:{f}:{s}:{c}:{d}")
        });
        for strip in strips {
            let last = strip.cols.len() - 1;
            for (c, col) in strip.cols.iter().enumerate() {
                for (d, &v) in col.iter().enumerate() {
                    lattice_vertices.insert(v);
                    map.tag(v, &format!("lattice:{f}"));
                    if d + 1 == depth || (!strip.cyclic && (c == 0 || c == last)) {
                        map.tag(v, FRONTIER);
                    }
                }
            }
        }
    }
    let out_faces = map.planar_faces()?;
    let bound = (2 * (n.max(1) - 1)).max(4);
    let mut cap_faces = BTreeSet::new();
    for (f, walk) in out_faces.walks.iter().enumerate() {
        let verts: Vec<usize> = walk.iter().map(|&d| map.tail(d)).collect();
        if !verts.is_empty() && verts.iter().all(|v| lattice_vertices.contains(v) && map.has_tag(*v, FRONTIER)) {
            cap_faces.insert(f);
        }
        if verts.iter().any(|&v| map.has_tag(v, FRONTIER)) {
            continue;
        }
        if walk.len() > bound {
            return Err(Error::Invariant(format!(
                "face with {} sides exceeds the bound {bound}",
                walk.len()
            )));
        }
    }
    let graph = map.to_graph()?;
    Ok(ExtendedSpeiser {
        map,
        graph,
        cap_faces,
        replaced,
    })
}
