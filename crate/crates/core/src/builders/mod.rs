//! Graph families: the valence-3 tree and its subtrees, the square skeleton
//! over a plane tree, Speiser graphs and their lattice extensions, lattices and
//! the book complex.

mod book;
mod lattice;
mod sigma;
mod speiser;
pub mod t3;

pub use book::{build_book_complex, BookComplex};
pub use lattice::{build_lattice, LatticeKind};
pub use sigma::{build_sigma, KeylSides, SigmaClass, SigmaGraph};
pub use speiser::{
    build_extended_speiser, build_speiser_from_tree, check_label_compatibility, ExtendedSpeiser,
    SpeiserClass, SpeiserGraph,
};
pub use t3::{build_keyl_tree, build_t3_ball, T3Address};

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{components, Graph, GraphBuilder, PlaneMap};

/// A plane tree with a distinguished base vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddedTree {
    pub graph: Graph,
    pub base: usize,
    /// Spine index to vertex, for subtrees of the valence-3 tree.
    pub spine: BTreeMap<i64, usize>,
    /// Shell index `k` to the truncated shell `B_k`, for growth-controlled subtrees.
    pub bsets: BTreeMap<usize, BTreeSet<usize>>,
    /// Hanging depth of shell `k`, for growth-controlled subtrees.
    pub floors: Vec<u32>,
    /// Spine ends where the infinite tree continues; `true` when the missing
    /// neighbour comes first in the rotation.
    pub open_ends: Vec<(usize, bool)>,
}

impl EmbeddedTree {
    /// Wraps a finite plane tree, checking connectivity, acyclicity and the rotation.
    pub fn from_graph(graph: Graph, base: &str) -> Result<EmbeddedTree> {
        let base = graph.require(base)?;
        if graph.rotation().is_none() {
            return Err(Error::Embedding("tree needs a rotation system".into()));
        }
        let all: BTreeSet<usize> = (0..graph.len()).collect();
        if components(&graph, &all).len() != 1 || graph.edge_count() + 1 != graph.len() {
            return Err(Error::input("graph is not a tree"));
        }
        Ok(EmbeddedTree {
            graph,
            base,
            spine: BTreeMap::new(),
            bsets: BTreeMap::new(),
            floors: Vec::new(),
            open_ends: Vec::new(),
        })
    }

    pub fn max_degree(&self) -> usize {
        (0..self.graph.len()).map(|v| self.graph.degree(v)).max().unwrap_or(0)
    }

    /// Copy with `0`/`1` labels alternating from the base (base gets `0`).
    pub fn with_bipartite_labels(&self) -> EmbeddedTree {
        let dist = crate::graph::distances_from(&self.graph, &BTreeSet::from([self.base]))
            .expect("base is a vertex");
        let mut b = self.graph.to_builder();
        for (v, d) in dist {
            b.tag(self.graph.name(v), if d % 2 == 0 { "val:0" } else { "val:1" });
        }
        EmbeddedTree {
            graph: b.build().expect("relabelling keeps the graph valid"),
            ..self.clone()
        }
    }

    /// The `0`/`1` label of a vertex, if any.
    pub fn value(&self, v: usize) -> Option<u8> {
        match self.graph.tag_value(v, "val:") {
            Some("0") => Some(0),
            Some("1") => Some(1),
            _ => None,
        }
    }
}

/// Rooted plane tree from nested child lists, e.g. `[[], [[]]]` style shapes
/// given as a parenthesis word: `(` descends to a new child, `)` returns.
pub fn plane_tree_from_word(word: &str) -> Result<EmbeddedTree> {
    let mut b = GraphBuilder::new();
    let mut children: Vec<Vec<String>> = vec![Vec::new()];
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut stack = vec![0usize];
    let name = |i: usize| format!("n{i:02}");
    b.add_vertex(&name(0));
    for ch in word.chars() {
        match ch {
            '(' => {
                let top = *stack.last().expect("stack has root");
                let id = children.len();
                children.push(Vec::new());
                parent.push(Some(top));
                children[top].push(name(id));
                b.add_edge(&name(top), &name(id))?;
                stack.push(id);
            }
            ')' => {
                if stack.len() <= 1 {
                    return Err(Error::input("unbalanced tree word"));
                }
                stack.pop();
            }
            _ => return Err(Error::input(format!("bad character `{ch}` in tree word"))),
        }
    }
    if stack.len() != 1 {
        return Err(Error::input("unbalanced tree word"));
    }
    for (i, kids) in children.iter().enumerate() {
        let mut order = Vec::new();
        if let Some(p) = parent[i] {
            order.push(name(p));
        }
        order.extend(kids.iter().cloned());
        b.set_rotation(&name(i), order);
    }
    EmbeddedTree::from_graph(b.build()?, &name(0))
}

/// Columns of lattice vertices hung below a run of consecutive corners.
#[derive(Clone, Debug)]
pub(crate) struct Strip {
    /// Walk positions of the corners, in order.
    pub corners: Vec<usize>,
    pub cyclic: bool,
    /// `cols[c][d - 1]` is the map vertex at column `c`, row `d`.
    pub cols: Vec<Vec<usize>>,
}

/// Glues a lattice of the given height into the face to the right of `walk`.
///
/// Corner `i` sits at the tail of `walk[i]`; its column hangs from that vertex
/// and consecutive columns are joined in every row when the dart between them
/// is kept. Corners at skipped vertices are dropped, which cuts the lattice
/// into strips; `wrap = false` additionally cuts it after the last corner.
pub(crate) fn attach_lattice(
    map: &mut PlaneMap,
    walk: &[usize],
    height: usize,
    wrap: bool,
    skip: &dyn Fn(usize) -> bool,
    name: &mut dyn FnMut(usize, usize, usize) -> String,
) -> Vec<Strip> {
    let len = walk.len();
    if len == 0 || height == 0 {
        return Vec::new();
    }
    let corner_vertex: Vec<usize> = walk.iter().map(|&d| map.tail(d)).collect();
    let kept: Vec<bool> = corner_vertex.iter().map(|&v| !skip(v)).collect();
    let link: Vec<bool> = (0..len)
        .map(|i| kept[i] && kept[(i + 1) % len] && (wrap || i + 1 < len))
        .collect();

    let mut runs: Vec<(Vec<usize>, bool)> = Vec::new();
    if link.iter().all(|&l| l) {
        runs.push(((0..len).collect(), true));
    } else {
        let first_break = link.iter().position(|&l| !l).expect("some break");
        let mut current: Vec<usize> = Vec::new();
        for step in 1..=len {
            let i = (first_break + step) % len;
            if kept[i] {
                current.push(i);
            }
            if !link[i] && !current.is_empty() {
                runs.push((std::mem::take(&mut current), false));
            }
        }
    }

    let mut strips = Vec::new();
    for (s, (corners, cyclic)) in runs.into_iter().enumerate() {
        let cols: Vec<Vec<usize>> = (0..corners.len())
            .map(|c| (1..=height).map(|d| map.add_vertex(&name(s, c, d))).collect())
            .collect();
        let n = corners.len();
        let mut east = vec![vec![usize::MAX; height]; n];
        let mut west = vec![vec![usize::MAX; height]; n];
        let mut north = vec![vec![usize::MAX; height]; n];
        let mut south = vec![vec![usize::MAX; height]; n];
        for c in 0..n {
            let i = corners[c];
            let foot = map.add_edge(corner_vertex[i], cols[c][0]);
            let arriving = walk[(i + len - 1) % len];
            map.insert_after(corner_vertex[i], arriving ^ 1, foot);
            north[c][0] = foot ^ 1;
            for d in 0..height {
                if d + 1 < height {
                    let e = map.add_edge(cols[c][d], cols[c][d + 1]);
                    south[c][d] = e;
                    north[c][d + 1] = e ^ 1;
                }
                if c + 1 < n || cyclic {
                    let c2 = (c + 1) % n;
                    let e = map.add_edge(cols[c][d], cols[c2][d]);
                    east[c][d] = e;
                    west[c2][d] = e ^ 1;
                }
            }
        }
        for c in 0..n {
            for d in 0..height {
                let order = [east[c][d], north[c][d], west[c][d], south[c][d]];
                map.set_rotation(
                    cols[c][d],
                    order.into_iter().filter(|&x| x != usize::MAX).collect(),
                );
            }
        }
        strips.push(Strip {
            corners,
            cyclic,
            cols,
        });
    }
    strips
}
