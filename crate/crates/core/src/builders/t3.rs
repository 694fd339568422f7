//! The valence-3 tree, addressed by spine index plus a binary descent word.
//!
//! The spine is the two-sided chain `v_j`. Every spine vertex has one hanging
//! child with word `"0"`; below it each vertex has two children, `w0` and
//! `w1`. All hanging trees are drawn on the same side of the spine.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::EmbeddedTree;
use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, FRONTIER};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct T3Address {
    pub spine: i64,
    pub word: String,
}

impl T3Address {
    pub fn spine(j: i64) -> Self {
        T3Address {
            spine: j,
            word: String::new(),
        }
    }

    pub fn new(j: i64, word: &str) -> Result<Self> {
        let ok = word.is_empty()
            || (word.starts_with('0') && word.bytes().all(|b| b == b'0' || b == b'1'));
        if !ok {
            return Err(Error::input(format!("bad hanging-tree word `{word}`")));
        }
        Ok(T3Address {
            spine: j,
            word: word.to_string(),
        })
    }

    /// Distance to the spine.
    pub fn depth(&self) -> usize {
        self.word.len()
    }

    /// Distance to `v_0`.
    pub fn dist_base(&self) -> usize {
        self.spine.unsigned_abs() as usize + self.word.len()
    }

    /// The `k` with `dist_base = depth + k`, i.e. the `B'_k` containing this vertex.
    pub fn shell(&self) -> usize {
        self.spine.unsigned_abs() as usize
    }

    pub fn parent(&self) -> Option<T3Address> {
        if self.word.is_empty() {
            return None;
        }
        Some(T3Address {
            spine: self.spine,
            word: self.word[..self.word.len() - 1].to_string(),
        })
    }

    pub fn child(&self, bit: char) -> T3Address {
        T3Address {
            spine: self.spine,
            word: format!("{}{bit}", self.word),
        }
    }

    /// Image under the reflection that swaps `v_j` and `v_{-j}`.
    pub fn mirror(&self) -> T3Address {
        if self.spine != 0 || self.word.len() <= 1 {
            return T3Address {
                spine: -self.spine,
                word: self.word.clone(),
            };
        }
        let flipped: String = self
            .word
            .chars()
            .enumerate()
            .map(|(i, c)| if i == 0 { c } else if c == '0' { '1' } else { '0' })
            .collect();
        T3Address {
            spine: 0,
            word: flipped,
        }
    }
}

impl fmt::Display for T3Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t:{}:{}", self.spine, self.word)
    }
}

impl FromStr for T3Address {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rest = s
            .strip_prefix("t:")
            .ok_or_else(|| Error::input(format!("`{s}` is not a tree address")))?;
        let (j, w) = rest
            .split_once(':')
            .ok_or_else(|| Error::input(format!("`{s}` is not a tree address")))?;
        let j: i64 = j
            .parse()
            .map_err(|_| Error::input(format!("bad spine index in `{s}`")))?;
        T3Address::new(j, w)
    }
}

/// Counterclockwise neighbour order at `a` among the vertices in `present`.
fn rotation_at(a: &T3Address, present: &BTreeSet<T3Address>) -> Vec<T3Address> {
    let order = if a.word.is_empty() {
        vec![
            T3Address::spine(a.spine - 1),
            a.child('0'),
            T3Address::spine(a.spine + 1),
        ]
    } else {
        let p = a.parent().expect("hanging vertex has a parent");
        let (c0, c1) = (a.child('0'), a.child('1'));
        if a.spine >= 0 {
            vec![p, c0, c1]
        } else {
            vec![p, c1, c0]
        }
    };
    order.into_iter().filter(|x| present.contains(x)).collect()
}

fn assemble(present: &BTreeSet<T3Address>, frontier: &BTreeSet<T3Address>) -> Result<EmbeddedTree> {
    let mut b = GraphBuilder::new();
    for a in present {
        let name = a.to_string();
        b.add_vertex(&name);
        b.tag(&name, "tree");
        if a.word.is_empty() {
            b.tag(&name, &format!("spine:{}", a.spine));
        }
        if frontier.contains(a) {
            b.tag(&name, FRONTIER);
        }
        if let Some(p) = a.parent() {
            b.add_edge(&p.to_string(), &name)?;
        } else if present.contains(&T3Address::spine(a.spine - 1)) {
            b.add_edge(&T3Address::spine(a.spine - 1).to_string(), &name)?;
        }
    }
    for a in present {
        b.set_rotation(
            &a.to_string(),
            rotation_at(a, present).iter().map(ToString::to_string).collect(),
        );
    }
    let graph = b.build()?;
    let base = graph.require("t:0:")?;
    let spine = present
        .iter()
        .filter(|a| a.word.is_empty())
        .map(|a| (a.spine, graph.id(&a.to_string()).expect("present")))
        .collect();
    Ok(EmbeddedTree {
        graph,
        base,
        spine,
        bsets: BTreeMap::new(),
        floors: Vec::new(),
        open_ends: Vec::new(),
    })
}

/// Ball of the given radius around `v_0`; vertices at distance `radius` are frontier.
pub fn build_t3_ball(radius: usize) -> Result<EmbeddedTree> {
    let mut present = BTreeSet::new();
    let r = radius as i64;
    for j in -r..=r {
        let spine = T3Address::spine(j);
        let budget = radius - j.unsigned_abs() as usize;
        let mut layer = vec![spine.clone()];
        present.insert(spine);
        for depth in 1..=budget {
            layer = if depth == 1 {
                vec![T3Address::spine(j).child('0')]
            } else {
                layer
                    .iter()
                    .flat_map(|a| [a.child('0'), a.child('1')])
                    .collect()
            };
            present.extend(layer.iter().cloned());
        }
    }
    let frontier = present
        .iter()
        .filter(|a| a.dist_base() == radius)
        .cloned()
        .collect();
    assemble(&present, &frontier)
}

/// Subtree `B_0 ∪ … ∪ B_kmax`: spine `v_{-kmax}..v_kmax`, with the hanging
/// trees at `v_{±k}` kept to depth `floors[k]`.
///
/// `floors[k]` is the integer part of the growth function at the `(k+1)`-th
/// escape modulus, so it must be at least 1 and non-decreasing in `k`.
/// The spine ends stay open: the spine continues past them in the infinite
/// tree, so they are frontier and any surface built on the tree is cut there.
pub fn build_keyl_tree(floors: &[u32], kmax: usize) -> Result<EmbeddedTree> {
    if floors.len() < kmax + 1 {
        return Err(Error::Precondition(format!(
            "need {} depth values, got {}",
            kmax + 1,
            floors.len()
        )));
    }
    let floors = &floors[..=kmax];
    if floors[0] < 1 {
        return Err(Error::Precondition("growth function must be at least 1 at the first modulus".into()));
    }
    if floors.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition(
            "growth function must be decreasing in the modulus (depths non-decreasing in k)".into(),
        ));
    }
    if floors.iter().any(|&l| l > 24) {
        return Err(Error::Resource(format!(
            "hanging depth {} exceeds the cap of 24",
            floors.iter().max().unwrap()
        )));
    }
    let mut present = BTreeSet::new();
    let mut shells: BTreeMap<usize, Vec<T3Address>> = BTreeMap::new();
    let k = kmax as i64;
    for j in -k..=k {
        let depth = floors[j.unsigned_abs() as usize] as usize;
        let shell = shells.entry(j.unsigned_abs() as usize).or_default();
        let spine = T3Address::spine(j);
        shell.push(spine.clone());
        let mut layer = vec![spine.child('0')];
        for d in 1..=depth {
            if d > 1 {
                layer = layer
                    .iter()
                    .flat_map(|a| [a.child('0'), a.child('1')])
                    .collect();
            }
            shell.extend(layer.iter().cloned());
        }
        present.extend(shell.iter().cloned());
    }
    let frontier = [T3Address::spine(-k), T3Address::spine(k)].into_iter().collect();
    let mut tree = assemble(&present, &frontier)?;
    for (k, members) in shells {
        let ids: BTreeSet<usize> = members
            .iter()
            .map(|a| tree.graph.id(&a.to_string()).expect("present"))
            .collect();
        tree.bsets.insert(k, ids);
    }
    let mut b = tree.graph.to_builder();
    for (k, ids) in &tree.bsets {
        for &v in ids {
            b.tag(tree.graph.name(v), &format!("bk:{k}"));
        }
    }
    tree.graph = b.build()?;
    tree.floors = floors.to_vec();
    tree.open_ends = vec![(tree.spine[&-k], true), (tree.spine[&k], false)];
    Ok(tree)
}

/// Address of a tree vertex from its identifier.
pub fn address(tree: &EmbeddedTree, v: usize) -> Result<T3Address> {
    tree.graph.name(v).parse()
}
