//! Chain families and the shortest-chain separation oracle.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use crate::error::{Error, Result};
use crate::graph::{components, Chain, Graph};

/// Declarative description of a chain family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainFamilySpec {
    /// All chains starting in `a` and ending in `b`. Overlap is allowed: a
    /// vertex of `a ∩ b` is a one-vertex chain.
    Connect { a: BTreeSet<usize>, b: BTreeSet<usize> },
    /// Chains from `a` to a vertex tagged `frontier`.
    ToFrontier { a: BTreeSet<usize> },
    /// Chains from `a` to the frontier whose part after the last gate stays in
    /// components of `g - gates` that contain no vertex of `a`.
    EscapeThrough { a: BTreeSet<usize>, gates: BTreeSet<usize> },
}

impl ChainFamilySpec {
    pub fn connect(a: impl IntoIterator<Item = usize>, b: impl IntoIterator<Item = usize>) -> Self {
        ChainFamilySpec::Connect {
            a: a.into_iter().collect(),
            b: b.into_iter().collect(),
        }
    }

    pub fn sources(&self) -> &BTreeSet<usize> {
        match self {
            ChainFamilySpec::Connect { a, .. }
            | ChainFamilySpec::ToFrontier { a }
            | ChainFamilySpec::EscapeThrough { a, .. } => a,
        }
    }
}

/// Resolved form of a family: start set, phase-1 region, and targets.
#[derive(Clone, Debug)]
pub(crate) struct Family {
    pub sources: Vec<usize>,
    /// Target flags per vertex (reached in the final phase).
    pub target: Vec<bool>,
    /// For escape families: gate flags and far-region flags.
    pub escape: Option<(Vec<bool>, Vec<bool>)>,
}

impl Family {
    pub fn resolve(g: &Graph, spec: &ChainFamilySpec) -> Result<Family> {
        let n = g.len();
        let check = |s: &BTreeSet<usize>, what: &str| -> Result<()> {
            if let Some(v) = s.iter().find(|&&v| v >= n) {
                return Err(Error::input(format!("{what} vertex index {v} out of range")));
            }
            Ok(())
        };
        let sources = spec.sources();
        check(sources, "source")?;
        if sources.is_empty() {
            return Err(Error::input("chain family needs a nonempty source set"));
        }
        let mut target = vec![false; n];
        let mut escape = None;
        match spec {
            ChainFamilySpec::Connect { b, .. } => {
                check(b, "target")?;
                if b.is_empty() {
                    return Err(Error::input("chain family needs a nonempty target set"));
                }
                for &v in b {
                    target[v] = true;
                }
            }
            ChainFamilySpec::ToFrontier { .. } => {
                for v in g.frontier() {
                    target[v] = true;
                }
            }
            ChainFamilySpec::EscapeThrough { a, gates } => {
                check(gates, "gate")?;
                if !a.is_disjoint(gates) {
                    return Err(Error::input("sources and gates must be disjoint"));
                }
                let rest: BTreeSet<usize> = (0..n).filter(|v| !gates.contains(v)).collect();
                let mut far = vec![false; n];
                for comp in components(g, &rest) {
                    if comp.members().is_disjoint(a) {
                        for &v in comp.members() {
                            far[v] = true;
                        }
                    }
                }
                for v in g.frontier() {
                    target[v] = far[v];
                }
                let mut gate = vec![false; n];
                for &v in gates {
                    gate[v] = true;
                }
                escape = Some((gate, far));
            }
        }
        Ok(Family {
            sources: sources.iter().copied().collect(),
            target,
            escape,
        })
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    state: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.state.cmp(&self.state))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Vertex-weighted shortest chains of a family; one Dijkstra pass, read out
/// per target.
pub(crate) struct ShortestChains {
    n: usize,
    dist: Vec<f64>,
    pred: Vec<usize>,
    /// Reached final-phase targets, sorted by (length, vertex).
    pub hits: Vec<(f64, usize)>,
}

impl ShortestChains {
    /// Runs Dijkstra over `(vertex, phase)` states. Entering a vertex costs its mass.
    pub fn run(g: &Graph, masses: &[f64], fam: &Family) -> ShortestChains {
        let n = g.len();
        let phases = if fam.escape.is_some() { 2 } else { 1 };
        let mut dist = vec![f64::INFINITY; n * phases];
        let mut pred = vec![usize::MAX; n * phases];
        let mut done = vec![false; n * phases];
        let mut heap = BinaryHeap::new();
        let last = phases - 1;
        for &s in &fam.sources {
            if masses[s] < dist[s] {
                dist[s] = masses[s];
                heap.push(Entry {
                    dist: masses[s],
                    state: s,
                });
            }
        }
        let mut hits = Vec::new();
        while let Some(Entry { dist: d, state }) = heap.pop() {
            if done[state] {
                continue;
            }
            done[state] = true;
            let (v, phase) = (state % n, state / n);
            if phase == last && fam.target[v] {
                hits.push((d, v));
            }
            let mut relax = |w: usize, ph: usize, heap: &mut BinaryHeap<Entry>| {
                let s2 = ph * n + w;
                let nd = d + masses[w];
                if !done[s2] && nd < dist[s2] {
                    dist[s2] = nd;
                    pred[s2] = state;
                    heap.push(Entry { dist: nd, state: s2 });
                }
            };
            match &fam.escape {
                None => {
                    for &w in g.neighbors(v) {
                        relax(w, 0, &mut heap);
                    }
                }
                Some((gate, far)) => {
                    for &w in g.neighbors(v) {
                        if phase == 0 {
                            relax(w, 0, &mut heap);
                            if gate[v] && far[w] {
                                relax(w, 1, &mut heap);
                            }
                        } else if far[w] {
                            relax(w, 1, &mut heap);
                        }
                    }
                }
            }
        }
        ShortestChains { n, dist, pred, hits }
    }

    /// The chain ending at target `t`, with repeated vertices loop-erased.
    pub fn chain_to(&self, t: usize) -> (Chain, f64) {
        let phases = self.dist.len() / self.n;
        let mut state = (phases - 1) * self.n + t;
        let mut walk = Vec::new();
        while state != usize::MAX {
            walk.push(state % self.n);
            state = self.pred[state];
        }
        walk.reverse();
        let chain = loop_erase(walk);
        (Chain(chain), self.dist[(phases - 1) * self.n + t])
    }
}

/// Cuts out the stretch between the first and last visit of any repeated vertex.
fn loop_erase(walk: Vec<usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(walk.len());
    for (i, &v) in walk.iter().enumerate() {
        if out.contains(&v) {
            continue;
        }
        match walk[i..].iter().rposition(|&x| x == v) {
            Some(j) if j > 0 => {
                out.push(v);
                return {
                    let mut rest = loop_erase(walk[i + j + 1..].to_vec());
                    // The suffix cannot revisit anything already kept: kept
                    // vertices were last seen before this point.
                    out.append(&mut rest);
                    out
                };
            }
            _ => out.push(v),
        }
    }
    out
}

/// Cheapest chain of the family under `masses` (vertex-weighted, both ends
/// counted) and its weighted length; `None` when the family is empty.
pub fn shortest_weighted_chain(
    g: &Graph,
    masses: &[f64],
    spec: &ChainFamilySpec,
) -> Result<Option<(Chain, f64)>> {
    if masses.len() != g.len() {
        return Err(Error::input("mass vector length does not match the graph"));
    }
    if masses.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
        return Err(Error::input("masses must be finite and non-negative"));
    }
    let fam = Family::resolve(g, spec)?;
    let sp = ShortestChains::run(g, masses, &fam);
    Ok(sp.hits.first().map(|&(_, t)| sp.chain_to(t)))
}
