//! Shared test oracles: small-graph enumeration and exact tree moduli.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use combmod::{Graph, GraphBuilder};

/// Adjacency as bitmasks over at most 16 vertices.
#[derive(Clone, Debug)]
pub struct Small {
    pub n: usize,
    pub adj: Vec<u16>,
}

impl Small {
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.adj[u] >> v & 1 == 1 {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Vertices named `p0, p1, ...` in index order (single digits keep the
    /// name order equal to the index order).
    pub fn to_graph(&self) -> Graph {
        assert!(self.n <= 10);
        let mut b = GraphBuilder::new();
        for v in 0..self.n {
            b.add_vertex(&format!("p{v}"));
        }
        for (u, v) in self.edges() {
            b.add_edge(&format!("p{u}"), &format!("p{v}")).unwrap();
        }
        b.build().unwrap()
    }

    fn degree(&self, v: usize) -> u32 {
        self.adj[v].count_ones()
    }

    /// Per-vertex colour that is preserved by isomorphisms.
    fn colours(&self) -> Vec<u64> {
        let mut col: Vec<u64> = (0..self.n)
            .map(|v| {
                let tri = (0..self.n)
                    .filter(|&w| self.adj[v] >> w & 1 == 1)
                    .map(|w| (self.adj[v] & self.adj[w]).count_ones())
                    .sum::<u32>();
                (self.degree(v) as u64) << 32 | tri as u64
            })
            .collect();
        // A few rounds of neighbourhood refinement.
        for _ in 0..3 {
            let next: Vec<u64> = (0..self.n)
                .map(|v| {
                    let mut ns: Vec<u64> = (0..self.n)
                        .filter(|&w| self.adj[v] >> w & 1 == 1)
                        .map(|w| col[w])
                        .collect();
                    ns.sort_unstable();
                    let mut h = col[v].wrapping_mul(0x9E37_79B9_7F4A_7C15);
                    for x in ns {
                        h = (h ^ x).wrapping_mul(0x100_0000_01B3).rotate_left(17);
                    }
                    h
                })
                .collect();
            col = next;
        }
        col
    }

    fn invariant(&self, col: &[u64]) -> Vec<u64> {
        let mut c = col.to_vec();
        c.sort_unstable();
        c
    }

    fn isomorphic(&self, other: &Small, ca: &[u64], cb: &[u64]) -> bool {
        let n = self.n;
        let mut map = vec![usize::MAX; n];
        let mut used = 0u16;
        fn go(a: &Small, b: &Small, ca: &[u64], cb: &[u64], i: usize, map: &mut [usize], used: &mut u16) -> bool {
            if i == a.n {
                return true;
            }
            for j in 0..b.n {
                if *used >> j & 1 == 1 || ca[i] != cb[j] {
                    continue;
                }
                let ok = (0..i).all(|k| (a.adj[i] >> k & 1) == (b.adj[j] >> map[k] & 1));
                if ok {
                    map[i] = j;
                    *used |= 1 << j;
                    if go(a, b, ca, cb, i + 1, map, used) {
                        return true;
                    }
                    *used &= !(1 << j);
                }
            }
            false
        }
        go(self, other, ca, cb, 0, &mut map, &mut used)
    }
}

/// All connected graphs on `1..=max_n` vertices, one per isomorphism class.
/// Every connected graph has a vertex whose removal leaves it connected, so
/// adding one vertex to each connected class reaches every class.
pub fn connected_graphs(max_n: usize) -> Vec<Small> {
    let mut all = Vec::new();
    let mut layer = vec![Small { n: 1, adj: vec![0] }];
    all.extend(layer.iter().cloned());
    for n in 2..=max_n {
        let mut buckets: HashMap<Vec<u64>, Vec<(Small, Vec<u64>)>> = HashMap::new();
        let mut next = Vec::new();
        for g in &layer {
            for mask in 1u16..(1 << (n - 1)) {
                let mut adj = g.adj.clone();
                adj.push(mask);
                for v in 0..n - 1 {
                    if mask >> v & 1 == 1 {
                        adj[v] |= 1 << (n - 1);
                    }
                }
                let h = Small { n, adj };
                let col = h.colours();
                let inv = h.invariant(&col);
                let bucket = buckets.entry(inv).or_default();
                if bucket.iter().any(|(k, kc)| k.isomorphic(&h, kc, &col)) {
                    continue;
                }
                bucket.push((h.clone(), col));
                next.push(h);
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}

/// Exact modulus from the root of a finite tree to the vertices tagged
/// `frontier`, by the series/parallel rule for vertex masses: a frontier
/// vertex contributes 1 and an inner vertex with child sum `S` contributes
/// `S / (1 + S)`. Frontier vertices are not passed through.
pub fn tree_root_modulus(g: &Graph, root: usize) -> f64 {
    fn down(g: &Graph, v: usize, parent: usize) -> f64 {
        if g.has_tag(v, "frontier") {
            return 1.0;
        }
        let s: f64 = g
            .neighbors(v)
            .iter()
            .filter(|&&w| w != parent)
            .map(|&w| down(g, w, v))
            .sum();
        s / (1.0 + s)
    }
    down(g, root, usize::MAX)
}

/// Same rule on an explicit rooted tree given as children lists, with
/// `leaf_is_target[v]` marking targets.
pub fn tree_modulus_children(children: &BTreeMap<usize, Vec<usize>>, targets: &BTreeSet<usize>, v: usize) -> f64 {
    if targets.contains(&v) {
        return 1.0;
    }
    let s: f64 = children
        .get(&v)
        .map(|c| c.iter().map(|&w| tree_modulus_children(children, targets, w)).sum())
        .unwrap_or(0.0);
    s / (1.0 + s)
}

/// Least vertex-weighted length of a chain from `a` to `b` that stays in
/// `within`, counting both endpoints. Plain O(n²) Dijkstra.
pub fn min_chain_length(
    g: &Graph,
    masses: &[f64],
    within: &BTreeSet<usize>,
    a: &BTreeSet<usize>,
    b: &BTreeSet<usize>,
) -> f64 {
    let n = g.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    for &s in a.iter().filter(|s| within.contains(s)) {
        dist[s] = masses[s];
    }
    loop {
        let mut best = None;
        for v in 0..n {
            if !done[v] && dist[v].is_finite() && best.map_or(true, |u: usize| dist[v] < dist[u]) {
                best = Some(v);
            }
        }
        let Some(u) = best else { return f64::INFINITY };
        if b.contains(&u) {
            return dist[u];
        }
        done[u] = true;
        for &w in g.neighbors(u) {
            if within.contains(&w) && dist[u] + masses[w] < dist[w] {
                dist[w] = dist[u] + masses[w];
            }
        }
    }
}

/// Least-squares line through `(x, y)` and the largest relative residual.
pub fn line_fit_residual(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let alpha = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let beta = (sy - alpha * sx) / n;
    let worst = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| ((alpha * x + beta) - y).abs() / y.abs())
        .fold(0.0, f64::max);
    (alpha, beta, worst)
}
