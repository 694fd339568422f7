//! Skeleton of the doubled book: a two-column half-strip with extra unit
//! squares glued along the spine edges `e_k`, doubled across its boundary.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder, FRONTIER};

#[derive(Clone, Debug)]
pub struct BookComplex {
    pub graph: Graph,
    /// Number of squares attached along `e_k`.
    pub shelves: BTreeMap<usize, u32>,
    pub height: usize,
    pub base: usize,
    /// Annulus `n`: rows `n` and `n + 1` on both sheets, plus the squares at
    /// `e_{n/2}` when `n` is even.
    pub annuli: BTreeMap<usize, BTreeSet<usize>>,
}

fn point(sheet: usize, x: usize, y: usize) -> String {
    if x != 1 || y == 0 {
        format!("b:{x}:{y}")
    } else {
        format!("b:s{sheet}:{x}:{y}")
    }
}

/// Builds rows `0..=height`. Shelves are attached for every `k` with
/// `2k + 1 <= height`; `shelves(k)` gives their number.
pub fn build_book_complex(shelves: &dyn Fn(usize) -> u32, height: usize) -> Result<BookComplex> {
    if height < 1 {
        return Err(Error::input("book height must be at least 1"));
    }
    let mut b = GraphBuilder::new();
    let mut table = BTreeMap::new();
    let mut pages: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut edges = BTreeSet::new();
    for sheet in 0..2 {
        for y in 0..=height {
            for x in 0..3 {
                let v = point(sheet, x, y);
                b.add_vertex(&v);
                if y == height {
                    b.tag(&v, FRONTIER);
                }
                if x < 2 {
                    edges.insert((v.clone(), point(sheet, x + 1, y)));
                }
                if y < height {
                    edges.insert((v.clone(), point(sheet, x, y + 1)));
                }
            }
        }
    }
    for (u, v) in &edges {
        b.add_edge(u, v)?;
    }
    for k in (0..).take_while(|k| 2 * k + 1 <= height) {
        let count = shelves(k);
        table.insert(k, count);
        for sheet in 0..2 {
            let (lo, hi) = (point(sheet, 1, 2 * k), point(sheet, 1, 2 * k + 1));
            for i in 0..count {
                let p = format!("b:s{sheet}:p{k}.{i}:a");
                let q = format!("b:s{sheet}:p{k}.{i}:b");
                b.add_edge(&lo, &p)?;
                b.add_edge(&p, &q)?;
                b.add_edge(&q, &hi)?;
                b.add_edge(&lo, &hi)?;
                b.tag(&p, &format!("page:{k}"));
                b.tag(&q, &format!("page:{k}"));
                pages.entry(k).or_default().extend([p, q]);
            }
        }
    }
    let graph = b.build()?;
    let base = graph.require("b:1:0")?;
    let mut annuli = BTreeMap::new();
    for n in 0..height.saturating_sub(1) {
        let mut set = BTreeSet::new();
        for sheet in 0..2 {
            for y in [n, n + 1] {
                for x in 0..3 {
                    set.insert(graph.require(&point(sheet, x, y))?);
                }
            }
        }
        if n % 2 == 0 {
            for p in pages.get(&(n / 2)).into_iter().flatten() {
                set.insert(graph.require(p)?);
            }
        }
        annuli.insert(n, set);
    }
    Ok(BookComplex {
        graph,
        shelves: table,
        height,
        base,
        annuli,
    })
}
