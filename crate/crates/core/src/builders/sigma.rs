//! Square skeleton over a plane tree: every corner of the tree contour gets a
//! ray of grid vertices, and neighbouring rays are joined by rungs.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{attach_lattice, EmbeddedTree};
use crate::error::{Error, Result};
use crate::graph::{Graph, PlaneMap, FRONTIER};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaClass {
    /// Tree vertex, as an index into the tree graph.
    Tree(usize),
    /// Grid vertex on strip `face`, column `corner`, row `depth >= 1`.
    Grid { face: usize, corner: usize, depth: usize },
}

/// Which strips sit above and below the spine of a growth-controlled tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeylSides {
    pub vplus: usize,
    pub vminus: usize,
    /// Column of `v_0` in the upper strip.
    pub plus_axis: usize,
    /// Column on the symmetry axis in the lower strip.
    pub minus_axis: usize,
    /// `+1` when lower-strip columns increase toward `v_1`.
    pub minus_sign: i64,
}

#[derive(Clone, Debug)]
pub struct SigmaGraph {
    pub graph: Graph,
    pub map: PlaneMap,
    /// Class of every vertex of `graph`.
    pub classes: Vec<SigmaClass>,
    /// Per strip: column to the skeleton vertex of the tree it hangs from.
    pub corners: Vec<Vec<usize>>,
    pub cyclic: Vec<bool>,
    pub depth: usize,
    pub keyl: Option<KeylSides>,
    grid: HashMap<(usize, usize, usize), usize>,
    tree_to_sigma: Vec<usize>,
}

impl SigmaGraph {
    pub fn grid_vertex(&self, face: usize, corner: usize, depth: usize) -> Option<usize> {
        self.grid.get(&(face, corner, depth)).copied()
    }

    /// Skeleton vertex of a tree vertex.
    pub fn tree_vertex(&self, t: usize) -> usize {
        self.tree_to_sigma[t]
    }

    pub fn tree_vertices(&self) -> BTreeSet<usize> {
        self.tree_to_sigma.iter().copied().collect()
    }

    /// Signed coordinates `(m, n)` of a grid vertex of a growth-controlled tree:
    /// `n > 0` above the spine, `n < 0` below, `m = 0` on the symmetry axis.
    pub fn coords(&self, v: usize) -> Option<(i64, i64)> {
        let sides = self.keyl.as_ref()?;
        match self.classes[v] {
            SigmaClass::Grid { face, corner, depth } if face == sides.vplus => {
                Some((corner as i64 - sides.plus_axis as i64, depth as i64))
            }
            SigmaClass::Grid { face, corner, depth } if face == sides.vminus => Some((
                sides.minus_sign * (corner as i64 - sides.minus_axis as i64),
                -(depth as i64),
            )),
            _ => None,
        }
    }

    /// Grid vertex at signed coordinates, if it exists.
    pub fn at(&self, m: i64, n: i64) -> Option<usize> {
        let sides = self.keyl.as_ref()?;
        if n > 0 {
            let c = sides.plus_axis as i64 + m;
            (c >= 0).then(|| self.grid_vertex(sides.vplus, c as usize, n as usize))?
        } else if n < 0 {
            let c = sides.minus_axis as i64 + sides.minus_sign * m;
            (c >= 0).then(|| self.grid_vertex(sides.vminus, c as usize, (-n) as usize))?
        } else {
            None
        }
    }

    /// Vertices fixed by the reflection through the axis.
    pub fn on_axis(&self, v: usize) -> bool {
        self.coords(v).is_some_and(|(m, _)| m == 0)
    }
}

/// Builds the skeleton with rays of `depth` grid vertices.
///
/// Rays over a finite tree wrap around the single face. For a tree with open
/// spine ends the contour is cut where the spine leaves the truncation, giving
/// an upper strip over the spine and a lower strip around the hanging trees.
/// Top-row grid vertices and the strip end columns are tagged `frontier`.
pub fn build_sigma(t: &EmbeddedTree, depth: usize) -> Result<SigmaGraph> {
    if depth < 1 {
        return Err(Error::input("skeleton depth must be at least 1"));
    }
    let tg = &t.graph;
    let mut tmap = PlaneMap::from_graph(tg)?;
    let mut ghosts = BTreeSet::new();
    for (i, &(v, front)) in t.open_ends.iter().enumerate() {
        let g = tmap.add_vertex(&format!("~ghost{i}"));
        ghosts.insert(g);
        let d = tmap.add_edge(v, g);
        tmap.set_rotation(g, vec![d ^ 1]);
        let mut r = tmap.rotation(v).to_vec();
        if front {
            r.insert(0, d);
        } else {
            r.push(d);
        }
        tmap.set_rotation(v, r);
    }
    let faces = tmap.planar_faces()?;
    let mut map = tmap.clone();
    let mut strip_info: Vec<(Vec<usize>, bool, Vec<Vec<usize>>)> = Vec::new();
    let mut names: BTreeMap<usize, (usize, usize, usize)> = BTreeMap::new();
    for walk in &faces.walks {
        let base = strip_info.len();
        let strips = attach_lattice(&mut map, walk, depth, true, &|v| ghosts.contains(&v), &mut |s, c, d| {
            format!("g:{}:{c}:{d}", base + s)
        });
        for (s, strip) in strips.into_iter().enumerate() {
            for (c, col) in strip.cols.iter().enumerate() {
                for (d, &v) in col.iter().enumerate() {
                    names.insert(v, (base + s, c, d + 1));
                }
            }
            let corner_tree = strip.corners.iter().map(|&i| tmap.tail(walk[i])).collect();
            strip_info.push((corner_tree, strip.cyclic, strip.cols));
        }
    }
    for (&v, &(f, c, d)) in &names {
        map.tag(v, &format!("grid:{f}:{c}:{d}"));
        let cols = &strip_info[f].2;
        let end_col = !strip_info[f].1 && (c == 0 || c + 1 == cols.len());
        if d == depth || end_col {
            map.tag(v, FRONTIER);
        }
    }
    let map = map.remove_vertices(&ghosts);
    map.planar_faces()?;
    let graph = map.to_graph()?;

    let mut classes = vec![SigmaClass::Tree(0); graph.len()];
    let mut grid = HashMap::new();
    let mut tree_to_sigma = vec![0; tg.len()];
    for t_v in 0..tg.len() {
        let s = graph.require(tg.name(t_v))?;
        classes[s] = SigmaClass::Tree(t_v);
        tree_to_sigma[t_v] = s;
    }
    for &(f, c, d) in names.values() {
        let s = graph.require(&format!("g:{f}:{c}:{d}"))?;
        classes[s] = SigmaClass::Grid {
            face: f,
            corner: c,
            depth: d,
        };
        grid.insert((f, c, d), s);
    }
    let corners: Vec<Vec<usize>> = strip_info
        .iter()
        .map(|(ct, _, _)| ct.iter().map(|&tv| tree_to_sigma[tv]).collect())
        .collect();
    let cyclic = strip_info.iter().map(|s| s.1).collect();

    let mut sigma = SigmaGraph {
        graph,
        map,
        classes,
        corners,
        cyclic,
        depth,
        keyl: None,
        grid,
        tree_to_sigma,
    };
    if !t.open_ends.is_empty() && !t.spine.is_empty() {
        sigma.keyl = Some(keyl_sides(t, &sigma)?);
    }
    Ok(sigma)
}

fn keyl_sides(t: &EmbeddedTree, s: &SigmaGraph) -> Result<KeylSides> {
    let tg = &t.graph;
    if s.corners.len() != 2 {
        return Err(Error::Construction(format!(
            "expected two strips over an open spine, found {}",
            s.corners.len()
        )));
    }
    let spine: BTreeSet<usize> = t.spine.values().map(|&v| s.tree_vertex(v)).collect();
    let vplus = (0..2)
        .find(|&f| s.corners[f].iter().all(|v| spine.contains(v)))
        .ok_or_else(|| Error::Construction("no strip runs along the spine only".into()))?;
    let vminus = 1 - vplus;
    let base = s.tree_vertex(t.base);
    let plus_axis = s.corners[vplus]
        .iter()
        .position(|&v| v == base)
        .ok_or_else(|| Error::Construction("base has no upper corner".into()))?;

    let axis_vertex = s.graph.require("t:0:0")?;
    let axis_tree = tg.require("t:0:0")?;
    let cols = &s.corners[vminus];
    let hits: Vec<usize> = (0..cols.len()).filter(|&c| cols[c] == axis_vertex).collect();
    // A leaf has one corner; an inner vertex has its middle corner on the axis.
    let minus_axis = match (tg.degree(axis_tree), hits.as_slice()) {
        (1, [c]) => *c,
        (3, [_, c, _]) => *c,
        _ => return Err(Error::Construction("cannot locate the symmetry axis".into())),
    };
    let v1 = s.tree_vertex(t.spine[&1]);
    let first_v1 = cols
        .iter()
        .position(|&v| v == v1)
        .ok_or_else(|| Error::Construction("v_1 has no lower corner".into()))?;
    let minus_sign = if first_v1 > minus_axis { 1 } else { -1 };
    Ok(KeylSides {
        vplus,
        vminus,
        plus_axis,
        minus_axis,
        minus_sign,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build_keyl_tree, plane_tree_from_word};

    #[test]
    fn single_edge() {
        let t = plane_tree_from_word("()").unwrap();
        let s = build_sigma(&t, 3).unwrap();
        assert_eq!(s.graph.len(), 8);
        for v in 0..2 {
            assert_eq!(s.graph.degree(s.tree_vertex(v)), 2);
        }
    }

    #[test]
    fn degree_law() {
        let t = plane_tree_from_word("(()())(())()").unwrap();
        let s = build_sigma(&t, 4).unwrap();
        assert_eq!(s.corners[0].len(), 2 * t.graph.edge_count());
        for v in 0..s.graph.len() {
            match s.classes[v] {
                SigmaClass::Tree(tv) => assert_eq!(s.graph.degree(v), 2 * t.graph.degree(tv)),
                SigmaClass::Grid { depth, .. } if depth < 4 => assert_eq!(s.graph.degree(v), 4),
                SigmaClass::Grid { .. } => assert_eq!(s.graph.degree(v), 3),
            }
        }
        // Every first-row grid vertex meets exactly its own corner vertex.
        for (c, &w) in s.corners[0].iter().enumerate() {
            let g = s.grid_vertex(0, c, 1).unwrap();
            let tree_nbrs: Vec<usize> = s
                .graph
                .neighbors(g)
                .iter()
                .copied()
                .filter(|&x| matches!(s.classes[x], SigmaClass::Tree(_)))
                .collect();
            assert_eq!(tree_nbrs, vec![w]);
        }
    }

    #[test]
    fn keyl_strips() {
        let t = build_keyl_tree(&[1, 1, 1, 1], 3).unwrap();
        let s = build_sigma(&t, 5).unwrap();
        let sides = s.keyl.clone().unwrap();
        assert_eq!(s.corners[sides.vplus].len(), 7);
        assert_eq!(s.corners[sides.vminus].len() % 2, 1);
        assert!(!s.cyclic[0] && !s.cyclic[1]);
        // Mirror symmetry of the lower strip about the axis.
        let half = (s.corners[sides.vminus].len() - 1) / 2;
        assert_eq!(sides.minus_axis, half);
        assert_eq!(s.coords(s.at(2, -3).unwrap()), Some((2, -3)));
        assert_eq!(s.coords(s.at(-1, 2).unwrap()), Some((-1, 2)));
        // v_1 first appears below the spine at column a_1 = 2.
        let v1 = s.tree_vertex(t.spine[&1]);
        let first = (1..).find(|&m| s.graph.has_edge(s.at(m, -1).unwrap(), v1)).unwrap();
        assert_eq!(first, 2);
    }
}
