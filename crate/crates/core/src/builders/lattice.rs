//! Truncated half-plane and half-cylinder lattices.

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder, FRONTIER};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeKind {
    HalfPlane,
    /// Quotient of the half-plane by horizontal shifts of the given period.
    HalfCylinder(usize),
}

/// Rows `0..=depth`; row 0 is tagged `boundary`, the top row and the cut
/// side columns are tagged `frontier`. `width` is the number of columns of a
/// half-plane piece and is ignored for cylinders.
pub fn build_lattice(kind: LatticeKind, depth: usize, width: usize) -> Result<Graph> {
    if depth < 1 {
        return Err(Error::input("lattice depth must be at least 1"));
    }
    let (cols, wrap) = match kind {
        LatticeKind::HalfPlane if width >= 1 => (width, false),
        LatticeKind::HalfCylinder(n) if n >= 1 => (n, true),
        _ => return Err(Error::input("lattice width and period must be at least 1")),
    };
    let name = |x: usize, y: usize| format!("l:{x}:{y}");
    let mut b = GraphBuilder::new();
    for y in 0..=depth {
        for x in 0..cols {
            let v = name(x, y);
            b.add_vertex(&v);
            if y == 0 {
                b.tag(&v, "boundary");
            }
            if y == depth || (!wrap && (x == 0 || x + 1 == cols)) {
                b.tag(&v, FRONTIER);
            }
            if y < depth {
                b.add_edge(&v, &name(x, y + 1))?;
            }
            if x + 1 < cols {
                b.add_edge(&v, &name(x + 1, y))?;
            } else if wrap && cols > 1 {
                b.add_edge(&v, &name(0, y))?;
            }
        }
    }
    if !wrap || cols >= 3 {
        for y in 0..=depth {
            for x in 0..cols {
                let mut r = Vec::new();
                if wrap || x + 1 < cols {
                    r.push(name((x + 1) % cols, y));
                }
                if y < depth {
                    r.push(name(x, y + 1));
                }
                if wrap || x > 0 {
                    r.push(name((x + cols - 1) % cols, y));
                }
                if y > 0 {
                    r.push(name(x, y - 1));
                }
                b.set_rotation(&name(x, y), r);
            }
        }
    }
    b.build()
}
