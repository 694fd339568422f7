//! Unit-resistance network solves. Parallel edges count as parallel resistors.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{components, Graph};

/// Conductance between the shorted sets `a` and `b`.
pub fn effective_conductance(g: &Graph, a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> Result<f64> {
    let n = g.len();
    if a.is_empty() || b.is_empty() {
        return Err(Error::input("terminal sets must be nonempty"));
    }
    if a.iter().chain(b).any(|&v| v >= n) {
        return Err(Error::input("terminal vertex out of range"));
    }
    if !a.is_disjoint(b) {
        return Err(Error::input("terminal sets must be disjoint"));
    }
    let phi = potentials(g, a, b)?;
    let mut current = 0.0;
    for &u in a {
        for &w in g.neighbors(u) {
            if !a.contains(&w) {
                current += g.multiplicity(u, w) as f64 * (1.0 - phi[w]);
            }
        }
    }
    Ok(current)
}

pub fn effective_resistance(g: &Graph, a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> Result<f64> {
    let c = effective_conductance(g, a, b)?;
    Ok(if c > 0.0 { 1.0 / c } else { f64::INFINITY })
}

/// Harmonic extension of `1` on `a`, `0` on `b`. Vertices in components that
/// miss `b` sit at `1`, components missing both terminals are ignored.
fn potentials(g: &Graph, a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> Result<Vec<f64>> {
    let n = g.len();
    let mut phi = vec![1.0; n];
    for &v in b {
        phi[v] = 0.0;
    }
    let all: BTreeSet<usize> = (0..n).collect();
    let mut free = vec![usize::MAX; n];
    let mut unknowns = Vec::new();
    for comp in components(g, &all) {
        let m = comp.members();
        if m.is_disjoint(a) || m.is_disjoint(b) {
            continue;
        }
        for &v in m {
            if !a.contains(&v) && !b.contains(&v) {
                free[v] = unknowns.len();
                unknowns.push(v);
            }
        }
    }
    if unknowns.is_empty() {
        return Ok(phi);
    }
    // L_ff x = rhs, rhs collects the fixed neighbours at potential 1.
    let k = unknowns.len();
    let mut diag = vec![0.0; k];
    let mut rhs = vec![0.0; k];
    for (i, &v) in unknowns.iter().enumerate() {
        for &w in g.neighbors(v) {
            let c = g.multiplicity(v, w) as f64;
            diag[i] += c;
            if a.contains(&w) {
                rhs[i] += c;
            }
        }
    }
    let apply = |x: &[f64], out: &mut [f64]| {
        for (i, &v) in unknowns.iter().enumerate() {
            let mut s = diag[i] * x[i];
            for &w in g.neighbors(v) {
                if free[w] != usize::MAX {
                    s -= g.multiplicity(v, w) as f64 * x[free[w]];
                }
            }
            out[i] = s;
        }
    };
    let x = conjugate_gradient(k, &diag, &rhs, apply)?;
    for (i, &v) in unknowns.iter().enumerate() {
        phi[v] = x[i];
    }
    Ok(phi)
}

fn conjugate_gradient(
    k: usize,
    diag: &[f64],
    rhs: &[f64],
    apply: impl Fn(&[f64], &mut [f64]),
) -> Result<Vec<f64>> {
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let mut x = vec![0.0; k];
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; k];
    let mut rz = dot(&r, &z);
    let scale = dot(rhs, rhs).sqrt().max(1.0);
    for _ in 0..(10 * k + 100) {
        if dot(&r, &r).sqrt() <= 1e-13 * scale {
            return Ok(x);
        }
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..k {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..k {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..k {
            p[i] = z[i] + beta * p[i];
        }
    }
    if dot(&r, &r).sqrt() <= 1e-9 * scale {
        return Ok(x);
    }
    Err(Error::Resource("conjugate gradient did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cut_edges, samples, short_vertices, GraphBuilder};

    fn ends(g: &Graph, a: &str, b: &str) -> (BTreeSet<usize>, BTreeSet<usize>) {
        (
            BTreeSet::from([g.require(a).unwrap()]),
            BTreeSet::from([g.require(b).unwrap()]),
        )
    }

    #[test]
    fn series_law() {
        for n in 1..15 {
            let g = samples::path(n + 1);
            let (a, b) = ends(&g, "v0", &format!("v{n}"));
            let c = effective_conductance(&g, &a, &b).unwrap();
            assert!((c - 1.0 / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_paths() {
        let g = samples::cycle(4);
        let (a, b) = ends(&g, "v0", "v2");
        assert!((effective_conductance(&g, &a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multiplicity_is_parallel_resistors() {
        let mut b = GraphBuilder::new();
        b.add_edge_with_multiplicity("x", "y", 3).unwrap();
        let g = b.build().unwrap();
        let (a, b) = ends(&g, "x", "y");
        assert_eq!(effective_conductance(&g, &a, &b).unwrap(), 3.0);
    }

    #[test]
    fn separated_terminals() {
        let mut b = GraphBuilder::new();
        b.add_edge("x", "y").unwrap();
        b.add_edge("z", "w").unwrap();
        let g = b.build().unwrap();
        let (a, b) = ends(&g, "x", "w");
        assert_eq!(effective_conductance(&g, &a, &b).unwrap(), 0.0);
        assert!(effective_conductance(&g, &a, &a).is_err());
    }

    #[test]
    fn rayleigh_on_grid() {
        let g = samples::grid_box(2);
        let (a, b) = ends(&g, "z:-2:0", "z:2:0");
        let base = effective_conductance(&g, &a, &b).unwrap();
        let s = g.require_all(["z:0:1", "z:1:-1"]).unwrap();
        let shorted = short_vertices(&g, &s).unwrap();
        let (a2, b2) = ends(&shorted, "z:-2:0", "z:2:0");
        assert!(effective_conductance(&shorted, &a2, &b2).unwrap() >= base - 1e-12);
        let e = (g.require("z:0:0").unwrap(), g.require("z:1:0").unwrap());
        let cut = cut_edges(&g, &[e]).unwrap();
        assert!(effective_conductance(&cut, &a, &b).unwrap() <= base + 1e-12);
    }
}
