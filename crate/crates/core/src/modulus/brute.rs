//! Exhaustive oracle: every simple chain of the family, reduced to the
//! inclusion-minimal vertex sets, then the full quadratic program.

use super::chain::{ChainFamilySpec, Family};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Debug, PartialEq)]
pub struct BruteLimits {
    pub max_vertices: usize,
    pub max_chains: usize,
    /// Target duality gap.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for BruteLimits {
    fn default() -> Self {
        BruteLimits {
            max_vertices: 12,
            max_chains: 2_000_000,
            tol: 1e-10,
            max_iterations: 2_000_000,
        }
    }
}

/// Vertex sets of the minimal chains, as bitmasks.
pub fn minimal_chain_sets(g: &Graph, spec: &ChainFamilySpec, limits: &BruteLimits) -> Result<Vec<u64>> {
    if g.len() > limits.max_vertices.min(64) {
        return Err(Error::input(format!(
            "brute force is limited to {} vertices, graph has {}",
            limits.max_vertices.min(64),
            g.len()
        )));
    }
    let fam = Family::resolve(g, spec)?;
    let mut found = Vec::new();
    for &s in &fam.sources {
        dfs(g, &fam, s, 1u64 << s, &mut found, limits.max_chains)?;
    }
    found.sort_by_key(|m: &u64| (m.count_ones(), *m));
    found.dedup();
    let mut minimal: Vec<u64> = Vec::new();
    for m in found {
        if !minimal.iter().any(|&k| k & m == k) {
            minimal.push(m);
        }
    }
    Ok(minimal)
}

// Extending past a target only produces supersets of a chain already found.
fn dfs(g: &Graph, fam: &Family, v: usize, used: u64, out: &mut Vec<u64>, cap: usize) -> Result<()> {
    if fam.target[v] {
        out.push(used);
        if out.len() > cap {
            return Err(Error::Resource(format!("more than {cap} chains to enumerate")));
        }
        return Ok(());
    }
    for &w in g.neighbors(v) {
        if used >> w & 1 == 0 {
            dfs(g, fam, w, used | 1u64 << w, out, cap)?;
        }
    }
    Ok(())
}

/// Modulus from the full constraint set, by accelerated projected gradient
/// on the dual `max Σλ - ||½Aᵀλ||²`, `λ >= 0`.
pub fn brute_force_modulus(g: &Graph, spec: &ChainFamilySpec) -> Result<f64> {
    brute_force_modulus_with(g, spec, &BruteLimits::default())
}

pub fn brute_force_modulus_with(g: &Graph, spec: &ChainFamilySpec, limits: &BruteLimits) -> Result<f64> {
    let sets = minimal_chain_sets(g, spec, limits)?;
    let (lo, hi) = solve_dual(g.len(), &sets, limits)?;
    Ok(0.5 * (lo + hi))
}

/// Returns the final `(lower, upper)` bracket.
pub(crate) fn solve_dual(n: usize, sets: &[u64], limits: &BruteLimits) -> Result<(f64, f64)> {
    if sets.is_empty() {
        return Ok((0.0, 0.0));
    }
    let rows: Vec<Vec<usize>> = sets
        .iter()
        .map(|&s| (0..n).filter(|&v| s >> v & 1 == 1).collect())
        .collect();
    let p = rows.len();
    let lip = 0.5
        * sets
            .iter()
            .map(|&a| sets.iter().map(|&b| (a & b).count_ones() as f64).sum::<f64>())
            .fold(0.0, f64::max);
    let step = 1.0 / lip;
    let primal = |lam: &[f64]| {
        let mut m = vec![0.0; n];
        for (r, &l) in rows.iter().zip(lam) {
            for &v in r {
                m[v] += 0.5 * l;
            }
        }
        m
    };
    let bracket = |lam: &[f64]| {
        let m = primal(lam);
        let energy: f64 = m.iter().map(|x| x * x).sum();
        let dual = lam.iter().sum::<f64>() - energy;
        let ell = rows
            .iter()
            .map(|r| r.iter().map(|&v| m[v]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let upper = if ell > 0.0 { energy / (ell * ell) } else { f64::INFINITY };
        (dual, upper)
    };

    let mut lam = vec![0.0; p];
    let mut y = lam.clone();
    let mut t = 1.0f64;
    let mut best = (0.0f64, f64::INFINITY);
    let mut prev_obj = f64::NEG_INFINITY;
    for _ in 0..limits.max_iterations {
        let m = primal(&y);
        let mut next = vec![0.0; p];
        for (q, r) in rows.iter().enumerate() {
            let grad = 1.0 - r.iter().map(|&v| m[v]).sum::<f64>();
            next[q] = (y[q] + step * grad).max(0.0);
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let (dual, upper) = bracket(&next);
        best = (best.0.max(dual), best.1.min(upper));
        if best.1 - best.0 <= limits.tol {
            return Ok(best);
        }
        // Restart the momentum when the objective drops.
        if dual < prev_obj {
            t = 1.0;
            y = lam.clone();
            prev_obj = f64::NEG_INFINITY;
            continue;
        }
        prev_obj = dual;
        let beta = (t - 1.0) / t_next;
        for q in 0..p {
            y[q] = next[q] + beta * (next[q] - lam[q]);
        }
        lam = next;
        t = t_next;
    }
    Err(Error::NotConverged {
        lower: best.0,
        upper: best.1,
        iterations: limits.max_iterations,
    })
}
