//! Truncated escape moduli of the valence-3 tree.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::builders::{build_t3_ball, EmbeddedTree};
use crate::error::{Error, Result};
use crate::modulus::{modulus, ChainFamilySpec, SolverOptions};
use crate::par::Exec;

/// Largest ball radius the estimator will build (about `3 * 2^r` vertices).
pub const MAX_BALL_RADIUS: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRow {
    pub k: usize,
    pub radii: Vec<usize>,
    /// Certified upper bounds, one per radius.
    pub upper: Vec<f64>,
    /// Last upper bound.
    pub estimate: f64,
    /// Whether the last two values differ by less than the tolerance.
    pub plateau: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonTable {
    pub rows: Vec<EpsilonRow>,
    pub tol: f64,
}

impl EpsilonTable {
    /// `ε̂_k`.
    pub fn estimate(&self, k: usize) -> Option<f64> {
        self.rows.get(k).map(|r| r.estimate)
    }

    /// Largest tabulated index.
    pub fn kmax(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["k", "radius", "upper"])?;
        for row in &self.rows {
            for (r, u) in row.radii.iter().zip(&row.upper) {
                w.write_record([row.k.to_string(), r.to_string(), format!("{u}")])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::input(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// The family at index `k` on a ball: all escapes for `k = 0`, escapes
/// through `v_k` or `v_{-k}` otherwise.
pub fn escape_family(ball: &EmbeddedTree, k: usize) -> Result<ChainFamilySpec> {
    let a = BTreeSet::from([ball.base]);
    if k == 0 {
        return Ok(ChainFamilySpec::ToFrontier { a });
    }
    let gate = |j: i64| {
        ball.spine
            .get(&j)
            .copied()
            .ok_or_else(|| Error::input(format!("ball does not reach spine vertex {j}")))
    };
    Ok(ChainFamilySpec::EscapeThrough {
        a,
        gates: BTreeSet::from([gate(k as i64)?, gate(-(k as i64))?]),
    })
}

/// Upper bounds for `ε_0 ..= ε_{kmax + 1}`. Row `k` uses the scheduled radii
/// larger than `k`. Non-monotone sequences are reported as invariant breaches.
pub fn estimate_epsilon(kmax: usize, radii: &[usize], tol: f64, exec: Exec) -> Result<EpsilonTable> {
    if kmax < 1 {
        return Err(Error::input("kmax must be at least 1"));
    }
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("radius schedule must be nonempty and strictly increasing"));
    }
    let top = kmax + 1;
    if *radii.last().unwrap() <= top {
        return Err(Error::input(format!("radius schedule must reach beyond {top}")));
    }
    if let Some(&r) = radii.iter().find(|&&r| r > MAX_BALL_RADIUS) {
        return Err(Error::Resource(format!("ball radius {r} exceeds the cap of {MAX_BALL_RADIUS}")));
    }
    let balls = exec.try_map(radii, |&r| build_t3_ball(r))?;
    let jobs: Vec<(usize, usize)> = (0..=top)
        .flat_map(|k| (0..radii.len()).filter(move |&i| radii[i] > k).map(move |i| (k, i)))
        .collect();
    let opts = SolverOptions::with_tol(tol);
    let values = exec.try_map(&jobs, |&(k, i)| -> Result<f64> {
        let spec = escape_family(&balls[i], k)?;
        Ok(modulus(&balls[i].graph, &spec, &opts)?.upper)
    })?;

    let mut rows: Vec<EpsilonRow> = (0..=top)
        .map(|k| EpsilonRow {
            k,
            radii: Vec::new(),
            upper: Vec::new(),
            estimate: f64::NAN,
            plateau: false,
        })
        .collect();
    for (&(k, i), &v) in jobs.iter().zip(&values) {
        rows[k].radii.push(radii[i]);
        rows[k].upper.push(v);
    }
    let slack = 2.0 * tol;
    for row in &mut rows {
        if let Some(w) = row.upper.windows(2).position(|w| w[1] > w[0] + slack) {
            return Err(Error::Invariant(format!(
                "escape modulus for k = {} grew from radius {} to {}",
                row.k,
                row.radii[w],
                row.radii[w + 1]
            )));
        }
        row.estimate = *row.upper.last().expect("every row has a radius");
        let n = row.upper.len();
        row.plateau = n >= 2 && (row.upper[n - 2] - row.upper[n - 1]).abs() < tol;
    }
    for k in 1..=top {
        // Row k's radii are a suffix of row k-1's.
        let prev = &rows[k - 1];
        let off = prev.radii.len() - rows[k].radii.len();
        for (j, &v) in rows[k].upper.iter().enumerate() {
            if v > prev.upper[off + j] + slack {
                return Err(Error::Invariant(format!(
                    "escape modulus increased from k = {} to k = {k} at radius {}",
                    k - 1,
                    rows[k].radii[j]
                )));
            }
        }
        if !(rows[k].estimate > 0.0) {
            return Err(Error::Invariant(format!("escape modulus for k = {k} is not positive")));
        }
    }
    Ok(EpsilonTable { rows, tol })
}
