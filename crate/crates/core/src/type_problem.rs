//! Recurrence/transience evidence from finite exhaustions: modulus decay,
//! resistance growth, random-walk returns and the shorting/cutting laws.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ball, cut_edges, distances_from, induced_subgraph, short_vertices, Graph, GraphBuilder, FRONTIER};
use crate::modulus::{effective_conductance, effective_resistance, modulus, ChainFamilySpec, SolverOptions};
use crate::par::Exec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionProfile {
    pub radii: Vec<usize>,
    pub modulus_upper: Vec<f64>,
    pub resistance: Vec<f64>,
    pub counts: Vec<usize>,
}

impl ExhaustionProfile {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["radius", "modulus_upper", "resistance", "vertices"])?;
        for i in 0..self.radii.len() {
            w.write_record([
                self.radii[i].to_string(),
                format!("{}", self.modulus_upper[i]),
                format!("{}", self.resistance[i]),
                self.counts[i].to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::input(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Ball of radius `radius` around `center`, with its outer sphere tagged
/// `frontier` (earlier frontier tags are dropped).
pub fn ball_truncation(g: &Graph, center: usize, radius: usize) -> Result<Graph> {
    let dist = distances_from(g, &BTreeSet::from([center]))?;
    let keep = ball(g, &BTreeSet::from([center]), radius);
    let sub = induced_subgraph(g, &keep);
    let mut b = GraphBuilder::new();
    for v in 0..sub.len() {
        let name = sub.name(v);
        b.add_vertex(name);
        for t in sub.tags(v).iter().filter(|t| *t != FRONTIER) {
            b.tag(name, t);
        }
        if dist.get(&g.id(name).expect("subgraph vertex")) == Some(&radius) {
            b.tag(name, FRONTIER);
        }
    }
    for (u, v) in sub.edges() {
        b.add_edge_with_multiplicity(sub.name(u), sub.name(v), sub.multiplicity(u, v))?;
    }
    b.build()
}

/// Per-radius modulus and resistance from `v0` to the frontier of each
/// truncation. Fails with an invariant error if either sequence moves the
/// wrong way beyond the solver tolerance.
pub fn exhaustion_profile(
    builder: &(dyn Fn(usize) -> Result<Graph> + Sync),
    v0: &str,
    radii: &[usize],
    tol: f64,
    exec: Exec,
) -> Result<ExhaustionProfile> {
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("radii must be nonempty and strictly increasing"));
    }
    let rows = exec.try_map(radii, |&r| -> Result<(f64, f64, usize)> {
        let g = builder(r)?;
        let s = g.require(v0)?;
        let front = g.frontier();
        if front.is_empty() || front.contains(&s) {
            return Err(Error::input(format!("truncation at radius {r} has no frontier apart from v0")));
        }
        let m = modulus(&g, &ChainFamilySpec::ToFrontier { a: BTreeSet::from([s]) }, &SolverOptions::with_tol(tol))?;
        let res = effective_resistance(&g, &BTreeSet::from([s]), &front)?;
        Ok((m.upper, res, g.len()))
    })?;
    let profile = ExhaustionProfile {
        radii: radii.to_vec(),
        modulus_upper: rows.iter().map(|r| r.0).collect(),
        resistance: rows.iter().map(|r| r.1).collect(),
        counts: rows.iter().map(|r| r.2).collect(),
    };
    for i in 1..radii.len() {
        if profile.modulus_upper[i] > profile.modulus_upper[i - 1] + 2.0 * tol {
            return Err(Error::Invariant(format!(
                "modulus increased from radius {} to {}",
                radii[i - 1],
                radii[i]
            )));
        }
        let (r0, r1) = (profile.resistance[i - 1], profile.resistance[i]);
        if r1 < r0 - 1e-9 * r0.abs().max(1.0) {
            return Err(Error::Invariant(format!(
                "resistance decreased from radius {} to {}",
                radii[i - 1],
                radii[i]
            )));
        }
    }
    Ok(profile)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypePolicy {
    /// Every resistance step over the last half of the radii must exceed this.
    pub min_increment: f64,
    /// Final modulus over initial modulus must fall below this ratio.
    pub eps: f64,
    /// Relative resistance growth over the last half counted as a plateau.
    pub plateau_tol: f64,
}

impl Default for TypePolicy {
    fn default() -> Self {
        TypePolicy {
            min_increment: 5e-3,
            eps: 0.85,
            plateau_tol: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ParabolicEvidence,
    HyperbolicEvidence,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeVerdict {
    pub verdict: Verdict,
    pub policy: TypePolicy,
    pub min_tail_increment: f64,
    pub modulus_ratio: f64,
    pub tail_growth: f64,
}

pub fn classify_type(profile: &ExhaustionProfile, policy: &TypePolicy) -> Result<TypeVerdict> {
    let n = profile.radii.len();
    if n < 4 {
        return Err(Error::input("classification needs at least four radii"));
    }
    let half = n / 2;
    let res = &profile.resistance;
    let min_tail_increment = (half.max(1)..n)
        .map(|i| res[i] - res[i - 1])
        .fold(f64::INFINITY, f64::min);
    let modulus_ratio = profile.modulus_upper[n - 1] / profile.modulus_upper[0];
    let tail_growth = (res[n - 1] - res[half - 1]) / res[n - 1];
    let verdict = if min_tail_increment > policy.min_increment && modulus_ratio < policy.eps {
        Verdict::ParabolicEvidence
    } else if tail_growth <= policy.plateau_tol {
        Verdict::HyperbolicEvidence
    } else {
        Verdict::Inconclusive
    };
    Ok(TypeVerdict {
        verdict,
        policy: policy.clone(),
        min_tail_increment,
        modulus_ratio,
        tail_growth,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnEstimate {
    pub trials: usize,
    pub returns: usize,
    pub frequency: f64,
    /// 95% Wilson interval.
    pub lower: f64,
    pub upper: f64,
}

/// Fraction of walks from `v0` that come back to `v0` within `steps` steps
/// without touching the frontier. Trial `i` draws from its own ChaCha stream,
/// so the result does not depend on how trials are scheduled.
pub fn random_walk_returns(g: &Graph, v0: usize, steps: usize, trials: usize, seed: u64, exec: Exec) -> Result<ReturnEstimate> {
    if steps == 0 || trials == 0 {
        return Err(Error::input("steps and trials must be positive"));
    }
    if v0 >= g.len() {
        return Err(Error::input("start vertex out of range"));
    }
    let stopped = |v: usize| g.has_tag(v, FRONTIER);
    let hits = exec.map_range(trials, |i| {
        if stopped(v0) || g.degree(v0) == 0 {
            return false;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut v = v0;
        for _ in 0..steps {
            let nb = g.neighbors(v);
            v = nb[rng.gen_range(0..nb.len())];
            if v == v0 {
                return true;
            }
            if stopped(v) {
                return false;
            }
        }
        false
    });
    let returns = hits.iter().filter(|&&h| h).count();
    let p = returns as f64 / trials as f64;
    let z = 1.96f64;
    let nt = trials as f64;
    let denom = 1.0 + z * z / nt;
    let centre = (p + z * z / (2.0 * nt)) / denom;
    let half = z * (p * (1.0 - p) / nt + z * z / (4.0 * nt * nt)).sqrt() / denom;
    Ok(ReturnEstimate {
        trials,
        returns,
        frequency: p,
        lower: (centre - half).max(0.0),
        upper: (centre + half).min(1.0),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Surgery {
    /// Identify these vertices.
    Short(BTreeSet<usize>),
    /// Delete these edges.
    Cut(Vec<(usize, usize)>),
}

/// Conductance between `a` and `b` before and after the surgery.
pub fn surgery_conductances(g: &Graph, a: &BTreeSet<usize>, b: &BTreeSet<usize>, surgery: &Surgery) -> Result<(f64, f64)> {
    let before = effective_conductance(g, a, b)?;
    let after = match surgery {
        Surgery::Cut(edges) => effective_conductance(&cut_edges(g, edges)?, a, b)?,
        Surgery::Short(s) => {
            if !s.is_disjoint(a) && !s.is_disjoint(b) {
                return Err(Error::Precondition("shorting would join the two terminals".into()));
            }
            let h = short_vertices(g, s)?;
            let merged = *s.iter().next().ok_or_else(|| Error::input("empty shorting set"))?;
            let relocate = |t: &BTreeSet<usize>| -> Result<BTreeSet<usize>> {
                t.iter()
                    .map(|&v| h.require(g.name(if s.contains(&v) { merged } else { v })))
                    .collect()
            };
            effective_conductance(&h, &relocate(a)?, &relocate(b)?)?
        }
    };
    Ok((before, after))
}

/// Whether the conductance moves the way the shorting or cutting law says.
pub fn surgery_monotonicity_check(g: &Graph, a: &BTreeSet<usize>, b: &BTreeSet<usize>, surgery: &Surgery) -> Result<bool> {
    let (before, after) = surgery_conductances(g, a, b, surgery)?;
    Ok(match surgery {
        Surgery::Short(_) => after >= before - 1e-9,
        Surgery::Cut(_) => after <= before + 1e-9,
    })
}
