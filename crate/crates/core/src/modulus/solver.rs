//! Cutting-plane computation of the vertex modulus.
//!
//! The restricted problem over the chains collected so far is solved through
//! its dual, `max Σλ_p - ||m||²` with `m = ½ Σ λ_p 1_p`, by exact coordinate
//! ascent. Any `λ >= 0` gives a lower bound: the restricted problem is a
//! relaxation of the full one. Scaling `m` by the shortest chain length gives
//! an admissible mass distribution and hence the upper bound.

use std::collections::HashSet;

use serde::Serialize;

use super::chain::{ChainFamilySpec, Family, ShortestChains};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Comparisons against unit length use this slack.
pub const SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Stop once `upper - lower <= tol`.
    pub tol: f64,
    /// Cap on separation rounds.
    pub max_rounds: usize,
    /// Most chains added per round.
    pub batch: usize,
    /// Coordinate sweeps between separation calls.
    pub sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_rounds: 20_000,
            batch: 4096,
            sweeps: 50,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Self::default()
        }
    }
}

/// Non-negative vertex masses, indexed like the host graph.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassDistribution(pub Vec<f64>);

impl MassDistribution {
    pub fn zeros(n: usize) -> Self {
        MassDistribution(vec![0.0; n])
    }

    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::input("masses must be finite and non-negative"));
        }
        Ok(MassDistribution(values))
    }

    pub fn energy(&self) -> f64 {
        self.0.iter().map(|m| m * m).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        MassDistribution(self.0.iter().map(|m| m * factor).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModulusResult {
    pub value: f64,
    /// Admissible masses whose energy is `upper`.
    pub masses: MassDistribution,
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
    pub iterations: usize,
    pub constraints_used: usize,
}

impl ModulusResult {
    fn empty(n: usize) -> Self {
        ModulusResult {
            value: 0.0,
            masses: MassDistribution::zeros(n),
            upper: 0.0,
            lower: 0.0,
            gap: 0.0,
            iterations: 0,
            constraints_used: 0,
        }
    }

    /// JSON with masses keyed by vertex identifier (zero masses omitted).
    pub fn to_json(&self, g: &Graph) -> serde_json::Value {
        let masses: serde_json::Map<String, serde_json::Value> = self
            .masses
            .0
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(v, &m)| (g.name(v).to_string(), serde_json::json!(m)))
            .collect();
        serde_json::json!({
            "value": self.value,
            "upper": self.upper,
            "lower": self.lower,
            "gap": self.gap,
            "iterations": self.iterations,
            "constraints_used": self.constraints_used,
            "masses": masses,
        })
    }

    /// CSV rows `vertex,mass` for every vertex.
    pub fn to_csv(&self, g: &Graph) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["vertex", "mass"])?;
        for (v, m) in self.masses.0.iter().enumerate() {
            w.write_record([g.name(v), &format!("{m}")])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::input(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

struct Restricted {
    chains: Vec<Vec<usize>>,
    lambda: Vec<f64>,
    m: Vec<f64>,
    seen: HashSet<Vec<usize>>,
}

impl Restricted {
    fn add(&mut self, mut chain: Vec<usize>) -> bool {
        chain.sort_unstable();
        chain.dedup();
        if !self.seen.insert(chain.clone()) {
            return false;
        }
        self.chains.push(chain);
        self.lambda.push(0.0);
        true
    }

    /// One pass of exact coordinate ascent; returns the largest KKT residual seen.
    fn sweep(&mut self) -> f64 {
        let mut worst = 0.0f64;
        for (p, chain) in self.chains.iter().enumerate() {
            let len: f64 = chain.iter().map(|&v| self.m[v]).sum();
            let slack = 1.0 - len;
            let step = (2.0 * slack / chain.len() as f64).max(-self.lambda[p]);
            let resid = if self.lambda[p] > 0.0 { slack.abs() } else { slack.max(0.0) };
            worst = worst.max(resid);
            if step != 0.0 {
                self.lambda[p] += step;
                for &v in chain {
                    self.m[v] += 0.5 * step;
                }
            }
        }
        worst
    }

    fn dual(&self) -> f64 {
        self.lambda.iter().sum::<f64>() - self.m.iter().map(|x| x * x).sum::<f64>()
    }

    /// Recomputes `m` from `λ` to shed accumulated rounding.
    fn refresh(&mut self) {
        self.m.iter_mut().for_each(|x| *x = 0.0);
        for (p, chain) in self.chains.iter().enumerate() {
            for &v in chain {
                self.m[v] += 0.5 * self.lambda[p];
            }
        }
    }
}

/// Certified modulus of a chain family.
pub fn modulus(g: &Graph, spec: &ChainFamilySpec, opts: &SolverOptions) -> Result<ModulusResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::input("tolerance must be positive"));
    }
    let fam = Family::resolve(g, spec)?;
    let n = g.len();
    let mut rp = Restricted {
        chains: Vec::new(),
        lambda: Vec::new(),
        m: vec![0.0; n],
        seen: HashSet::new(),
    };
    let mut best_upper = f64::INFINITY;
    let mut best_masses = MassDistribution::zeros(n);
    let mut lower = 0.0f64;
    for round in 1..=opts.max_rounds {
        let sp = ShortestChains::run(g, &rp.m, &fam);
        let Some(&(ell, _)) = sp.hits.first() else {
            return Ok(ModulusResult::empty(n));
        };
        if ell > 0.0 {
            let energy: f64 = rp.m.iter().map(|x| x * x).sum();
            let upper = energy / (ell * ell);
            if upper < best_upper {
                best_upper = upper;
                best_masses = MassDistribution(rp.m.iter().map(|x| x / ell).collect());
            }
        }
        // Both bounds are exact at the optimum; rounding may cross them.
        lower = lower.max(rp.dual()).min(best_upper);
        if best_upper - lower <= opts.tol {
            return Ok(ModulusResult {
                value: 0.5 * (best_upper + lower),
                masses: best_masses,
                upper: best_upper,
                lower,
                gap: best_upper - lower,
                iterations: round,
                constraints_used: rp.chains.len(),
            });
        }
        let mut added = 0;
        for &(len, t) in &sp.hits {
            if added >= opts.batch || len >= 1.0 - SLACK {
                break;
            }
            let (chain, _) = sp.chain_to(t);
            if rp.add(chain.0) {
                added += 1;
            }
        }
        let target = (best_upper - lower).min(1.0) * 1e-3;
        for s in 0..opts.sweeps.max(1) {
            let resid = rp.sweep();
            if resid <= target.max(1e-15) && s > 0 {
                break;
            }
        }
        if round % 64 == 0 {
            rp.refresh();
        }
    }
    Err(Error::NotConverged {
        lower,
        upper: best_upper,
        iterations: opts.max_rounds,
    })
}
