//! Annulus moduli, the serial rule and admissibility checks.

use std::collections::BTreeSet;

use super::chain::{shortest_weighted_chain, ChainFamilySpec};
use super::solver::{modulus, MassDistribution, ModulusResult, SolverOptions};
use crate::error::{Error, Result};
use crate::graph::{induced_subgraph, is_annulus, Annulus, Graph};

/// `1 / Σ 1/mod A_k`; zero if any modulus is zero.
pub fn serial_annuli_bound(moduli: &[f64]) -> Result<f64> {
    if moduli.is_empty() {
        return Err(Error::input("need at least one annulus modulus"));
    }
    if moduli.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
        return Err(Error::input("annulus moduli must be finite and non-negative"));
    }
    if moduli.iter().any(|&m| m == 0.0) {
        return Ok(0.0);
    }
    Ok(1.0 / moduli.iter().map(|m| 1.0 / m).sum::<f64>())
}

/// Minimum weighted length over the family (`+∞` for an empty family).
/// The masses are admissible iff this is at least one.
pub fn verify_admissible(g: &Graph, m: &MassDistribution, spec: &ChainFamilySpec) -> Result<f64> {
    Ok(shortest_weighted_chain(g, &m.0, spec)?.map_or(f64::INFINITY, |(_, len)| len))
}

/// An annulus with the domain roles fixed: `inner` holds the chosen start.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnulusSpec {
    pub annulus: Annulus,
    pub inner: usize,
}

impl AnnulusSpec {
    /// Checks that `vertices` is an annulus and that `inside` lies in one of
    /// its complementary domains.
    pub fn new(g: &Graph, vertices: BTreeSet<usize>, inside: usize) -> Result<AnnulusSpec> {
        let annulus = is_annulus(g, &vertices)
            .ok_or_else(|| Error::Construction("vertex set is not an annulus".into()))?;
        let inner = annulus
            .domain_of(inside)
            .ok_or_else(|| Error::Construction("reference vertex is not in a complementary domain".into()))?;
        Ok(AnnulusSpec { annulus, inner })
    }

    pub fn vertices(&self) -> &BTreeSet<usize> {
        &self.annulus.vertices
    }

    /// Annulus vertices adjacent to domain `d`.
    pub fn rim(&self, g: &Graph, d: usize) -> BTreeSet<usize> {
        let dom = &self.annulus.domains[d];
        self.annulus
            .vertices
            .iter()
            .copied()
            .filter(|&v| g.neighbors(v).iter().any(|&w| dom.contains(w)))
            .collect()
    }

    /// Chains inside the annulus running from the inner rim to the outer rim,
    /// as a family on the host graph (masses outside the annulus are irrelevant
    /// to it only after restriction, so callers use [`annulus_modulus`]).
    pub fn crossing(&self, g: &Graph) -> (BTreeSet<usize>, BTreeSet<usize>) {
        (self.rim(g, self.inner), self.rim(g, 1 - self.inner))
    }
}

/// Modulus of the chains crossing the annulus, with masses carried by the
/// annulus itself. Returned masses are indexed by the host graph.
pub fn annulus_modulus(g: &Graph, a: &AnnulusSpec, opts: &SolverOptions) -> Result<ModulusResult> {
    let sub = induced_subgraph(g, a.vertices());
    let (inner, outer) = a.crossing(g);
    let to_sub = |s: &BTreeSet<usize>| -> BTreeSet<usize> {
        s.iter().map(|&v| sub.id(g.name(v)).expect("annulus vertex")).collect()
    };
    let spec = ChainFamilySpec::Connect {
        a: to_sub(&inner),
        b: to_sub(&outer),
    };
    let r = modulus(&sub, &spec, opts)?;
    let mut host = vec![0.0; g.len()];
    for (i, &m) in r.masses.0.iter().enumerate() {
        host[g.id(sub.name(i)).expect("subgraph vertex")] = m;
    }
    Ok(ModulusResult {
        masses: MassDistribution(host),
        ..r
    })
}
