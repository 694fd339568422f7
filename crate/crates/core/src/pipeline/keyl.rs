//! Checks on the growth-controlled subtree and its square skeleton: shell
//! counts, contour positions, the nested annuli with their mass
//! distributions, and the size/modulus implication on sampled domains.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::epsilon::EpsilonTable;
use super::lfunc::{check_epa, EpaReport, LFunction};
use crate::builders::{build_keyl_tree, build_sigma, t3::address, EmbeddedTree, SigmaGraph};
use crate::error::{Error, Result};
use crate::graph::{ball, boundary, components, induced_subgraph, Graph};
use crate::modulus::{
    annulus_modulus, modulus, serial_annuli_bound, shortest_weighted_chain, AnnulusSpec, ChainFamilySpec,
    MassDistribution, SolverOptions,
};
use crate::par::Exec;

/// Largest skeleton the pipeline will build.
pub const MAX_SIGMA_VERTICES: usize = 2_000_000;

#[derive(Clone, Debug)]
pub struct KeylSetup {
    pub tree: EmbeddedTree,
    pub sigma: SigmaGraph,
    pub kmax: usize,
}

/// `(a_k, b_k)` from the closed forms, with `floors[j - 1] = ⌊L(ε_j)⌋`.
pub fn ak_bk_closed(floors: &[u32], k: usize) -> Result<(i64, i64)> {
    if k < 1 || floors.len() < k + 1 {
        return Err(Error::Precondition(format!("closed form for k = {k} needs {} floors", k + 1)));
    }
    let p = |j: usize| 1i64 << floors[j - 1];
    let inner: i64 = (2..=k).map(p).sum();
    let a = p(1) + 2 * inner - k as i64 + 1;
    let b = p(1) + 2 * (inner + p(k + 1)) - k as i64 - 1;
    Ok((a, b))
}

/// Builds the tree and its skeleton. The default depth puts the bottom row
/// of the lower strip beyond every annulus band.
pub fn keyl_setup(floors: &[u32], kmax: usize, depth: Option<usize>) -> Result<KeylSetup> {
    if kmax < 1 {
        return Err(Error::input("kmax must be at least 1"));
    }
    let tree = build_keyl_tree(floors, kmax)?;
    let last = kmax.saturating_sub(1).max(1);
    let (_, b) = ak_bk_closed(&tree.floors, last.min(kmax))?;
    let depth = depth.unwrap_or(b.max(kmax as i64) as usize + 1);
    // Rough size: upper strip plus lower strip, each `columns * depth`.
    let (_, btop) = ak_bk_closed(&tree.floors, kmax)?;
    let estimate = (2 * kmax + 1 + 2 * btop as usize + 8) * depth + tree.graph.len();
    if estimate > MAX_SIGMA_VERTICES {
        return Err(Error::Resource(format!("skeleton would have about {estimate} vertices")));
    }
    let sigma = build_sigma(&tree, depth)?;
    Ok(KeylSetup { tree, sigma, kmax })
}

/// Number of vertices of `B_k` on the positive side of the axis.
pub fn shell_side_size(s: &KeylSetup, k: usize) -> Result<usize> {
    let shell = s
        .tree
        .bsets
        .get(&k)
        .ok_or_else(|| Error::input(format!("no shell {k}")))?;
    let mut n = 0;
    for &v in shell {
        if address(&s.tree, v)?.spine == k as i64 {
            n += 1;
        }
    }
    Ok(n)
}

/// Columns `m > 0` of the first lower row adjacent to a vertex of the
/// positive half of `B_l`.
fn lower_columns_touching(s: &KeylSetup, l: usize) -> Result<Vec<i64>> {
    let g = &s.sigma.graph;
    let targets: BTreeSet<usize> = s.tree.bsets[&l]
        .iter()
        .filter(|&&t| address(&s.tree, t).map(|a| a.spine == l as i64).unwrap_or(false))
        .map(|&t| s.sigma.tree_vertex(t))
        .collect();
    let mut cols = Vec::new();
    for m in 1.. {
        let Some(v) = s.sigma.at(m, -1) else { break };
        if g.neighbors(v).iter().any(|w| targets.contains(w)) {
            cols.push(m);
        }
    }
    Ok(cols)
}

pub fn vminus_adjacent_count(s: &KeylSetup, l: usize) -> Result<usize> {
    Ok(lower_columns_touching(s, l)?.len())
}

/// First and last lower-row columns adjacent to `v_k`.
pub fn ak_bk_contour(s: &KeylSetup, k: usize) -> Result<(i64, i64)> {
    let vk = s.sigma.tree_vertex(
        *s.tree
            .spine
            .get(&(k as i64))
            .ok_or_else(|| Error::input(format!("no spine vertex {k}")))?,
    );
    let g = &s.sigma.graph;
    let hits: Vec<i64> = (1..)
        .map_while(|m| s.sigma.at(m, -1).map(|v| (m, v)))
        .filter(|&(_, v)| g.has_edge(v, vk))
        .map(|(m, _)| m)
        .collect();
    match (hits.first(), hits.last()) {
        (Some(&a), Some(&b)) => Ok((a, b)),
        _ => Err(Error::Construction(format!("v_{k} has no lower neighbours"))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AkBk {
    pub k: usize,
    pub closed: (i64, i64),
    pub contour: (i64, i64),
    pub equal: bool,
}

pub fn ak_bk(s: &KeylSetup, k: usize) -> Result<AkBk> {
    let closed = ak_bk_closed(&s.tree.floors, k)?;
    let contour = ak_bk_contour(s, k)?;
    if closed != contour {
        return Err(Error::Construction(format!(
            "k = {k}: closed form {closed:?} differs from contour {contour:?}"
        )));
    }
    Ok(AkBk {
        k,
        closed,
        contour,
        equal: true,
    })
}

/// The annulus `A_k` with its mass distribution: 1 on the upper ring,
/// `2^{1-l}` on shell vertices at depth `l`, and `2^{1-f}` on the lower band,
/// where `f` is the shell depth.
pub fn build_ak_with_masses(s: &KeylSetup, k: usize) -> Result<(AnnulusSpec, MassDistribution)> {
    if k < 1 || k > s.kmax {
        return Err(Error::Precondition(format!("annulus index {k} outside 1..={}", s.kmax)));
    }
    let (a, b) = ak_bk_closed(&s.tree.floors, k)?;
    if s.sigma.depth < k || s.sigma.at(b, -1).is_none() {
        return Err(Error::Precondition(format!("skeleton too small for annulus {k}")));
    }
    let f = s.tree.floors[k];
    let g = &s.sigma.graph;
    let mut masses = vec![0.0; g.len()];
    let mut set = BTreeSet::new();
    for v in 0..g.len() {
        if let Some((m, n)) = s.sigma.coords(v) {
            let r = m.abs().max(n.abs());
            if n > 0 && r == k as i64 {
                set.insert(v);
                masses[v] = 1.0;
            } else if n < 0 && (a..=b).contains(&r) {
                set.insert(v);
                masses[v] = 2f64.powi(1 - f as i32);
            }
        }
    }
    for &t in &s.tree.bsets[&k] {
        let v = s.sigma.tree_vertex(t);
        let depth = address(&s.tree, t)?.depth() as i32;
        set.insert(v);
        masses[v] = 2f64.powi(1 - depth);
    }
    let base = s.sigma.tree_vertex(s.tree.base);
    let spec = AnnulusSpec::new(g, set, base)?;
    Ok((spec, MassDistribution(masses)))
}

/// Shortest crossing of the annulus by chains inside `within`.
fn crossing_length(g: &Graph, ann: &AnnulusSpec, masses: &MassDistribution, within: &BTreeSet<usize>) -> Result<f64> {
    let (inner, outer) = ann.crossing(g);
    let sub = induced_subgraph(g, within);
    let to_sub = |s: &BTreeSet<usize>| -> BTreeSet<usize> {
        s.iter().filter(|v| within.contains(v)).filter_map(|&v| sub.id(g.name(v))).collect()
    };
    let (a, b) = (to_sub(&inner), to_sub(&outer));
    if a.is_empty() || b.is_empty() {
        return Ok(f64::INFINITY);
    }
    let m: Vec<f64> = (0..sub.len())
        .map(|i| masses.0[g.id(sub.name(i)).expect("subgraph vertex")])
        .collect();
    let spec = ChainFamilySpec::Connect { a, b };
    Ok(shortest_weighted_chain(&sub, &m, &spec)?.map_or(f64::INFINITY, |(_, len)| len))
}

/// Shortest crossing using only lower-band vertices.
pub fn vminus_crossing_length(s: &KeylSetup, ann: &AnnulusSpec, masses: &MassDistribution) -> Result<f64> {
    let lower: BTreeSet<usize> = ann
        .vertices()
        .iter()
        .copied()
        .filter(|&v| s.sigma.coords(v).is_some_and(|(_, n)| n < 0))
        .collect();
    crossing_length(&s.sigma.graph, ann, masses, &lower)
}

/// Shortest crossing over all chains in the annulus.
pub fn full_crossing_length(s: &KeylSetup, ann: &AnnulusSpec, masses: &MassDistribution) -> Result<f64> {
    crossing_length(&s.sigma.graph, ann, masses, ann.vertices())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeylOptions {
    pub tol: f64,
    pub exhaustive_max: usize,
    pub samples: usize,
    pub seed: u64,
    /// Gap allowed in the serial-rule solves. Only certified bounds enter
    /// the comparison, so a loose value keeps the check sound.
    pub serial_tol: f64,
    /// Skip the annulus moduli and the skeleton modulus.
    pub serial: bool,
}

impl Default for KeylOptions {
    fn default() -> Self {
        KeylOptions {
            tol: 1e-8,
            exhaustive_max: 12,
            samples: 200,
            seed: 0,
            serial_tol: 1e-2,
            serial: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeylRecord {
    pub k: usize,
    pub eps_hat: f64,
    /// Shell depth `⌊L(ε̂_{k+1})⌋`.
    pub floor_l: u32,
    pub bk_side: usize,
    pub vminus_adjacent: usize,
    pub ak_closed: i64,
    pub ak_contour: i64,
    pub bk_closed: i64,
    pub bk_contour: i64,
    /// Shortest crossing under the annulus masses (admissible iff >= 1).
    pub adm_margin: Option<f64>,
    pub vminus_margin: Option<f64>,
    pub vminus_bound: Option<f64>,
    /// Factor that makes the masses admissible.
    pub rescale: Option<f64>,
    /// Energy of the annulus masses.
    pub total_mass: Option<f64>,
    /// Certified lower bound on the annulus modulus.
    pub annulus_modulus: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub alpha: f64,
    pub beta: f64,
    pub max_rel_residual: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len() as f64;
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::input("a line fit needs at least two points"));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let alpha = sxy / sxx;
    let beta = my - alpha * mx;
    let max_rel_residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| ((y - alpha * x - beta) / y).abs())
        .fold(0.0, f64::max);
    Ok(LinearFit {
        alpha,
        beta,
        max_rel_residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SerialCheck {
    /// Certified lower bounds on the annulus moduli.
    pub annulus_moduli: Vec<f64>,
    pub bound: f64,
    /// Certified upper bound on the escape modulus of the skeleton.
    pub sigma_modulus: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmeRow {
    pub kind: String,
    pub size: usize,
    pub modulus: f64,
    /// Tabulated `ε̂_k` with `modulus < ε̂_k`.
    pub below: Vec<usize>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmeSummary {
    pub exhaustive: usize,
    pub sampled: usize,
    pub violations: usize,
    /// Smallest modulus seen per domain size.
    pub min_modulus_by_size: BTreeMap<usize, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyLReport {
    pub kmax: usize,
    pub floors: Vec<u32>,
    pub depth: usize,
    pub seed: u64,
    pub records: Vec<KeylRecord>,
    pub epa: EpaReport,
    pub mass_fit: Option<LinearFit>,
    /// `max / min - 1` over the rescaling factors.
    pub rescale_spread: Option<f64>,
    pub serial: Option<SerialCheck>,
    pub eme: EmeSummary,
    pub eme_samples: Vec<EmeRow>,
}

impl KeyLReport {
    pub fn to_csv(&self) -> Result<String> {
        let opt = |x: Option<f64>| x.map(|v| format!("{v}")).unwrap_or_default();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "k",
            "eps_hat",
            "floorL",
            "Bk",
            "ak_closed",
            "ak_contour",
            "bk_closed",
            "bk_contour",
            "adm_margin",
            "total_mass",
        ])?;
        for r in &self.records {
            w.write_record([
                r.k.to_string(),
                format!("{}", r.eps_hat),
                r.floor_l.to_string(),
                r.bk_side.to_string(),
                r.ak_closed.to_string(),
                r.ak_contour.to_string(),
                r.bk_closed.to_string(),
                r.bk_contour.to_string(),
                opt(r.adm_margin),
                opt(r.total_mass),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::input(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Every connected vertex set containing `root` with at most `max` vertices,
/// never using vertices rejected by `allowed`.
pub fn connected_sets_containing(
    g: &Graph,
    root: usize,
    max: usize,
    allowed: &dyn Fn(usize) -> bool,
) -> Vec<Vec<usize>> {
    fn grow(
        g: &Graph,
        set: &mut Vec<usize>,
        ext: Vec<usize>,
        seen: &BTreeSet<usize>,
        max: usize,
        allowed: &dyn Fn(usize) -> bool,
        out: &mut Vec<Vec<usize>>,
    ) {
        out.push(set.clone());
        if set.len() == max {
            return;
        }
        let mut ext = ext;
        while let Some(w) = ext.pop() {
            let mut next_ext = ext.clone();
            let mut next_seen = seen.clone();
            for &u in g.neighbors(w) {
                if next_seen.insert(u) && allowed(u) {
                    next_ext.push(u);
                }
            }
            set.push(w);
            grow(g, set, next_ext, &next_seen, max, allowed, out);
            set.pop();
        }
    }
    let mut out = Vec::new();
    if max == 0 || !allowed(root) {
        return out;
    }
    let mut seen = BTreeSet::from([root]);
    let mut ext = Vec::new();
    for &u in g.neighbors(root) {
        if seen.insert(u) && allowed(u) {
            ext.push(u);
        }
    }
    grow(g, &mut vec![root], ext, &seen, max, allowed, &mut out);
    out
}

/// `mod_T({root}, ∂D)`, computed on `D ∪ ∂D`.
pub fn domain_modulus(g: &Graph, root: usize, domain: &BTreeSet<usize>, tol: f64) -> Result<f64> {
    let rim = boundary(g, domain);
    if rim.is_empty() {
        return Ok(0.0);
    }
    let keep: BTreeSet<usize> = domain.union(&rim).copied().collect();
    let sub = induced_subgraph(g, &keep);
    let id = |v: usize| sub.id(g.name(v)).expect("kept vertex");
    let spec = ChainFamilySpec::Connect {
        a: BTreeSet::from([id(root)]),
        b: rim.iter().map(|&v| id(v)).collect(),
    };
    Ok(modulus(&sub, &spec, &SolverOptions::with_tol(tol))?.upper)
}

/// Larger domains: balls of the tree, pieces cut out by skeleton balls, and
/// random growth. Domains touching the truncation are skipped.
fn sample_domains(s: &KeylSetup, opts: &KeylOptions) -> Vec<(String, BTreeSet<usize>)> {
    let t = &s.tree.graph;
    let root = s.tree.base;
    let frontier = t.frontier();
    let usable = |d: &BTreeSet<usize>| d.len() > opts.exhaustive_max && d.is_disjoint(&frontier);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |kind: String, d: BTreeSet<usize>, out: &mut Vec<(String, BTreeSet<usize>)>| {
        if usable(&d) && seen.insert(d.iter().copied().collect::<Vec<_>>()) {
            out.push((kind, d));
        }
    };
    for r in 0..t.len() {
        let d = ball(t, &BTreeSet::from([root]), r);
        if !d.is_disjoint(&frontier) {
            break;
        }
        push(format!("tree-ball:{r}"), d, &mut out);
    }
    let sg = &s.sigma.graph;
    let tree_in_sigma: BTreeMap<usize, usize> = (0..t.len()).map(|v| (s.sigma.tree_vertex(v), v)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let attempts = 40 * opts.samples.max(1);
    for i in 0..attempts {
        if out.len() >= opts.samples {
            break;
        }
        if i % 2 == 0 {
            let c = rng.gen_range(0..sg.len());
            let r = rng.gen_range(1..=s.sigma.depth.max(2));
            let cut = ball(sg, &BTreeSet::from([c]), r);
            let rest: BTreeSet<usize> = tree_in_sigma
                .iter()
                .filter(|(sv, _)| !cut.contains(sv))
                .map(|(_, &tv)| tv)
                .collect();
            if let Some(comp) = components(t, &rest).into_iter().find(|d| d.contains(root)) {
                push(format!("sigma-ball:{c}:{r}"), comp.into_members(), &mut out);
            }
        } else {
            let cap = t.len() - frontier.len();
            if cap <= opts.exhaustive_max + 1 {
                continue;
            }
            let target = rng.gen_range(opts.exhaustive_max + 1..=cap);
            let mut d = BTreeSet::from([root]);
            while d.len() < target {
                let rim: Vec<usize> = boundary(t, &d).into_iter().filter(|v| !frontier.contains(v)).collect();
                if rim.is_empty() {
                    break;
                }
                d.insert(rim[rng.gen_range(0..rim.len())]);
            }
            push(format!("random:{}:{i}", opts.seed), d, &mut out);
        }
    }
    out
}

/// Runs every check of the subtree construction. Any failure of the
/// size/modulus implication is a verification error naming the domain.
pub fn verify_keyl(
    s: &KeylSetup,
    l: &LFunction,
    eps: &EpsilonTable,
    opts: &KeylOptions,
    exec: Exec,
) -> Result<KeyLReport> {
    let kmax = s.kmax;
    if l.floors.len() < kmax + 1 || l.floors[..=kmax] != s.tree.floors[..] {
        return Err(Error::Precondition("tree depths do not come from this step function".into()));
    }
    if eps.rows.len() < kmax + 2 {
        return Err(Error::Precondition(format!("escape table must reach k = {}", kmax + 1)));
    }
    let epa = check_epa(l, kmax)?;
    let serial_opts = SolverOptions::with_tol(opts.serial_tol);

    let ks: Vec<usize> = (1..=kmax).collect();
    let records = exec.try_map(&ks, |&k| -> Result<KeylRecord> {
        let ab = ak_bk(s, k)?;
        let mut rec = KeylRecord {
            k,
            eps_hat: eps.estimate(k).expect("checked length"),
            floor_l: s.tree.floors[k],
            bk_side: shell_side_size(s, k)?,
            vminus_adjacent: vminus_adjacent_count(s, k)?,
            ak_closed: ab.closed.0,
            ak_contour: ab.contour.0,
            bk_closed: ab.closed.1,
            bk_contour: ab.contour.1,
            adm_margin: None,
            vminus_margin: None,
            vminus_bound: None,
            rescale: None,
            total_mass: None,
            annulus_modulus: None,
        };
        if k < kmax {
            let (ann, masses) = build_ak_with_masses(s, k)?;
            let full = full_crossing_length(s, &ann, &masses)?;
            let f = s.tree.floors[k] as i32;
            rec.adm_margin = Some(full);
            rec.vminus_margin = Some(vminus_crossing_length(s, &ann, &masses)?);
            rec.vminus_bound = Some(4.0 * (1.0 - 2f64.powi(-f)));
            rec.rescale = Some(if full >= 1.0 { 1.0 } else { 1.0 / full });
            rec.total_mass = Some(masses.energy());
            if opts.serial {
                rec.annulus_modulus = Some(annulus_modulus(&s.sigma.graph, &ann, &serial_opts)?.lower);
            }
        }
        Ok(rec)
    })?;

    let annuli: Vec<&KeylRecord> = records.iter().filter(|r| r.total_mass.is_some()).collect();
    let mass_fit = if annuli.len() >= 2 {
        let xs: Vec<f64> = annuli.iter().map(|r| r.k as f64).collect();
        let ys: Vec<f64> = annuli.iter().map(|r| r.total_mass.unwrap()).collect();
        Some(fit_line(&xs, &ys)?)
    } else {
        None
    };
    let rescale: Vec<f64> = annuli.iter().filter_map(|r| r.rescale).collect();
    let rescale_spread = (!rescale.is_empty()).then(|| {
        let hi = rescale.iter().copied().fold(f64::MIN, f64::max);
        let lo = rescale.iter().copied().fold(f64::MAX, f64::min);
        hi / lo - 1.0
    });
    if !annuli.is_empty() {
        check_nesting(s)?;
    }
    let serial = if annuli.is_empty() || !opts.serial {
        None
    } else {
        let moduli: Vec<f64> = annuli.iter().map(|r| r.annulus_modulus.unwrap()).collect();
        let bound = serial_annuli_bound(&moduli)?;
        let base = s.sigma.tree_vertex(s.tree.base);
        let m = modulus(
            &s.sigma.graph,
            &ChainFamilySpec::ToFrontier { a: BTreeSet::from([base]) },
            &serial_opts,
        )?;
        Some(SerialCheck {
            annulus_moduli: moduli,
            bound,
            sigma_modulus: m.upper,
            slack: bound - m.upper,
        })
    };

    let (eme, eme_samples) = check_implication(s, l, eps, opts, exec)?;
    Ok(KeyLReport {
        kmax,
        floors: s.tree.floors.clone(),
        depth: s.sigma.depth,
        seed: opts.seed,
        records,
        epa,
        mass_fit,
        rescale_spread,
        serial,
        eme,
        eme_samples,
    })
}

/// The annuli are disjoint and each one lies inside the next, which keeps
/// the frontier on its outside.
pub fn check_nesting(s: &KeylSetup) -> Result<()> {
    let g = &s.sigma.graph;
    let front = g.frontier();
    let anns: Vec<AnnulusSpec> = (1..s.kmax)
        .map(|k| build_ak_with_masses(s, k).map(|(a, _)| a))
        .collect::<Result<_>>()?;
    for (i, a) in anns.iter().enumerate() {
        let outer = &a.annulus.domains[1 - a.inner];
        if !front.iter().all(|&v| outer.contains(v)) {
            return Err(Error::Verification(format!("frontier meets the inside of annulus {}", i + 1)));
        }
        if let Some(next) = anns.get(i + 1) {
            if !a.vertices().is_disjoint(next.vertices()) {
                return Err(Error::Verification(format!("annuli {} and {} overlap", i + 1, i + 2)));
            }
            let inside = &next.annulus.domains[next.inner];
            if !a.vertices().iter().all(|&v| inside.contains(v)) {
                return Err(Error::Verification(format!("annulus {} does not enclose annulus {}", i + 2, i + 1)));
            }
        }
    }
    Ok(())
}

fn check_implication(
    s: &KeylSetup,
    l: &LFunction,
    eps: &EpsilonTable,
    opts: &KeylOptions,
    exec: Exec,
) -> Result<(EmeSummary, Vec<EmeRow>)> {
    let t = &s.tree.graph;
    let root = s.tree.base;
    let frontier = t.frontier();
    let small = connected_sets_containing(t, root, opts.exhaustive_max, &|v| !frontier.contains(&v));
    let large = sample_domains(s, opts);
    let mut domains: Vec<(String, BTreeSet<usize>)> = small
        .into_iter()
        .map(|d| ("exhaustive".to_string(), d.into_iter().collect()))
        .collect();
    let n_small = domains.len();
    domains.extend(large);
    let table: Vec<(usize, f64, f64)> = (0..eps.rows.len())
        .map(|k| {
            let e = eps.estimate(k).expect("row");
            (k, e, l.eval(e))
        })
        .collect();
    let rows = exec.try_map(&domains, |(kind, d)| -> Result<EmeRow> {
        let m = domain_modulus(t, root, d, opts.tol)?;
        let below: Vec<usize> = table.iter().filter(|(_, e, _)| m < *e).map(|(k, _, _)| *k).collect();
        let holds = table
            .iter()
            .all(|&(_, e, lv)| !(m < e) || d.len() as f64 > lv);
        Ok(EmeRow {
            kind: kind.clone(),
            size: d.len(),
            modulus: m,
            below,
            holds,
        })
    })?;
    if let Some(i) = rows.iter().position(|r| !r.holds) {
        let names: Vec<&str> = domains[i].1.iter().map(|&v| t.name(v)).collect();
        return Err(Error::Verification(format!(
            "implication fails on domain {} (modulus {})",
            serde_json::to_string(&names)?,
            rows[i].modulus
        )));
    }
    let mut min_by_size: BTreeMap<usize, f64> = BTreeMap::new();
    for r in &rows {
        let e = min_by_size.entry(r.size).or_insert(f64::INFINITY);
        *e = e.min(r.modulus);
    }
    let summary = EmeSummary {
        exhaustive: n_small,
        sampled: rows.len() - n_small,
        violations: 0,
        min_modulus_by_size: min_by_size,
    };
    Ok((summary, rows.into_iter().skip(n_small).collect()))
}
