//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! a failure status if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use combmod::builders::{
    build_book_complex, build_extended_speiser, build_lattice, build_sigma, build_speiser_from_tree, build_t3_ball,
    plane_tree_from_word, LatticeKind,
};
use combmod::graph::samples;
use combmod::graph::{ball, induced_subgraph};
use combmod::modulus::{
    brute_force_modulus, modulus, verify_admissible, ChainFamilySpec, MassDistribution, SolverOptions,
};
use combmod::pipeline::keyl::{ak_bk_contour, build_ak_with_masses, shell_side_size, vminus_adjacent_count};
use combmod::pipeline::{
    book_checks, check_epa, estimate_epsilon, keyl_setup, run_pipeline, verify_keyl, EpsilonTable, KeylOptions,
    KeylSetup, LFunction, PipelineConfig, PipelineReport, ShelfSchedule,
};
use combmod::type_problem::{ball_truncation, classify_type, exhaustion_profile, TypePolicy, Verdict};
use combmod::{Exec, Graph, Result};

use common::{connected_graphs, line_fit_residual, min_chain_length};

type Outcome = std::result::Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: combmod::Error) -> String {
    format!("error: {e}")
}

/// Shell depth tables used by the counting, mass and domain checks.
fn tables() -> Vec<Vec<u32>> {
    vec![vec![1; 8], vec![1, 1, 2, 2, 2, 3, 3, 3], vec![1, 2, 2, 3, 3, 3, 4, 4]]
}

const KMAX: usize = 7;

struct Shared {
    eps: EpsilonTable,
    pipeline: PipelineReport,
}

fn shared() -> Result<Shared> {
    let eps = estimate_epsilon(KMAX, &[9, 10, 11, 12], 1e-8, Exec::Parallel)?;
    let mut cfg = PipelineConfig::minimal(vec![(10.0, 1.0), (1e20, 2.0), (1e40, 3.0)], 1.0, KMAX);
    cfg.seed = 7;
    let pipeline = run_pipeline(&cfg, Exec::Parallel)?;
    Ok(Shared { eps, pipeline })
}

fn l_for(eps: &EpsilonTable, floors: &[u32]) -> Result<LFunction> {
    let e: Vec<f64> = (1..=floors.len()).map(|k| eps.estimate(k).unwrap()).collect();
    LFunction::from_floors(&e, floors)
}

// 1. Solver against brute force on every small connected graph.
fn solver_vs_brute() -> Outcome {
    let graphs: Vec<Graph> = connected_graphs(8).iter().filter(|s| s.n >= 2).map(|s| s.to_graph()).collect();
    let opts = SolverOptions::with_tol(1e-8);
    let rows = Exec::Parallel.map(&graphs, |g| -> std::result::Result<(usize, f64, f64), String> {
        let (mut pairs, mut diff, mut gap) = (0, 0.0f64, 0.0f64);
        for a in 0..g.len() {
            for b in a + 1..g.len() {
                let spec = ChainFamilySpec::connect([a], [b]);
                let r = modulus(g, &spec, &opts).map_err(err)?;
                let want = brute_force_modulus(g, &spec).map_err(err)?;
                diff = diff.max((r.value - want).abs());
                gap = gap.max(r.gap);
                pairs += 1;
            }
        }
        Ok((pairs, diff, gap))
    });
    let (mut pairs, mut diff, mut gap) = (0, 0.0f64, 0.0f64);
    for r in rows {
        let (p, d, g) = r?;
        pairs += p;
        diff = diff.max(d);
        gap = gap.max(g);
    }
    check(
        diff <= 1e-6 && gap <= 1e-6,
        format!("{} graphs, {pairs} pairs, max |diff| {diff:.2e}, max gap {gap:.2e}", graphs.len()),
    )
}

// 2. Closed forms.
fn closed_forms() -> Outcome {
    let opts = SolverOptions::with_tol(1e-12);
    let mut worst = 0.0f64;
    for n in 1..=20 {
        // One chain through all n+1 vertices: minimise Σ m² under Σ m = 1,
        // so every mass is 1/(n+1) by the Lagrange condition.
        let lagrange = (n + 1) as f64 * (1.0 / (n + 1) as f64).powi(2);
        let g = samples::path(n + 1);
        let ends = (g.require("v0").map_err(err)?, g.require(&format!("v{n}")).map_err(err)?);
        let spec = ChainFamilySpec::connect([ends.0], [ends.1]);
        let got = modulus(&g, &spec, &opts).map_err(err)?.value;
        worst = worst.max((got - lagrange).abs()).max((got - 1.0 / (n + 1) as f64).abs());
        if g.len() <= 12 {
            worst = worst.max((got - brute_force_modulus(&g, &spec).map_err(err)?).abs());
        }
    }
    // Star: centre mass t, leaf masses 1 - t; t² + 3(1-t)² is least at t = 3/4.
    let t = 3.0 / 4.0;
    let lagrange = t * t + 3.0 * (1.0 - t) * (1.0 - t);
    let g = samples::star(3);
    let c = g.require("c").map_err(err)?;
    let leaves: Vec<usize> = (0..3).map(|i| g.require(&format!("l{i}")).unwrap()).collect();
    let spec = ChainFamilySpec::connect([c], leaves);
    let star = modulus(&g, &spec, &opts).map_err(err)?.value;
    let brute = brute_force_modulus(&g, &spec).map_err(err)?;
    let sd = (star - 0.75).abs().max((star - lagrange).abs()).max((star - brute).abs());
    check(
        worst <= 1e-9 && sd <= 1e-9,
        format!("paths n<=20 max err {worst:.2e}; star {star:.12} (err {sd:.2e})"),
    )
}

/// Modulus from `v0` to the frontier, as certified bounds.
fn frontier_bounds(g: &Graph, v0: &str, tol: f64) -> Result<(f64, f64)> {
    let s = g.require(v0)?;
    let r = modulus(g, &ChainFamilySpec::ToFrontier { a: BTreeSet::from([s]) }, &SolverOptions::with_tol(tol))?;
    Ok((r.lower, r.upper))
}

/// Nested truncations and restriction to a ball inside a larger ball.
fn family_laws(name: &str, g: &Graph, v0: usize, radii: &[usize]) -> Result<(usize, Vec<String>)> {
    let tol = 1e-6;
    let mut bad = Vec::new();
    let mut checks = 0;
    let bounds: Vec<(f64, f64)> = Exec::Parallel.try_map(radii, |&r| {
        let t = ball_truncation(g, v0, r)?;
        frontier_bounds(&t, g.name(v0), tol)
    })?;
    for (i, w) in bounds.windows(2).enumerate() {
        checks += 1;
        if w[1].0 > w[0].1 + 1e-9 {
            bad.push(format!("{name}: truncation {} -> {}", radii[i], radii[i + 1]));
        }
    }
    // Subgraph restriction: H = ball of radius R in G = ball of radius R+2,
    // chains from v0 to the sphere of radius r < R.
    let (r, big) = (radii[0], radii[radii.len() - 1]);
    let outer = ball(g, &BTreeSet::from([v0]), big + 2);
    let gg = induced_subgraph(g, &outer);
    let inner = ball(g, &BTreeSet::from([v0]), big);
    let hh = induced_subgraph(g, &inner);
    let sphere: BTreeSet<String> = ball(g, &BTreeSet::from([v0]), r)
        .difference(&ball(g, &BTreeSet::from([v0]), r - 1))
        .map(|&v| g.name(v).to_string())
        .collect();
    let bounds_on = |h: &Graph| -> Result<(f64, f64)> {
        let a = BTreeSet::from([h.require(g.name(v0))?]);
        let b = h.require_all(sphere.iter().map(String::as_str))?;
        let r = modulus(h, &ChainFamilySpec::Connect { a, b }, &SolverOptions::with_tol(tol))?;
        Ok((r.lower, r.upper))
    };
    checks += 1;
    if bounds_on(&hh)?.0 > bounds_on(&gg)?.1 + 1e-9 {
        bad.push(format!("{name}: restriction"));
    }
    Ok((checks, bad))
}

/// `T ⊂ σ(T)`: chains from the base to the tree frontier.
fn tree_in_sigma(name: &str, s: &KeylSetup) -> Result<(usize, Vec<String>)> {
    let tol = 1e-6;
    let sg = &s.sigma.graph;
    let tree_vs: BTreeSet<usize> = s.sigma.tree_vertices();
    let h = induced_subgraph(sg, &tree_vs);
    let leaves: Vec<String> = (0..s.tree.graph.len())
        .filter(|&v| s.tree.graph.degree(v) == 1)
        .map(|v| sg.name(s.sigma.tree_vertex(v)).to_string())
        .collect();
    let base = sg.name(s.sigma.tree_vertex(s.tree.base)).to_string();
    let bound = |g: &Graph, lower: bool| -> Result<f64> {
        let a = BTreeSet::from([g.require(&base)?]);
        let b = g.require_all(leaves.iter().map(String::as_str))?;
        let r = modulus(g, &ChainFamilySpec::Connect { a, b }, &SolverOptions::with_tol(tol))?;
        Ok(if lower { r.lower } else { r.upper })
    };
    let ok = bound(&h, true)? <= bound(sg, false)? + 1e-9;
    Ok((1, if ok { vec![] } else { vec![format!("{name}: tree inside skeleton")] }))
}

// 3. Monotonicity laws and the serial rule.
fn laws(sh: &Shared) -> Outcome {
    let run = || -> Result<(usize, Vec<String>)> {
        let mut checks = 0;
        let mut bad = Vec::new();
        let mut add = |r: (usize, Vec<String>)| {
            checks += r.0;
            bad.extend(r.1);
        };
        let p = samples::path(80);
        add(family_laws("path", &p, p.require("v0")?, &[4, 8, 16, 32])?);
        let z = samples::grid_box(14);
        add(family_laws("grid", &z, z.require("z:0:0")?, &[2, 4, 6, 8, 10])?);
        let t3 = build_t3_ball(10)?;
        add(family_laws("t3", &t3.graph, t3.base, &[2, 3, 4, 5, 6, 7])?);
        let ks = keyl_setup(&[1; 8], KMAX, None)?;
        let base = ks.sigma.tree_vertex(ks.tree.base);
        add(family_laws("sigma", &ks.sigma.graph, base, &[2, 4, 6, 8, 10])?);
        add(tree_in_sigma("keyl [1;8]", &ks)?);
        let ks2 = keyl_setup(&[1, 1, 2, 2, 2, 3, 3, 3], 4, None)?;
        add(tree_in_sigma("keyl [1,1,2,2,...]", &ks2)?);
        let pt = plane_tree_from_word("(()(()))")?.with_bipartite_labels();
        let ext = build_extended_speiser(&build_speiser_from_tree(&pt)?, pt.max_degree() + 1, 4)?;
        add(family_laws("extended", &ext.graph, 0, &[2, 3, 4, 5])?);
        let lat = build_lattice(LatticeKind::HalfPlane, 14, 30)?;
        add(family_laws("lattice", &lat, lat.require("l:15:0")?, &[2, 4, 6, 8, 10])?);
        let book = build_book_complex(&|k| 1 << k, 12)?;
        add(family_laws("book", &book.graph, book.base, &[2, 4, 6, 8])?);
        Ok((checks, bad))
    };
    let (checks, bad) = run().map_err(err)?;
    let serial = sh.pipeline.keyl.serial.as_ref().ok_or("no serial check in the pipeline run")?;
    let detail = format!(
        "{checks} monotonicity checks, {} violations; serial bound {:.4} vs skeleton modulus {:.4} (slack {:.4}) over A1..A{}",
        bad.len(),
        serial.bound,
        serial.sigma_modulus,
        serial.slack,
        serial.annulus_moduli.len()
    );
    check(bad.is_empty() && serial.slack >= 0.0 && serial.annulus_moduli.len() == 6, detail)
}

/// Tree vertices hanging at `v_j` (no spine neighbour), down to `depth`.
fn hanging_shell(s: &KeylSetup, j: i64, depth: u32) -> BTreeSet<usize> {
    let t = &s.tree.graph;
    let spine: BTreeSet<usize> = s.tree.spine.values().copied().collect();
    let root = s.tree.spine[&j];
    let mut seen = BTreeSet::from([root]);
    let mut layer = vec![root];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &u in &layer {
            for &w in t.neighbors(u) {
                if !spine.contains(&w) && seen.insert(w) {
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    seen
}

/// Lower-row columns on one side touching the given tree vertices.
fn touching_columns(s: &KeylSetup, shell: &BTreeSet<usize>, sign: i64) -> usize {
    let g = &s.sigma.graph;
    let targets: BTreeSet<usize> = shell.iter().map(|&t| s.sigma.tree_vertex(t)).collect();
    let mut n = 0;
    for m in 1.. {
        let Some(v) = s.sigma.at(sign * m, -1) else { break };
        if g.neighbors(v).iter().any(|w| targets.contains(w)) {
            n += 1;
        }
    }
    n
}

fn closed_ab(f: &[u32], k: usize) -> (i64, i64) {
    let p = |j: usize| 2i64.pow(f[j - 1]);
    let mid: i64 = (2..=k).map(|j| 2 * p(j)).sum();
    (p(1) + mid - k as i64 + 1, p(1) + mid + 2 * p(k + 1) - k as i64 - 1)
}

// 4. Counting on the subtree and its skeleton.
fn counting() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for f in tables() {
        let s = keyl_setup(&f, KMAX, None).map_err(err)?;
        for k in 1..=6usize {
            let want = 1usize << f[k];
            let plus = hanging_shell(&s, k as i64, f[k]);
            let minus = hanging_shell(&s, -(k as i64), f[k]);
            let lib = shell_side_size(&s, k).map_err(err)?;
            if plus.len() != want || minus.len() != want || lib != want {
                bad.push(format!("{f:?} k={k}: |B_k| {} {} {lib} want {want}", plus.len(), minus.len()));
            }
            let ab = closed_ab(&f, k);
            let contour = ak_bk_contour(&s, k).map_err(err)?;
            if ab != contour {
                bad.push(format!("{f:?} k={k}: closed {ab:?} contour {contour:?}"));
            }
            let adj_want = (1usize << (f[k] + 1)) - 1;
            let (ap, am) = (touching_columns(&s, &plus, 1), touching_columns(&s, &minus, -1));
            let lib_adj = vminus_adjacent_count(&s, k).map_err(err)?;
            if ap != adj_want || am != adj_want || lib_adj != adj_want {
                bad.push(format!("{f:?} k={k}: adjacency {ap} {am} {lib_adj} want {adj_want}"));
            }
            checked += 1;
        }
    }
    let detail = format!("{} tables x k<=6 = {checked} cases, {} mismatches {:?}", tables().len(), bad.len(), bad);
    check(bad.is_empty(), detail)
}

struct MassRow {
    vminus: f64,
    vminus_lib: f64,
    bound: f64,
    rescale: f64,
    total: f64,
}

fn mass_rows(s: &KeylSetup) -> Result<Vec<MassRow>> {
    let g = &s.sigma.graph;
    (1..=6)
        .map(|k| {
            let (ann, masses) = build_ak_with_masses(s, k)?;
            let (inner, outer) = ann.crossing(g);
            let lower: BTreeSet<usize> =
                ann.vertices().iter().copied().filter(|&v| s.sigma.coords(v).is_some_and(|c| c.1 < 0)).collect();
            let vminus = min_chain_length(g, &masses.0, &lower, &inner, &outer);
            let full = min_chain_length(g, &masses.0, ann.vertices(), &inner, &outer);
            // Library route: admissibility on the lower band as its own graph.
            let sub = induced_subgraph(g, &lower);
            let host = |i: usize| g.id(sub.name(i)).unwrap();
            let sub_m = MassDistribution((0..sub.len()).map(|i| masses.0[host(i)]).collect());
            let to_sub = |set: &BTreeSet<usize>| -> BTreeSet<usize> {
                set.iter().filter(|v| lower.contains(v)).map(|&v| sub.id(g.name(v)).unwrap()).collect()
            };
            let spec = ChainFamilySpec::Connect { a: to_sub(&inner), b: to_sub(&outer) };
            let vminus_lib = verify_admissible(&sub, &sub_m, &spec)?;
            let f = s.tree.floors[k] as i32;
            let total: f64 = masses.0.iter().map(|m| m * m).sum();
            Ok(MassRow {
                vminus,
                vminus_lib,
                bound: 4.0 * (1.0 - 2f64.powi(-f)),
                rescale: if full >= 1.0 { 1.0 } else { 1.0 / full },
                total,
            })
        })
        .collect()
}

// 5. The mass distribution on the annuli.
fn masses(sh: &Shared) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut trees: Vec<(String, KeylSetup)> = vec![(
        format!("pipeline {:?}", sh.pipeline.l.floors),
        keyl_setup(&sh.pipeline.l.floors, KMAX, None).map_err(err)?,
    )];
    for f in tables() {
        trees.push((format!("{f:?}"), keyl_setup(&f, KMAX, None).map_err(err)?));
    }
    for (i, (name, s)) in trees.iter().enumerate() {
        let rows = mass_rows(s).map_err(err)?;
        let margin_ok = rows
            .iter()
            .all(|r| r.vminus >= r.bound - 1e-9 && (r.vminus - r.vminus_lib).abs() <= 1e-9);
        let hi = rows.iter().map(|r| r.rescale).fold(f64::MIN, f64::max);
        let lo = rows.iter().map(|r| r.rescale).fold(f64::MAX, f64::min);
        let uniform = hi / lo - 1.0 <= 0.10;
        let xs: Vec<f64> = (1..=6).map(|k| k as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.total).collect();
        let (alpha, beta, res) = line_fit_residual(&xs, &ys);
        // The fit is gated on the tree the pipeline produced; the fixed
        // tables are reported alongside.
        let gated = i == 0;
        ok &= margin_ok && uniform && (!gated || res < 0.25);
        lines.push(format!(
            "{name}: V- margins ok {margin_ok}, rescale spread {:.3}, fit {alpha:.2}k+{beta:.2} residual {res:.3}{}",
            hi / lo - 1.0,
            if gated { " (gated)" } else { "" }
        ));
    }
    check(ok, lines.join("; "))
}

// 6. The domain implication on every tree.
fn domains(sh: &Shared) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let p = &sh.pipeline.keyl.eme;
    ok &= p.violations == 0 && p.sampled >= 200 && p.exhaustive > 0;
    lines.push(format!(
        "pipeline: {} exhaustive + {} sampled, {} violations",
        p.exhaustive, p.sampled, p.violations
    ));
    for f in tables() {
        let s = keyl_setup(&f, KMAX, None).map_err(err)?;
        let l = l_for(&sh.eps, &f).map_err(err)?;
        let opts = KeylOptions { seed: 11, serial: false, ..KeylOptions::default() };
        match verify_keyl(&s, &l, &sh.eps, &opts, Exec::Parallel) {
            Ok(r) => {
                ok &= r.eme.violations == 0 && r.eme.sampled >= 200 && r.eme.exhaustive > 0;
                lines.push(format!(
                    "{f:?}: {} exhaustive + {} sampled, {} violations",
                    r.eme.exhaustive, r.eme.sampled, r.eme.violations
                ));
            }
            Err(e) => {
                ok = false;
                lines.push(format!("{f:?}: {e}"));
            }
        }
    }
    check(ok, lines.join("; "))
}

// 7. Type evidence on the controls and on a skeleton.
fn type_evidence() -> Outcome {
    let policy = TypePolicy::default();
    let profile_of = |g: &Graph, v0: usize, radii: &[usize], tol: f64| -> Result<(Verdict, Vec<f64>)> {
        let builder = |r: usize| ball_truncation(g, v0, r);
        let p = exhaustion_profile(&builder, g.name(v0), radii, tol, Exec::Parallel)?;
        Ok((classify_type(&p, &policy)?.verdict, p.resistance))
    };
    let run = || -> Result<(bool, String)> {
        let path = samples::path(70);
        let (vp, _) = profile_of(&path, path.require("v0")?, &[8, 16, 24, 32, 40, 48, 56, 64], 1e-5)?;
        let z = samples::grid_box(32);
        let (vz, _) = profile_of(&z, z.require("z:0:0")?, &[4, 8, 12, 16, 20, 24, 28, 32], 1e-5)?;
        let t3 = build_t3_ball(12)?;
        let (vt, _) = profile_of(&t3.graph, t3.base, &[5, 6, 7, 8, 9, 10, 11, 12], 1e-5)?;

        let floors: Vec<u32> = (0..18).map(|i| i / 2 + 1).collect();
        let kmax = 17;
        let eps: Vec<f64> = (1..=floors.len()).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let epa = check_epa(&LFunction::from_floors(&eps, &floors)?, kmax)?;
        let s = keyl_setup(&floors, kmax, Some(18))?;
        let base = s.sigma.tree_vertex(s.tree.base);
        let (vs, res) = profile_of(&s.sigma.graph, base, &[2, 4, 6, 8, 10, 12, 14, 16], 1e-4)?;
        let rising = res[res.len() - 4..].windows(2).all(|w| w[1] > w[0]);
        let ok = vp == Verdict::ParabolicEvidence
            && vz == Verdict::ParabolicEvidence
            && vt == Verdict::HyperbolicEvidence
            && vs == Verdict::ParabolicEvidence
            && epa.constant <= 4.0
            && rising;
        let tail: Vec<String> = res[res.len() - 4..].iter().map(|r| format!("{r:.4}")).collect();
        Ok((
            ok,
            format!(
                "path {vp:?}, grid {vz:?}, t3 {vt:?}; skeleton ({} vertices, C = {:.3}) {vs:?}, tail resistance [{}]",
                s.sigma.graph.len(),
                epa.constant,
                tail.join(", ")
            ),
        ))
    };
    let (ok, detail) = run().map_err(err)?;
    check(ok, detail)
}

// 8. The doubled book.
fn book() -> Outcome {
    let height = 12;
    let radii: Vec<usize> = (1..height).collect();
    let schedules = [ShelfSchedule::Zero, ShelfSchedule::Pow2, ShelfSchedule::Table(vec![5, 0, 3, 1])];
    let mut all = Vec::new();
    let mut reports = Vec::new();
    for s in &schedules {
        let r = book_checks(s, height, &radii, 1e-6, Exec::Parallel).map_err(err)?;
        all.extend(r.odd_moduli.iter().map(|x| x.1));
        reports.push(r);
    }
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Every radius >= 1 reaches the first shelf, which hangs off the first
    // spine edge next to the base.
    let zero = &reports[0].ball_counts;
    let pow2 = &reports[1].ball_counts;
    let strict = zero.iter().zip(pow2).all(|(z, p)| p.vertices > z.vertices);
    check(
        hi - lo <= 1e-6 && strict && !all.is_empty(),
        format!(
            "{} odd moduli over 3 schedules, spread {:.2e}; pow2 > zero at all {} radii: {strict}",
            all.len(),
            hi - lo,
            radii.len()
        ),
    )
}

fn dyck_words(edges: usize) -> Vec<String> {
    fn go(open: usize, close: usize, s: &mut String, out: &mut Vec<String>) {
        if open == 0 && close == 0 {
            out.push(s.clone());
            return;
        }
        if open > 0 {
            s.push('(');
            go(open - 1, close + 1, s, out);
            s.pop();
        }
        if close > 0 {
            s.push(')');
            go(open, close - 1, s, out);
            s.pop();
        }
    }
    let mut out = Vec::new();
    go(edges, 0, &mut String::new(), &mut out);
    out
}

// 9. Dual of the extended Speiser graph against the skeleton.
fn duality() -> Outcome {
    let mut total = 0;
    let mut bad = Vec::new();
    let mut catalan_sum = 0u64;
    for e in 1..=10u64 {
        // C_e = binom(2e, e) / (e + 1)
        let c = (1..=e).fold(1u64, |acc, i| acc * (e + i) / i) / (e + 1);
        catalan_sum += c;
        let words = dyck_words(e as usize);
        let res = Exec::Parallel.map(&words, |w| -> Result<bool> {
            let t = plane_tree_from_word(w)?.with_bipartite_labels();
            let gamma = build_speiser_from_tree(&t)?;
            let ext = build_extended_speiser(&gamma, t.max_degree() + 1, 2)?;
            let trimmed = ext.map.dual()?.remove_vertices(&ext.cap_faces);
            Ok(trimmed.isomorphic(&build_sigma(&t, 2)?.map))
        });
        for (w, r) in words.iter().zip(res) {
            total += 1;
            match r {
                Ok(true) => {}
                Ok(false) => bad.push(w.clone()),
                Err(e) => bad.push(format!("{w}: {e}")),
            }
        }
    }
    check(
        bad.is_empty() && total as u64 == catalan_sum,
        format!("{total} plane trees (expected {catalan_sum}), {} mismatches {:?}", bad.len(), bad.iter().take(3).collect::<Vec<_>>()),
    )
}

fn combmod(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_combmod")).args(args).output().expect("run combmod")
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

// 10. Reruns under different worker counts and replays.
fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let t3 = root.join("t3.json");
    let out = combmod(&["build", "t3", "--radius", "6"]);
    std::fs::write(&t3, &out.stdout).map_err(|e| e.to_string())?;
    let m = root.join("M.csv");
    std::fs::write(&m, "10,1\n1e20,2\n1e40,3\n").map_err(|e| e.to_string())?;
    let (t3s, ms) = (t3.to_str().unwrap(), m.to_str().unwrap());
    let commands: Vec<Vec<&str>> = vec![
        vec!["build", "t3", "--radius", "4"],
        vec!["build", "keyl", "--floors", "1,1,1,1", "--kmax", "3"],
        vec!["build", "sigma", "--floors", "1,1,1,1", "--kmax", "3", "--depth", "4"],
        vec!["build", "sigma", "--word", "(()())", "--depth", "2"],
        vec!["build", "speiser", "--word", "(()())"],
        vec!["build", "extended", "--word", "(()())", "--n", "4", "--depth", "2"],
        vec!["build", "lattice", "--kind", "half-plane", "--depth", "3", "--width", "5"],
        vec!["build", "book", "--shelves", "pow2", "--height", "6"],
        vec!["modulus", "--graph", t3s, "--from", "t:0:", "--frontier"],
        vec!["type-profile", "--graph", t3s, "--from", "t:0:", "--radii", "2,3,4,5"],
        vec!["epsilon-table", "--kmax", "2", "--radii", "4,5,6"],
        vec!["verify-keyl", "--floors", "1,1,1,1", "--kmax", "3", "--samples", "30", "--seed", "3"],
        vec!["book-check", "--height", "8", "--radii", "2,3,4,5"],
        vec!["pipeline", "--M", ms, "--C1", "1.0", "--kmax", "3", "--seed", "5"],
    ];
    let mut bad = Vec::new();
    for (i, cmd) in commands.iter().enumerate() {
        let mut dirs = Vec::new();
        for jobs in ["1", "4"] {
            let dir = root.join(format!("run{i}-{jobs}"));
            let mut args = cmd.clone();
            let d = dir.to_str().unwrap().to_string();
            args.extend(["--jobs", jobs, "--out"]);
            let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            full.push(d);
            let refs: Vec<&str> = full.iter().map(String::as_str).collect();
            let o = combmod(&refs);
            if !o.status.success() {
                bad.push(format!("{}: {}", cmd.join(" "), String::from_utf8_lossy(&o.stderr).trim()));
            }
            dirs.push(dir);
        }
        if read_dir(&dirs[0]) != read_dir(&dirs[1]) {
            bad.push(format!("{}: outputs differ across --jobs", cmd.join(" ")));
        }
        let manifest = dirs[0].join("manifest.json");
        let o = combmod(&["replay", manifest.to_str().unwrap(), "--jobs", "2"]);
        if !o.status.success() {
            bad.push(format!("replay {}: {}", cmd.join(" "), String::from_utf8_lossy(&o.stderr).trim()));
        }
    }
    check(bad.is_empty(), format!("{} commands, {} problems {:?}", commands.len(), bad.len(), bad))
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture`; a name filter
    // that matches nothing here skips the suite.
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !filter.is_empty() && !filter.iter().any(|f| "acceptance".contains(f.as_str())) {
        return;
    }
    let started = Instant::now();
    let sh = match shared() {
        Ok(s) => s,
        Err(e) => {
            println!("setup FAIL: {e}");
            std::process::exit(1);
        }
    };
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("solver vs brute force", Box::new(solver_vs_brute)),
        ("closed forms", Box::new(closed_forms)),
        ("monotonicity and serial rule", Box::new(|| laws(&sh))),
        ("shell counts and contours", Box::new(counting)),
        ("annulus masses", Box::new(|| masses(&sh))),
        ("domain implication", Box::new(|| domains(&sh))),
        ("type evidence", Box::new(type_evidence)),
        ("book", Box::new(book)),
        ("duality", Box::new(duality)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} [{name}] ({:.1}s) {detail}", i + 1, t.elapsed().as_secs_f64());
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
