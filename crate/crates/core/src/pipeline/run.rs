//! End-to-end run: growth table, escape moduli, step function, subtree,
//! skeleton, report.

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::epsilon::{estimate_epsilon, EpsilonTable};
use super::keyl::{keyl_setup, verify_keyl, KeyLReport, KeylOptions};
use super::lfunc::{choose_l, LFunction};
use crate::error::Result;
use crate::par::Exec;
use crate::type_problem::{ball_truncation, classify_type, exhaustion_profile, ExhaustionProfile, TypePolicy, TypeVerdict};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeEvidence {
    pub profile: ExhaustionProfile,
    pub verdict: TypeVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub config: PipelineConfig,
    pub epsilon: EpsilonTable,
    pub l: LFunction,
    pub keyl: KeyLReport,
    pub sigma_vertices: usize,
    pub type_evidence: Option<TypeEvidence>,
}

pub fn run_pipeline(cfg: &PipelineConfig, exec: Exec) -> Result<PipelineReport> {
    cfg.validate()?;
    let m = cfg.growth()?;
    let epsilon = estimate_epsilon(cfg.kmax, &cfg.eps_radii(), cfg.tol, exec)?;
    let l = choose_l(&m, cfg.c1, &epsilon)?;
    let setup = keyl_setup(&l.floors, cfg.kmax, cfg.sigma_depth)?;
    let opts = KeylOptions {
        tol: cfg.tol,
        exhaustive_max: cfg.exhaustive_max,
        samples: cfg.samples,
        seed: cfg.seed,
        serial_tol: cfg.serial_tol,
        serial: true,
    };
    let keyl = verify_keyl(&setup, &l, &epsilon, &opts, exec)?;
    let type_evidence = match &cfg.type_radii {
        None => None,
        Some(radii) => {
            let g = &setup.sigma.graph;
            let base = setup.sigma.tree_vertex(setup.tree.base);
            let builder = |r: usize| ball_truncation(g, base, r);
            let profile = exhaustion_profile(&builder, g.name(base), radii, cfg.type_tol, exec)?;
            let verdict = classify_type(&profile, &TypePolicy::default())?;
            Some(TypeEvidence { profile, verdict })
        }
    };
    Ok(PipelineReport {
        config: cfg.clone(),
        epsilon,
        l,
        keyl,
        sigma_vertices: setup.sigma.graph.len(),
        type_evidence,
    })
}
