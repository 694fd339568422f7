//! Pipeline configuration file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::lfunc::GrowthTable;
use crate::error::{Error, Result};

fn default_c1() -> f64 {
    1.0
}

fn default_tol() -> f64 {
    1e-8
}

fn default_samples() -> usize {
    200
}

fn default_exhaustive_max() -> usize {
    12
}

fn default_serial_tol() -> f64 {
    1e-2
}

fn default_type_tol() -> f64 {
    1e-5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Prescribed growth as `[r, M(r)]` pairs.
    #[serde(rename = "M")]
    pub m: Vec<(f64, f64)>,
    #[serde(rename = "C1", default = "default_c1")]
    pub c1: f64,
    pub kmax: usize,
    /// Ball radii for the escape moduli; defaults to `kmax+2 ..= kmax+5`.
    #[serde(default)]
    pub eps_radii: Option<Vec<usize>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_serial_tol")]
    pub serial_tol: f64,
    /// Rows of the skeleton; by default just past the last annulus.
    #[serde(default)]
    pub sigma_depth: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_exhaustive_max")]
    pub exhaustive_max: usize,
    /// Optional exhaustion radii for type evidence on the skeleton.
    #[serde(default)]
    pub type_radii: Option<Vec<usize>>,
    #[serde(default = "default_type_tol")]
    pub type_tol: f64,
}

impl PipelineConfig {
    pub fn minimal(m: Vec<(f64, f64)>, c1: f64, kmax: usize) -> PipelineConfig {
        PipelineConfig {
            m,
            c1,
            kmax,
            eps_radii: None,
            tol: default_tol(),
            serial_tol: default_serial_tol(),
            sigma_depth: None,
            seed: 0,
            samples: default_samples(),
            exhaustive_max: default_exhaustive_max(),
            type_radii: None,
            type_tol: default_type_tol(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c1 > 0.0) || !self.c1.is_finite() {
            return Err(Error::input(format!("`C1` must be positive, got {}", self.c1)));
        }
        if self.kmax < 1 {
            return Err(Error::input("`kmax` must be at least 1"));
        }
        if !(self.tol > 0.0) || !(self.serial_tol > 0.0) || !(self.type_tol > 0.0) {
            return Err(Error::input("tolerances must be positive"));
        }
        self.growth().map(|_| ())
    }

    pub fn growth(&self) -> Result<GrowthTable> {
        GrowthTable::new(self.m.clone())
    }

    pub fn eps_radii(&self) -> Vec<usize> {
        self.eps_radii
            .clone()
            .unwrap_or_else(|| (self.kmax + 2..=self.kmax + 5).collect())
    }

    pub fn from_json(text: &str) -> Result<PipelineConfig> {
        let cfg: PipelineConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
    PipelineConfig::from_json(&text)
}
