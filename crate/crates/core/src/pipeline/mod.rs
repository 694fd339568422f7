//! The end-to-end construction: escape moduli of the valence-3 tree, the
//! growth-controlled step function, the subtree checks and the book checks.

pub mod book_checks;
pub mod config;
pub mod epsilon;
pub mod keyl;
pub mod lfunc;
pub mod run;

pub use book_checks::{book_checks, BookReport, ShelfSchedule};
pub use epsilon::{estimate_epsilon, EpsilonRow, EpsilonTable};
pub use keyl::{keyl_setup, verify_keyl, KeyLReport, KeylOptions, KeylSetup};
pub use lfunc::{check_epa, choose_l, EpaReport, GrowthTable, LFunction};
pub use config::{load_config, PipelineConfig};
pub use run::{run_pipeline, PipelineReport, TypeEvidence};
