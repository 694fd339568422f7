//! Vertex modulus of chain families: the separation oracle, a certified
//! cutting-plane solver, an exhaustive oracle, the electrical companion and
//! the serial rule for nested annuli.

mod brute;
mod chain;
mod electrical;
mod laws;
mod solver;

pub use brute::{brute_force_modulus, brute_force_modulus_with, minimal_chain_sets, BruteLimits};
pub use chain::{shortest_weighted_chain, ChainFamilySpec};
pub use electrical::{effective_conductance, effective_resistance};
pub use laws::{annulus_modulus, serial_annuli_bound, verify_admissible, AnnulusSpec};
pub use solver::{modulus, MassDistribution, ModulusResult, SolverOptions, SLACK};
