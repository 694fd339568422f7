//! Vertex-mass combinatorial modulus on graphs, the plane-graph builders it is
//! applied to, and the discrete checks assembled on top of them.

pub mod builders;
pub mod error;
pub mod graph;
pub mod modulus;
pub mod par;
pub mod pipeline;
pub mod type_problem;

pub use error::{Error, Result};
pub use graph::{Chain, DomainSet, Graph, GraphBuilder};
pub use par::Exec;
