//! Exact Hamiltonian-subset counting, crux computation, sublinear
//! expander machinery, the cycle-chain-wheel pipeline, and beta-graph
//! long-cycle extraction, with brute-force oracles for every piece
//! small enough to check exhaustively.

/// Exact rational arithmetic used for densities, alpha and beta.
pub type Rational = num::rational::Ratio<u64>;

pub mod beta;
pub mod bound;
pub mod crux;
pub mod error;
pub mod expander;
pub mod gen;
pub mod graph;
pub mod graph6;
pub mod hamcount;
pub mod oracle;
pub mod report;
pub mod seed;
pub mod spectral;
pub mod wheel;

pub use error::{Error, Result};
pub use graph::{Graph, VertexSet};
