//! Hard maximum-independent-set instances built on the inverse graph over
//! `Z_p`, with the tools to study them: a census of short odd cycles,
//! cycle-chain refutation certificates and their analytic bounds, an exact
//! branch-and-reduce solver, and spectral (Hoffman) bounds.

pub mod census;
pub mod cli;
pub mod graph;
pub mod numtheory;
pub mod refutation;
pub mod solver;
pub mod spectral;

pub use graph::{build_inverse_graph, Graph, InverseGraph};
pub use numtheory::Prime;
