//! A laboratory for the Closest String problem: construction of
//! almost-orthogonal balanced binary codes, a gap-producing reduction from
//! Clique to Closest String, exact solvers for small instances, and a
//! harness that certifies the reduction's distance gap at desk scale.

pub mod bitstr;
pub mod codegen;
pub mod graphs;
pub mod harness;
pub mod reducer;
pub mod solvers;

pub use bitstr::{BitString, Block, BlockLayout};
pub use codegen::{CodeParams, SelectionCode};
pub use graphs::CliqueInstance;
pub use reducer::{ClosestStringInstance, ReduceBudget, ReduceMode, Reduction, VertexCoding};
