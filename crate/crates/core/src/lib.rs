//! Spectral sparsification of hypergraphs.
//!
//! A matrix hypergraph is a matrix `A` whose rows are partitioned into
//! groups `S_1..S_k` with weights `v_i`; its energy is
//! `f(x) = sum_i v_i max_{j in S_i} <a_j, x>^2`. A graphical hypergraph is
//! the special case whose rows are the differences `e_u - e_w` within each
//! hyperedge, giving `f(x) = sum_S v_S (max_S x - min_S x)^2`.
//!
//! The pipeline computes group leverage score overestimates `tau` with
//! [`overestimates::group_leverage_overestimate`], then keeps each group with
//! probability `min(1, rho tau_i)` in [`sampler::subsample`]. The
//! [`certify`] module checks every guarantee with dense oracles.

pub mod certify;
pub mod error;
pub mod hypergraph;
pub mod io;
pub mod leverage;
pub mod linalg;
pub mod overestimates;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod sampler;
pub mod sparse;

pub use error::{Error, Result};
pub use hypergraph::{GraphicalHypergraph, MatrixHypergraph};
pub use leverage::{LeverageMode, SolverConfig};
pub use pipeline::{sparsify, HypergraphInput, PipelineConfig, Sparsification};
pub use sampler::Schedule;
