//! Hypergraph structure learning from smooth node signals.
//!
//! Pipeline: nearest-neighbor candidate reduction, per-candidate total
//! variation, then a primal-dual solve of
//! `min_{w >= 0} z'w - alpha * sum(log(S w)) + beta * |w|^2`.

pub mod baselines;
pub mod cli;
pub mod error;
pub mod eval;
pub mod hypergraph;
pub mod io;
pub mod reduction;
pub mod smoothness;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use hypergraph::{CandidateSet, CardinalitySpec, Hyperedge, Hypergraph, SelectionMatrix, SetMetrics};
pub use smoothness::{DistanceVector, SignalMatrix, TvKind};
pub use solver::{solve, HslsParams, SelectionRule, SolverState};
