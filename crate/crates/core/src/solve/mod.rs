//! Single-instance solvers.

mod edge;
mod stable;
mod weight;

use thiserror::Error;

pub use edge::{dominant_edge, popular_edge, EdgeSolver, ExhaustiveEdgeSolver, DEFAULT_EDGE_BOUND};
pub use stable::{dominant_matching, gale_shapley};
pub use weight::{max_weight_popular, max_weight_popular_with, parse_weights, WeightFunction};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("{0} is not an edge of the instance")]
    EdgeNotInInstance(String),
    #[error("instance has {per_side} agents on one side; the exhaustive search is limited to {bound}")]
    TooLarge { per_side: usize, bound: usize },
    #[error("the instance is not complete")]
    NotComplete,
    #[error("weight given for {0}, which is not an edge")]
    WeightOffGraph(String),
    #[error("line {line}: {message}")]
    WeightSyntax { line: usize, message: String },
}
