//! Linear integer programs for the four regimes and the exact solver stack:
//! a revised primal simplex for relaxations and best-first branch and bound
//! on top of it.

mod bnb;
mod build;
mod lp;
mod simplex;
mod solve;

pub use bnb::{branch_and_bound, branch_and_bound_with, BnbOptions, BnbResult, BnbStatus};
pub use build::{build_model, RegimeModel};
pub use lp::{Comparison, Constraint, LinearProgram};
pub use simplex::{solve_lp, solve_lp_with, solve_lp_with_bounds, LpSolution, LpStatus, SimplexOptions};
pub use solve::{solve, solve_batch, solve_with};

use thiserror::Error;

use crate::model::{ModelError, Violation};
use crate::partition::PartitionError;

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("malformed linear program: {0}")]
    InvalidProgram(String),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("branch and bound exceeded {0} nodes")]
    NodeLimit(u64),
    #[error("simplex exceeded {0} pivots")]
    PivotLimit(u64),
    #[error("descriptor does not match instance: {0}")]
    DescriptorMismatch(String),
    #[error("invalid instance: {}", format_violations(.0))]
    InvalidInstance(Vec<Violation>),
    #[error("internal solver error: {0}")]
    Internal(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn format_violations(violations: &[Violation]) -> String {
    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
