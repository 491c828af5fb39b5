//! Reference solvers used to check the MILP path.
//!
//! [`enumerate_optimum`] searches every split of every AP's public demand
//! over the server columns and charges overflow with `zeta_j =
//! max(0, inflow_j - floor((1-alpha)K))`; it knows nothing about regimes.
//! [`mincost_flow_optimum`] solves the same placement as a min-cost flow with
//! successive shortest paths. Neither shares code with the simplex or the
//! branch and bound.

mod enumerate;
mod mincost;

pub use enumerate::{enumerate_optimum, EnumeratedOptimum, MAX_ENUMERATED_DEMAND, MAX_ENUMERATED_SERVERS};
pub use mincost::{mincost_flow, mincost_flow_optimum, FlowArc, FlowNetwork, FlowOutcome, COST_SCALE};

use thiserror::Error;

use crate::model::ModelError;
use crate::partition::PartitionError;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance too large to enumerate: demand {demand} (max {max_demand}), {servers} servers (max {max_servers})")]
    TooLarge {
        demand: u64,
        servers: usize,
        max_demand: u64,
        max_servers: usize,
    },
    #[error("no routing places all public demand")]
    NoRouting,
    #[error("flow is infeasible: {deficit} of {supply} requests cannot reach a server or the cloud")]
    Infeasible { deficit: u64, supply: u64 },
    #[error("optimality certificate failed: {0}")]
    Certificate(String),
    #[error("oracle inconsistency: {0}")]
    Internal(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}
