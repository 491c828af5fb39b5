//! Request scheduling for mixed public/private services over hybrid edge
//! servers in a wireless metropolitan area network.
//!
//! The pipeline is:
//!
//! 1. [`model`] describes the network (APs, links, delays), the resource
//!    profile and the request load, and evaluates the total-delay objective
//!    of any candidate schedule.
//! 2. [`partition`] admits requests against the per-AP communication
//!    capacity and classifies the instance into one of four resource regimes.
//! 3. [`milp`] builds the linear integer program for that regime and solves
//!    it with branch and bound over a primal simplex relaxation.
//! 4. [`oracle`] holds independent reference solvers (exhaustive search and
//!    min-cost flow) used to cross-check the MILP path.
//! 5. [`ingest`] turns geo-tagged order logs into scenarios.
//! 6. [`sweep`] runs the parameter sweeps and aggregates metrics.
//!
//! Batch work (all-pairs shortest paths, grid binning, sweeps, oracle
//! batches) is data-parallel through [`par`] when the `parallel` feature is
//! enabled, and falls back to plain iteration otherwise.

pub mod generate;
pub mod ingest;
pub mod milp;
pub mod model;
pub mod oracle;
pub mod par;
pub mod partition;
pub mod sweep;

pub use milp::solve;
pub use model::{
    evaluate_objective, shortest_path_delays, validate_instance, NetworkTopology, ResourceProfile,
    ScenarioInstance, ScheduleSolution, SolveReport,
};
pub use partition::{classify, Regime, RegimeDescriptor};
