use std::time::Instant;

use super::bnb::{branch_and_bound_with, BnbOptions, BnbStatus};
use super::build::build_model;
use super::MilpError;
use crate::model::{
    delay_breakdown, delays_agree, private_service_rate, public_service_rate, validate_instance, ScenarioInstance,
    ScheduleSolution, SolveReport, DELAY_TOLERANCE,
};
use crate::par::{self, Execution};
use crate::partition::classify;

pub fn solve(instance: &ScenarioInstance) -> Result<SolveReport, MilpError> {
    solve_with(instance, &BnbOptions::default())
}

/// Classify, build the regime model, run branch and bound, and re-evaluate
/// the assembled schedule from scratch.
pub fn solve_with(instance: &ScenarioInstance, options: &BnbOptions) -> Result<SolveReport, MilpError> {
    let violations = validate_instance(instance);
    if !violations.is_empty() {
        return Err(MilpError::InvalidInstance(violations));
    }
    let started = Instant::now();
    let descriptor = classify(instance)?;
    let model = build_model(instance, &descriptor)?;
    let result = branch_and_bound_with(&model.lp, options)?;
    if result.status != BnbStatus::Optimal {
        return Err(MilpError::Internal(format!("{} model reported infeasible", descriptor.regime)));
    }

    let (y, lp_zeta) = model.decode(&result.assignment);
    let mut solution = ScheduleSolution::from_routing(instance, y);
    for (s, &j) in model.servers.iter().enumerate() {
        if solution.zeta[j] != lp_zeta[s] {
            return Err(MilpError::Internal(format!(
                "offload at AP {} is {} in the model but overflow is {}",
                j + 1,
                lp_zeta[s],
                solution.zeta[j]
            )));
        }
    }
    let delays = delay_breakdown(instance, &solution)?;
    let solver_total = result.objective + model.constant_delay;
    if !delays_agree(delays.total, solver_total, DELAY_TOLERANCE) {
        return Err(MilpError::Internal(format!(
            "solver objective {solver_total} disagrees with evaluated delay {}",
            delays.total
        )));
    }
    solution.objective = delays.total;
    let wall_time = started.elapsed();

    let cloud_offload = solution.total_offload();
    Ok(SolveReport {
        regime: descriptor.regime,
        branch_nodes: result.nodes,
        lp_pivots: result.pivots,
        wall_time,
        private_service_rate: private_service_rate(instance),
        public_service_rate: public_service_rate(instance, cloud_offload),
        cloud_offload,
        blocked: solution.total_blocked(),
        public_demand: descriptor.pu,
        total_public_capacity: descriptor.total_public_capacity,
        delays,
        solution,
    })
}

/// Solves independent instances, in parallel when `exec` allows.
pub fn solve_batch(instances: &[ScenarioInstance], exec: Execution) -> Vec<Result<SolveReport, MilpError>> {
    par::map(exec, instances, solve)
}
