//! Best-first branch and bound over LP relaxations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use super::lp::LinearProgram;
use super::simplex::{solve_lp_with_bounds, LpStatus, SimplexOptions};
use super::MilpError;

#[derive(Debug, Clone)]
pub struct BnbOptions {
    /// Distance from the nearest integer below which a value counts as integral.
    pub integrality_tol: f64,
    /// Nodes whose bound is within this of the incumbent are pruned.
    pub prune_tol: f64,
    pub max_nodes: u64,
    pub simplex: SimplexOptions,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            integrality_tol: 1e-6,
            prune_tol: 1e-9,
            max_nodes: 1_000_000,
            simplex: SimplexOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnbStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbResult {
    pub status: BnbStatus,
    pub objective: f64,
    pub assignment: Vec<f64>,
    /// Nodes whose relaxation was solved.
    pub nodes: u64,
    pub pivots: u64,
    pub wall_time: Duration,
}

struct Node {
    lower: Vec<f64>,
    upper: Vec<f64>,
    bound: f64,
    seq: u64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl Ord for Node {
    // BinaryHeap pops the maximum: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn branch_and_bound(lp: &LinearProgram) -> Result<BnbResult, MilpError> {
    branch_and_bound_with(lp, &BnbOptions::default())
}

/// Exact minimum of `lp` under its integrality requirements.
///
/// Branches on the integer variable whose relaxed value is farthest from an
/// integer (lowest index on ties); the down child gets `x <= floor(v)` and
/// the up child `x >= ceil(v)`.
pub fn branch_and_bound_with(lp: &LinearProgram, options: &BnbOptions) -> Result<BnbResult, MilpError> {
    lp.check()?;
    let started = Instant::now();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        lower: lp.lower.clone(),
        upper: lp.upper.clone(),
        bound: f64::NEG_INFINITY,
        seq,
    });

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0u64;
    let mut pivots = 0u64;

    while let Some(node) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if node.bound >= best - options.prune_tol {
                // best-first: every remaining node is at least as bad
                break;
            }
        }
        nodes += 1;
        if nodes > options.max_nodes {
            return Err(MilpError::NodeLimit(options.max_nodes));
        }
        let relaxation = solve_lp_with_bounds(lp, &node.lower, &node.upper, &options.simplex)?;
        pivots += relaxation.pivots;
        if relaxation.status == LpStatus::Infeasible {
            continue;
        }
        if let Some((best, _)) = &incumbent {
            if relaxation.objective >= best - options.prune_tol {
                continue;
            }
        }

        let mut branch: Option<(usize, f64)> = None;
        for j in lp.integer_vars() {
            let v = relaxation.x[j];
            let distance = (v - v.round()).abs();
            if distance > options.integrality_tol && branch.is_none_or(|(_, d)| distance > d) {
                branch = Some((j, distance));
            }
        }

        match branch {
            None => {
                let mut x = relaxation.x;
                for j in lp.integer_vars() {
                    x[j] = x[j].round();
                }
                let objective = lp.objective_value(&x);
                if incumbent.as_ref().is_none_or(|(best, _)| objective < *best) {
                    incumbent = Some((objective, x));
                }
            }
            Some((j, _)) => {
                let v = relaxation.x[j];
                let mut down_upper = node.upper.clone();
                down_upper[j] = v.floor();
                let mut up_lower = node.lower.clone();
                up_lower[j] = v.ceil();
                seq += 1;
                heap.push(Node {
                    lower: node.lower.clone(),
                    upper: down_upper,
                    bound: relaxation.objective,
                    seq,
                });
                seq += 1;
                heap.push(Node {
                    lower: up_lower,
                    upper: node.upper,
                    bound: relaxation.objective,
                    seq,
                });
            }
        }
    }

    let wall_time = started.elapsed();
    match incumbent {
        Some((objective, assignment)) => {
            let violation = lp.max_violation(&assignment);
            if violation > options.simplex.feasibility_tol {
                return Err(MilpError::Internal(format!(
                    "incumbent violates the constraints by {violation:e}"
                )));
            }
            Ok(BnbResult {
                status: BnbStatus::Optimal,
                objective,
                assignment,
                nodes,
                pivots,
                wall_time,
            })
        }
        None => Ok(BnbResult {
            status: BnbStatus::Infeasible,
            objective: f64::INFINITY,
            assignment: Vec::new(),
            nodes,
            pivots,
            wall_time,
        }),
    }
}
