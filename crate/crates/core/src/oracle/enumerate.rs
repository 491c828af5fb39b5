use std::collections::BTreeMap;

use super::OracleError;
use crate::model::{delays_agree, evaluate_objective, RoutingMatrix, ScenarioInstance, ScheduleSolution, DELAY_TOLERANCE};

pub const MAX_ENUMERATED_DEMAND: u64 = 40;
pub const MAX_ENUMERATED_SERVERS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedOptimum {
    pub objective: f64,
    pub solution: ScheduleSolution,
    /// Partial assignments generated during the search.
    pub assignments_examined: u64,
}

/// All ways to write `total` as an ordered sum of `parts` nonnegative counts.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn go(left: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=left {
            prefix.push(first);
            go(left - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    match parts {
        0 if total == 0 => out.push(Vec::new()),
        0 => {}
        _ => go(total, parts, &mut Vec::with_capacity(parts), &mut out),
    }
    out
}

#[derive(Clone)]
struct Entry {
    cost: f64,
    parent: Vec<u32>,
    split: Vec<u32>,
}

/// Exact optimum by exhaustive search over request counts.
///
/// Requests within an AP are interchangeable, so the search runs over the
/// per-server split of each AP's demand. Partial assignments reaching the
/// same server inflow vector are merged, keeping the cheapest routing; the
/// overflow charge depends only on the final inflows, so nothing optimal is
/// discarded.
pub fn enumerate_optimum(instance: &ScenarioInstance) -> Result<EnumeratedOptimum, OracleError> {
    let n = instance.len();
    let servers = instance.server_indices();
    let m = servers.len();
    let demand: Vec<u64> = (0..n).map(|i| instance.public_demand(i)).collect();
    let total: u64 = demand.iter().sum();
    if total > MAX_ENUMERATED_DEMAND || m > MAX_ENUMERATED_SERVERS {
        return Err(OracleError::TooLarge {
            demand: total,
            servers: m,
            max_demand: MAX_ENUMERATED_DEMAND,
            max_servers: MAX_ENUMERATED_SERVERS,
        });
    }

    let delays = instance.topology.delays();
    let mut layers: Vec<BTreeMap<Vec<u32>, Entry>> = Vec::with_capacity(n + 1);
    let mut start = BTreeMap::new();
    start.insert(
        vec![0u32; m],
        Entry {
            cost: 0.0,
            parent: Vec::new(),
            split: Vec::new(),
        },
    );
    layers.push(start);
    let mut examined = 0u64;

    for i in 0..n {
        let splits = compositions(demand[i] as u32, m);
        let mut next: BTreeMap<Vec<u32>, Entry> = BTreeMap::new();
        for (state, entry) in layers.last().unwrap() {
            for split in &splits {
                examined += 1;
                let inflow: Vec<u32> = state.iter().zip(split).map(|(a, b)| a + b).collect();
                let cost = entry.cost
                    + split
                        .iter()
                        .zip(&servers)
                        .map(|(&c, &j)| delays.get(i, j) * c as f64)
                        .sum::<f64>();
                let better = next.get(&inflow).is_none_or(|e| cost < e.cost);
                if better {
                    next.insert(
                        inflow,
                        Entry {
                            cost,
                            parent: state.clone(),
                            split: split.clone(),
                        },
                    );
                }
            }
        }
        layers.push(next);
    }

    let capacity = instance.profile.public_capacity();
    let lambda = instance.profile.lambda;
    let mut best: Option<(f64, &Vec<u32>)> = None;
    for (state, entry) in layers.last().unwrap() {
        let overflow: u64 = state.iter().map(|&f| (f as u64).saturating_sub(capacity)).sum();
        let value = entry.cost + lambda * overflow as f64;
        if best.is_none_or(|(b, _)| value < b) {
            best = Some((value, state));
        }
    }
    let Some((_, final_state)) = best else {
        return Err(OracleError::NoRouting);
    };

    let mut y = RoutingMatrix::zeros(n, servers.clone());
    let mut state = final_state.clone();
    for i in (0..n).rev() {
        let entry = &layers[i + 1][&state];
        for (s, &c) in entry.split.iter().enumerate() {
            y.set_by_column(i, s, c as u64);
        }
        state = entry.parent.clone();
    }
    let mut solution = ScheduleSolution::from_routing(instance, y);
    let objective = evaluate_objective(instance, &solution)?;
    let search_value = best.unwrap().0 + (0..n).map(|i| instance.pi[i] * solution.chi[i] as f64).sum::<f64>();
    if !delays_agree(objective, search_value, DELAY_TOLERANCE) {
        return Err(OracleError::Internal(format!(
            "search value {search_value} disagrees with evaluated {objective}"
        )));
    }
    solution.objective = objective;
    Ok(EnumeratedOptimum {
        objective,
        solution,
        assignments_examined: examined,
    })
}
