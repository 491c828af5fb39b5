use super::lp::{Comparison, LinearProgram};
use super::MilpError;
use crate::model::{RoutingMatrix, ScenarioInstance};
use crate::partition::{classify, Regime, RegimeDescriptor};

/// Integer program for one classified instance plus the variable layout
/// needed to decode its solution.
///
/// Variables are `y[i][s]` for every AP `i` with public demand and every
/// server column `s` (index `k * m + s` for the `k`-th such AP), followed by
/// one cloud-offload variable per server in the regimes that use the cloud.
/// APs without public demand route nothing and get no variables. Rows are
/// the per-AP demand equalities, the per-server public capacity caps and,
/// when offloading, one equality fixing the total offload to the capacity
/// shortfall.
#[derive(Debug, Clone)]
pub struct RegimeModel {
    pub lp: LinearProgram,
    pub regime: Regime,
    /// AP index of each server column.
    pub servers: Vec<usize>,
    pub ap_count: usize,
    /// APs with public demand, in index order; one block of `y` each.
    pub active: Vec<usize>,
    /// `sum(pi_i * chi_i)`, excluded from the LP objective.
    pub constant_delay: f64,
    zeta_offset: Option<usize>,
}

impl RegimeModel {
    pub fn y_var(&self, i: usize, s: usize) -> Option<usize> {
        self.active.binary_search(&i).ok().map(|k| k * self.servers.len() + s)
    }

    pub fn zeta_var(&self, s: usize) -> Option<usize> {
        self.zeta_offset.map(|o| o + s)
    }

    pub fn y_var_count(&self) -> usize {
        self.active.len() * self.servers.len()
    }

    pub fn zeta_var_count(&self) -> usize {
        if self.zeta_offset.is_some() {
            self.servers.len()
        } else {
            0
        }
    }

    /// Routing matrix and per-server offload read off an integral assignment.
    pub fn decode(&self, x: &[f64]) -> (RoutingMatrix, Vec<u64>) {
        let mut y = RoutingMatrix::zeros(self.ap_count, self.servers.clone());
        let m = self.servers.len();
        for (k, &i) in self.active.iter().enumerate() {
            for s in 0..m {
                y.set_by_column(i, s, x[k * m + s].round().max(0.0) as u64);
            }
        }
        let zeta = (0..self.servers.len())
            .map(|s| self.zeta_var(s).map_or(0, |v| x[v].round().max(0.0) as u64))
            .collect();
        (y, zeta)
    }
}

pub fn build_model(instance: &ScenarioInstance, descriptor: &RegimeDescriptor) -> Result<RegimeModel, MilpError> {
    let fresh = classify(instance)?;
    if &fresh != descriptor {
        return Err(MilpError::DescriptorMismatch(format!(
            "descriptor says {} (pu {}), instance classifies as {} (pu {})",
            descriptor.regime, descriptor.pu, fresh.regime, fresh.pu
        )));
    }

    let n = instance.len();
    let servers = instance.server_indices();
    let m = servers.len();
    let delays = instance.topology.delays();
    let capacity = instance.profile.public_capacity() as f64;
    let mut lp = LinearProgram::new();

    let active: Vec<usize> = (0..n).filter(|&i| descriptor.public_demand[i] > 0).collect();
    for &i in &active {
        for &j in &servers {
            lp.add_variable(delays.get(i, j), 0.0, f64::INFINITY, true);
        }
    }
    let zeta_offset = descriptor.regime.uses_cloud().then(|| {
        let offset = lp.num_vars();
        for _ in 0..m {
            lp.add_variable(instance.profile.lambda, 0.0, f64::INFINITY, true);
        }
        offset
    });

    for (k, &i) in active.iter().enumerate() {
        let row = (0..m).map(|s| (k * m + s, 1.0)).collect();
        lp.add_constraint(row, Comparison::Eq, descriptor.public_demand[i] as f64);
    }
    for s in 0..m {
        let mut row: Vec<(usize, f64)> = (0..active.len()).map(|k| (k * m + s, 1.0)).collect();
        if let Some(offset) = zeta_offset {
            row.push((offset + s, -1.0));
        }
        lp.add_constraint(row, Comparison::Le, capacity);
    }
    if let Some(offset) = zeta_offset {
        let row = (0..m).map(|s| (offset + s, 1.0)).collect();
        lp.add_constraint(row, Comparison::Eq, descriptor.required_offload() as f64);
    }

    let constant_delay = (0..n).map(|i| instance.pi[i] * descriptor.chi[i] as f64).sum();
    Ok(RegimeModel {
        lp,
        regime: descriptor.regime,
        servers,
        ap_count: n,
        active,
        constant_delay,
        zeta_offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::fixtures;
    use crate::milp::{solve_lp, LpStatus};

    #[test]
    fn t3_model_shape() {
        let instance = fixtures::t3();
        let descriptor = classify(&instance).unwrap();
        let model = build_model(&instance, &descriptor).unwrap();
        assert_eq!(model.y_var_count(), 3);
        assert_eq!(model.zeta_var_count(), 1);
        assert_eq!(model.lp.num_vars(), 4);
        let rhs: Vec<f64> = model.lp.constraints.iter().map(|c| c.rhs).collect();
        assert_eq!(rhs, vec![4.0, 2.0, 4.0, 7.0, 3.0]);
        assert_eq!(model.lp.objective, vec![1.0, 0.0, 1.0, 20.0]);
        assert!((model.constant_delay - 1.2).abs() < 1e-12);
    }

    #[test]
    fn idle_aps_get_no_variables() {
        let mut instance = fixtures::t3();
        instance.theta[0] = 0;
        let descriptor = classify(&instance).unwrap();
        let model = build_model(&instance, &descriptor).unwrap();
        assert_eq!(model.active, vec![1, 2]);
        assert_eq!(model.y_var(0, 0), None);
        assert_eq!(model.y_var(2, 0), Some(1));
        assert_eq!(model.y_var_count(), 2);
        let (y, _) = model.decode(&solve_lp(&model.lp).unwrap().x);
        assert_eq!(y.row_total(0), 0);
    }

    #[test]
    fn t3_relaxation_is_integral() {
        let instance = fixtures::t3();
        let model = build_model(&instance, &classify(&instance).unwrap()).unwrap();
        let sol = solve_lp(&model.lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.objective, 68.0);
        assert_eq!(sol.x, vec![4.0, 2.0, 4.0, 3.0]);
    }

    #[test]
    fn sksw_toy_has_no_offload_variables() {
        let instance = fixtures::two_servers_symmetric();
        let descriptor = classify(&instance).unwrap();
        assert_eq!(descriptor.regime, Regime::Sksw);
        let model = build_model(&instance, &descriptor).unwrap();
        assert_eq!(model.lp.num_vars(), 4);
        assert_eq!(model.zeta_var(0), None);
        assert_eq!(model.lp.constraints.len(), 4);
    }

    #[test]
    fn capacity_shortfall_without_offload_is_infeasible() {
        // SKSW-shaped rows with demand 10 against a single cap of 7
        let instance = fixtures::t3();
        let mut descriptor = classify(&instance).unwrap();
        descriptor.regime = Regime::Sksw;
        descriptor.cloud_required = false;
        assert!(matches!(build_model(&instance, &descriptor), Err(MilpError::DescriptorMismatch(_))));

        let mut lp = LinearProgram::new();
        let vars: Vec<usize> = (0..3).map(|_| lp.add_variable(1.0, 0.0, f64::INFINITY, true)).collect();
        for (&v, d) in vars.iter().zip([4.0, 2.0, 4.0]) {
            lp.add_constraint(vec![(v, 1.0)], Comparison::Eq, d);
        }
        lp.add_constraint(vars.iter().map(|&v| (v, 1.0)).collect(), Comparison::Le, 7.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }
}
