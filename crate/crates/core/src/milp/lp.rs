use serde::Serialize;

use super::MilpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    Le,
    Eq,
    Ge,
}

/// One sparse row: `sum(coef * x[var]) <cmp> rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraint {
    pub coefficients: Vec<(usize, f64)>,
    pub comparison: Comparison,
    pub rhs: f64,
}

/// Minimization problem with per-variable bounds and integrality flags.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, cost: f64, lower: f64, upper: f64, integer: bool) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.integer.push(integer);
        self.objective.len() - 1
    }

    pub fn add_constraint(&mut self, coefficients: Vec<(usize, f64)>, comparison: Comparison, rhs: f64) -> usize {
        self.constraints.push(Constraint { coefficients, comparison, rhs });
        self.constraints.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn integer_vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.integer.iter().enumerate().filter_map(|(j, &int)| int.then_some(j))
    }

    pub fn check(&self) -> Result<(), MilpError> {
        let n = self.objective.len();
        if self.lower.len() != n || self.upper.len() != n || self.integer.len() != n {
            return Err(MilpError::InvalidProgram("bound/integrality vectors differ in length from the objective".into()));
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(MilpError::InvalidProgram(format!("objective coefficient {j} is not finite")));
        }
        for j in 0..n {
            if !self.lower[j].is_finite() {
                return Err(MilpError::InvalidProgram(format!("variable {j} needs a finite lower bound")));
            }
            if self.upper[j].is_nan() || self.lower[j] > self.upper[j] {
                return Err(MilpError::InvalidProgram(format!(
                    "variable {j} has bounds [{}, {}]",
                    self.lower[j], self.upper[j]
                )));
            }
        }
        for (r, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(MilpError::InvalidProgram(format!("row {r} has a non-finite right-hand side")));
            }
            for &(j, a) in &row.coefficients {
                if j >= n || !a.is_finite() {
                    return Err(MilpError::InvalidProgram(format!("row {r} has a bad entry ({j}, {a})")));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound, scaled by `max(1, |rhs|)`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.constraints {
            let lhs: f64 = row.coefficients.iter().map(|&(j, a)| a * x[j]).sum();
            let excess = match row.comparison {
                Comparison::Le => lhs - row.rhs,
                Comparison::Ge => row.rhs - lhs,
                Comparison::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(excess / row.rhs.abs().max(1.0));
        }
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        worst
    }
}
