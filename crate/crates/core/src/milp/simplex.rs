//! Two-phase revised primal simplex over a dense explicit basis inverse.
//!
//! Pricing is partial: the most negative reduced cost within a rotating
//! segment of columns. After a run of degenerate pivots the solver falls back
//! to Bland's lowest-index rule until a pivot makes progress again, which
//! rules out cycling. Ratio-test ties always go to the lowest basic variable
//! index. Everything is deterministic for a given input.

use super::lp::{Comparison, LinearProgram};
use super::MilpError;

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
    pub degenerate_limit: usize,
    pub max_pivots: u64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            pivot_tol: 1e-9,
            degenerate_limit: 25,
            max_pivots: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    pub pivots: u64,
}

impl LpSolution {
    fn infeasible(pivots: u64) -> Self {
        LpSolution {
            status: LpStatus::Infeasible,
            objective: f64::INFINITY,
            x: Vec::new(),
            pivots,
        }
    }
}

/// Solves the continuous relaxation of `lp` (integrality flags are ignored).
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, MilpError> {
    solve_lp_with(lp, &SimplexOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, options: &SimplexOptions) -> Result<LpSolution, MilpError> {
    lp.check()?;
    solve_bounded(lp, &lp.lower, &lp.upper, options)
}

/// Solves the relaxation with the variable bounds replaced by `lower`/`upper`.
pub fn solve_lp_with_bounds(
    lp: &LinearProgram,
    lower: &[f64],
    upper: &[f64],
    options: &SimplexOptions,
) -> Result<LpSolution, MilpError> {
    if lower.len() != lp.num_vars() || upper.len() != lp.num_vars() {
        return Err(MilpError::InvalidProgram("bound overrides have the wrong length".into()));
    }
    solve_bounded(lp, lower, upper, options)
}

/// `A x {<=,=} b`, `x >= 0`, `b >= 0`, with an all-slack/artificial starting basis.
struct StandardForm {
    rows: usize,
    columns: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    cost: Vec<f64>,
    structural: usize,
    first_artificial: usize,
    basis: Vec<usize>,
}

fn standard_form(lp: &LinearProgram, lower: &[f64], upper: &[f64], feas_tol: f64) -> Option<StandardForm> {
    let n = lp.num_vars();
    let mut rows: Vec<(Vec<(usize, f64)>, Comparison, f64)> = Vec::with_capacity(lp.constraints.len());
    for row in &lp.constraints {
        let shift: f64 = row.coefficients.iter().map(|&(j, a)| a * lower[j]).sum();
        rows.push((row.coefficients.clone(), row.comparison, row.rhs - shift));
    }
    for j in 0..n {
        if upper[j].is_finite() {
            let span = upper[j] - lower[j];
            if span < -feas_tol {
                return None;
            }
            rows.push((vec![(j, 1.0)], Comparison::Le, span.max(0.0)));
        }
    }

    let m = rows.len();
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut b = Vec::with_capacity(m);
    let mut senses = Vec::with_capacity(m);
    for (r, (coefficients, comparison, rhs)) in rows.into_iter().enumerate() {
        let (sign, comparison) = if rhs < 0.0 {
            let flipped = match comparison {
                Comparison::Le => Comparison::Ge,
                Comparison::Ge => Comparison::Le,
                Comparison::Eq => Comparison::Eq,
            };
            (-1.0, flipped)
        } else {
            (1.0, comparison)
        };
        for (j, a) in coefficients {
            if a != 0.0 {
                columns[j].push((r, sign * a));
            }
        }
        b.push(sign * rhs);
        senses.push(comparison);
    }

    let mut basis = vec![usize::MAX; m];
    for (r, sense) in senses.iter().enumerate() {
        match sense {
            Comparison::Le => {
                basis[r] = columns.len();
                columns.push(vec![(r, 1.0)]);
            }
            Comparison::Ge => columns.push(vec![(r, -1.0)]),
            Comparison::Eq => {}
        }
    }
    let first_artificial = columns.len();
    for (r, sense) in senses.iter().enumerate() {
        if *sense != Comparison::Le {
            basis[r] = columns.len();
            columns.push(vec![(r, 1.0)]);
        }
    }
    let mut cost = vec![0.0; columns.len()];
    cost[..n].copy_from_slice(&lp.objective);
    Some(StandardForm {
        rows: m,
        columns,
        b,
        cost,
        structural: n,
        first_artificial,
        basis,
    })
}

/// Pivots between drift checks; `B^-1` is rebuilt when the drift exceeds
/// `DRIFT_TOL` relative to the right-hand side or after `refactor_every` pivots regardless.
/// Columns scanned per partial-pricing segment.
const PRICING_SEGMENT: usize = 256;
const DRIFT_CHECK_EVERY: usize = 50;
const DRIFT_TOL: f64 = 1e-9;

enum PhaseEnd {
    Optimal,
    Unbounded,
}

struct Solver<'a> {
    form: &'a StandardForm,
    options: &'a SimplexOptions,
    basis: Vec<usize>,
    row_of: Vec<Option<usize>>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    scratch: Vec<f64>,
    pivots: u64,
    since_refactor: usize,
    refactor_every: usize,
    price_from: usize,
    /// `1 + max |b|`, for the relative drift test.
    scale: f64,
}

impl<'a> Solver<'a> {
    fn new(form: &'a StandardForm, options: &'a SimplexOptions) -> Self {
        let m = form.rows;
        let mut binv = vec![0.0; m * m];
        for r in 0..m {
            binv[r * m + r] = 1.0;
        }
        let mut row_of = vec![None; form.columns.len()];
        for (r, &col) in form.basis.iter().enumerate() {
            row_of[col] = Some(r);
        }
        Solver {
            form,
            options,
            basis: form.basis.clone(),
            row_of,
            binv,
            xb: form.b.clone(),
            scratch: vec![0.0; m],
            pivots: 0,
            since_refactor: 0,
            refactor_every: (20 * m).max(1000),
            price_from: 0,
            scale: 1.0 + form.b.iter().fold(0.0_f64, |a, &v| a.max(v.abs())),
        }
    }

    /// `B^-1 a_j`
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.form.rows;
        let mut out = vec![0.0; m];
        for &(r, v) in &self.form.columns[j] {
            for (i, o) in out.iter_mut().enumerate() {
                *o += v * self.binv[i * m + r];
            }
        }
        out
    }

    fn duals(&self, costs: &[f64], duals: &mut [f64]) {
        let m = self.form.rows;
        duals.fill(0.0);
        for i in 0..m {
            let cb = costs[self.basis[i]];
            if cb != 0.0 {
                for (d, &v) in duals.iter_mut().zip(&self.binv[i * m..(i + 1) * m]) {
                    *d += cb * v;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) -> Result<(), MilpError> {
        let m = self.form.rows;
        let piv = alpha[r];
        let theta = self.xb[r].max(0.0) / piv;
        for i in 0..m {
            if i != r && alpha[i] != 0.0 {
                self.xb[i] -= alpha[i] * theta;
                if self.xb[i].abs() < 1e-12 {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[r] = theta;

        for k in 0..m {
            self.scratch[k] = self.binv[r * m + k] / piv;
        }
        for i in 0..m {
            let a = alpha[i];
            if i != r && a != 0.0 {
                let row = &mut self.binv[i * m..(i + 1) * m];
                for (v, &p) in row.iter_mut().zip(&self.scratch) {
                    *v -= a * p;
                }
            }
        }
        self.binv[r * m..(r + 1) * m].copy_from_slice(&self.scratch);

        self.row_of[self.basis[r]] = None;
        self.basis[r] = q;
        self.row_of[q] = Some(r);
        self.pivots += 1;
        if self.pivots >= self.options.max_pivots {
            return Err(MilpError::PivotLimit(self.options.max_pivots));
        }
        self.since_refactor += 1;
        Ok(())
    }

    /// Largest residual of `B x_B = b` and of the basic reduced costs.
    fn drift(&self, costs: &[f64], duals: &[f64]) -> f64 {
        let mut residual = self.form.b.clone();
        let mut worst = 0.0_f64;
        for (k, &col) in self.basis.iter().enumerate() {
            let mut reduced = costs[col];
            for &(r, v) in &self.form.columns[col] {
                residual[r] -= v * self.xb[k];
                reduced -= duals[r] * v;
            }
            worst = worst.max(reduced.abs());
        }
        residual.iter().fold(worst, |a, v| a.max(v.abs()))
    }

    /// Recomputes `B^-1` from scratch (Gauss-Jordan, partial pivoting) and the basic values.
    fn refactor(&mut self) -> Result<(), MilpError> {
        let m = self.form.rows;
        let mut dense = vec![0.0; m * m];
        for (k, &col) in self.basis.iter().enumerate() {
            for &(r, v) in &self.form.columns[col] {
                dense[r * m + k] += v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for r in 0..m {
            inv[r * m + r] = 1.0;
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&a, &b| dense[a * m + c].abs().total_cmp(&dense[b * m + c].abs()).then(b.cmp(&a)))
                .unwrap();
            let pv = dense[p * m + c];
            if pv.abs() < 1e-12 {
                return Err(MilpError::Internal("basis matrix became singular".into()));
            }
            if p != c {
                for k in 0..m {
                    dense.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let mut dense_nz = Vec::new();
            let mut inv_nz = Vec::new();
            for k in 0..m {
                dense[c * m + k] /= pv;
                inv[c * m + k] /= pv;
                if dense[c * m + k] != 0.0 {
                    dense_nz.push(k);
                }
                if inv[c * m + k] != 0.0 {
                    inv_nz.push(k);
                }
            }
            for i in 0..m {
                let f = dense[i * m + c];
                if i != c && f != 0.0 {
                    for &k in &dense_nz {
                        dense[i * m + k] -= f * dense[c * m + k];
                    }
                    for &k in &inv_nz {
                        inv[i * m + k] -= f * inv[c * m + k];
                    }
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            let v: f64 = (0..m).map(|k| self.binv[i * m + k] * self.form.b[k]).sum();
            self.xb[i] = if v.abs() < 1e-12 { 0.0 } else { v };
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn reduced_cost(&self, costs: &[f64], duals: &[f64], j: usize) -> f64 {
        costs[j] - self.form.columns[j].iter().map(|&(r, v)| duals[r] * v).sum::<f64>()
    }

    /// Lowest-index column with a negative reduced cost.
    fn price_bland(&self, costs: &[f64], duals: &[f64]) -> Option<(usize, f64)> {
        (0..self.form.first_artificial)
            .filter(|&j| self.row_of[j].is_none())
            .map(|j| (j, self.reduced_cost(costs, duals, j)))
            .find(|&(_, d)| d < -self.options.optimality_tol)
    }

    /// Most negative reduced cost within the next segment that has one,
    /// segments taken round-robin from where the last search stopped.
    fn price_partial(&mut self, costs: &[f64], duals: &[f64]) -> Option<(usize, f64)> {
        let n = self.form.first_artificial;
        let mut scanned = 0;
        while scanned < n {
            let start = self.price_from;
            let end = (start + PRICING_SEGMENT).min(n);
            let mut best: Option<(usize, f64)> = None;
            for j in start..end {
                if self.row_of[j].is_some() {
                    continue;
                }
                let d = self.reduced_cost(costs, duals, j);
                if d < best.map_or(-self.options.optimality_tol, |b| b.1) {
                    best = Some((j, d));
                }
            }
            scanned += end - start;
            self.price_from = if end == n { 0 } else { end };
            if best.is_some() {
                return best;
            }
        }
        None
    }

    fn run(&mut self, costs: &[f64]) -> Result<PhaseEnd, MilpError> {
        let m = self.form.rows;
        let opts = self.options;
        let mut duals = vec![0.0; m];
        let mut degenerate_run = 0usize;
        let mut bland = false;
        self.duals(costs, &mut duals);
        loop {
            let entering = if bland { self.price_bland(costs, &duals) } else { self.price_partial(costs, &duals) };
            let Some((q, dq)) = entering else {
                return Ok(PhaseEnd::Optimal);
            };

            let alpha = self.ftran(q);
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..m {
                if alpha[i] > opts.pivot_tol {
                    let ratio = self.xb[i].max(0.0) / alpha[i];
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            ratio < best_ratio - 1e-12
                                || (ratio <= best_ratio + 1e-12 && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        best_ratio = best_ratio.min(ratio);
                        leave = Some(i);
                    }
                }
            }
            let Some(r) = leave else {
                return Ok(PhaseEnd::Unbounded);
            };

            if best_ratio <= opts.feasibility_tol {
                degenerate_run += 1;
                if degenerate_run >= opts.degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
            self.pivot(r, q, &alpha)?;
            // the new row r of B^-1 carries the whole dual change
            for (d, &v) in duals.iter_mut().zip(&self.scratch) {
                *d += dq * v;
            }
            if self.since_refactor % DRIFT_CHECK_EVERY == 0
                && (self.since_refactor >= self.refactor_every || self.drift(costs, &duals) > DRIFT_TOL * self.scale)
            {
                self.refactor()?;
                self.duals(costs, &mut duals);
            }
        }
    }

    /// Pivots basic artificials (all at zero after a feasible phase one) out of
    /// the basis where some real column can replace them; rows where none can
    /// are redundant and keep their artificial at zero.
    fn drive_out_artificials(&mut self) -> Result<(), MilpError> {
        let m = self.form.rows;
        for r in 0..m {
            if self.basis[r] < self.form.first_artificial {
                continue;
            }
            let replacement = (0..self.form.first_artificial).find(|&j| {
                self.row_of[j].is_none()
                    && self.form.columns[j]
                        .iter()
                        .map(|&(k, v)| self.binv[r * m + k] * v)
                        .sum::<f64>()
                        .abs()
                        > self.options.pivot_tol
            });
            if let Some(j) = replacement {
                let alpha = self.ftran(j);
                self.pivot(r, j, &alpha)?;
            }
        }
        Ok(())
    }
}

fn solve_bounded(
    lp: &LinearProgram,
    lower: &[f64],
    upper: &[f64],
    options: &SimplexOptions,
) -> Result<LpSolution, MilpError> {
    let Some(form) = standard_form(lp, lower, upper, options.feasibility_tol) else {
        return Ok(LpSolution::infeasible(0));
    };
    let mut solver = Solver::new(&form, options);

    if form.first_artificial < form.columns.len() {
        let phase_one: Vec<f64> = (0..form.columns.len())
            .map(|j| if j >= form.first_artificial { 1.0 } else { 0.0 })
            .collect();
        if let PhaseEnd::Unbounded = solver.run(&phase_one)? {
            return Err(MilpError::Internal("phase one reported unbounded".into()));
        }
        let infeasibility: f64 = (0..form.rows)
            .filter(|&r| solver.basis[r] >= form.first_artificial)
            .map(|r| solver.xb[r])
            .sum();
        let scale = 1.0 + form.b.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        if infeasibility > options.feasibility_tol * scale {
            return Ok(LpSolution::infeasible(solver.pivots));
        }
        solver.drive_out_artificials()?;
    }

    if let PhaseEnd::Unbounded = solver.run(&form.cost)? {
        return Err(MilpError::Unbounded);
    }

    let mut x = lower.to_vec();
    for (r, &col) in solver.basis.iter().enumerate() {
        if col < form.structural {
            x[col] += solver.xb[r];
        }
    }
    for v in &mut x {
        let nearest = v.round();
        if (*v - nearest).abs() < 1e-9 {
            *v = nearest;
        }
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: lp.objective_value(&x),
        x,
        pivots: solver.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn single_variable_bounds() {
        // minimize x subject to x >= 3, x <= 10
        let mut lp = LinearProgram::new();
        let x = lp.add_variable(1.0, 0.0, f64::INFINITY, false);
        lp.add_constraint(vec![(x, 1.0)], Comparison::Ge, 3.0);
        lp.add_constraint(vec![(x, 1.0)], Comparison::Le, 10.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_close(sol.x[0], 3.0);
        assert_close(sol.objective, 3.0);
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new();
        let x = lp.add_variable(-3.0, 0.0, f64::INFINITY, false);
        let y = lp.add_variable(-5.0, 0.0, f64::INFINITY, false);
        lp.add_constraint(vec![(x, 1.0)], Comparison::Le, 4.0);
        lp.add_constraint(vec![(y, 2.0)], Comparison::Le, 12.0);
        lp.add_constraint(vec![(x, 3.0), (y, 2.0)], Comparison::Le, 18.0);
        let sol = solve_lp(&lp).unwrap();
        assert_close(sol.x[0], 2.0);
        assert_close(sol.x[1], 6.0);
        assert_close(sol.objective, -36.0);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable(1.0, 0.0, f64::INFINITY, false);
        lp.add_constraint(vec![(x, 1.0)], Comparison::Eq, 10.0);
        lp.add_constraint(vec![(x, 1.0)], Comparison::Le, 7.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new();
        let x = lp.add_variable(-1.0, 0.0, f64::INFINITY, false);
        lp.add_constraint(vec![(x, 1.0)], Comparison::Ge, 1.0);
        assert!(matches!(solve_lp(&lp), Err(MilpError::Unbounded)));
    }

    #[test]
    fn shifted_bounds_and_negative_rhs() {
        // minimize x + y with x in [2, 5], y in [-3, 4], x - y >= 6 -> e.g. x = 2, y = -3 infeasible (5 < 6)
        // so x + y minimal along x - y = 6: x = 3, y = -3 -> 0
        let mut lp = LinearProgram::new();
        let x = lp.add_variable(1.0, 2.0, 5.0, false);
        let y = lp.add_variable(1.0, -3.0, 4.0, false);
        lp.add_constraint(vec![(x, 1.0), (y, -1.0)], Comparison::Ge, 6.0);
        lp.add_constraint(vec![(x, -1.0), (y, -1.0)], Comparison::Le, 10.0);
        let sol = solve_lp(&lp).unwrap();
        assert_close(sol.objective, 0.0);
        assert!(lp.max_violation(&sol.x) < 1e-9);
    }

    #[test]
    fn empty_bound_interval_is_infeasible() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable(1.0, 0.0, f64::INFINITY, false);
        let sol = solve_lp_with_bounds(&lp, &[3.0], &[2.0], &SimplexOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        let _ = x;
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        // x + y = 4 twice, x - y = 0
        let mut lp = LinearProgram::new();
        let x = lp.add_variable(1.0, 0.0, f64::INFINITY, false);
        let y = lp.add_variable(2.0, 0.0, f64::INFINITY, false);
        lp.add_constraint(vec![(x, 1.0), (y, 1.0)], Comparison::Eq, 4.0);
        lp.add_constraint(vec![(x, 1.0), (y, 1.0)], Comparison::Eq, 4.0);
        lp.add_constraint(vec![(x, 1.0), (y, -1.0)], Comparison::Eq, 0.0);
        let sol = solve_lp(&lp).unwrap();
        assert_close(sol.x[0], 2.0);
        assert_close(sol.x[1], 2.0);
        assert_close(sol.objective, 6.0);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under pure Dantzig pricing with naive tie-breaking.
        let mut lp = LinearProgram::new();
        let v: Vec<usize> = [-0.75, 150.0, -0.02, 6.0]
            .into_iter()
            .map(|c| lp.add_variable(c, 0.0, f64::INFINITY, false))
            .collect();
        lp.add_constraint(vec![(v[0], 0.25), (v[1], -60.0), (v[2], -0.04), (v[3], 9.0)], Comparison::Le, 0.0);
        lp.add_constraint(vec![(v[0], 0.5), (v[1], -90.0), (v[2], -0.02), (v[3], 3.0)], Comparison::Le, 0.0);
        lp.add_constraint(vec![(v[2], 1.0)], Comparison::Le, 1.0);
        let sol = solve_lp(&lp).unwrap();
        assert_close(sol.objective, -0.05);
    }

    #[test]
    fn deterministic_pivots() {
        let mut lp = LinearProgram::new();
        let vars: Vec<usize> = (0..6).map(|j| lp.add_variable(1.0 + j as f64 % 3.0, 0.0, f64::INFINITY, false)).collect();
        lp.add_constraint(vars.iter().map(|&j| (j, 1.0)).collect(), Comparison::Eq, 5.0);
        lp.add_constraint(vec![(vars[0], 1.0), (vars[3], 1.0)], Comparison::Le, 2.0);
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp(&lp).unwrap();
        assert_eq!(a, b);
    }
}
