//! Parameter sweeps over grid size, computation capacity `K` and the
//! private share `alpha`.
//!
//! Every axis point is solved `repetitions` times. Runs are independent and
//! are spread over a worker pool; rows come back in axis order regardless of
//! the pool size.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{derive_instance, gridify, place_servers, DeriveOptions, GridSpec, IngestError, OrderRecord};
use crate::milp::{solve, MilpError};
use crate::model::{min_capacity, private_service_rate, validate_instance, ScenarioInstance};
use crate::par::{self, Execution};
use crate::partition::classify;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    GridSize,
    K,
    Alpha,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::GridSize => "grid_size",
            SweepAxis::K => "K",
            SweepAxis::Alpha => "alpha",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "grid_size" | "grid" => Ok(SweepAxis::GridSize),
            "k" => Ok(SweepAxis::K),
            "alpha" => Ok(SweepAxis::Alpha),
            _ => Err(SweepError::Spec(format!("unknown sweep axis {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisValue {
    Grid { rows: usize, cols: usize, servers: usize },
    Number(f64),
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::Grid { rows, cols, servers } => write!(f, "{rows}x{cols}:{servers}"),
            AxisValue::Number(v) => write!(f, "{v}"),
        }
    }
}

impl AxisValue {
    /// Parses `RxC:m` for grid sizes and a plain number otherwise.
    pub fn parse(axis: SweepAxis, s: &str) -> Result<Self, SweepError> {
        let bad = || SweepError::Spec(format!("cannot read {s:?} as a {axis} value"));
        match axis {
            SweepAxis::GridSize => {
                let (size, servers) = s.split_once(':').ok_or_else(bad)?;
                let (rows, cols) = size.split_once(['x', '*', 'X']).ok_or_else(bad)?;
                Ok(AxisValue::Grid {
                    rows: rows.trim().parse().map_err(|_| bad())?,
                    cols: cols.trim().parse().map_err(|_| bad())?,
                    servers: servers.trim().parse().map_err(|_| bad())?,
                })
            }
            _ => s.trim().parse().map(AxisValue::Number).map_err(|_| bad()),
        }
    }

    fn number(self) -> Option<f64> {
        match self {
            AxisValue::Number(v) => Some(v),
            AxisValue::Grid { .. } => None,
        }
    }
}

/// The five reference grid sizes with their server counts.
pub fn reference_grid_sizes() -> Vec<AxisValue> {
    [(12, 10, 40), (24, 20, 60), (36, 30, 80), (48, 40, 100), (60, 50, 120)]
        .into_iter()
        .map(|(rows, cols, servers)| AxisValue::Grid { rows, cols, servers })
        .collect()
}

/// `alpha` from 0 to 1 in steps of 0.1.
pub fn default_alphas() -> Vec<AxisValue> {
    (0..=10).map(|i| AxisValue::Number(i as f64 / 10.0)).collect()
}

/// Order data plus the settings that turn it into a scenario.
#[derive(Debug, Clone)]
pub struct IngestBase {
    pub records: Vec<OrderRecord>,
    pub days: u64,
    pub spec: GridSpec,
    pub servers: usize,
    /// Derivation settings; repetition `r` uses jitter seed `options.seed + r`.
    pub options: DeriveOptions,
}

#[derive(Debug, Clone)]
pub enum SweepBase {
    Scenario(ScenarioInstance),
    Ingest(IngestBase),
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<AxisValue>,
    pub repetitions: usize,
    pub base: SweepBase,
    pub workers: usize,
}

impl SweepSpec {
    pub fn check(&self) -> Result<(), SweepError> {
        if self.values.is_empty() {
            return Err(SweepError::Spec("no axis values".into()));
        }
        if self.repetitions == 0 {
            return Err(SweepError::Spec("repetitions must be at least 1".into()));
        }
        for v in &self.values {
            match (self.axis, v) {
                (SweepAxis::GridSize, AxisValue::Grid { .. }) => {}
                (SweepAxis::GridSize, _) => return Err(SweepError::Spec(format!("{v} is not a grid size"))),
                (_, AxisValue::Grid { .. }) => return Err(SweepError::Spec(format!("{v} is not a number"))),
                (SweepAxis::Alpha, AxisValue::Number(a)) if !(0.0..=1.0).contains(a) => {
                    return Err(SweepError::Spec(format!("alpha {a} outside [0, 1]")))
                }
                (SweepAxis::K, AxisValue::Number(k)) if !(*k >= 1.0) || k.fract() != 0.0 => {
                    return Err(SweepError::Spec(format!("K {k} is not a positive integer")))
                }
                _ => {}
            }
        }
        if self.axis == SweepAxis::GridSize && matches!(self.base, SweepBase::Scenario(_)) {
            return Err(SweepError::Spec("a grid-size sweep needs order data, not a scenario".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error("{axis} = {value}, repetition {rep}: {source}")]
    Solve {
        axis: SweepAxis,
        value: String,
        rep: usize,
        #[source]
        source: MilpError,
    },
    #[error("{axis} = {value}: {source}")]
    Ingest {
        axis: SweepAxis,
        value: String,
        #[source]
        source: IngestError,
    },
}

/// `K` range for an instance: the smallest `K` whose private share covers
/// every server's private demand, and the smallest `K` at which the servers
/// hold all public demand without the cloud.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KBounds {
    pub k_lower: Option<u64>,
    pub k_upper: Option<u64>,
}

pub fn k_bounds(instance: &ScenarioInstance) -> KBounds {
    let alpha = instance.profile.alpha;
    let servers = instance.server_indices();
    let private = servers.iter().map(|&i| instance.private_requests(i)).max().unwrap_or(0);
    let pu: u64 = (0..instance.len()).map(|i| instance.public_demand(i)).sum();
    let per_server = pu.div_ceil(servers.len().max(1) as u64);
    KBounds {
        k_lower: min_capacity(alpha, private),
        k_upper: min_capacity(1.0 - alpha, per_server),
    }
}

/// `count` integer `K` values spread evenly from `k_lower` to `k_upper`.
pub fn k_ladder(bounds: KBounds, count: usize) -> Vec<AxisValue> {
    let lo = bounds.k_lower.unwrap_or(1);
    let hi = bounds.k_upper.unwrap_or(lo).max(lo);
    let count = count.max(1);
    let mut out: Vec<u64> = (0..count)
        .map(|i| if count == 1 { lo } else { lo + (hi - lo) * i as u64 / (count - 1) as u64 })
        .collect();
    out.dedup();
    out.into_iter().map(|k| AxisValue::Number(k as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub axis: SweepAxis,
    pub value: String,
    pub rep: usize,
    pub seed: Option<u64>,
    pub aps: usize,
    pub servers: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub alpha: f64,
    /// `floor((1-alpha)K)`
    pub public_capacity: u64,
    /// `floor(alpha K)`
    pub private_capacity: u64,
    /// Every server's private demand fits its private capacity.
    pub private_feasible: bool,
    pub status: String,
    pub regime: Option<String>,
    pub objective: Option<f64>,
    pub nodes: Option<u64>,
    pub pivots: Option<u64>,
    pub wall_time_s: Option<f64>,
    pub private_service_rate: f64,
    pub public_service_rate: Option<f64>,
    pub cloud_offload: Option<u64>,
    pub blocked: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub axis: SweepAxis,
    pub value: String,
    pub runs: usize,
    pub solved: usize,
    pub aps: usize,
    pub servers: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub alpha: f64,
    pub public_capacity: u64,
    pub private_capacity: u64,
    pub private_feasible: bool,
    pub regime: Option<String>,
    pub mean_wall_time_s: Option<f64>,
    pub mean_nodes: Option<f64>,
    pub mean_objective: Option<f64>,
    pub private_service_rate: f64,
    pub public_service_rate: Option<f64>,
    pub cloud_offload: Option<f64>,
    pub blocked: Option<f64>,
    pub k_lower: Option<u64>,
    pub k_upper: Option<u64>,
    /// `optimal` when every run solved, `rejected` when none did, else `partial`.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub repetitions: usize,
    pub summary: Vec<SummaryRow>,
    pub runs: Vec<RunRow>,
    /// First `alpha` from which private demand fits at every server for the
    /// rest of the sweep.
    pub private_feasible_from: Option<f64>,
    /// First `alpha` from which the public service rate stays constant for
    /// the rest of the sweep.
    pub public_plateau_from: Option<f64>,
}

fn with_axis(mut instance: ScenarioInstance, axis: SweepAxis, value: AxisValue) -> ScenarioInstance {
    match (axis, value.number()) {
        (SweepAxis::K, Some(k)) => instance.profile.k = k,
        (SweepAxis::Alpha, Some(a)) => instance.profile.alpha = a,
        _ => {}
    }
    instance
}

/// Instances for one axis point, one per repetition.
fn point_instances(spec: &SweepSpec, value: AxisValue) -> Result<Vec<(Option<u64>, ScenarioInstance)>, SweepError> {
    match &spec.base {
        SweepBase::Scenario(instance) => {
            let instance = with_axis(instance.clone(), spec.axis, value);
            Ok((0..spec.repetitions).map(|_| (None, instance.clone())).collect())
        }
        SweepBase::Ingest(base) => {
            let wrap = |source| SweepError::Ingest { axis: spec.axis, value: value.to_string(), source };
            let (grid_spec, servers) = match value {
                AxisValue::Grid { rows, cols, servers } => (GridSpec { rows, cols, ..base.spec.clone() }, servers),
                AxisValue::Number(_) => (base.spec.clone(), base.servers),
            };
            let grid = gridify(&base.records, &grid_spec).map_err(wrap)?;
            let placement = place_servers(&grid.counts, servers).map_err(wrap)?;
            (0..spec.repetitions)
                .map(|r| {
                    let seed = base.options.seed.wrapping_add(r as u64);
                    let options = DeriveOptions { seed, days: base.days, ..base.options.clone() };
                    let instance = derive_instance(&grid, &placement, &options).map_err(wrap)?;
                    Ok((Some(seed), with_axis(instance, spec.axis, value)))
                })
                .collect()
        }
    }
}

fn run_one(
    axis: SweepAxis,
    value: AxisValue,
    rep: usize,
    seed: Option<u64>,
    instance: &ScenarioInstance,
) -> Result<RunRow, SweepError> {
    let profile = &instance.profile;
    let servers = instance.server_indices();
    let private_capacity = profile.private_capacity();
    let mut row = RunRow {
        axis,
        value: value.to_string(),
        rep,
        seed,
        aps: instance.len(),
        servers: servers.len(),
        k: profile.k,
        alpha: profile.alpha,
        public_capacity: profile.public_capacity(),
        private_capacity,
        private_feasible: servers.iter().all(|&i| instance.private_requests(i) <= private_capacity),
        status: "rejected".into(),
        regime: None,
        objective: None,
        nodes: None,
        pivots: None,
        wall_time_s: None,
        private_service_rate: private_service_rate(instance),
        public_service_rate: None,
        cloud_offload: None,
        blocked: None,
    };
    if !validate_instance(instance).is_empty() {
        if let Ok(descriptor) = classify(instance) {
            row.regime = Some(descriptor.regime.label().to_string());
        }
        return Ok(row);
    }
    let report = solve(instance).map_err(|source| SweepError::Solve { axis, value: value.to_string(), rep, source })?;
    row.status = "optimal".into();
    row.regime = Some(report.regime.label().to_string());
    row.objective = Some(report.solution.objective);
    row.nodes = Some(report.branch_nodes);
    row.pivots = Some(report.lp_pivots);
    row.wall_time_s = Some(report.wall_time.as_secs_f64());
    row.public_service_rate = Some(report.public_service_rate);
    row.cloud_offload = Some(report.cloud_offload);
    row.blocked = Some(report.blocked);
    Ok(row)
}

fn mean<I: Iterator<Item = f64>>(values: I) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn summarize(runs: &[RunRow], bounds: KBounds) -> SummaryRow {
    let first = &runs[0];
    let solved: Vec<&RunRow> = runs.iter().filter(|r| r.status == "optimal").collect();
    SummaryRow {
        axis: first.axis,
        value: first.value.clone(),
        runs: runs.len(),
        solved: solved.len(),
        aps: first.aps,
        servers: first.servers,
        k: first.k,
        alpha: first.alpha,
        public_capacity: first.public_capacity,
        private_capacity: first.private_capacity,
        private_feasible: runs.iter().all(|r| r.private_feasible),
        regime: first.regime.clone(),
        mean_wall_time_s: mean(solved.iter().filter_map(|r| r.wall_time_s)),
        mean_nodes: mean(solved.iter().filter_map(|r| r.nodes.map(|n| n as f64))),
        mean_objective: mean(solved.iter().filter_map(|r| r.objective)),
        private_service_rate: mean(runs.iter().map(|r| r.private_service_rate)).unwrap_or(0.0),
        public_service_rate: mean(solved.iter().filter_map(|r| r.public_service_rate)),
        cloud_offload: mean(solved.iter().filter_map(|r| r.cloud_offload.map(|n| n as f64))),
        blocked: mean(solved.iter().filter_map(|r| r.blocked.map(|n| n as f64))),
        k_lower: bounds.k_lower,
        k_upper: bounds.k_upper,
        status: match solved.len() {
            n if n == runs.len() => "optimal",
            0 => "rejected",
            _ => "partial",
        }
        .into(),
    }
}

fn private_feasible_from(summary: &[SummaryRow]) -> Option<f64> {
    let last_bad = summary.iter().rposition(|r| !r.private_feasible);
    let start = last_bad.map_or(0, |i| i + 1);
    summary.get(start).map(|r| r.alpha)
}

fn public_plateau_from(summary: &[SummaryRow]) -> Option<f64> {
    let rates: Vec<(f64, f64)> = summary.iter().filter_map(|r| r.public_service_rate.map(|p| (r.alpha, p))).collect();
    let (_, last) = *rates.last()?;
    let mut start = rates.len() - 1;
    while start > 0 && rates[start - 1].1 == last {
        start -= 1;
    }
    Some(rates[start].0)
}

/// Runs the sweep. Rows whose instance fails validation (for instance when
/// the private share cannot hold a server's private demand) are reported as
/// `rejected` rather than aborting the sweep; solver failures abort.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepReport, SweepError> {
    spec.check()?;
    let mut points = Vec::with_capacity(spec.values.len());
    for &value in &spec.values {
        points.push((value, point_instances(spec, value)?));
    }
    let jobs: Vec<(usize, usize)> = points
        .iter()
        .enumerate()
        .flat_map(|(p, (_, reps))| (0..reps.len()).map(move |r| (p, r)))
        .collect();
    let exec = Execution::for_workers(spec.workers);
    let results = par::with_workers(spec.workers, || {
        par::map(exec, &jobs, |&(p, r)| {
            let (value, reps) = &points[p];
            let (seed, instance) = &reps[r];
            run_one(spec.axis, *value, r, *seed, instance)
        })
    });
    let runs: Vec<RunRow> = results.into_iter().collect::<Result<_, _>>()?;

    let summary: Vec<SummaryRow> = runs
        .chunks(spec.repetitions)
        .zip(&points)
        .map(|(rows, (_, reps))| summarize(rows, k_bounds(&reps[0].1)))
        .collect();
    let (private_from, plateau_from) = if spec.axis == SweepAxis::Alpha {
        (private_feasible_from(&summary), public_plateau_from(&summary))
    } else {
        (None, None)
    };
    Ok(SweepReport {
        axis: spec.axis,
        repetitions: spec.repetitions,
        summary,
        runs,
        private_feasible_from: private_from,
        public_plateau_from: plateau_from,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::fixtures;
    use crate::ingest::{synth_orders, SynthConfig};

    fn scenario_spec(axis: SweepAxis, values: Vec<AxisValue>) -> SweepSpec {
        SweepSpec { axis, values, repetitions: 2, base: SweepBase::Scenario(fixtures::t3()), workers: 1 }
    }

    #[test]
    fn parses_axis_values() {
        assert_eq!(
            AxisValue::parse(SweepAxis::GridSize, "12x10:40").unwrap(),
            AxisValue::Grid { rows: 12, cols: 10, servers: 40 }
        );
        assert_eq!(
            AxisValue::parse(SweepAxis::GridSize, "24*20:60").unwrap(),
            AxisValue::Grid { rows: 24, cols: 20, servers: 60 }
        );
        assert_eq!(AxisValue::parse(SweepAxis::Alpha, "0.3").unwrap(), AxisValue::Number(0.3));
        assert!(AxisValue::parse(SweepAxis::GridSize, "12x10").is_err());
        assert_eq!("k".parse::<SweepAxis>().unwrap(), SweepAxis::K);
        assert_eq!("grid-size".parse::<SweepAxis>().unwrap(), SweepAxis::GridSize);
        assert_eq!(reference_grid_sizes().len(), 5);
    }

    #[test]
    fn spec_checks() {
        let mut spec = scenario_spec(SweepAxis::K, vec![]);
        assert!(spec.check().is_err());
        spec.values = vec![AxisValue::Number(10.0)];
        spec.repetitions = 0;
        assert!(spec.check().is_err());
        spec.repetitions = 1;
        assert!(spec.check().is_ok());
        spec.values = vec![AxisValue::Number(2.5)];
        assert!(spec.check().is_err());
        let grid = scenario_spec(SweepAxis::GridSize, reference_grid_sizes());
        assert!(grid.check().is_err());
    }

    #[test]
    fn t3_bounds() {
        // private demand 2 at the server, pu 10 on one server
        let bounds = k_bounds(&fixtures::t3());
        assert_eq!(bounds.k_lower, Some(7));
        assert_eq!(bounds.k_upper, Some(15));
        let ladder: Vec<f64> = k_ladder(bounds, 5).into_iter().filter_map(AxisValue::number).collect();
        assert_eq!(ladder, vec![7.0, 9.0, 11.0, 13.0, 15.0]);
    }

    #[test]
    fn k_sweep_aggregates_repetitions() {
        let spec = scenario_spec(SweepAxis::K, [10.0, 20.0, 40.0].map(AxisValue::Number).to_vec());
        let report = run_sweep(&spec).unwrap();
        assert_eq!(report.runs.len(), 6);
        assert_eq!(report.summary.len(), 3);
        assert!(report.summary.iter().all(|r| r.runs == 2 && r.solved == 2));
        let objectives: Vec<f64> = report.summary.iter().map(|r| r.mean_objective.unwrap()).collect();
        assert!(objectives.windows(2).all(|w| w[1] <= w[0]));
        assert!((objectives[0] - 69.2).abs() < 1e-9);
    }

    #[test]
    fn alpha_sweep_structure() {
        let spec = scenario_spec(SweepAxis::Alpha, default_alphas());
        let report = run_sweep(&spec).unwrap();
        assert_eq!(report.summary.len(), 11);
        let caps: Vec<u64> = report.summary.iter().map(|r| r.public_capacity).collect();
        assert!(caps.windows(2).all(|w| w[1] <= w[0]));
        let feasible: Vec<bool> = report.summary.iter().map(|r| r.private_feasible).collect();
        assert!(feasible.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(report.summary[0].solved, 0);
        assert_eq!(report.private_feasible_from, Some(0.2));
        assert!(report.public_plateau_from.is_some());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let records = synth_orders(
            &SynthConfig { orders_per_day: 300, days: 2, ..SynthConfig::reference(GridSpec::reference(4, 3)) },
            2,
        );
        let base = IngestBase {
            records,
            days: 2,
            spec: GridSpec::reference(4, 3),
            servers: 3,
            options: DeriveOptions { seed: 7, ..DeriveOptions::default() },
        };
        let values = vec![
            AxisValue::Grid { rows: 3, cols: 3, servers: 2 },
            AxisValue::Grid { rows: 4, cols: 3, servers: 3 },
        ];
        let mut spec = SweepSpec {
            axis: SweepAxis::GridSize,
            values,
            repetitions: 3,
            base: SweepBase::Ingest(base),
            workers: 1,
        };
        let strip = |mut r: SweepReport| {
            for row in &mut r.runs {
                row.wall_time_s = None;
            }
            for row in &mut r.summary {
                row.mean_wall_time_s = None;
            }
            r
        };
        let one = strip(run_sweep(&spec).unwrap());
        spec.workers = 4;
        let four = strip(run_sweep(&spec).unwrap());
        assert_eq!(one, four);
        assert_eq!(one.runs.iter().map(|r| r.seed).collect::<Vec<_>>(), [7, 8, 9, 7, 8, 9].map(Some).to_vec());
    }
}
