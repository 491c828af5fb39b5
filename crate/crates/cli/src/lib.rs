//! Command implementations behind the `hesched` binary.
//!
//! Each `cmd_*` function does the work of one subcommand, writes its output
//! files and returns the document it wrote, so tests can drive the tool
//! without spawning a process.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use hesched::ingest::{
    derive_instance, gridify, place_servers, read_records, synth_orders, write_orders, DeriveOptions, GridSpec,
    SynthConfig,
};
use hesched::model::{validate_instance, ScenarioFile, ScenarioInstance, SolveReport, Violation};
use hesched::oracle::{enumerate_optimum, mincost_flow_optimum, OracleError};
use hesched::partition::{classify, RegimeDescriptor};
use hesched::sweep::{
    default_alphas, k_bounds, k_ladder, reference_grid_sizes, run_sweep, AxisValue, IngestBase, KBounds, SweepAxis,
    SweepBase, SweepReport, SweepSpec,
};

pub const TOOL: &str = "hesched";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Agreement required between the solver and the reference oracles.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest over several files, each prefixed by its length.
fn digest_files(paths: &[PathBuf]) -> Result<String> {
    let mut hasher = Sha256::new();
    for path in paths {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub input_sha256: String,
    pub seed: Option<u64>,
}

impl Provenance {
    fn new(input_sha256: String, seed: Option<u64>) -> Self {
        Provenance { tool: TOOL.into(), version: VERSION.into(), input_sha256, seed }
    }
}

/// Scenario parsed from disk together with the digest of its bytes.
pub struct LoadedScenario {
    pub instance: ScenarioInstance,
    pub sha256: String,
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let instance = ScenarioFile::from_json(text)
        .and_then(ScenarioFile::into_instance)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(LoadedScenario { instance, sha256: sha256_hex(&bytes) })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn format_violations(violations: &[Violation]) -> String {
    violations.iter().map(|v| format!("\n  - {v}")).collect()
}

fn require_valid(instance: &ScenarioInstance) -> Result<()> {
    let violations = validate_instance(instance);
    if !violations.is_empty() {
        bail!("scenario is invalid:{}", format_violations(&violations));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub total: f64,
    pub cloud: f64,
    pub local: f64,
    pub routing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub server: usize,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApSummary {
    pub ap: usize,
    pub theta: u64,
    pub admitted: u64,
    pub blocked: u64,
    pub public_demand: u64,
    pub server: bool,
    pub routes: Vec<Route>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerSummary {
    pub ap: usize,
    pub inflow: u64,
    pub public_capacity: u64,
    pub offload: u64,
}

/// Report written by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDocument {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub status: String,
    pub regime: String,
    pub objective: Objective,
    pub branch_nodes: u64,
    pub lp_pivots: u64,
    pub wall_time_s: f64,
    pub private_service_rate: f64,
    pub public_service_rate: f64,
    pub public_demand: u64,
    pub total_public_capacity: u64,
    pub cloud_offload: u64,
    pub blocked: u64,
    pub aps: Vec<ApSummary>,
    pub servers: Vec<ServerSummary>,
}

impl SolveDocument {
    pub fn from_report(instance: &ScenarioInstance, report: &SolveReport, provenance: Provenance) -> Self {
        let solution = &report.solution;
        let y = &solution.y;
        let aps = (0..instance.len())
            .map(|i| ApSummary {
                ap: i + 1,
                theta: instance.theta[i],
                admitted: solution.chi[i],
                blocked: solution.blocked[i],
                public_demand: instance.public_demand(i),
                server: instance.placement[i],
                routes: y
                    .servers()
                    .iter()
                    .enumerate()
                    .filter_map(|(s, &j)| {
                        let count = y.by_column(i, s);
                        (count > 0).then_some(Route { server: j + 1, count })
                    })
                    .collect(),
            })
            .collect();
        let servers = y
            .servers()
            .iter()
            .enumerate()
            .map(|(s, &j)| ServerSummary {
                ap: j + 1,
                inflow: y.inflow(s),
                public_capacity: instance.profile.public_capacity(),
                offload: solution.zeta[j],
            })
            .collect();
        SolveDocument {
            provenance,
            status: "optimal".into(),
            regime: report.regime.label().into(),
            objective: Objective {
                total: report.delays.total,
                cloud: report.delays.cloud,
                local: report.delays.local,
                routing: report.delays.routing,
            },
            branch_nodes: report.branch_nodes,
            lp_pivots: report.lp_pivots,
            wall_time_s: report.wall_time.as_secs_f64(),
            private_service_rate: report.private_service_rate,
            public_service_rate: report.public_service_rate,
            public_demand: report.public_demand,
            total_public_capacity: report.total_public_capacity,
            cloud_offload: report.cloud_offload,
            blocked: report.blocked,
            aps,
            servers,
        }
    }

    /// The same document with timing fields cleared.
    pub fn without_timing(mut self) -> Self {
        self.wall_time_s = 0.0;
        self
    }
}

/// Solves a scenario file and writes the report to `out`.
pub fn cmd_solve(scenario: &Path, out: &Path, seed: Option<u64>) -> Result<SolveDocument> {
    let loaded = load_scenario(scenario)?;
    require_valid(&loaded.instance)?;
    let report = hesched::solve(&loaded.instance).with_context(|| format!("solving {}", scenario.display()))?;
    let document = SolveDocument::from_report(&loaded.instance, &report, Provenance::new(loaded.sha256, seed));
    write_json(out, &document)?;
    Ok(document)
}

/// Validation problems, optionally checking a declared server count.
pub fn cmd_validate(scenario: &Path, servers: Option<usize>) -> Result<Vec<Violation>> {
    let mut instance = load_scenario(scenario)?.instance;
    if let Some(m) = servers {
        instance = instance.with_declared_servers(m);
    }
    Ok(validate_instance(&instance))
}

pub fn cmd_classify(scenario: &Path) -> Result<RegimeDescriptor> {
    let instance = load_scenario(scenario)?.instance;
    require_valid(&instance)?;
    Ok(classify(&instance)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub regime: String,
    pub milp: f64,
    pub mincost_flow: f64,
    /// `None` when the instance exceeds the enumeration guard.
    pub enumerated: Option<f64>,
    pub agree: bool,
}

/// Solves with the MILP path and both reference oracles.
pub fn cmd_oracle_check(scenario: &Path) -> Result<OracleCheck> {
    let instance = load_scenario(scenario)?.instance;
    require_valid(&instance)?;
    let descriptor = classify(&instance)?;
    let milp = hesched::solve(&instance)?.solution.objective;
    let flow = mincost_flow_optimum(&instance, &descriptor)?;
    let enumerated = match enumerate_optimum(&instance) {
        Ok(e) => Some(e.objective),
        Err(OracleError::TooLarge { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let close = |v: f64| (v - milp).abs() <= ORACLE_TOLERANCE;
    Ok(OracleCheck {
        regime: descriptor.regime.label().into(),
        milp,
        mincost_flow: flow,
        enumerated,
        agree: close(flow) && enumerated.is_none_or(close),
    })
}

/// Settings shared by `ingest` and ingest-based sweeps.
#[derive(Debug, Clone)]
pub struct IngestArgs {
    pub inputs: Vec<PathBuf>,
    pub grid: GridSpec,
    pub servers: usize,
    pub alpha: f64,
    pub beta: f64,
    pub k: Option<f64>,
    pub w: Option<f64>,
    pub seed: u64,
}

impl IngestArgs {
    pub fn reference(inputs: Vec<PathBuf>) -> Self {
        IngestArgs {
            inputs,
            grid: GridSpec::reference(12, 10),
            servers: 40,
            alpha: hesched::model::REFERENCE_ALPHA,
            beta: hesched::model::REFERENCE_BETA,
            k: None,
            w: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub records: usize,
    pub malformed: u64,
    pub in_bounds: u64,
    pub out_of_bounds: u64,
    pub days: u64,
    pub grid_counts_total: u64,
    pub aps: usize,
    pub servers: usize,
    pub regime: Option<String>,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub lambda: f64,
}

struct Ingested {
    base: IngestBase,
    instance: ScenarioInstance,
    summary: IngestSummary,
}

fn ingest(args: &IngestArgs) -> Result<Ingested> {
    if args.inputs.is_empty() {
        bail!("no input files given");
    }
    let set = read_records(&args.inputs)?;
    let days = set.days();
    let grid = gridify(&set.records, &args.grid)?;
    let placement = place_servers(&grid.counts, args.servers)?;
    let options = DeriveOptions {
        alpha: args.alpha,
        beta: args.beta,
        k: args.k,
        w: args.w,
        seed: args.seed,
        days,
    };
    let instance = derive_instance(&grid, &placement, &options)?;
    let summary = IngestSummary {
        provenance: Provenance::new(digest_files(&args.inputs)?, Some(args.seed)),
        records: set.records.len(),
        malformed: set.malformed,
        in_bounds: grid.in_bounds,
        out_of_bounds: grid.out_of_bounds,
        days,
        grid_counts_total: grid.counts.iter().sum(),
        aps: instance.len(),
        servers: instance.servers,
        regime: classify(&instance).ok().map(|d| d.regime.label().to_string()),
        k: instance.profile.k,
        w: instance.profile.w,
        lambda: instance.profile.lambda,
    };
    let base = IngestBase { records: set.records, days, spec: args.grid.clone(), servers: args.servers, options };
    Ok(Ingested { base, instance, summary })
}

/// Turns order logs into a scenario file.
pub fn cmd_ingest(args: &IngestArgs, out: &Path) -> Result<IngestSummary> {
    let ingested = ingest(args)?;
    let file = ScenarioFile::from_instance(&ingested.instance);
    fs::write(out, file.to_json()).with_context(|| format!("writing {}", out.display()))?;
    Ok(ingested.summary)
}

/// Writes a synthetic order log.
pub fn cmd_synth(grid: GridSpec, orders_per_day: usize, days: usize, seed: u64, out: &Path) -> Result<usize> {
    let config = SynthConfig { orders_per_day, days, ..SynthConfig::reference(grid) };
    let records = synth_orders(&config, seed);
    write_orders(out, &records)?;
    Ok(records.len())
}

#[derive(Debug, Clone)]
pub enum SweepSource {
    Scenario(PathBuf),
    Orders(IngestArgs),
}

#[derive(Debug, Clone)]
pub struct SweepArgs {
    pub axis: SweepAxis,
    /// Axis values as text; defaults depend on the axis.
    pub values: Option<Vec<String>>,
    pub source: SweepSource,
    /// Profile overrides applied to a scenario source.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub k: Option<f64>,
    pub w: Option<f64>,
    pub repetitions: usize,
    pub workers: usize,
    pub out: PathBuf,
}

/// Columns of the summary table, in order.
pub const SUMMARY_COLUMNS: [&str; 22] = [
    "axis",
    "value",
    "runs",
    "solved",
    "aps",
    "servers",
    "K",
    "alpha",
    "public_capacity",
    "private_capacity",
    "private_feasible",
    "regime",
    "mean_wall_time_s",
    "mean_nodes",
    "mean_objective",
    "private_service_rate",
    "public_service_rate",
    "cloud_offload",
    "blocked",
    "k_lower",
    "k_upper",
    "status",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub axis: String,
    pub values: Vec<String>,
    pub repetitions: usize,
    pub workers: usize,
    pub base_k_bounds: KBounds,
    pub private_feasible_from: Option<f64>,
    pub public_plateau_from: Option<f64>,
    pub summary: PathBuf,
    pub runs: PathBuf,
}

/// Paths of the per-run table and the metadata next to a summary table.
pub fn sweep_companions(out: &Path) -> (PathBuf, PathBuf) {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "sweep".into());
    (out.with_file_name(format!("{stem}.runs.csv")), out.with_file_name(format!("{stem}.meta.json")))
}

/// Runs a sweep and writes the summary table to `args.out`, plus the
/// per-run table and metadata beside it.
pub fn cmd_sweep(args: &SweepArgs) -> Result<(SweepReport, SweepMeta)> {
    let (base, digest, seed, base_instance) = match &args.source {
        SweepSource::Scenario(path) => {
            let loaded = load_scenario(path)?;
            let mut instance = loaded.instance;
            let p = &mut instance.profile;
            p.alpha = args.alpha.unwrap_or(p.alpha);
            p.beta = args.beta.unwrap_or(p.beta);
            p.k = args.k.unwrap_or(p.k);
            p.w = args.w.unwrap_or(p.w);
            (SweepBase::Scenario(instance.clone()), loaded.sha256, None, instance)
        }
        SweepSource::Orders(ingest_args) => {
            let ingested = ingest(ingest_args)?;
            let digest = ingested.summary.provenance.input_sha256.clone();
            (SweepBase::Ingest(ingested.base), digest, Some(ingest_args.seed), ingested.instance)
        }
    };
    let bounds = k_bounds(&base_instance);
    let values = match &args.values {
        Some(texts) => texts.iter().map(|t| AxisValue::parse(args.axis, t)).collect::<Result<Vec<_>, _>>()?,
        None => match args.axis {
            SweepAxis::GridSize => reference_grid_sizes(),
            SweepAxis::K => k_ladder(bounds, 5),
            SweepAxis::Alpha => default_alphas(),
        },
    };
    let spec = SweepSpec {
        axis: args.axis,
        values: values.clone(),
        repetitions: args.repetitions,
        base,
        workers: args.workers,
    };
    let report = run_sweep(&spec)?;

    let (runs_path, meta_path) = sweep_companions(&args.out);
    let mut summary = csv::Writer::from_path(&args.out).with_context(|| format!("writing {}", args.out.display()))?;
    for row in &report.summary {
        summary.serialize(row)?;
    }
    summary.flush()?;
    let mut runs = csv::Writer::from_path(&runs_path).with_context(|| format!("writing {}", runs_path.display()))?;
    for row in &report.runs {
        runs.serialize(row)?;
    }
    runs.flush()?;

    let meta = SweepMeta {
        provenance: Provenance::new(digest, seed),
        axis: args.axis.to_string(),
        values: values.iter().map(ToString::to_string).collect(),
        repetitions: args.repetitions,
        workers: args.workers,
        base_k_bounds: bounds,
        private_feasible_from: report.private_feasible_from,
        public_plateau_from: report.public_plateau_from,
        summary: args.out.clone(),
        runs: runs_path,
    };
    write_json(&meta_path, &meta)?;
    Ok((report, meta))
}
