use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use hesched::ingest::GridSpec;
use hesched::sweep::SweepAxis;
use hesched_cli::{
    cmd_classify, cmd_ingest, cmd_oracle_check, cmd_solve, cmd_sweep, cmd_synth, cmd_validate, sweep_companions,
    IngestArgs, SweepArgs, SweepSource,
};

#[derive(Parser)]
#[command(name = "hesched", version, about = "Request scheduling over hybrid edge servers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct MapArgs {
    /// Grid rows (latitude segments) and columns (longitude segments).
    #[arg(long, num_args = 2, value_names = ["R", "C"], default_values_t = [12, 10])]
    grid: Vec<usize>,
    #[arg(long, default_value_t = 30.57, allow_negative_numbers = true)]
    lat_min: f64,
    #[arg(long, default_value_t = 30.78, allow_negative_numbers = true)]
    lat_max: f64,
    #[arg(long, default_value_t = 103.96, allow_negative_numbers = true)]
    lon_min: f64,
    #[arg(long, default_value_t = 104.17, allow_negative_numbers = true)]
    lon_max: f64,
}

impl MapArgs {
    fn spec(&self) -> GridSpec {
        GridSpec {
            lat_min: self.lat_min,
            lat_max: self.lat_max,
            lon_min: self.lon_min,
            lon_max: self.lon_max,
            rows: self.grid[0],
            cols: self.grid[1],
        }
    }
}

#[derive(Args, Clone)]
struct ProfileArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Computation capacity per server.
    #[arg(long = "K")]
    k: Option<f64>,
    /// Communication capacity per AP.
    #[arg(long = "W")]
    w: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Turn order logs into a scenario file.
    Ingest {
        /// Order log files (order_id, timestamp, latitude, longitude).
        #[arg(long = "input", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 40)]
        servers: usize,
        #[command(flatten)]
        profile: ProfileArgs,
        /// Seed for the link-length jitter.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a scenario file and list every problem found.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        /// Expected number of servers.
        #[arg(long)]
        servers: Option<usize>,
    },
    /// Print the regime and its descriptor.
    Classify {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Solve a scenario and write a JSON report.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Recorded in the report.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sweep grid size, K or alpha and write CSV tables.
    Sweep {
        #[arg(long, value_parser = parse_axis)]
        axis: SweepAxis,
        /// Axis values (`RxC:m` for grid sizes); defaults depend on the axis.
        #[arg(long, num_args = 1..)]
        values: Option<Vec<String>>,
        /// Base scenario (K and alpha sweeps).
        #[arg(long, conflicts_with = "inputs")]
        scenario: Option<PathBuf>,
        /// Order logs to derive scenarios from.
        #[arg(long = "input", num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 40)]
        servers: usize,
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Summary table; the per-run table and metadata are written beside it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-check the solver against the reference oracles.
    OracleCheck {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Write a synthetic order log.
    Synth {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 3000)]
        orders_per_day: usize,
        #[arg(long, default_value_t = 5)]
        days: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse().map_err(|e: hesched::sweep::SweepError| e.to_string())
}

fn ingest_args(inputs: Vec<PathBuf>, map: &MapArgs, servers: usize, profile: &ProfileArgs, seed: u64) -> IngestArgs {
    let reference = IngestArgs::reference(inputs);
    IngestArgs {
        grid: map.spec(),
        servers,
        alpha: profile.alpha.unwrap_or(reference.alpha),
        beta: profile.beta.unwrap_or(reference.beta),
        k: profile.k,
        w: profile.w,
        seed,
        ..reference
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Ingest { inputs, map, servers, profile, seed, out } => {
            let summary = cmd_ingest(&ingest_args(inputs, &map, servers, &profile, seed), &out)?;
            print_json(&summary)?;
        }
        Command::Validate { scenario, servers } => {
            let violations = cmd_validate(&scenario, servers)?;
            if violations.is_empty() {
                println!("{}: valid", scenario.display());
            } else {
                for v in &violations {
                    println!("{v}");
                }
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Classify { scenario } => {
            let descriptor = cmd_classify(&scenario)?;
            println!("{}", descriptor.regime);
            print_json(&descriptor)?;
        }
        Command::Solve { scenario, out, seed } => {
            let document = cmd_solve(&scenario, &out, seed)?;
            println!(
                "{}: objective {} in {} nodes, report written to {}",
                document.regime,
                document.objective.total,
                document.branch_nodes,
                out.display()
            );
        }
        Command::Sweep { axis, values, scenario, inputs, map, servers, profile, seed, reps, workers, out } => {
            let source = match scenario {
                Some(path) => SweepSource::Scenario(path),
                None if !inputs.is_empty() => SweepSource::Orders(ingest_args(inputs, &map, servers, &profile, seed)),
                None => anyhow::bail!("sweep needs --scenario or --input"),
            };
            let args = SweepArgs {
                axis,
                values,
                source,
                alpha: profile.alpha,
                beta: profile.beta,
                k: profile.k,
                w: profile.w,
                repetitions: reps,
                workers,
                out: out.clone(),
            };
            let (report, _) = cmd_sweep(&args)?;
            let (runs, meta) = sweep_companions(&out);
            println!(
                "{} points x {} repetitions: {}, {}, {}",
                report.summary.len(),
                report.repetitions,
                out.display(),
                runs.display(),
                meta.display()
            );
        }
        Command::OracleCheck { scenario } => {
            let check = cmd_oracle_check(&scenario)?;
            print_json(&check)?;
            if !check.agree {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Synth { map, orders_per_day, days, seed, out } => {
            let count = cmd_synth(map.spec(), orders_per_day, days, seed, &out)
                .with_context(|| format!("writing {}", out.display()))?;
            println!("{count} orders written to {}", out.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
