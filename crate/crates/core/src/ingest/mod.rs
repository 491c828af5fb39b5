//! Order logs to scenarios: parse records, bin them on a latitude/longitude
//! grid, put servers in the busiest cells and derive delays and load.

mod grid;
mod records;
mod synth;

pub use grid::{gridify, gridify_with, place_servers, GridCounts, GridSpec};
pub use records::{parse_records, read_records, read_records_with, OrderRecord, RecordSet};
pub use synth::{synth_orders, write_orders, SynthConfig};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{
    min_capacity, AccessPoint, Link, ModelError, NetworkTopology, ResourceProfile, ScenarioInstance, REFERENCE_ALPHA,
    REFERENCE_BETA,
};

/// Link lengths are the center distance times a factor drawn from this range.
pub const JITTER_RANGE: (f64, f64) = (0.8, 1.2);
/// Cloud delay as a multiple of the largest inter-AP delay.
pub const CLOUD_DELAY_FACTOR: f64 = 10.0;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("no records fall inside the grid bounds ({out_of_bounds} outside)")]
    NoRecords { out_of_bounds: u64 },
    #[error("cannot place {servers} servers on {grids} grids")]
    TooManyServers { servers: usize, grids: usize },
    #[error("placement has {placement} entries for {grids} grids")]
    PlacementMismatch { placement: usize, grids: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Resource settings for a derived instance. `K` and `W` are derived from
/// the load when left unset.
#[derive(Debug, Clone, PartialEq)]
pub struct DeriveOptions {
    pub alpha: f64,
    pub beta: f64,
    pub k: Option<f64>,
    pub w: Option<f64>,
    /// Seed for the link-length jitter.
    pub seed: u64,
    /// Number of sampled days the counts cover.
    pub days: u64,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        DeriveOptions {
            alpha: REFERENCE_ALPHA,
            beta: REFERENCE_BETA,
            k: None,
            w: None,
            seed: 0,
            days: 1,
        }
    }
}

/// Average daily count, rounded half up.
pub fn daily_average(total: u64, days: u64) -> u64 {
    let days = days.max(1);
    (2 * total + days) / (2 * days)
}

/// Default `K`: enough for an even share of all requests per server, and no
/// less than what the largest server-side private demand needs.
pub fn default_capacity(theta: &[u64], placement: &[bool], alpha: f64, beta: f64) -> u64 {
    let m = placement.iter().filter(|&&x| x).count().max(1) as u64;
    let share = theta.iter().sum::<u64>().div_ceil(m).max(1);
    let private = theta
        .iter()
        .zip(placement)
        .filter(|(_, &x)| x)
        .map(|(&t, _)| crate::model::floor_count(beta * t as f64).max(0) as u64)
        .max()
        .unwrap_or(0);
    share.max(min_capacity(alpha, private).unwrap_or(1))
}

/// Scenario with one AP per grid cell, linked to its 4-neighbours.
///
/// APs are numbered row-major from the bottom-left cell. Each link's length
/// is the distance between cell centers scaled by a factor drawn uniformly
/// from [`JITTER_RANGE`]; draws go row-major, right neighbour before upper
/// neighbour.
pub fn derive_instance(
    grid: &GridCounts,
    placement: &[bool],
    options: &DeriveOptions,
) -> Result<ScenarioInstance, IngestError> {
    let spec = &grid.spec;
    let cells = spec.cells();
    if placement.len() != cells {
        return Err(IngestError::PlacementMismatch { placement: placement.len(), grids: cells });
    }
    let aps: Vec<AccessPoint> = (0..cells)
        .map(|c| {
            let (lat, lon) = spec.center(c);
            AccessPoint { id: c + 1, x: lon, y: lat }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let (lo, hi) = JITTER_RANGE;
    let mut links = Vec::new();
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            let here = spec.index(r, c);
            if c + 1 < spec.cols {
                let factor = rng.gen_range(lo..=hi);
                links.push(Link { a: here + 1, b: here + 2, length: spec.cell_width() * factor });
            }
            if r + 1 < spec.rows {
                let factor = rng.gen_range(lo..=hi);
                links.push(Link { a: here + 1, b: spec.index(r + 1, c) + 1, length: spec.cell_height() * factor });
            }
        }
    }
    let topology = NetworkTopology::new(aps, links)?;

    let theta: Vec<u64> = grid.counts.iter().map(|&n| daily_average(n, options.days)).collect();
    let k = options
        .k
        .unwrap_or_else(|| default_capacity(&theta, placement, options.alpha, options.beta) as f64);
    let w = options.w.unwrap_or_else(|| theta.iter().copied().max().unwrap_or(1).max(1) as f64);
    let lambda = CLOUD_DELAY_FACTOR * topology.delays().max();
    let profile = ResourceProfile { k, w, alpha: options.alpha, beta: options.beta, lambda };
    Ok(ScenarioInstance::new(topology, profile, theta, grid.mean_distance.clone(), placement.to_vec()))
}
