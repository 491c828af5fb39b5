use super::{IngestError, OrderRecord};
use crate::par::{self, Execution};

/// Records binned per parallel chunk.
const CHUNK: usize = 8192;
/// Fixed-point scale for distance sums, so totals do not depend on order.
const DISTANCE_SCALE: f64 = (1u64 << 40) as f64;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    /// Latitude segments.
    pub rows: usize,
    /// Longitude segments.
    pub cols: usize,
}

impl GridSpec {
    /// The reference map: latitude 30.57 to 30.78, longitude 103.96 to 104.17.
    pub fn reference(rows: usize, cols: usize) -> Self {
        GridSpec { lat_min: 30.57, lat_max: 30.78, lon_min: 103.96, lon_max: 104.17, rows, cols }
    }

    pub fn check(&self) -> Result<(), IngestError> {
        let finite = [self.lat_min, self.lat_max, self.lon_min, self.lon_max].iter().all(|v| v.is_finite());
        if !finite || !(self.lat_min < self.lat_max) || !(self.lon_min < self.lon_max) {
            return Err(IngestError::InvalidGrid(format!(
                "ranges [{}, {}] x [{}, {}] are empty or not finite",
                self.lat_min, self.lat_max, self.lon_min, self.lon_max
            )));
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(IngestError::InvalidGrid(format!("{}x{} has no cells", self.rows, self.cols)));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn cell_height(&self) -> f64 {
        (self.lat_max - self.lat_min) / self.rows as f64
    }

    pub fn cell_width(&self) -> f64 {
        (self.lon_max - self.lon_min) / self.cols as f64
    }

    /// `(latitude, longitude)` of a cell's center.
    pub fn center(&self, cell: usize) -> (f64, f64) {
        let (r, c) = (cell / self.cols, cell % self.cols);
        (
            self.lat_min + (r as f64 + 0.5) * self.cell_height(),
            self.lon_min + (c as f64 + 0.5) * self.cell_width(),
        )
    }

    fn segment(value: f64, min: f64, max: f64, parts: usize) -> usize {
        let k = ((value - min) / (max - min) * parts as f64).floor() as usize;
        k.min(parts - 1)
    }

    /// Cell holding a point; half-open bins, with the upper edge in the last bin.
    pub fn locate(&self, lat: f64, lon: f64) -> Option<usize> {
        let inside = (self.lat_min..=self.lat_max).contains(&lat) && (self.lon_min..=self.lon_max).contains(&lon);
        inside.then(|| {
            self.index(
                Self::segment(lat, self.lat_min, self.lat_max, self.rows),
                Self::segment(lon, self.lon_min, self.lon_max, self.cols),
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCounts {
    pub spec: GridSpec,
    /// Records per cell, row-major.
    pub counts: Vec<u64>,
    /// Mean distance in degrees from a cell's records to its center; 0 when empty.
    pub mean_distance: Vec<f64>,
    pub in_bounds: u64,
    pub out_of_bounds: u64,
}

struct Partial {
    counts: Vec<u64>,
    distance: Vec<u128>,
    outside: u64,
}

fn bin_chunk(spec: &GridSpec, chunk: &[OrderRecord]) -> Partial {
    let mut partial = Partial { counts: vec![0; spec.cells()], distance: vec![0; spec.cells()], outside: 0 };
    for record in chunk {
        match spec.locate(record.latitude, record.longitude) {
            Some(cell) => {
                let (lat, lon) = spec.center(cell);
                let d = ((record.latitude - lat).powi(2) + (record.longitude - lon).powi(2)).sqrt();
                partial.counts[cell] += 1;
                partial.distance[cell] += (d * DISTANCE_SCALE).round() as u128;
            }
            None => partial.outside += 1,
        }
    }
    partial
}

pub fn gridify(records: &[OrderRecord], spec: &GridSpec) -> Result<GridCounts, IngestError> {
    gridify_with(records, spec, Execution::default())
}

/// Per-cell counts and mean user-to-center distance.
///
/// Chunks are binned independently and merged with integer sums, so the
/// result is the same for any record order and execution strategy.
pub fn gridify_with(records: &[OrderRecord], spec: &GridSpec, exec: Execution) -> Result<GridCounts, IngestError> {
    spec.check()?;
    let chunks: Vec<&[OrderRecord]> = records.chunks(CHUNK).collect();
    let partials = par::map(exec, &chunks, |chunk| bin_chunk(spec, chunk));
    let mut counts = vec![0u64; spec.cells()];
    let mut distance = vec![0u128; spec.cells()];
    let mut outside = 0;
    for partial in partials {
        for (total, n) in counts.iter_mut().zip(partial.counts) {
            *total += n;
        }
        for (total, d) in distance.iter_mut().zip(partial.distance) {
            *total += d;
        }
        outside += partial.outside;
    }
    let in_bounds: u64 = counts.iter().sum();
    if in_bounds == 0 {
        return Err(IngestError::NoRecords { out_of_bounds: outside });
    }
    let mean_distance = counts
        .iter()
        .zip(&distance)
        .map(|(&n, &d)| if n == 0 { 0.0 } else { d as f64 / DISTANCE_SCALE / n as f64 })
        .collect();
    Ok(GridCounts { spec: spec.clone(), counts, mean_distance, in_bounds, out_of_bounds: outside })
}

/// Servers in the `m` busiest cells; ties go to the lower cell index.
pub fn place_servers(counts: &[u64], m: usize) -> Result<Vec<bool>, IngestError> {
    if m > counts.len() {
        return Err(IngestError::TooManyServers { servers: m, grids: counts.len() });
    }
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut placement = vec![false; counts.len()];
    for &cell in &order[..m] {
        placement[cell] = true;
    }
    Ok(placement)
}
