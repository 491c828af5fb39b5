use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{GridSpec, IngestError, OrderRecord};

/// 2017-07-01T00:00:00Z
const FIRST_DAY: i64 = 1_498_867_200;
const SECONDS_PER_DAY: i64 = 86_400;

/// Parameters of the synthetic order log: a few Gaussian hotspots near the
/// middle of the map over a thin uniform background that spills slightly
/// past the map edges.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub spec: GridSpec,
    pub orders_per_day: usize,
    /// Sampled days, five days apart.
    pub days: usize,
    pub hotspots: usize,
    /// Share of orders drawn from the background.
    pub background: f64,
}

impl SynthConfig {
    pub fn reference(spec: GridSpec) -> Self {
        SynthConfig { spec, orders_per_day: 3000, days: 5, hotspots: 6, background: 0.15 }
    }
}

/// Deterministic synthetic orders for `seed`.
pub fn synth_orders(config: &SynthConfig, seed: u64) -> Vec<OrderRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = &config.spec;
    let (lat_mid, lon_mid) = ((spec.lat_min + spec.lat_max) / 2.0, (spec.lon_min + spec.lon_max) / 2.0);
    let (lat_span, lon_span) = (spec.lat_max - spec.lat_min, spec.lon_max - spec.lon_min);

    let hotspots: Vec<(Normal<f64>, Normal<f64>, f64)> = (0..config.hotspots.max(1))
        .map(|_| {
            let lat = lat_mid + Normal::new(0.0, lat_span / 6.0).unwrap().sample(&mut rng);
            let lon = lon_mid + Normal::new(0.0, lon_span / 6.0).unwrap().sample(&mut rng);
            let spread = rng.gen_range(0.02..0.08);
            let weight = rng.gen_range(1.0..4.0);
            (
                Normal::new(lat, lat_span * spread).unwrap(),
                Normal::new(lon, lon_span * spread).unwrap(),
                weight,
            )
        })
        .collect();
    let total_weight: f64 = hotspots.iter().map(|h| h.2).sum();

    let mut records = Vec::with_capacity(config.orders_per_day * config.days);
    for day in 0..config.days {
        let start = FIRST_DAY + 5 * SECONDS_PER_DAY * day as i64;
        for _ in 0..config.orders_per_day {
            let (latitude, longitude) = if rng.gen_bool(config.background.clamp(0.0, 1.0)) {
                (
                    rng.gen_range(spec.lat_min - 0.02 * lat_span..=spec.lat_max + 0.02 * lat_span),
                    rng.gen_range(spec.lon_min - 0.02 * lon_span..=spec.lon_max + 0.02 * lon_span),
                )
            } else {
                let mut pick = rng.gen_range(0.0..total_weight);
                let mut chosen = &hotspots[hotspots.len() - 1];
                for h in &hotspots {
                    if pick < h.2 {
                        chosen = h;
                        break;
                    }
                    pick -= h.2;
                }
                (chosen.0.sample(&mut rng), chosen.1.sample(&mut rng))
            };
            let timestamp = start + rng.gen_range(0..SECONDS_PER_DAY);
            records.push(OrderRecord {
                latitude: (latitude * 1e6).round() / 1e6,
                longitude: (longitude * 1e6).round() / 1e6,
                timestamp: Some(timestamp),
            });
        }
    }
    records
}

/// Writes records as `order_id,timestamp,latitude,longitude` with a header.
pub fn write_orders(path: impl AsRef<Path>, records: &[OrderRecord]) -> Result<(), IngestError> {
    let path = path.as_ref();
    let io = |source| IngestError::Io { path: path.display().to_string(), source };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut writer = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let csv_err = |source| IngestError::Csv { path: path.display().to_string(), source };
    writer.write_record(["order_id", "timestamp", "latitude", "longitude"]).map_err(csv_err)?;
    for (i, r) in records.iter().enumerate() {
        let timestamp = r.timestamp.map(|t| t.to_string()).unwrap_or_default();
        writer
            .write_record([format!("o{i}"), timestamp, r.latitude.to_string(), r.longitude.to_string()])
            .map_err(csv_err)?;
    }
    writer.into_inner().map_err(|e| io(e.into_error()))?.flush().map_err(io)
}
