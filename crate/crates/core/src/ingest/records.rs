use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::par::{self, Execution};

const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderRecord {
    pub latitude: f64,
    pub longitude: f64,
    /// Seconds since the Unix epoch.
    pub timestamp: Option<i64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordSet {
    pub records: Vec<OrderRecord>,
    /// Lines that could not be read as a record.
    pub malformed: u64,
    /// Input files read.
    pub sources: usize,
}

impl RecordSet {
    /// Distinct UTC days among the timestamps, or the number of input files
    /// when no record carries a timestamp.
    pub fn days(&self) -> u64 {
        let days: BTreeSet<i64> = self
            .records
            .iter()
            .filter_map(|r| r.timestamp.map(|t| t.div_euclid(SECONDS_PER_DAY)))
            .collect();
        if days.is_empty() {
            self.sources.max(1) as u64
        } else {
            days.len() as u64
        }
    }

    fn extend(&mut self, other: RecordSet) {
        self.records.extend(other.records);
        self.malformed += other.malformed;
        self.sources += other.sources;
    }
}

fn sniff_delimiter(text: &str) -> u8 {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    [b',', b'\t', b';', b'|']
        .into_iter()
        .max_by_key(|&d| (first.bytes().filter(|&b| b == d).count(), d == b','))
        .unwrap_or(b',')
}

fn parse_timestamp(field: &str) -> Result<Option<i64>, ()> {
    if field.is_empty() {
        return Ok(None);
    }
    if let Ok(t) = field.parse::<i64>() {
        return Ok(Some(t));
    }
    match field.parse::<f64>() {
        Ok(t) if t.is_finite() => Ok(Some(t.floor() as i64)),
        _ => Err(()),
    }
}

fn parse_coordinate(field: &str) -> Option<f64> {
    field.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Records from delimiter-separated text with columns
/// `order_id, timestamp, latitude, longitude`.
///
/// The delimiter is taken from the first line. A first line whose
/// coordinates do not parse is treated as a header; any later line that does
/// not parse is counted as malformed and skipped.
pub fn parse_records(text: &str) -> RecordSet {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .delimiter(sniff_delimiter(text))
        .from_reader(text.as_bytes());
    let mut set = RecordSet { sources: 1, ..RecordSet::default() };
    let mut first = true;
    for row in reader.records() {
        let is_first = std::mem::replace(&mut first, false);
        let Ok(row) = row else {
            set.malformed += 1;
            continue;
        };
        if row.iter().all(str::is_empty) {
            continue;
        }
        let parsed = (row.len() >= 4)
            .then(|| {
                let latitude = parse_coordinate(&row[2])?;
                let longitude = parse_coordinate(&row[3])?;
                let timestamp = parse_timestamp(&row[1]).ok()?;
                Some(OrderRecord { latitude, longitude, timestamp })
            })
            .flatten();
        match parsed {
            Some(record) => set.records.push(record),
            None if is_first => {}
            None => set.malformed += 1,
        }
    }
    set
}

pub fn read_records(paths: &[PathBuf]) -> Result<RecordSet, IngestError> {
    read_records_with(paths, Execution::default())
}

/// Reads and concatenates several files in the order given; files are parsed
/// in parallel when `exec` allows.
pub fn read_records_with(paths: &[PathBuf], exec: Execution) -> Result<RecordSet, IngestError> {
    let parsed = par::map(exec, paths, |path: &PathBuf| read_one(path));
    let mut set = RecordSet::default();
    for result in parsed {
        set.extend(result?);
    }
    Ok(set)
}

fn read_one(path: &Path) -> Result<RecordSet, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_records(&text))
}
