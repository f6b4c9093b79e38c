//! Seismic catalog records: CSV parsing, filtering, and synthetic generation.
//!
//! The on-disk format is a UTF-8, comma-delimited file with the exact header
//! `date,time,latitude,longitude,depth_km,magnitude,zone`. Dates are
//! `YYYY-MM-DD`, times `HH:MM:SS`, numeric fields decimal literals with a `.`
//! separator, and zones uppercase tokens without commas.

use chrono::{NaiveDate, NaiveTime, Timelike};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;
use std::io::{Read, Write};
use thiserror::Error;

/// Exact header line of the catalog CSV format.
pub const CSV_HEADER: &str = "date,time,latitude,longitude,depth_km,magnitude,zone";

const FIELD_NAMES: [&str; 7] = [
    "date",
    "time",
    "latitude",
    "longitude",
    "depth_km",
    "magnitude",
    "zone",
];

/// One seismic event.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogRecord {
    pub date: NaiveDate,
    pub time: NaiveTime,
    /// Degrees in [-90, 90].
    pub latitude: f64,
    /// Degrees in [-180, 180].
    pub longitude: f64,
    /// Kilometers, >= 0.
    pub depth_km: f64,
    /// Richter-scale value in (0, 10].
    pub magnitude: f64,
    /// Region label: uppercase token without commas.
    pub zone: String,
}

impl CatalogRecord {
    /// Checks the record invariants, returning the offending field name.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if !self.latitude.is_finite() || !(-90.0..=90.0).contains(&self.latitude) {
            return Err(("latitude", format!("{} outside [-90, 90]", self.latitude)));
        }
        if !self.longitude.is_finite() || !(-180.0..=180.0).contains(&self.longitude) {
            return Err(("longitude", format!("{} outside [-180, 180]", self.longitude)));
        }
        if !self.depth_km.is_finite() || self.depth_km < 0.0 {
            return Err(("depth_km", format!("{} is negative", self.depth_km)));
        }
        if !self.magnitude.is_finite() || self.magnitude <= 0.0 || self.magnitude > 10.0 {
            return Err(("magnitude", format!("{} outside (0, 10]", self.magnitude)));
        }
        if !is_zone_token(&self.zone) {
            return Err(("zone", format!("`{}` is not an uppercase token", self.zone)));
        }
        Ok(())
    }
}

fn is_zone_token(zone: &str) -> bool {
    !zone.is_empty()
        && zone
            .chars()
            .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_' || c == '-')
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("missing or invalid header: expected `{CSV_HEADER}`")]
    MissingHeader,
    #[error("row {row}: field `{field}`: {reason}")]
    MalformedRow {
        row: usize,
        field: &'static str,
        reason: String,
    },
    #[error("row {row}: field `{field}` is empty")]
    EmptyField { row: usize, field: &'static str },
    #[error("invalid date range: start {start} is after end {end}")]
    InvalidRange { start: NaiveDate, end: NaiveDate },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Result of a non-strict parse: valid records plus the skipped-row count.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCatalog {
    pub records: Vec<CatalogRecord>,
    pub skipped: usize,
}

/// Parses the catalog CSV format from a reader.
///
/// In strict mode the first invalid row aborts with a row-numbered error; in
/// non-strict mode invalid rows are skipped and counted. Rows are numbered by
/// file line, the header being line 1.
pub fn parse_catalog<R: Read>(source: R, strict: bool) -> Result<ParsedCatalog, CatalogError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);

    let mut rows = reader.records();
    let header = match rows.next() {
        Some(Ok(rec)) => rec,
        Some(Err(e)) => return Err(map_csv_error(e, 1)),
        None => return Err(CatalogError::MissingHeader),
    };
    let header_line: Vec<&str> = header.iter().collect();
    if header_line.join(",") != CSV_HEADER {
        return Err(CatalogError::MissingHeader);
    }

    let mut records = Vec::new();
    let mut skipped = 0usize;
    for (i, row) in rows.enumerate() {
        let line = i + 2;
        let parsed = row
            .map_err(|e| map_csv_error(e, line))
            .and_then(|rec| parse_row(&rec, line));
        match parsed {
            Ok(record) => records.push(record),
            Err(e @ (CatalogError::MalformedRow { .. } | CatalogError::EmptyField { .. })) => {
                if strict {
                    return Err(e);
                }
                skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ParsedCatalog { records, skipped })
}

fn map_csv_error(e: csv::Error, line: usize) -> CatalogError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CatalogError::Io(io),
            _ => unreachable!("is_io_error guarantees an Io kind"),
        }
    } else {
        CatalogError::MalformedRow {
            row: line,
            field: "row",
            reason: e.to_string(),
        }
    }
}

fn parse_row(rec: &csv::StringRecord, line: usize) -> Result<CatalogRecord, CatalogError> {
    if rec.len() != FIELD_NAMES.len() {
        return Err(CatalogError::MalformedRow {
            row: line,
            field: "row",
            reason: format!("expected {} fields, found {}", FIELD_NAMES.len(), rec.len()),
        });
    }
    let field = |idx: usize| -> Result<&str, CatalogError> {
        let raw = rec.get(idx).unwrap_or("");
        if raw.is_empty() {
            Err(CatalogError::EmptyField {
                row: line,
                field: FIELD_NAMES[idx],
            })
        } else {
            Ok(raw)
        }
    };
    let malformed = |idx: usize, reason: String| CatalogError::MalformedRow {
        row: line,
        field: FIELD_NAMES[idx],
        reason,
    };

    let date = NaiveDate::parse_from_str(field(0)?, "%Y-%m-%d")
        .map_err(|e| malformed(0, e.to_string()))?;
    let time = NaiveTime::parse_from_str(field(1)?, "%H:%M:%S")
        .map_err(|e| malformed(1, e.to_string()))?;
    let mut numbers = [0.0f64; 4];
    for (slot, idx) in numbers.iter_mut().zip(2..6) {
        *slot = field(idx)?
            .parse::<f64>()
            .map_err(|e| malformed(idx, e.to_string()))?;
    }
    let record = CatalogRecord {
        date,
        time,
        latitude: numbers[0],
        longitude: numbers[1],
        depth_km: numbers[2],
        magnitude: numbers[3],
        zone: field(6)?.to_string(),
    };
    record.validate().map_err(|(field, reason)| CatalogError::MalformedRow {
        row: line,
        field,
        reason,
    })?;
    Ok(record)
}

/// Writes records in the catalog CSV format. Numeric fields use the shortest
/// decimal representation that round-trips the stored `f64` exactly.
pub fn serialize_catalog<W: Write>(records: &[CatalogRecord], mut out: W) -> Result<(), CatalogError> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.date.format("%Y-%m-%d"),
            r.time.format("%H:%M:%S"),
            r.latitude,
            r.longitude,
            r.depth_km,
            r.magnitude,
            r.zone
        )?;
    }
    Ok(())
}

/// Retains records with magnitude strictly above `min_magnitude` and date
/// within the inclusive range when one is given. Order is preserved.
pub fn filter_records(
    records: &[CatalogRecord],
    min_magnitude: f64,
    date_range: Option<(NaiveDate, NaiveDate)>,
) -> Result<Vec<CatalogRecord>, CatalogError> {
    if let Some((start, end)) = date_range {
        if start > end {
            return Err(CatalogError::InvalidRange { start, end });
        }
    }
    Ok(records
        .iter()
        .filter(|r| r.magnitude > min_magnitude)
        .filter(|r| match date_range {
            Some((start, end)) => r.date >= start && r.date <= end,
            None => true,
        })
        .cloned()
        .collect())
}

/// Bounding box, event window, and magnitude law for synthetic catalogs.
///
/// Magnitudes follow a truncated exponential above `magnitude_floor`, capped
/// at `magnitude_cap`; the zone label is the bounding-box grid cell holding
/// the epicenter.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthRegion {
    pub lat_range: (f64, f64),
    pub lon_range: (f64, f64),
    pub max_depth_km: f64,
    pub date_range: (NaiveDate, NaiveDate),
    pub magnitude_floor: f64,
    pub magnitude_cap: f64,
    pub magnitude_rate: f64,
    /// Zone grid cells over the bounding box: (latitude rows, longitude cols).
    pub zone_grid: (usize, usize),
}

impl Default for SynthRegion {
    fn default() -> Self {
        Self {
            lat_range: (14.0, 33.0),
            lon_range: (-118.0, -86.0),
            max_depth_km: 250.0,
            date_range: (
                NaiveDate::from_ymd_opt(2006, 3, 2).unwrap(),
                NaiveDate::from_ymd_opt(2013, 5, 1).unwrap(),
            ),
            magnitude_floor: 4.0,
            magnitude_cap: 8.5,
            magnitude_rate: 2.0,
            zone_grid: (3, 3),
        }
    }
}

impl SynthRegion {
    fn zone_label(&self, latitude: f64, longitude: f64) -> String {
        let cell = |v: f64, range: (f64, f64), n: usize| -> usize {
            let t = (v - range.0) / (range.1 - range.0);
            ((t * n as f64) as usize).min(n - 1)
        };
        let row = cell(latitude, self.lat_range, self.zone_grid.0);
        let col = cell(longitude, self.lon_range, self.zone_grid.1);
        format!("Z{row}_{col}")
    }
}

/// Deterministically generates `count` valid records inside `region`.
pub fn generate_synthetic_catalog(seed: u64, count: usize, region: &SynthRegion) -> Vec<CatalogRecord> {
    debug_assert!(region.lat_range.0 < region.lat_range.1);
    debug_assert!(region.lon_range.0 < region.lon_range.1);
    debug_assert!(region.date_range.0 <= region.date_range.1);
    debug_assert!(region.magnitude_floor < region.magnitude_cap);
    debug_assert!(region.zone_grid.0 >= 1 && region.zone_grid.1 >= 1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let day_span = (region.date_range.1 - region.date_range.0).num_days();
    // Inverse CDF of the exponential truncated to (floor, cap].
    let mag_scale = 1.0 - (-region.magnitude_rate * (region.magnitude_cap - region.magnitude_floor)).exp();

    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let latitude = rng.gen_range(region.lat_range.0..region.lat_range.1);
        let longitude = rng.gen_range(region.lon_range.0..region.lon_range.1);
        let depth_km = rng.gen_range(0.0..region.max_depth_km);
        let date = region.date_range.0 + chrono::Duration::days(rng.gen_range(0..=day_span));
        let time = NaiveTime::from_num_seconds_from_midnight_opt(rng.gen_range(0..86_400), 0)
            .expect("seconds in range");
        // u in (0, 1] keeps the magnitude strictly above the floor.
        let u = 1.0 - rng.gen::<f64>();
        let magnitude =
            region.magnitude_floor - (1.0 - u * mag_scale).ln() / region.magnitude_rate;
        let record = CatalogRecord {
            zone: region.zone_label(latitude, longitude),
            date,
            time,
            latitude,
            longitude,
            depth_km,
            magnitude,
        };
        debug_assert!(record.validate().is_ok());
        records.push(record);
    }
    records
}

/// Hour, minute, and unused-second accessors live on `chrono`; re-exported
/// here so downstream code does not need the `Timelike` import.
pub fn time_fields(time: NaiveTime) -> (u32, u32, u32) {
    (time.hour(), time.minute(), time.second())
}
