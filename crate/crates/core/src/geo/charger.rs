//! EV charger records, filtering and CSV ingestion.
//!
//! CSV header: `id,lat,lon,type,available,scan_path`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::mercator::check_coordinates;
use super::GeoError;

pub const CHARGER_HEADER: [&str; 6] = ["id", "lat", "lon", "type", "available", "scan_path"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChargerType {
    Slow,
    Fast,
    Rapid,
}

impl ChargerType {
    pub const ALL: [ChargerType; 3] = [ChargerType::Slow, ChargerType::Fast, ChargerType::Rapid];

    pub fn as_str(self) -> &'static str {
        match self {
            ChargerType::Slow => "slow",
            ChargerType::Fast => "fast",
            ChargerType::Rapid => "rapid",
        }
    }
}

impl fmt::Display for ChargerType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChargerType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "slow" => Ok(ChargerType::Slow),
            "fast" => Ok(ChargerType::Fast),
            "rapid" => Ok(ChargerType::Rapid),
            other => Err(format!("unknown charger type {other:?} (expected slow, fast or rapid)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargerRecord {
    pub id: String,
    pub latitude: f64,
    pub longitude: f64,
    pub charger_type: ChargerType,
    pub available: bool,
    pub scan_path: Option<String>,
}

/// Filter over charger records. An empty type set admits every type.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ChargerQuery {
    #[serde(default)]
    pub types: BTreeSet<ChargerType>,
    #[serde(default)]
    pub available_only: bool,
}

impl ChargerQuery {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn matches(&self, record: &ChargerRecord) -> bool {
        (self.types.is_empty() || self.types.contains(&record.charger_type))
            && (!self.available_only || record.available)
    }

    /// Adds the type if absent, removes it if present.
    pub fn toggle_type(&mut self, t: ChargerType) {
        if !self.types.remove(&t) {
            self.types.insert(t);
        }
    }
}

/// Records matching `query`, in input order.
pub fn query_chargers<'a>(records: &'a [ChargerRecord], query: &ChargerQuery) -> Vec<&'a ChargerRecord> {
    records.iter().filter(|r| query.matches(r)).collect()
}

/// A rejected CSV row; `line` is 1-based and counts the header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => Err(format!("available must be true/false/0/1, got {other:?}")),
    }
}

fn parse_degrees(field: &str, name: &str) -> Result<f64, String> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("{name} is not a number: {field:?}"))
}

fn parse_row(fields: &csv::StringRecord, seen: &HashSet<String>) -> Result<ChargerRecord, String> {
    if fields.len() != CHARGER_HEADER.len() {
        return Err(format!("expected {} fields, found {}", CHARGER_HEADER.len(), fields.len()));
    }
    let id = fields[0].trim().to_string();
    if id.is_empty() {
        return Err("empty id".into());
    }
    if seen.contains(&id) {
        return Err(format!("duplicate id {id:?}"));
    }
    let latitude = parse_degrees(&fields[1], "lat")?;
    let longitude = parse_degrees(&fields[2], "lon")?;
    check_coordinates(latitude, longitude).map_err(|e| e.to_string())?;
    let charger_type = fields[3].parse::<ChargerType>()?;
    let available = parse_bool(&fields[4])?;
    let scan = fields[5].trim();
    Ok(ChargerRecord {
        id,
        latitude,
        longitude,
        charger_type,
        available,
        scan_path: (!scan.is_empty()).then(|| scan.to_string()),
    })
}

/// Parses charger CSV. Bad rows are reported and skipped; only a missing
/// or wrong header fails the whole file.
pub fn load_chargers(csv_text: &str) -> Result<(Vec<ChargerRecord>, Vec<RowError>), GeoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(csv_text.as_bytes());
    let mut rows = reader.records();

    let header = match rows.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(GeoError::Format(format!("unreadable header: {e}"))),
        None => return Err(GeoError::Format("missing header row".into())),
    };
    let names: Vec<String> = header.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    if names != CHARGER_HEADER {
        return Err(GeoError::Format(format!(
            "header must be {:?}, found {:?}",
            CHARGER_HEADER.join(","),
            names.join(",")
        )));
    }

    let mut records = Vec::new();
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    for row in rows {
        match row {
            Ok(fields) => {
                let line = fields.position().map_or(0, |p| p.line());
                if fields.iter().all(|f| f.trim().is_empty()) {
                    continue;
                }
                match parse_row(&fields, &seen) {
                    Ok(r) => {
                        seen.insert(r.id.clone());
                        records.push(r);
                    }
                    Err(message) => errors.push(RowError { line, message }),
                }
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                errors.push(RowError {
                    line,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok((records, errors))
}
