//! Case-report, travel-volume, origin and domestic-count inputs.
//!
//! File layouts (comma separated, ISO-8601 dates):
//!
//! * cases: `origin,destination,confirm_date,arrival_date,arrival_earliest,arrival_latest,n_cases,transport,group_id,include`
//! * volumes: `origin,destination,daily_travelers`
//! * domestic counts: `date,new_cases`
//! * origin config: JSON object with [`OriginConfig`] field names.

pub mod fixtures;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::InputError;

pub const CASE_COLUMNS: [&str; 10] = [
    "origin",
    "destination",
    "confirm_date",
    "arrival_date",
    "arrival_earliest",
    "arrival_latest",
    "n_cases",
    "transport",
    "group_id",
    "include",
];
pub const VOLUME_COLUMNS: [&str; 3] = ["origin", "destination", "daily_travelers"];
pub const DAILY_COLUMNS: [&str; 2] = ["date", "new_cases"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transport {
    Flight,
    Railway,
    Bus,
    Unknown,
}

impl FromStr for Transport {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "flight" => Ok(Transport::Flight),
            "railway" | "rail" => Ok(Transport::Railway),
            "bus" => Ok(Transport::Bus),
            "unknown" | "" => Ok(Transport::Unknown),
            other => Err(format!("unknown transport {other:?}")),
        }
    }
}

impl fmt::Display for Transport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transport::Flight => "flight",
            Transport::Railway => "railway",
            Transport::Bus => "bus",
            Transport::Unknown => "unknown",
        })
    }
}

/// One exported-case record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub origin: String,
    pub destination: String,
    pub confirm_date: NaiveDate,
    pub arrival_date: Option<NaiveDate>,
    pub arrival_earliest: Option<NaiveDate>,
    pub arrival_latest: Option<NaiveDate>,
    pub n_cases: u32,
    pub transport: Transport,
    pub group_id: Option<String>,
    pub include: bool,
}

impl CaseReport {
    pub fn has_known_arrival(&self) -> bool {
        self.arrival_date.is_some()
    }

    /// Confirmation delay in days when the arrival date is known.
    pub fn delay_days(&self) -> Option<u64> {
        self.arrival_date
            .map(|a| (self.confirm_date - a).num_days() as u64)
    }

    fn validate(&self) -> Result<(), String> {
        if self.n_cases == 0 {
            return Err("n_cases must be at least 1".into());
        }
        if let Some(a) = self.arrival_date {
            if a > self.confirm_date {
                return Err(format!(
                    "arrival_date {a} is after confirm_date {}",
                    self.confirm_date
                ));
            }
        }
        if let (Some(lo), Some(hi)) = (self.arrival_earliest, self.arrival_latest) {
            if lo > hi {
                return Err(format!("arrival_earliest {lo} is after arrival_latest {hi}"));
            }
        }
        Ok(())
    }
}

/// Average daily outbound travelers per destination.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VolumeTable {
    pub origin: Option<String>,
    pub daily_travelers: BTreeMap<String, f64>,
}

impl VolumeTable {
    pub fn get(&self, destination: &str) -> Option<f64> {
        self.daily_travelers.get(destination).copied()
    }

    pub fn destinations(&self) -> impl Iterator<Item = &str> {
        self.daily_travelers.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.daily_travelers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.daily_travelers.is_empty()
    }

    /// Fails if an included case's destination has no volume entry.
    pub fn check_covers(&self, cases: &[CaseReport]) -> Result<(), InputError> {
        for c in cases.iter().filter(|c| c.include) {
            if !self.daily_travelers.contains_key(&c.destination) {
                return Err(InputError::Invalid(format!(
                    "no travel volume for destination {:?}",
                    c.destination
                )));
            }
        }
        Ok(())
    }
}

impl FromIterator<(String, f64)> for VolumeTable {
    fn from_iter<T: IntoIterator<Item = (String, f64)>>(iter: T) -> Self {
        VolumeTable {
            origin: None,
            daily_travelers: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OriginConfig {
    pub name: String,
    pub epidemic_start: NaiveDate,
    pub study_end: NaiveDate,
    pub initial_cases: u64,
    pub population: u64,
    pub severe_fraction: f64,
    pub hospital_beds: u64,
}

impl OriginConfig {
    pub fn validate(&self) -> Result<(), InputError> {
        let fail = |m: String| Err(InputError::Invalid(format!("origin config: {m}")));
        if self.epidemic_start >= self.study_end {
            return fail("epidemic_start must precede study_end".into());
        }
        if self.initial_cases == 0 || self.initial_cases >= self.population {
            return fail("initial_cases must be in [1, population)".into());
        }
        if !(self.severe_fraction > 0.0 && self.severe_fraction < 1.0) {
            return fail("severe_fraction must be in (0, 1)".into());
        }
        if self.hospital_beds == 0 {
            return fail("hospital_beds must be positive".into());
        }
        Ok(())
    }

    pub fn with_initial_cases(&self, initial_cases: u64) -> Self {
        OriginConfig {
            initial_cases,
            ..self.clone()
        }
    }

    pub fn beta0(&self) -> f64 {
        crate::domain::log_initial_prevalence(self.initial_cases, self.population)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyCount {
    pub date: NaiveDate,
    pub new_cases: u64,
}

fn read_file(path: &Path) -> Result<String, InputError> {
    let mut s = String::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|source| InputError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(s)
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn check_header(
    rdr: &mut csv::Reader<&[u8]>,
    expected: &[&str],
    path: &Path,
) -> Result<(), InputError> {
    let header = rdr.headers().map_err(|e| InputError::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(InputError::File {
            path: path.to_path_buf(),
            message: format!("expected header {:?}, found {:?}", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn opt_date(s: &str) -> Result<Option<NaiveDate>, String> {
    let s = s.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("na") {
        return Ok(None);
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(Some)
        .map_err(|_| format!("malformed date {s:?}"))
}

fn req_date(s: &str) -> Result<NaiveDate, String> {
    opt_date(s)?.ok_or_else(|| "missing required date".to_string())
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(format!("invalid boolean {other:?}")),
    }
}

pub fn parse_case_reports(path: impl AsRef<Path>) -> Result<Vec<CaseReport>, InputError> {
    let path = path.as_ref();
    parse_case_reports_str(&read_file(path)?, path)
}

pub fn parse_case_reports_str(text: &str, path: &Path) -> Result<Vec<CaseReport>, InputError> {
    let mut rdr = csv_reader(text);
    check_header(&mut rdr, &CASE_COLUMNS, path)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        // header is row 1
        let row = i + 2;
        let err = |message: String| InputError::Row {
            path: path.to_path_buf(),
            row,
            message,
        };
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let f = |k: usize| rec.get(k).unwrap_or("");
        let n_cases: u32 = f(6)
            .parse()
            .map_err(|_| err(format!("invalid n_cases {:?}", f(6))))?;
        let group_id = Some(f(8).to_string()).filter(|g| !g.is_empty());
        let report = CaseReport {
            origin: f(0).to_string(),
            destination: f(1).to_string(),
            confirm_date: req_date(f(2)).map_err(&err)?,
            arrival_date: opt_date(f(3)).map_err(&err)?,
            arrival_earliest: opt_date(f(4)).map_err(&err)?,
            arrival_latest: opt_date(f(5)).map_err(&err)?,
            n_cases,
            transport: f(7).parse().map_err(&err)?,
            group_id,
            include: parse_bool(f(9)).map_err(&err)?,
        };
        if report.destination.is_empty() {
            return Err(err("empty destination".into()));
        }
        report.validate().map_err(&err)?;
        out.push(report);
    }
    Ok(collapse_groups(out))
}

/// Collapses rows sharing `(origin, group_id)` into one case carrying the
/// earliest confirmation date. Ungrouped rows pass through unchanged and the
/// input order is otherwise preserved.
pub fn collapse_groups(cases: Vec<CaseReport>) -> Vec<CaseReport> {
    let mut first: HashMap<(String, String), usize> = HashMap::new();
    let mut out: Vec<CaseReport> = Vec::with_capacity(cases.len());
    for c in cases {
        let Some(g) = c.group_id.clone() else {
            out.push(c);
            continue;
        };
        match first.get(&(c.origin.clone(), g.clone())) {
            Some(&idx) => {
                if c.confirm_date < out[idx].confirm_date {
                    out[idx] = CaseReport { n_cases: 1, ..c };
                }
            }
            None => {
                first.insert((c.origin.clone(), g), out.len());
                out.push(CaseReport { n_cases: 1, ..c });
            }
        }
    }
    out
}

/// Canonical CSV form of a case list (header plus one row per report).
pub fn write_case_reports<W: std::io::Write>(cases: &[CaseReport], w: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(CASE_COLUMNS)?;
    let d = |d: Option<NaiveDate>| d.map(|d| d.to_string()).unwrap_or_default();
    for c in cases {
        wtr.write_record([
            c.origin.clone(),
            c.destination.clone(),
            c.confirm_date.to_string(),
            d(c.arrival_date),
            d(c.arrival_earliest),
            d(c.arrival_latest),
            c.n_cases.to_string(),
            c.transport.to_string(),
            c.group_id.clone().unwrap_or_default(),
            c.include.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn parse_volumes(path: impl AsRef<Path>) -> Result<VolumeTable, InputError> {
    let path = path.as_ref();
    parse_volumes_str(&read_file(path)?, path)
}

pub fn parse_volumes_str(text: &str, path: &Path) -> Result<VolumeTable, InputError> {
    let mut rdr = csv_reader(text);
    check_header(&mut rdr, &VOLUME_COLUMNS, path)?;
    let mut table = VolumeTable::default();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let err = |message: String| InputError::Row {
            path: path.to_path_buf(),
            row,
            message,
        };
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let origin = rec.get(0).unwrap_or("").to_string();
        let dest = rec.get(1).unwrap_or("").to_string();
        let raw = rec.get(2).unwrap_or("");
        let v: f64 = raw
            .parse()
            .map_err(|_| err(format!("invalid daily_travelers {raw:?}")))?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(err(format!("daily_travelers must be positive, got {v}")));
        }
        match &table.origin {
            None => table.origin = Some(origin),
            Some(o) if *o != origin => {
                return Err(err(format!("mixed origins {o:?} and {origin:?}")));
            }
            _ => {}
        }
        if table.daily_travelers.insert(dest.clone(), v).is_some() {
            return Err(err(format!("duplicate destination {dest:?}")));
        }
    }
    Ok(table)
}

pub fn parse_origin_config(path: impl AsRef<Path>) -> Result<OriginConfig, InputError> {
    let path = path.as_ref();
    parse_origin_config_str(&read_file(path)?, path)
}

pub fn parse_origin_config_str(text: &str, path: &Path) -> Result<OriginConfig, InputError> {
    let cfg: OriginConfig = serde_json::from_str(text).map_err(|e| InputError::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Included cases confirmed on or before `upto`.
pub fn filter_window(cases: &[CaseReport], upto: NaiveDate) -> Vec<CaseReport> {
    cases
        .iter()
        .filter(|c| c.include && c.confirm_date <= upto)
        .cloned()
        .collect()
}

/// Included cases for one origin (matched case-insensitively).
pub fn for_origin(cases: &[CaseReport], origin: &str) -> Vec<CaseReport> {
    cases
        .iter()
        .filter(|c| c.origin.eq_ignore_ascii_case(origin))
        .cloned()
        .collect()
}

/// Daily domestic counts. Gaps between dates are permitted.
pub fn parse_daily_counts(path: impl AsRef<Path>) -> Result<Vec<DailyCount>, InputError> {
    let path = path.as_ref();
    parse_daily_counts_str(&read_file(path)?, path)
}

pub fn parse_daily_counts_str(text: &str, path: &Path) -> Result<Vec<DailyCount>, InputError> {
    let mut rdr = csv_reader(text);
    check_header(&mut rdr, &DAILY_COLUMNS, path)?;
    let mut out: Vec<DailyCount> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let err = |message: String| InputError::Row {
            path: PathBuf::from(path),
            row,
            message,
        };
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let date = req_date(rec.get(0).unwrap_or("")).map_err(&err)?;
        let raw = rec.get(1).unwrap_or("");
        let n: i64 = raw
            .parse()
            .map_err(|_| err(format!("invalid new_cases {raw:?}")))?;
        if n < 0 {
            return Err(err(format!("negative count {n}")));
        }
        if let Some(prev) = out.last() {
            if date <= prev.date {
                return Err(err(format!("date {date} is not after {}", prev.date)));
            }
        }
        out.push(DailyCount {
            date,
            new_cases: n as u64,
        });
    }
    Ok(out)
}
