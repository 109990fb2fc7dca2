//! Parsing and daily grouping of raw hourly pollutant readings.
//!
//! Readings arrive as CSV with the header `date,hour,pollutant,value`
//! (ISO-8601 dates, hour 0-23). Observed temperatures arrive separately as
//! `date,temp_c`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const READINGS_HEADER: [&str; 4] = ["date", "hour", "pollutant", "value"];
pub const TEMPERATURE_HEADER: [&str; 2] = ["date", "temp_c"];
pub const DEFAULT_MIN_HOURS: usize = 12;

/// The five tracked pollutants, in feature-vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pollutant {
    #[serde(rename = "CO")]
    Co,
    #[serde(rename = "NO2")]
    No2,
    #[serde(rename = "O3")]
    O3,
    #[serde(rename = "PM10")]
    Pm10,
    #[serde(rename = "SO2")]
    So2,
}

impl Pollutant {
    pub const ALL: [Pollutant; 5] = [
        Pollutant::Co,
        Pollutant::No2,
        Pollutant::O3,
        Pollutant::Pm10,
        Pollutant::So2,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Pollutant::Co => "CO",
            Pollutant::No2 => "NO2",
            Pollutant::O3 => "O3",
            Pollutant::Pm10 => "PM10",
            Pollutant::So2 => "SO2",
        }
    }

    /// Position of this pollutant in a feature vector.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Pollutant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown pollutant code `{0}`")]
pub struct UnknownPollutant(pub String);

impl FromStr for Pollutant {
    type Err = UnknownPollutant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let code = s.trim();
        Pollutant::ALL
            .into_iter()
            .find(|p| p.code().eq_ignore_ascii_case(code))
            .ok_or_else(|| UnknownPollutant(code.to_string()))
    }
}

/// One timestamped concentration measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourlyReading {
    pub date: NaiveDate,
    pub hour: u8,
    pub pollutant: Pollutant,
    pub value: f64,
}

/// Why a single CSV row was rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RowErrorKind {
    #[error("expected {expected} columns, found {found}")]
    ColumnCount { expected: usize, found: usize },
    #[error("unparsable date `{0}`")]
    Date(String),
    #[error("unparsable hour `{0}`")]
    Hour(String),
    #[error("hour {0} outside 0-23")]
    HourRange(u32),
    #[error(transparent)]
    Pollutant(#[from] UnknownPollutant),
    #[error("unparsable number `{0}`")]
    Number(String),
    #[error("negative value {0}")]
    Negative(f64),
    #[error("non-finite value `{0}`")]
    NonFinite(String),
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct RowError {
    pub line: u64,
    pub kind: RowErrorKind,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error(transparent)]
    Row(#[from] RowError),
    #[error("minimum hours per day must be in 1..=24, got {0}")]
    MinHours(usize),
}

/// Output of a lenient parse: accepted readings plus bookkeeping.
#[derive(Debug, Clone, Default)]
pub struct ParsedReadings {
    pub readings: Vec<HourlyReading>,
    /// Rows dropped because a later row had the same (date, hour, pollutant).
    pub superseded: usize,
    pub rejected: Vec<RowError>,
}

impl ParsedReadings {
    pub fn row_count(&self) -> usize {
        self.readings.len() + self.superseded + self.rejected.len()
    }
}

fn check_header(reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<(), IngestError> {
    let header = reader.headers()?;
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != expected {
        return Err(IngestError::Header {
            expected: expected.join(","),
            found: found.join(","),
        });
    }
    Ok(())
}

fn csv_reader(source: impl Read) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source)
}

fn parse_date(s: &str) -> Result<NaiveDate, RowErrorKind> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| RowErrorKind::Date(s.to_string()))
}

fn parse_value(s: &str) -> Result<f64, RowErrorKind> {
    let value: f64 = s.parse().map_err(|_| RowErrorKind::Number(s.to_string()))?;
    if !value.is_finite() {
        return Err(RowErrorKind::NonFinite(s.to_string()));
    }
    Ok(value)
}

fn parse_reading(record: &csv::StringRecord) -> Result<HourlyReading, RowErrorKind> {
    if record.len() != READINGS_HEADER.len() {
        return Err(RowErrorKind::ColumnCount {
            expected: READINGS_HEADER.len(),
            found: record.len(),
        });
    }
    let date = parse_date(&record[0])?;
    let hour: u32 = record[1]
        .parse()
        .map_err(|_| RowErrorKind::Hour(record[1].to_string()))?;
    if hour > 23 {
        return Err(RowErrorKind::HourRange(hour));
    }
    let pollutant: Pollutant = record[2].parse()?;
    let value = parse_value(&record[3])?;
    if value < 0.0 {
        return Err(RowErrorKind::Negative(value));
    }
    Ok(HourlyReading {
        date,
        hour: hour as u8,
        pollutant,
        value,
    })
}

/// Parses a readings CSV, collecting bad rows instead of failing on them.
///
/// Duplicate `(date, hour, pollutant)` keys are resolved last-row-wins; the
/// surviving reading keeps the position of the last row.
pub fn parse_hourly_csv_lenient(source: impl Read) -> Result<ParsedReadings, IngestError> {
    let mut reader = csv_reader(source);
    check_header(&mut reader, &READINGS_HEADER)?;

    let mut slots: Vec<Option<HourlyReading>> = Vec::new();
    let mut latest: HashMap<(NaiveDate, u8, Pollutant), usize> = HashMap::new();
    let mut out = ParsedReadings::default();

    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        match parse_reading(&record) {
            Ok(reading) => {
                let key = (reading.date, reading.hour, reading.pollutant);
                if let Some(prev) = latest.insert(key, slots.len()) {
                    slots[prev] = None;
                    out.superseded += 1;
                }
                slots.push(Some(reading));
            }
            Err(kind) => out.rejected.push(RowError { line, kind }),
        }
    }
    out.readings = slots.into_iter().flatten().collect();
    Ok(out)
}

/// Parses a readings CSV, failing on the first bad row.
pub fn parse_hourly_csv(source: impl Read) -> Result<ParsedReadings, IngestError> {
    let mut parsed = parse_hourly_csv_lenient(source)?;
    if !parsed.rejected.is_empty() {
        return Err(IngestError::Row(parsed.rejected.swap_remove(0)));
    }
    Ok(parsed)
}

pub fn write_hourly_csv(readings: &[HourlyReading], sink: impl Write) -> Result<(), IngestError> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(READINGS_HEADER)?;
    for r in readings {
        writer.write_record([
            r.date.format("%Y-%m-%d").to_string(),
            format!("{:02}", r.hour),
            r.pollutant.code().to_string(),
            r.value.to_string(),
        ])?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Parses the observed-temperature CSV (`date,temp_c`, one row per date).
pub fn parse_temperature_csv(source: impl Read) -> Result<BTreeMap<NaiveDate, f64>, IngestError> {
    let mut reader = csv_reader(source);
    check_header(&mut reader, &TEMPERATURE_HEADER)?;

    let mut temps = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let row = |kind| RowError { line, kind };
        if record.len() != TEMPERATURE_HEADER.len() {
            return Err(row(RowErrorKind::ColumnCount {
                expected: TEMPERATURE_HEADER.len(),
                found: record.len(),
            })
            .into());
        }
        let date = parse_date(&record[0]).map_err(row)?;
        let temp = parse_value(&record[1]).map_err(row)?;
        if temps.insert(date, temp).is_some() {
            return Err(row(RowErrorKind::DuplicateDate(date)).into());
        }
    }
    Ok(temps)
}

pub fn write_temperature_csv(
    temps: &BTreeMap<NaiveDate, f64>,
    sink: impl Write,
) -> Result<(), IngestError> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(TEMPERATURE_HEADER)?;
    for (date, temp) in temps {
        writer.write_record([date.format("%Y-%m-%d").to_string(), temp.to_string()])?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One pollutant's readings for one date, sorted by hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaySeries {
    date: NaiveDate,
    pollutant: Pollutant,
    points: Vec<(u8, f64)>,
}

impl DaySeries {
    /// Builds a series from `(hour, value)` pairs in any order.
    ///
    /// Returns `None` if the input is empty, longer than 24, has an hour
    /// outside 0-23, or repeats an hour.
    pub fn new(date: NaiveDate, pollutant: Pollutant, mut points: Vec<(u8, f64)>) -> Option<Self> {
        if points.is_empty() || points.len() > 24 {
            return None;
        }
        points.sort_by_key(|&(h, _)| h);
        let strictly_increasing = points.windows(2).all(|w| w[0].0 < w[1].0);
        if !strictly_increasing || points.iter().any(|&(h, _)| h > 23) {
            return None;
        }
        Some(Self {
            date,
            pollutant,
            points,
        })
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn pollutant(&self) -> Pollutant {
        self.pollutant
    }

    pub fn points(&self) -> &[(u8, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|&(_, v)| v)
    }
}

pub type SeriesKey = (NaiveDate, Pollutant);

/// Readings grouped per (date, pollutant).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DailyGroups {
    pub series: BTreeMap<SeriesKey, DaySeries>,
    /// Keys with fewer than the required number of hours, in key order.
    pub incomplete: Vec<SeriesKey>,
}

impl DailyGroups {
    /// Every date that has at least one reading, complete or not.
    pub fn dates(&self) -> Vec<NaiveDate> {
        let mut dates: Vec<NaiveDate> = self
            .series
            .keys()
            .chain(self.incomplete.iter())
            .map(|&(d, _)| d)
            .collect();
        dates.sort_unstable();
        dates.dedup();
        dates
    }
}

/// Groups readings by (date, pollutant), sorting each group by hour.
///
/// Groups with fewer than `min_hours` points are listed in
/// [`DailyGroups::incomplete`] and left out of the series map. Readings are
/// expected to be duplicate-free (as produced by [`parse_hourly_csv`]); if a
/// key repeats anyway the larger value is kept so the result stays
/// independent of input order.
pub fn group_daily(
    readings: &[HourlyReading],
    min_hours: usize,
) -> Result<DailyGroups, IngestError> {
    if !(1..=24).contains(&min_hours) {
        return Err(IngestError::MinHours(min_hours));
    }
    let mut buckets: BTreeMap<SeriesKey, BTreeMap<u8, f64>> = BTreeMap::new();
    for r in readings {
        buckets
            .entry((r.date, r.pollutant))
            .or_default()
            .entry(r.hour)
            .and_modify(|v| *v = v.max(r.value))
            .or_insert(r.value);
    }

    let mut groups = DailyGroups::default();
    for (key, hours) in buckets {
        if hours.len() < min_hours {
            groups.incomplete.push(key);
            continue;
        }
        let series = DaySeries::new(key.0, key.1, hours.into_iter().collect())
            .expect("hours are unique, sorted and within 0-23");
        groups.series.insert(key, series);
    }
    Ok(groups)
}
