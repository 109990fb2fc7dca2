//! Temperature-range prediction from same-cluster history.
//!
//! For a target date, each of the previous three years contributes a pool of
//! observed temperatures: days of the same region and cluster within a
//! window of the target's month-day. Pools are combined with the priority
//! triple `[1/3 - alpha, alpha, 1/3]` for one, two and three years back,
//! renormalized over the years that actually have data.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::partition::Region;

pub const FORECAST_HEADER: [&str; 7] = [
    "date",
    "region",
    "cluster",
    "low_c",
    "high_c",
    "category",
    "condition",
];
pub const DEFAULT_ALPHA: f64 = 0.25;
pub const DEFAULT_HALF_WIDTH_FLOOR_C: f64 = 1.5;
pub const DEFAULT_MATCH_WINDOW_DAYS: u32 = 7;
pub const MAX_YEARS_BACK: usize = 3;

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error("alpha must be in [0, 1/3], got {0}")]
    Alpha(f64),
    #[error("no history years available")]
    NoYears,
    #[error("year offset {0} outside 1-3")]
    YearBack(u8),
    #[error("priority weights of the available years {0:?} sum to zero")]
    ZeroWeight(Vec<u8>),
    #[error("no history to predict from")]
    NoHistory,
    #[error("weights cover years {weights:?} but pools are non-empty for {pools:?}")]
    WeightsMismatch { weights: Vec<u8>, pools: Vec<u8> },
    #[error("half-width floor must be finite and non-negative, got {0}")]
    Floor(f64),
    #[error("no category for region {region} cluster {cluster}")]
    MissingCategory { region: Region, cluster: usize },
    #[error("threshold table is empty")]
    EmptyThresholds,
    #[error("threshold table must be sorted ascending by max_center_c")]
    UnsortedThresholds,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("forecast csv line {line}: {reason}")]
    Row { line: u64, reason: String },
}

/// The priority triple for one, two and three years back, normalized over
/// the available years. Unavailable years carry weight zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorityWeights {
    pub alpha: f64,
    pub raw: [f64; 3],
    pub normalized: [f64; 3],
    pub available: [bool; 3],
}

impl PriorityWeights {
    pub fn available_years(&self) -> Vec<u8> {
        (1..=3)
            .filter(|&y| self.available[y as usize - 1])
            .collect()
    }

    pub fn weight(&self, years_back: u8) -> f64 {
        self.normalized[years_back as usize - 1]
    }
}

/// Builds normalized priority weights; `available_years` holds offsets in
/// 1..=3 (1 = last year).
pub fn priority_weights(
    alpha: f64,
    available_years: &[u8],
) -> Result<PriorityWeights, ForecastError> {
    if !(0.0..=1.0 / 3.0).contains(&alpha) {
        return Err(ForecastError::Alpha(alpha));
    }
    if available_years.is_empty() {
        return Err(ForecastError::NoYears);
    }
    let mut available = [false; 3];
    for &y in available_years {
        if !(1..=3).contains(&y) {
            return Err(ForecastError::YearBack(y));
        }
        available[y as usize - 1] = true;
    }
    let raw = [1.0 / 3.0 - alpha, alpha, 1.0 / 3.0];
    let total: f64 = (0..3).filter(|&i| available[i]).map(|i| raw[i]).sum();
    if total <= 0.0 {
        return Err(ForecastError::ZeroWeight(
            (1..=3).filter(|&y| available[y as usize - 1]).collect(),
        ));
    }
    let mut normalized = [0.0; 3];
    for i in 0..3 {
        if available[i] {
            normalized[i] = raw[i] / total;
        }
    }
    Ok(PriorityWeights {
        alpha,
        raw,
        normalized,
        available,
    })
}

/// One archived day: where it fell and what temperature was observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryDay {
    pub date: NaiveDate,
    pub region: Region,
    pub cluster: usize,
    pub temp_c: f64,
}

/// Archived days sorted by date.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HistoryArchive {
    days: Vec<HistoryDay>,
}

impl HistoryArchive {
    pub fn new(mut days: Vec<HistoryDay>) -> Self {
        days.sort_by_key(|d| d.date);
        Self { days }
    }

    pub fn days(&self) -> &[HistoryDay] {
        &self.days
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    fn between(&self, first: NaiveDate, last: NaiveDate) -> &[HistoryDay] {
        let lo = self.days.partition_point(|d| d.date < first);
        let hi = self.days.partition_point(|d| d.date <= last);
        &self.days[lo..hi]
    }
}

/// The target's month-day in an earlier year; Feb 29 maps to Feb 28.
pub fn same_day_years_back(date: NaiveDate, years_back: u8) -> NaiveDate {
    let year = date.year() - i32::from(years_back);
    NaiveDate::from_ymd_opt(year, date.month(), date.day())
        .or_else(|| NaiveDate::from_ymd_opt(year, date.month(), date.day() - 1))
        .expect("only Feb 29 can be missing")
}

/// Observed temperatures of archived days in the same region and cluster,
/// within `window_days` calendar days of the target's month-day
/// `years_back` years earlier. The window is a span of real dates, so
/// around early January it reaches into the preceding December.
pub fn historical_pool(
    archive: &HistoryArchive,
    date: NaiveDate,
    region: Region,
    cluster: usize,
    years_back: u8,
    window_days: u32,
) -> Result<Vec<f64>, ForecastError> {
    if !(1..=3).contains(&years_back) {
        return Err(ForecastError::YearBack(years_back));
    }
    let anchor = same_day_years_back(date, years_back);
    let w = Duration::days(i64::from(window_days));
    Ok(archive
        .between(anchor - w, anchor + w)
        .iter()
        .filter(|d| d.region == region && d.cluster == cluster)
        .map(|d| d.temp_c)
        .collect())
}

/// Pools for one, two and three years back.
pub fn historical_pools(
    archive: &HistoryArchive,
    date: NaiveDate,
    region: Region,
    cluster: usize,
    window_days: u32,
) -> [Vec<f64>; 3] {
    [1u8, 2, 3].map(|y| {
        historical_pool(archive, date, region, cluster, y, window_days).expect("offsets are 1-3")
    })
}

/// A predicted temperature interval in degrees Celsius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TempRange {
    pub low: f64,
    pub high: f64,
}

impl TempRange {
    pub fn center(&self) -> f64 {
        (self.low + self.high) / 2.0
    }

    /// Bounds truncated to whole degrees, as reported.
    pub fn reported(&self) -> (i64, i64) {
        (self.low.trunc() as i64, self.high.trunc() as i64)
    }
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Weighted mean of the per-year pool means, with a half-width equal to the
/// weighted mean of the per-year (population) standard deviations but never
/// below `half_width_floor`.
///
/// `weights` must cover exactly the years whose pools are non-empty.
pub fn predict_temp_range(
    weights: &PriorityWeights,
    pools: &[Vec<f64>; 3],
    half_width_floor: f64,
) -> Result<TempRange, ForecastError> {
    if !(half_width_floor >= 0.0 && half_width_floor.is_finite()) {
        return Err(ForecastError::Floor(half_width_floor));
    }
    let pool_years: Vec<u8> = (1..=3)
        .filter(|&y| !pools[y as usize - 1].is_empty())
        .collect();
    if pool_years.is_empty() {
        return Err(ForecastError::NoHistory);
    }
    if pool_years != weights.available_years() {
        return Err(ForecastError::WeightsMismatch {
            weights: weights.available_years(),
            pools: pool_years,
        });
    }
    let mut center = 0.0;
    let mut spread = 0.0;
    for (pool, w) in pools.iter().zip(weights.normalized) {
        if pool.is_empty() {
            continue;
        }
        let (m, s) = mean_and_std(pool);
        center += w * m;
        spread += w * s;
    }
    let half = spread.max(half_width_floor);
    Ok(TempRange {
        low: center - half,
        high: center + half,
    })
}

/// Derives weights from the non-empty pools and predicts.
pub fn predict_from_pools(
    alpha: f64,
    pools: &[Vec<f64>; 3],
    half_width_floor: f64,
) -> Result<TempRange, ForecastError> {
    let years: Vec<u8> = (1..=3)
        .filter(|&y| !pools[y as usize - 1].is_empty())
        .collect();
    if years.is_empty() {
        return Err(ForecastError::NoHistory);
    }
    let weights = priority_weights(alpha, &years)?;
    predict_temp_range(&weights, pools, half_width_floor)
}

/// Weather-category labels per (region, cluster id).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CategoryMap {
    labels: BTreeMap<(Region, usize), String>,
}

impl CategoryMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, region: Region, cluster: usize, label: impl Into<String>) {
        self.labels.insert((region, cluster), label.into());
    }

    pub fn categorize(&self, region: Region, cluster: usize) -> Result<&str, ForecastError> {
        self.labels
            .get(&(region, cluster))
            .map(String::as_str)
            .ok_or(ForecastError::MissingCategory { region, cluster })
    }

    /// Every (region, cluster) pair among `keys` that has no label.
    pub fn missing(&self, keys: impl IntoIterator<Item = (Region, usize)>) -> Vec<(Region, usize)> {
        keys.into_iter()
            .filter(|k| !self.labels.contains_key(k))
            .collect()
    }
}

impl FromIterator<(Region, usize, String)> for CategoryMap {
    fn from_iter<I: IntoIterator<Item = (Region, usize, String)>>(iter: I) -> Self {
        let mut map = Self::new();
        for (r, c, l) in iter {
            map.insert(r, c, l);
        }
        map
    }
}

pub fn categorize(
    region: Region,
    cluster: usize,
    map: &CategoryMap,
) -> Result<&str, ForecastError> {
    map.categorize(region, cluster)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Threshold {
    pub max_center_c: f64,
    pub label: String,
}

pub fn validate_thresholds(thresholds: &[Threshold]) -> Result<(), ForecastError> {
    if thresholds.is_empty() {
        return Err(ForecastError::EmptyThresholds);
    }
    let unordered = |w: &[Threshold]| {
        w[0].max_center_c
            .partial_cmp(&w[1].max_center_c)
            .is_none_or(|o| o.is_gt())
    };
    if thresholds.windows(2).any(unordered) {
        return Err(ForecastError::UnsortedThresholds);
    }
    Ok(())
}

/// Label of the first threshold whose `max_center_c` is at or above the
/// range center; the last entry catches everything above.
pub fn threshold_condition(
    low: f64,
    high: f64,
    thresholds: &[Threshold],
) -> Result<&str, ForecastError> {
    validate_thresholds(thresholds)?;
    let center = (low + high) / 2.0;
    let hit = thresholds
        .iter()
        .find(|t| center <= t.max_center_c)
        .unwrap_or_else(|| thresholds.last().expect("non-empty"));
    Ok(&hit.label)
}

/// One predicted day, with bounds in whole degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub date: NaiveDate,
    pub region: Region,
    pub cluster: usize,
    pub low_c: i64,
    pub high_c: i64,
    pub category: String,
    pub condition: String,
}

pub fn write_forecast_csv(
    records: &[ForecastRecord],
    sink: impl Write,
) -> Result<(), ForecastError> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(FORECAST_HEADER)?;
    for r in records {
        writer.write_record([
            r.date.format("%Y-%m-%d").to_string(),
            r.region.to_string(),
            r.cluster.to_string(),
            r.low_c.to_string(),
            r.high_c.to_string(),
            r.category.clone(),
            r.condition.clone(),
        ])?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_forecast_csv(source: impl Read) -> Result<Vec<ForecastRecord>, ForecastError> {
    let mut reader = csv::Reader::from_reader(source);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != FORECAST_HEADER {
        return Err(ForecastError::Row {
            line: 1,
            reason: format!("expected header `{}`", FORECAST_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |what: &str| ForecastError::Row {
            line,
            reason: format!("unparsable {what}"),
        };
        let low_c = record[3].parse().map_err(|_| bad("low_c"))?;
        let high_c = record[4].parse().map_err(|_| bad("high_c"))?;
        out.push(ForecastRecord {
            date: NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|_| bad("date"))?,
            region: record[1].parse().map_err(|_| bad("region"))?,
            cluster: record[2].parse().map_err(|_| bad("cluster"))?,
            low_c,
            high_c,
            category: record[5].to_string(),
            condition: record[6].to_string(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn boundary_alpha_drops_last_year() {
        let w = priority_weights(1.0 / 3.0, &[1, 2, 3]).unwrap();
        assert_eq!(w.raw[0], 0.0);
        assert!(close(w.normalized[0], 0.0));
        assert!(close(w.normalized[1], 0.5));
        assert!(close(w.normalized[2], 0.5));
    }

    #[test]
    fn sixth_alpha() {
        // raw (1/6, 1/6, 1/3) over 2/3
        let w = priority_weights(1.0 / 6.0, &[1, 2, 3]).unwrap();
        assert!(close(w.normalized[0], 0.25));
        assert!(close(w.normalized[1], 0.25));
        assert!(close(w.normalized[2], 0.5));
    }

    #[test]
    fn two_available_years() {
        // raw (1/12, 1/4) over 1/3
        let w = priority_weights(0.25, &[1, 2]).unwrap();
        assert!(close(w.normalized[0], 0.25));
        assert!(close(w.normalized[1], 0.75));
        assert_eq!(w.normalized[2], 0.0);
        assert_eq!(w.available_years(), vec![1, 2]);
    }

    #[test]
    fn weight_errors() {
        assert!(matches!(
            priority_weights(0.4, &[1]),
            Err(ForecastError::Alpha(_))
        ));
        assert!(matches!(
            priority_weights(-0.1, &[1]),
            Err(ForecastError::Alpha(_))
        ));
        assert!(matches!(
            priority_weights(0.1, &[]),
            Err(ForecastError::NoYears)
        ));
        assert!(matches!(
            priority_weights(0.1, &[4]),
            Err(ForecastError::YearBack(4))
        ));
        assert!(matches!(
            priority_weights(1.0 / 3.0, &[1]),
            Err(ForecastError::ZeroWeight(_))
        ));
    }

    fn archive(days: &[(NaiveDate, usize, f64)]) -> HistoryArchive {
        HistoryArchive::new(
            days.iter()
                .map(|&(date, cluster, temp_c)| HistoryDay {
                    date,
                    region: Region::of_date(date),
                    cluster,
                    temp_c,
                })
                .collect(),
        )
    }

    #[test]
    fn single_match() {
        let a = archive(&[(d(2014, 1, 2), 1, 26.0), (d(2014, 1, 3), 2, 20.0)]);
        let pool = historical_pool(&a, d(2015, 1, 2), Region::A, 1, 1, 7).unwrap();
        assert_eq!(pool, vec![26.0]);
        assert!(historical_pool(&a, d(2015, 1, 2), Region::A, 3, 1, 7)
            .unwrap()
            .is_empty());
        assert!(historical_pool(&a, d(2015, 1, 2), Region::A, 1, 2, 7)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn window_wraps_into_december() {
        // one archived day per date across the turn of 2013/2014
        let start = d(2013, 12, 1);
        let days: Vec<_> = start
            .iter_days()
            .take_while(|&x| x <= d(2014, 1, 31))
            .map(|x| (x, 0, f64::from(x.ordinal())))
            .collect();
        let a = archive(&days);
        let pool = historical_pool(&a, d(2015, 1, 2), Region::A, 0, 1, 7).unwrap();
        let expected: Vec<f64> = d(2013, 12, 26)
            .iter_days()
            .take_while(|&x| x <= d(2014, 1, 9))
            .map(|x| f64::from(x.ordinal()))
            .collect();
        assert_eq!(pool.len(), 15);
        assert_eq!(pool, expected);
    }

    #[test]
    fn leap_day_anchor() {
        assert_eq!(same_day_years_back(d(2016, 2, 29), 1), d(2015, 2, 28));
        assert_eq!(same_day_years_back(d(2016, 2, 29), 3), d(2013, 2, 28));
    }

    #[test]
    fn identical_pools() {
        let w = priority_weights(0.25, &[1, 2, 3]).unwrap();
        let pools = [vec![25.0], vec![25.0, 25.0], vec![25.0]];
        let r = predict_temp_range(&w, &pools, 1.5).unwrap();
        assert_eq!((r.low, r.high), (23.5, 26.5));
        assert_eq!(r.reported(), (23, 26));
    }

    #[test]
    fn weighted_center() {
        let w = priority_weights(0.25, &[1, 2, 3]).unwrap();
        assert!(close(w.normalized[0], 0.125) && close(w.normalized[1], 0.375));
        let pools = [vec![24.0], vec![26.0], vec![25.0]];
        let r = predict_temp_range(&w, &pools, 1.5).unwrap();
        // 0.125*24 + 0.375*26 + 0.5*25
        assert!(close(r.center(), 25.25));
        assert!(close(r.low, 23.75) && close(r.high, 26.75));
        assert_eq!(r.reported(), (23, 26));
    }

    #[test]
    fn single_year_with_spread() {
        // mean 26, population std 2
        let pools = [vec![24.0, 28.0], vec![], vec![]];
        let r = predict_from_pools(0.25, &pools, 1.5).unwrap();
        assert_eq!((r.low, r.high), (24.0, 28.0));
    }

    #[test]
    fn no_history() {
        let pools: [Vec<f64>; 3] = Default::default();
        assert!(matches!(
            predict_from_pools(0.25, &pools, 1.5),
            Err(ForecastError::NoHistory)
        ));
    }

    #[test]
    fn weights_must_match_pools() {
        let w = priority_weights(0.25, &[1, 2, 3]).unwrap();
        let pools = [vec![25.0], vec![], vec![25.0]];
        assert!(matches!(
            predict_temp_range(&w, &pools, 1.5),
            Err(ForecastError::WeightsMismatch { .. })
        ));
    }

    #[test]
    fn categories() {
        let mut map = CategoryMap::new();
        map.insert(Region::A, 0, "c0");
        assert_eq!(categorize(Region::A, 0, &map).unwrap(), "c0");
        let err = categorize(Region::A, 9, &map).unwrap_err();
        assert_eq!(err.to_string(), "no category for region A cluster 9");
        assert_eq!(
            map.missing([(Region::A, 0), (Region::B, 0)]),
            vec![(Region::B, 0)]
        );
    }

    fn thresholds() -> Vec<Threshold> {
        [(20.0, "cool"), (30.0, "warm"), (f64::INFINITY, "hot")]
            .into_iter()
            .map(|(max_center_c, label)| Threshold {
                max_center_c,
                label: label.into(),
            })
            .collect()
    }

    #[test]
    fn threshold_lookup() {
        let t = thresholds();
        assert_eq!(threshold_condition(23.0, 27.0, &t).unwrap(), "warm");
        assert_eq!(threshold_condition(18.0, 22.0, &t).unwrap(), "cool");
        assert_eq!(threshold_condition(33.0, 37.0, &t).unwrap(), "hot");
        assert!(matches!(
            threshold_condition(1.0, 2.0, &[]),
            Err(ForecastError::EmptyThresholds)
        ));
        let mut unsorted = t.clone();
        unsorted.swap(0, 1);
        assert!(matches!(
            threshold_condition(1.0, 2.0, &unsorted),
            Err(ForecastError::UnsortedThresholds)
        ));
    }

    #[test]
    fn forecast_csv_round_trip() {
        let records = vec![ForecastRecord {
            date: d(2014, 1, 1),
            region: Region::A,
            cluster: 1,
            low_c: 24,
            high_c: 27,
            category: "Smoggy, fogs, haze and smoke".into(),
            condition: "warm".into(),
        }];
        let mut buf = Vec::new();
        write_forecast_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("date,region,cluster,low_c,high_c,category,condition\n"));
        assert!(text.contains("\"Smoggy, fogs, haze and smoke\""));
        assert_eq!(read_forecast_csv(buf.as_slice()).unwrap(), records);
    }
}
