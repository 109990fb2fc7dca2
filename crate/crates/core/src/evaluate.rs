//! Hit/miss scoring of forecasts and the accuracy percentage.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::NaiveDate;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forecast::ForecastRecord;

pub const REPORT_HEADER: [&str; 6] = [
    "date",
    "probable_range_c",
    "actual_c",
    "hit",
    "miss",
    "category",
];

#[derive(Debug, Error)]
pub enum EvaluateError {
    #[error("hits ({hits}) exceed total ({total})")]
    HitsExceedTotal { hits: u64, total: u64 },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Hit,
    Miss,
}

/// A hit when `actual` lies in `[low, high]`, both ends included.
pub fn score_day(low: f64, high: f64, actual: f64) -> Outcome {
    if low <= actual && actual <= high {
        Outcome::Hit
    } else {
        Outcome::Miss
    }
}

/// `hits` out of `total`, kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Accuracy {
    hits: u64,
    total: u64,
}

pub fn accuracy(hits: u64, total: u64) -> Result<Accuracy, EvaluateError> {
    if hits > total {
        return Err(EvaluateError::HitsExceedTotal { hits, total });
    }
    Ok(Accuracy { hits, total })
}

impl Accuracy {
    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// `100 * hits / total` as an exact fraction; zero when `total` is zero.
    pub fn percent_exact(&self) -> Ratio<u64> {
        if self.total == 0 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(100 * self.hits, self.total)
        }
    }

    pub fn percent(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.hits as f64 / self.total as f64
        }
    }

    /// Whole-percent display, rounding half up ("78%" for 284/365), or
    /// "n/a" when nothing was scored.
    pub fn display(&self) -> String {
        if self.total == 0 {
            return "n/a".to_string();
        }
        let rounded = (200 * self.hits + self.total) / (2 * self.total);
        format!("{rounded}%")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub date: NaiveDate,
    pub low_c: i64,
    pub high_c: i64,
    pub actual_c: f64,
    pub outcome: Outcome,
    pub category: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub rows: Vec<ReportRow>,
    pub hits: u64,
    pub total: u64,
    /// Forecasts with no observed temperature; excluded from `total`.
    pub unmatched: u64,
    pub accuracy_percent: f64,
    pub accuracy_display: String,
}

/// Joins forecasts with observed temperatures on date and scores each day.
pub fn build_report(
    forecasts: &[ForecastRecord],
    actuals: &BTreeMap<NaiveDate, f64>,
) -> EvaluationReport {
    let mut rows: Vec<ReportRow> = Vec::new();
    let mut unmatched = 0;
    for f in forecasts {
        match actuals.get(&f.date) {
            Some(&actual) => rows.push(ReportRow {
                date: f.date,
                low_c: f.low_c,
                high_c: f.high_c,
                actual_c: actual,
                outcome: score_day(f.low_c as f64, f.high_c as f64, actual),
                category: f.category.clone(),
            }),
            None => unmatched += 1,
        }
    }
    rows.sort_by(|a, b| {
        a.date
            .cmp(&b.date)
            .then(a.low_c.cmp(&b.low_c))
            .then(a.high_c.cmp(&b.high_c))
            .then(a.category.cmp(&b.category))
    });
    let hits = rows.iter().filter(|r| r.outcome == Outcome::Hit).count() as u64;
    let acc = accuracy(hits, rows.len() as u64).expect("hits counted from rows");
    EvaluationReport {
        hits,
        total: acc.total(),
        unmatched,
        accuracy_percent: acc.percent(),
        accuracy_display: acc.display(),
        rows,
    }
}

impl EvaluationReport {
    pub fn accuracy(&self) -> Accuracy {
        Accuracy {
            hits: self.hits,
            total: self.total,
        }
    }

    /// Table-style CSV: one row per day with `*` marking hit or miss, then a
    /// summary row whose hit/miss cells hold the totals.
    pub fn write_csv(&self, sink: impl Write) -> Result<(), EvaluateError> {
        let mut writer = csv::Writer::from_writer(sink);
        writer.write_record(REPORT_HEADER)?;
        for r in &self.rows {
            let hit = r.outcome == Outcome::Hit;
            writer.write_record([
                r.date.format("%Y-%m-%d").to_string(),
                format!("{}-{}", r.low_c, r.high_c),
                r.actual_c.to_string(),
                if hit { "*" } else { "" }.to_string(),
                if hit { "" } else { "*" }.to_string(),
                r.category.clone(),
            ])?;
        }
        writer.write_record([
            "accuracy".to_string(),
            format!("{}/{}", self.hits, self.total),
            self.accuracy_percent.to_string(),
            self.hits.to_string(),
            (self.total - self.hits).to_string(),
            self.accuracy_display.clone(),
        ])?;
        writer.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, EvaluateError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::Region;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2014, 1, day).unwrap()
    }

    #[test]
    fn inclusive_scoring() {
        assert_eq!(score_day(24.0, 27.0, 26.0), Outcome::Hit);
        assert_eq!(score_day(22.0, 26.0, 22.0), Outcome::Hit);
        assert_eq!(score_day(22.0, 26.0, 26.0), Outcome::Hit);
        assert_eq!(score_day(24.0, 27.0, 23.0), Outcome::Miss);
    }

    #[test]
    fn year_long_accuracy() {
        let a = accuracy(284, 365).unwrap();
        assert!((a.percent() - 77.808_219_178_082_19).abs() < 1e-12);
        assert_eq!(a.display(), "78%");
        assert_eq!(a.percent_exact(), Ratio::new(28_400, 365));
    }

    #[test]
    fn accuracy_edges() {
        assert_eq!(accuracy(0, 10).unwrap().display(), "0%");
        assert_eq!(accuracy(0, 10).unwrap().percent(), 0.0);
        assert_eq!(accuracy(10, 10).unwrap().display(), "100%");
        assert_eq!(accuracy(10, 10).unwrap().percent(), 100.0);
        assert_eq!(accuracy(0, 0).unwrap().display(), "n/a");
        assert_eq!(accuracy(1, 8).unwrap().display(), "13%");
        assert!(matches!(
            accuracy(3, 2),
            Err(EvaluateError::HitsExceedTotal { .. })
        ));
    }

    fn four_day_report() -> (Vec<ForecastRecord>, BTreeMap<NaiveDate, f64>) {
        let rows = [
            (1, 24, 27, 26.0, "Smoggy, fogs, haze and smoke"),
            (2, 24, 27, 27.0, "Smog, fog, dusty and mist"),
            (3, 22, 26, 23.0, "Dry, smog and mist"),
            (4, 22, 26, 24.0, "Mist, haze and smoke"),
        ];
        let forecasts = rows
            .iter()
            .map(|&(day, low_c, high_c, _, category)| ForecastRecord {
                date: d(day),
                region: Region::A,
                cluster: 0,
                low_c,
                high_c,
                category: category.into(),
                condition: String::new(),
            })
            .collect();
        let actuals = rows.iter().map(|&(day, _, _, t, _)| (d(day), t)).collect();
        (forecasts, actuals)
    }

    #[test]
    fn four_day_report_all_hits() {
        let (forecasts, actuals) = four_day_report();
        let report = build_report(&forecasts, &actuals);
        assert_eq!((report.hits, report.total, report.unmatched), (4, 4, 0));
        assert_eq!(report.accuracy_display, "100%");

        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "date,probable_range_c,actual_c,hit,miss,category");
        assert_eq!(
            lines[1],
            "2014-01-01,24-27,26,*,,\"Smoggy, fogs, haze and smoke\""
        );
        assert_eq!(lines[5], "accuracy,4/4,100,4,0,100%");
    }

    #[test]
    fn empty_join() {
        let (forecasts, _) = four_day_report();
        let report = build_report(&forecasts, &BTreeMap::new());
        assert_eq!((report.total, report.unmatched), (0, 4));
        assert_eq!(report.accuracy_display, "n/a");
    }

    #[test]
    fn order_does_not_matter() {
        let (mut forecasts, actuals) = four_day_report();
        let a = build_report(&forecasts, &actuals);
        forecasts.reverse();
        forecasts.swap(0, 2);
        assert_eq!(build_report(&forecasts, &actuals), a);
    }

    #[test]
    fn json_twin_has_the_same_fields() {
        let (forecasts, actuals) = four_day_report();
        let report = build_report(&forecasts, &actuals);
        let back: EvaluationReport = serde_json::from_str(&report.to_json().unwrap()).unwrap();
        assert_eq!(back, report);
    }
}
