//! CSV form of the structural database (`date,co,no2,o3,pm10,so2,complete`).
//!
//! Values are written in shortest round-trip form so a write/read cycle is
//! lossless; missing features are empty cells.

use std::io::{Read, Write};

use chrono::NaiveDate;
use thiserror::Error;

use crate::hull::DailySummary;

pub const HEADER: [&str; 7] = ["date", "co", "no2", "o3", "pm10", "so2", "complete"];

#[derive(Debug, Error)]
pub enum StructuralError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("expected header `{}`, found `{found}`", HEADER.join(","))]
    Header { found: String },
    #[error("line {line}: {reason}")]
    Row { line: u64, reason: String },
}

pub fn write_structural_csv(
    summaries: &[DailySummary],
    sink: impl Write,
) -> Result<(), StructuralError> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(HEADER)?;
    for s in summaries {
        let mut row = Vec::with_capacity(HEADER.len());
        row.push(s.date.format("%Y-%m-%d").to_string());
        row.extend(
            s.features
                .iter()
                .map(|f| f.map(|v| v.to_string()).unwrap_or_default()),
        );
        row.push(s.is_complete().to_string());
        writer.write_record(&row)?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_structural_csv(source: impl Read) -> Result<Vec<DailySummary>, StructuralError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != HEADER {
        return Err(StructuralError::Header {
            found: header.join(","),
        });
    }

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |reason: String| StructuralError::Row { line, reason };
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|_| bad(format!("unparsable date `{}`", &record[0])))?;
        let mut features = [None; 5];
        for (i, slot) in features.iter_mut().enumerate() {
            let cell = &record[i + 1];
            if !cell.is_empty() {
                *slot = Some(
                    cell.parse::<f64>()
                        .map_err(|_| bad(format!("unparsable number `{cell}`")))?,
                );
            }
        }
        let summary = DailySummary {
            date,
            features,
            observed_temp: None,
        };
        let complete: bool = record[6]
            .parse()
            .map_err(|_| bad(format!("unparsable flag `{}`", &record[6])))?;
        if complete != summary.is_complete() {
            return Err(bad("complete flag disagrees with features".to_string()));
        }
        out.push(summary);
    }
    Ok(out)
}
