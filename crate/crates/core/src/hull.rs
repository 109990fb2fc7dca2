//! Convex-hull reduction of a day's (hour, value) series to one number.
//!
//! The hull is the strict convex hull built by Andrew's monotone chain:
//! collinear boundary points are dropped, so only true corners survive. The
//! daily value of a pollutant is the arithmetic mean of the y-coordinates of
//! those corners.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{DailyGroups, DaySeries, Pollutant};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HullError {
    #[error("cannot build a hull from zero points")]
    Empty,
    #[error("point ({0}, {1}) is not finite")]
    NonFinite(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn lex_cmp(&self, other: &Self) -> Ordering {
        self.x.total_cmp(&other.x).then(self.y.total_cmp(&other.y))
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// z-component of `(a - o) x (b - o)`; positive for a counterclockwise turn.
pub fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// A convex polygon, counterclockwise from its lowest-x (then lowest-y) vertex.
///
/// Degenerate inputs give degenerate polygons: a single vertex when all
/// points coincide, or the two extreme points when all are collinear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullPolygon {
    vertices: Vec<Point>,
}

impl HullPolygon {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Inside-or-on test using exact cross-product signs.
    pub fn contains(&self, p: Point) -> bool {
        match self.vertices.as_slice() {
            [] => false,
            [v] => *v == p,
            [a, b] => on_segment(*a, *b, p),
            vs => (0..vs.len()).all(|i| cross(vs[i], vs[(i + 1) % vs.len()], p) >= 0.0),
        }
    }
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    cross(a, b, p) == 0.0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

/// Strict convex hull of `points` by the monotone chain.
///
/// Points need not be sorted and may repeat.
pub fn monotone_chain_hull(points: &[Point]) -> Result<HullPolygon, HullError> {
    if points.is_empty() {
        return Err(HullError::Empty);
    }
    if let Some(p) = points.iter().find(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(HullError::NonFinite(p.x, p.y));
    }

    let mut sorted = points.to_vec();
    sorted.sort_by(Point::lex_cmp);
    sorted.dedup();
    if sorted.len() < 3 {
        return Ok(HullPolygon { vertices: sorted });
    }

    // A non-left turn (cross <= 0) pops, which also drops collinear points.
    let mut hull: Vec<Point> = Vec::with_capacity(2 * sorted.len());
    for &p in &sorted {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in sorted.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    // the last point repeats the first
    hull.pop();
    Ok(HullPolygon { vertices: hull })
}

/// Series points as `(hour, value)` coordinates.
pub fn series_points(series: &DaySeries) -> Vec<Point> {
    series
        .points()
        .iter()
        .map(|&(h, v)| Point::new(f64::from(h), v))
        .collect()
}

/// y-values of the hull vertices of a series, one per vertex.
pub fn hull_vertex_values(series: &DaySeries) -> Result<Vec<f64>, HullError> {
    let hull = monotone_chain_hull(&series_points(series))?;
    // Hours within a series are distinct, so a flat series keeps both ends.
    Ok(hull.vertices().iter().map(|p| p.y).collect())
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Mean of the y-values of the hull corners of a series.
pub fn daily_hull_mean(series: &DaySeries) -> Result<f64, HullError> {
    let values = hull_vertex_values(series)?;
    Ok(mean(&values).expect("a non-empty series has at least one hull vertex"))
}

/// Formats `value` with at most `decimals` fractional digits, truncating
/// rather than rounding (1.9775 shows as "1.97").
pub fn format_truncated(value: f64, decimals: usize) -> String {
    // Go through a long fixed representation so that binary noise such as
    // 1.15 -> 1.1499999 does not eat a digit.
    let long = format!("{:.*}", decimals + 9, value);
    let (int_part, frac_part) = long.split_once('.').expect("fixed format has a point");
    let truncated = if decimals == 0 {
        int_part.to_string()
    } else {
        format!("{int_part}.{}", &frac_part[..decimals])
    };
    if truncated.starts_with('-') && truncated[1..].chars().all(|c| c == '0' || c == '.') {
        truncated[1..].to_string()
    } else {
        truncated
    }
}

/// One row of the structural database: the hull means of one date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySummary {
    pub date: NaiveDate,
    /// Hull means in [`Pollutant::ALL`] order; `None` where a pollutant had
    /// no usable series.
    pub features: [Option<f64>; 5],
    pub observed_temp: Option<f64>,
}

impl DailySummary {
    pub fn is_complete(&self) -> bool {
        self.features.iter().all(Option::is_some)
    }

    pub fn feature(&self, pollutant: Pollutant) -> Option<f64> {
        self.features[pollutant.index()]
    }

    /// The full feature vector, if every pollutant is present.
    pub fn feature_vector(&self) -> Option<[f64; 5]> {
        let mut out = [0.0; 5];
        for (slot, f) in out.iter_mut().zip(self.features) {
            *slot = f?;
        }
        Some(out)
    }

    pub fn missing(&self) -> Vec<Pollutant> {
        Pollutant::ALL
            .into_iter()
            .filter(|p| self.feature(*p).is_none())
            .collect()
    }
}

/// Summarizes one date from whatever pollutant series are available.
pub fn summarize_day(
    date: NaiveDate,
    series_by_pollutant: &BTreeMap<Pollutant, DaySeries>,
) -> Result<DailySummary, HullError> {
    let mut features = [None; 5];
    for (pollutant, series) in series_by_pollutant {
        features[pollutant.index()] = Some(daily_hull_mean(series)?);
    }
    Ok(DailySummary {
        date,
        features,
        observed_temp: None,
    })
}

/// Summarizes every date present in `groups`, in date order.
///
/// Dates are processed in parallel; the output order does not depend on
/// scheduling.
pub fn summarize_all(groups: &DailyGroups) -> Result<Vec<DailySummary>, HullError> {
    use rayon::prelude::*;

    let mut by_date: BTreeMap<NaiveDate, BTreeMap<Pollutant, DaySeries>> = groups
        .dates()
        .into_iter()
        .map(|d| (d, BTreeMap::new()))
        .collect();
    for ((date, pollutant), series) in &groups.series {
        by_date
            .get_mut(date)
            .expect("every series date is listed")
            .insert(*pollutant, series.clone());
    }
    let days: Vec<_> = by_date.into_iter().collect();
    days.par_iter()
        .map(|(date, series)| summarize_day(*date, series))
        .collect()
}
