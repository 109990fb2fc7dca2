//! Python bindings for hullcast.

use chrono::NaiveDate;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use hullcast::clustering::{fit_region_model, ClusterModel, GaConfig, LloydOptions};
use hullcast::evaluate::{self, Outcome};
use hullcast::forecast::{predict_from_pools, priority_weights as weights};
use hullcast::hull::{format_truncated as truncate, mean, monotone_chain_hull, Point};
use hullcast::partition::{region_of as region_for_month, Region};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn hull_of(points: &[(f64, f64)]) -> PyResult<Vec<(f64, f64)>> {
    let points: Vec<Point> = points.iter().map(|&(x, y)| Point { x, y }).collect();
    let polygon = monotone_chain_hull(&points).map_err(value_error)?;
    Ok(polygon.vertices().iter().map(|p| (p.x, p.y)).collect())
}

/// Convex hull vertices in counter-clockwise order, starting at the
/// lowest-x (then lowest-y) point.
#[pyfunction]
fn convex_hull(points: Vec<(f64, f64)>) -> PyResult<Vec<(f64, f64)>> {
    hull_of(&points)
}

/// Mean of the y-values of the hull vertices of `(hour, value)` points.
#[pyfunction]
fn hull_mean(points: Vec<(f64, f64)>) -> PyResult<f64> {
    let ys: Vec<f64> = hull_of(&points)?.into_iter().map(|(_, y)| y).collect();
    mean(&ys).ok_or_else(|| PyValueError::new_err("empty series"))
}

#[pyfunction]
#[pyo3(signature = (value, decimals = 2))]
fn format_truncated(value: f64, decimals: usize) -> String {
    truncate(value, decimals)
}

/// Region code ("A".."D") for a month number.
#[pyfunction]
fn region_of(month: u32) -> PyResult<String> {
    region_for_month(month)
        .map(|r| r.to_string())
        .map_err(value_error)
}

/// Region code for an ISO date string.
#[pyfunction]
fn region_of_date(date: &str) -> PyResult<String> {
    let date: NaiveDate = date.parse().map_err(value_error)?;
    Ok(Region::of_date(date).to_string())
}

/// Normalized weights for one, two and three years back.
#[pyfunction]
#[pyo3(signature = (alpha, available_years = vec![1, 2, 3]))]
fn priority_weights(alpha: f64, available_years: Vec<u8>) -> PyResult<(f64, f64, f64)> {
    let w = weights(alpha, &available_years).map_err(value_error)?;
    Ok((w.normalized[0], w.normalized[1], w.normalized[2]))
}

/// Predicted `(low, high)` range from the temperature pools of one, two and
/// three years back.
#[pyfunction]
#[pyo3(signature = (pools, alpha = 0.25, half_width_floor = 1.5))]
fn predict(pools: [Vec<f64>; 3], alpha: f64, half_width_floor: f64) -> PyResult<(f64, f64)> {
    let range = predict_from_pools(alpha, &pools, half_width_floor).map_err(value_error)?;
    Ok((range.low, range.high))
}

/// `(percent, display)` for `hits` out of `total`.
#[pyfunction]
fn accuracy(hits: u64, total: u64) -> PyResult<(f64, String)> {
    let a = evaluate::accuracy(hits, total).map_err(value_error)?;
    Ok((a.percent(), a.display()))
}

/// True when `actual` lies within `[low, high]`.
#[pyfunction]
fn score_day(low: f64, high: f64, actual: f64) -> bool {
    evaluate::score_day(low, high, actual) == Outcome::Hit
}

/// A fitted per-region cluster model.
#[pyclass(name = "ClusterModel")]
struct PyClusterModel {
    inner: ClusterModel,
}

#[pymethods]
impl PyClusterModel {
    /// Standardizes `raw`, seeds with the genetic algorithm and refines with
    /// Lloyd iterations.
    #[staticmethod]
    #[pyo3(signature = (region, raw, k, seed = 0))]
    fn fit(region: &str, raw: Vec<Vec<f64>>, k: usize, seed: u64) -> PyResult<Self> {
        let region: Region = region.parse().map_err(value_error)?;
        let ga = GaConfig {
            seed,
            ..GaConfig::default()
        };
        let (inner, _) =
            fit_region_model(region, raw, k, &ga, LloydOptions::default()).map_err(value_error)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        ClusterModel::from_json(text)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(value_error)
    }

    #[getter]
    fn region(&self) -> String {
        self.inner.region.to_string()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    /// Centroids in standardized space.
    #[getter]
    fn centroids(&self) -> Vec<Vec<f64>> {
        self.inner.centroids()
    }

    #[getter]
    fn counts(&self) -> Vec<u64> {
        self.inner.clusters.iter().map(|c| c.count).collect()
    }

    /// Nearest cluster id for a raw feature vector.
    fn assign(&self, raw: Vec<f64>) -> PyResult<usize> {
        if raw.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!(
                "expected {} features, got {}",
                self.inner.dim(),
                raw.len()
            )));
        }
        Ok(self.inner.assign_raw(&raw))
    }

    /// Absorbs a raw feature vector into its nearest cluster; returns its id.
    fn insert(&mut self, raw: Vec<f64>) -> PyResult<usize> {
        self.inner.incremental_insert(&raw).map_err(value_error)
    }

    /// Sum of squared distances of raw points to their nearest centroids,
    /// measured in standardized space.
    fn sse(&self, raw: Vec<Vec<f64>>) -> f64 {
        let scaled: Vec<Vec<f64>> = raw.iter().map(|p| self.inner.scaling.apply(p)).collect();
        self.inner.sse(&scaled)
    }

    /// One "Cluster i | CO lo-hi | ..." line per cluster.
    fn range_table(&self) -> Vec<String> {
        self.inner
            .range_table()
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "ClusterModel(region={}, k={})",
            self.inner.region, self.inner.k
        )
    }
}

#[pymodule]
fn hullcast_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(convex_hull, m)?)?;
    m.add_function(wrap_pyfunction!(hull_mean, m)?)?;
    m.add_function(wrap_pyfunction!(format_truncated, m)?)?;
    m.add_function(wrap_pyfunction!(region_of, m)?)?;
    m.add_function(wrap_pyfunction!(region_of_date, m)?)?;
    m.add_function(wrap_pyfunction!(priority_weights, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(score_day, m)?)?;
    m.add_class::<PyClusterModel>()?;
    Ok(())
}
