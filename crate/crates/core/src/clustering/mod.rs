//! Per-region K-means over daily feature vectors.
//!
//! Features are z-score standardized before any distance is taken, since
//! raw pollutant scales differ by two orders of magnitude. Initial centroids
//! come from a small genetic algorithm ([`ga_init_centroids`]), Lloyd
//! iterations refine them ([`lloyd_kmeans`]), and a finished
//! [`ClusterModel`] accepts new days one at a time through
//! [`ClusterModel::incremental_insert`] using only per-cluster counts and
//! linear sums.

mod ga;
mod lloyd;
mod model;
mod scaling;

use thiserror::Error;

pub use ga::{ga_init_centroids, GaConfig};
pub use lloyd::{lloyd_kmeans, KMeansFit, LloydOptions};
pub use model::{fit_region_model, ClusterMeta, ClusterModel, ClusterRange, RANGE_TABLE_HEADER};
pub use scaling::{standardize, Dataset, Scaling};

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("no data points")]
    Empty,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("point {index} has dimension {found}, expected {expected}")]
    Dimension {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("k = {k} exceeds the {distinct} distinct data points")]
    TooFewDistinct { k: usize, distinct: usize },
    #[error("invalid GA configuration: {0}")]
    GaConfig(String),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("model json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Squared Euclidean distance.
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
pub fn nearest(centroids: &[Vec<f64>], point: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = squared_distance(c, point);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Sum of squared distances from each point to its nearest centroid.
pub fn sse_to_nearest(centroids: &[Vec<f64>], data: &[Vec<f64>]) -> f64 {
    data.iter().map(|p| nearest(centroids, p).1).sum()
}

fn check_points(data: &[Vec<f64>]) -> Result<usize, ClusterError> {
    let dim = data.first().ok_or(ClusterError::Empty)?.len();
    for (index, p) in data.iter().enumerate() {
        if p.len() != dim {
            return Err(ClusterError::Dimension {
                index,
                expected: dim,
                found: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(ClusterError::NonFinite(index));
        }
    }
    Ok(dim)
}

/// Distinct points in lexicographic order.
fn distinct_points(data: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts = data.to_vec();
    pts.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    pts.dedup();
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_breaks_ties_low() {
        let centroids = vec![vec![0.0], vec![2.0]];
        assert_eq!(nearest(&centroids, &[1.0]).0, 0);
        assert_eq!(nearest(&centroids, &[2.0]).0, 1);
    }

    #[test]
    fn sse_of_two_points_around_one_centroid() {
        assert_eq!(sse_to_nearest(&[vec![1.0]], &[vec![0.0], vec![2.0]]), 2.0);
    }

    #[test]
    fn distinct_points_dedups() {
        let d = distinct_points(&[vec![1.0, 2.0], vec![0.0, 5.0], vec![1.0, 2.0]]);
        assert_eq!(d, vec![vec![0.0, 5.0], vec![1.0, 2.0]]);
    }
}
