use super::model::ClusterMeta;
use super::scaling::{Dataset, Scaling};
use super::{distinct_points, nearest, squared_distance, ClusterError};
use crate::partition::Region;
use crate::ClusterModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LloydOptions {
    /// Stop once no centroid moves farther than this (scaled space).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LloydOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 100,
        }
    }
}

/// Result of a Lloyd run: cluster metadata plus the run's trace.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub clusters: Vec<ClusterMeta>,
    pub scaling: Scaling,
    /// Cluster id of each input point in the final partition.
    pub assignments: Vec<usize>,
    /// SSE after each assignment step; the last entry is the SSE of the
    /// final partition around its own means.
    pub sse_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl KMeansFit {
    pub fn centroids(&self) -> Vec<Vec<f64>> {
        self.clusters.iter().map(|c| c.centroid.clone()).collect()
    }

    pub fn sse(&self) -> f64 {
        *self
            .sse_history
            .last()
            .expect("history holds the final SSE")
    }

    pub fn into_model(self, region: Region, seed: u64) -> ClusterModel {
        ClusterModel {
            region,
            k: self.clusters.len(),
            clusters: self.clusters,
            scaling: self.scaling,
            seed,
        }
    }
}

/// Assigns every point to its nearest centroid. Any cluster left empty is
/// moved onto the point farthest from its nearest centroid (lowest index on
/// ties) and the assignment is redone.
fn assign_with_repair(centroids: &mut [Vec<f64>], data: &[Vec<f64>]) -> Vec<usize> {
    loop {
        let assignments: Vec<usize> = data.iter().map(|p| nearest(centroids, p).0).collect();
        let mut counts = vec![0usize; centroids.len()];
        for &a in &assignments {
            counts[a] += 1;
        }
        let empty: Vec<usize> = (0..centroids.len()).filter(|&j| counts[j] == 0).collect();
        if empty.is_empty() {
            return assignments;
        }
        let mut taken: Vec<usize> = Vec::new();
        for j in empty {
            let mut far: Option<(usize, f64)> = None;
            for (i, p) in data.iter().enumerate() {
                if taken.contains(&i) {
                    continue;
                }
                let d = nearest(centroids, p).1;
                if far.is_none_or(|(_, fd)| d > fd) {
                    far = Some((i, d));
                }
            }
            let (i, _) = far.expect("k <= n leaves a point to reseed from");
            taken.push(i);
            centroids[j] = data[i].clone();
        }
    }
}

fn partition_sse(centroids: &[Vec<f64>], data: &[Vec<f64>], assignments: &[usize]) -> f64 {
    data.iter()
        .zip(assignments)
        .map(|(p, &a)| squared_distance(p, &centroids[a]))
        .sum()
}

fn means(data: &[Vec<f64>], assignments: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in data.iter().zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(p) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        s.iter_mut().for_each(|v| *v /= c as f64);
    }
    sums
}

/// Lloyd's algorithm from the given initial centroids, in scaled space.
///
/// Alternates nearest-centroid assignment and mean update until no centroid
/// moves by `tol` or more, or `max_iter` updates have run. The SSE recorded
/// after each assignment never increases.
pub fn lloyd_kmeans(
    data: &Dataset,
    initial_centroids: Vec<Vec<f64>>,
    opts: LloydOptions,
) -> Result<KMeansFit, ClusterError> {
    let k = initial_centroids.len();
    let dim = data.dim();
    let points = data.scaled();
    if data.is_empty() {
        return Err(ClusterError::Empty);
    }
    if k == 0 {
        return Err(ClusterError::ZeroK);
    }
    for (index, c) in initial_centroids.iter().enumerate() {
        if c.len() != dim {
            return Err(ClusterError::Dimension {
                index,
                expected: dim,
                found: c.len(),
            });
        }
    }
    let distinct = distinct_points(points).len();
    if k > distinct {
        return Err(ClusterError::TooFewDistinct { k, distinct });
    }

    let mut centroids = initial_centroids;
    let mut sse_history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let assignments = assign_with_repair(&mut centroids, points);
        sse_history.push(partition_sse(&centroids, points, &assignments));
        let updated = means(points, &assignments, k, dim);
        let movement = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = updated;
        iterations += 1;
        if movement < opts.tol {
            converged = true;
            break;
        }
    }

    let assignments = assign_with_repair(&mut centroids, points);
    let mut clusters: Vec<ClusterMeta> = (0..k).map(|id| ClusterMeta::empty(id, dim)).collect();
    for ((scaled, raw), &a) in points.iter().zip(data.raw()).zip(&assignments) {
        clusters[a].absorb(scaled, raw);
    }
    let final_centroids: Vec<Vec<f64>> = clusters.iter().map(|c| c.centroid.clone()).collect();
    sse_history.push(partition_sse(&final_centroids, points, &assignments));

    Ok(KMeansFit {
        clusters,
        scaling: data.scaling().clone(),
        assignments,
        sse_history,
        iterations,
        converged,
    })
}
