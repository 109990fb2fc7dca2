use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ga::{ga_init_centroids, GaConfig};
use super::lloyd::{lloyd_kmeans, KMeansFit, LloydOptions};
use super::scaling::{Dataset, Scaling};
use super::{nearest, ClusterError};
use crate::ingest::Pollutant;
use crate::partition::Region;

pub const RANGE_TABLE_HEADER: [&str; 11] = [
    "cluster_id",
    "co_min",
    "co_max",
    "no2_min",
    "no2_max",
    "o3_min",
    "o3_max",
    "pm10_min",
    "pm10_max",
    "so2_min",
    "so2_max",
];

/// Sufficient statistics of one cluster.
///
/// `centroid` and `linear_sum` live in scaled space; `raw_min`/`raw_max`
/// bound the members in original units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterMeta {
    pub id: usize,
    pub centroid: Vec<f64>,
    pub count: u64,
    pub linear_sum: Vec<f64>,
    pub raw_min: Vec<f64>,
    pub raw_max: Vec<f64>,
}

impl ClusterMeta {
    pub(crate) fn empty(id: usize, dim: usize) -> Self {
        Self {
            id,
            centroid: vec![0.0; dim],
            count: 0,
            linear_sum: vec![0.0; dim],
            raw_min: vec![f64::INFINITY; dim],
            raw_max: vec![f64::NEG_INFINITY; dim],
        }
    }

    /// Adds one member and recomputes the centroid from the running sums.
    pub(crate) fn absorb(&mut self, scaled: &[f64], raw: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((s, c), v) in self
            .linear_sum
            .iter_mut()
            .zip(&mut self.centroid)
            .zip(scaled)
        {
            *s += v;
            *c = *s / n;
        }
        for ((lo, hi), v) in self.raw_min.iter_mut().zip(&mut self.raw_max).zip(raw) {
            *lo = lo.min(*v);
            *hi = hi.max(*v);
        }
    }
}

/// Raw per-dimension [min, max] of one cluster's members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRange {
    pub id: usize,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl fmt::Display for ClusterRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cluster {}", self.id)?;
        for (i, (lo, hi)) in self.min.iter().zip(&self.max).enumerate() {
            match Pollutant::ALL.get(i).filter(|_| self.min.len() == 5) {
                Some(p) => write!(f, " | {p} {lo}-{hi}")?,
                None => write!(f, " | d{i} {lo}-{hi}")?,
            }
        }
        Ok(())
    }
}

/// A fitted K-means model for one seasonal region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub region: Region,
    pub k: usize,
    pub clusters: Vec<ClusterMeta>,
    pub scaling: Scaling,
    pub seed: u64,
}

impl ClusterModel {
    pub fn dim(&self) -> usize {
        self.scaling.dim()
    }

    pub fn centroids(&self) -> Vec<Vec<f64>> {
        self.clusters.iter().map(|c| c.centroid.clone()).collect()
    }

    pub fn validate(&self) -> Result<(), ClusterError> {
        let bad = |msg: String| Err(ClusterError::Model(msg));
        let dim = self.dim();
        if self.k == 0 || self.clusters.len() != self.k {
            return bad(format!(
                "k = {} but {} clusters",
                self.k,
                self.clusters.len()
            ));
        }
        if self.scaling.std.len() != dim {
            return bad("scaling mean and std lengths differ".into());
        }
        if self
            .scaling
            .std
            .iter()
            .any(|s| !(*s > 0.0 && s.is_finite()))
        {
            return bad("scaling std must be positive".into());
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if c.id != i {
                return bad(format!("cluster at position {i} has id {}", c.id));
            }
            if c.count == 0 {
                return bad(format!("cluster {i} is empty"));
            }
            let lens = [
                c.centroid.len(),
                c.linear_sum.len(),
                c.raw_min.len(),
                c.raw_max.len(),
            ];
            if lens.iter().any(|&l| l != dim) {
                return bad(format!("cluster {i} has vectors of the wrong dimension"));
            }
            if c.raw_min.iter().zip(&c.raw_max).any(|(lo, hi)| lo > hi) {
                return bad(format!("cluster {i} has raw_min above raw_max"));
            }
        }
        Ok(())
    }

    /// Id of the centroid nearest to an already-standardized point; ties go
    /// to the lowest id.
    pub fn assign_nearest(&self, scaled: &[f64]) -> usize {
        let mut best = (0, f64::INFINITY);
        for c in &self.clusters {
            let d = super::squared_distance(&c.centroid, scaled);
            if d < best.1 {
                best = (c.id, d);
            }
        }
        best.0
    }

    /// Standardizes a raw point with the model's frozen scaling, then routes it.
    pub fn assign_raw(&self, raw: &[f64]) -> usize {
        self.assign_nearest(&self.scaling.apply(raw))
    }

    /// Adds one raw point to its nearest cluster, updating only that
    /// cluster's count, linear sum, centroid and raw range. Returns the id.
    pub fn incremental_insert(&mut self, raw: &[f64]) -> Result<usize, ClusterError> {
        if raw.len() != self.dim() {
            return Err(ClusterError::Dimension {
                index: 0,
                expected: self.dim(),
                found: raw.len(),
            });
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(ClusterError::NonFinite(0));
        }
        let scaled = self.scaling.apply(raw);
        let id = self.assign_nearest(&scaled);
        self.clusters[id].absorb(&scaled, raw);
        Ok(id)
    }

    /// SSE of standardized points against their nearest centroids.
    pub fn sse(&self, scaled: &[Vec<f64>]) -> f64 {
        let centroids = self.centroids();
        scaled.iter().map(|p| nearest(&centroids, p).1).sum()
    }

    pub fn range_table(&self) -> Vec<ClusterRange> {
        self.clusters
            .iter()
            .map(|c| ClusterRange {
                id: c.id,
                min: c.raw_min.clone(),
                max: c.raw_max.clone(),
            })
            .collect()
    }

    pub fn write_range_csv(&self, sink: impl Write) -> Result<(), ClusterError> {
        let mut writer = csv::Writer::from_writer(sink);
        if self.dim() == 5 {
            writer.write_record(RANGE_TABLE_HEADER)?;
        } else {
            let mut header = vec!["cluster_id".to_string()];
            for d in 0..self.dim() {
                header.push(format!("d{d}_min"));
                header.push(format!("d{d}_max"));
            }
            writer.write_record(&header)?;
        }
        for r in self.range_table() {
            let mut row = vec![r.id.to_string()];
            for (lo, hi) in r.min.iter().zip(&r.max) {
                row.push(lo.to_string());
                row.push(hi.to_string());
            }
            writer.write_record(&row)?;
        }
        writer.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, ClusterError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, ClusterError> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }
}

/// Standardizes the region's raw feature vectors, seeds centroids with the
/// GA and refines them with Lloyd iterations.
pub fn fit_region_model(
    region: Region,
    raw: Vec<Vec<f64>>,
    k: usize,
    ga: &GaConfig,
    lloyd: LloydOptions,
) -> Result<(ClusterModel, KMeansFit), ClusterError> {
    let data = Dataset::standardized(raw)?;
    let init = ga_init_centroids(data.scaled(), k, ga)?;
    let fit = lloyd_kmeans(&data, init, lloyd)?;
    let model = fit.clone().into_model(region, ga.seed);
    Ok((model, fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d_model(sum: f64, count: u64) -> ClusterModel {
        ClusterModel {
            region: Region::A,
            k: 1,
            clusters: vec![ClusterMeta {
                id: 0,
                centroid: vec![sum / count as f64],
                count,
                linear_sum: vec![sum],
                raw_min: vec![1.0],
                raw_max: vec![4.0],
            }],
            scaling: Scaling::identity(1),
            seed: 0,
        }
    }

    #[test]
    fn insert_updates_mean_from_metadata() {
        // sum 10 over 4 members, batch mean after inserting 5 is 15/5
        let mut model = one_d_model(10.0, 4);
        assert_eq!(model.incremental_insert(&[5.0]).unwrap(), 0);
        let c = &model.clusters[0];
        assert_eq!(c.count, 5);
        assert_eq!(c.centroid, vec![3.0]);
        assert_eq!(c.raw_max, vec![5.0]);
        assert_eq!(c.raw_min, vec![1.0]);
    }

    #[test]
    fn insert_at_centroid_keeps_it() {
        let mut model = one_d_model(10.0, 4);
        model.incremental_insert(&[2.5]).unwrap();
        assert_eq!(model.clusters[0].centroid, vec![2.5]);
        assert_eq!(model.clusters[0].count, 5);
    }

    fn two_cluster_model() -> ClusterModel {
        let data = Dataset::unscaled(vec![
            vec![0.0, 0.0],
            vec![0.0, 2.0],
            vec![4.0, 0.0],
            vec![4.0, 2.0],
        ])
        .unwrap();
        lloyd_kmeans(
            &data,
            vec![vec![0.0, 1.0], vec![4.0, 1.0]],
            LloydOptions::default(),
        )
        .unwrap()
        .into_model(Region::B, 5)
    }

    #[test]
    fn nearest_assignment_and_ties() {
        let model = two_cluster_model();
        assert_eq!(model.assign_nearest(&[4.0, 1.0]), 1);
        assert_eq!(model.assign_nearest(&[2.0, 1.0]), 0);
    }

    #[test]
    fn insert_leaves_other_clusters_alone() {
        let mut model = two_cluster_model();
        let before = model.clusters[0].clone();
        assert_eq!(model.incremental_insert(&[5.0, 1.0]).unwrap(), 1);
        assert_eq!(model.clusters[0], before);
        assert_eq!(model.clusters[1].count, 3);
    }

    #[test]
    fn sse_unchanged_by_point_on_centroid() {
        let model = two_cluster_model();
        let mut pts = vec![
            vec![0.0, 0.0],
            vec![0.0, 2.0],
            vec![4.0, 0.0],
            vec![4.0, 2.0],
        ];
        let before = model.sse(&pts);
        assert_eq!(before, 4.0);
        pts.push(vec![0.0, 1.0]);
        assert_eq!(model.sse(&pts), before);
    }

    #[test]
    fn range_table_rows() {
        let model = two_cluster_model();
        let table = model.range_table();
        assert_eq!(table.len(), 2);
        assert_eq!(table[0].min, vec![0.0, 0.0]);
        assert_eq!(table[0].max, vec![0.0, 2.0]);
        assert_eq!(table[1].to_string(), "Cluster 1 | d0 4-4 | d1 0-2");
    }

    #[test]
    fn single_member_range_is_degenerate() {
        let data = Dataset::unscaled(vec![vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![9.0; 5]]).unwrap();
        let model = lloyd_kmeans(
            &data,
            vec![vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![9.0; 5]],
            LloydOptions::default(),
        )
        .unwrap()
        .into_model(Region::C, 0);
        let row = &model.range_table()[0];
        assert_eq!(row.min, row.max);
        assert_eq!(
            row.to_string(),
            "Cluster 0 | CO 1-1 | NO2 2-2 | O3 3-3 | PM10 4-4 | SO2 5-5"
        );
        let mut csv = Vec::new();
        model.write_range_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with(&RANGE_TABLE_HEADER.join(",")));
        assert!(text.contains("\n0,1,1,2,2,3,3,4,4,5,5\n"));
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let data = Dataset::standardized(vec![
            vec![1.87, 162.85, 17.67, 234.666, 6.40],
            vec![1.97, 186.97, 16.75, 226.01, 5.839],
            vec![1.359, 114.589, 18.28, 168.88, 4.95],
            vec![0.925, 89.62, 28.43, 150.09, 4.45],
        ])
        .unwrap();
        let init = vec![data.scaled()[0].clone(), data.scaled()[3].clone()];
        let model = lloyd_kmeans(&data, init, LloydOptions::default())
            .unwrap()
            .into_model(Region::A, 17);
        let json = model.to_json().unwrap();
        let back = ClusterModel::from_json(&json).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json().unwrap(), json);
    }

    #[test]
    fn from_json_rejects_bad_ids() {
        let mut model = two_cluster_model();
        model.clusters[1].id = 7;
        let json = serde_json::to_string(&model).unwrap();
        assert!(matches!(
            ClusterModel::from_json(&json),
            Err(ClusterError::Model(_))
        ));
    }
}
