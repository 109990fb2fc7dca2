#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use hullcast::ingest::{write_hourly_csv, write_temperature_csv};
use hullcast::synth::{generate, shuffled_temperatures, SyntheticSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const SAMPLE_CONFIG: &str = include_str!("../../../../config/hullcast.sample.toml");

fn exact_cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i128 {
    (a.0 - o.0) as i128 * (b.1 - o.1) as i128 - (a.1 - o.1) as i128 * (b.0 - o.0) as i128
}

fn between(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> bool {
    c.0 >= a.0.min(b.0) && c.0 <= a.0.max(b.0) && c.1 >= a.1.min(b.1) && c.1 <= a.1.max(b.1)
}

/// Corners of the convex hull by brute force over all ordered pairs: `a -> b`
/// is a hull edge when every other point is strictly left of it or lies on
/// the segment itself. Exact integer arithmetic throughout.
pub fn brute_force_hull(points: &[(i64, i64)]) -> BTreeSet<(i64, i64)> {
    let distinct: BTreeSet<(i64, i64)> = points.iter().copied().collect();
    let pts: Vec<(i64, i64)> = distinct.iter().copied().collect();
    if pts.len() < 2 {
        return distinct;
    }
    let mut corners = BTreeSet::new();
    for &a in &pts {
        for &b in &pts {
            if a == b {
                continue;
            }
            let edge = pts.iter().all(|&c| {
                let turn = exact_cross(a, b, c);
                turn > 0 || (turn == 0 && between(a, b, c))
            });
            if edge {
                corners.insert(a);
                corners.insert(b);
            }
        }
    }
    corners
}

/// `n` points in `dim` dimensions around `centers` (cycled), sd `spread`.
pub fn blobs(rng: &mut ChaCha8Rng, centers: &[Vec<f64>], n: usize, spread: f64) -> Vec<Vec<f64>> {
    let noise = Normal::new(0.0, spread).unwrap();
    (0..n)
        .map(|i| {
            centers[i % centers.len()]
                .iter()
                .map(|c| c + noise.sample(rng))
                .collect()
        })
        .collect()
}

pub fn random_centers(rng: &mut ChaCha8Rng, k: usize, dim: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..k)
        .map(|_| (0..dim).map(|_| rng.random_range(-scale..scale)).collect())
        .collect()
}

/// A directory holding synthetic `data/` and a `hullcast.toml` that points
/// at it and writes to `out/`.
pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn new(shuffle: Option<u64>) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data");
        fs::create_dir_all(&data).unwrap();
        let synthetic = generate(&SyntheticSpec::default());
        let temps = match shuffle {
            Some(seed) => shuffled_temperatures(&synthetic.temperatures, seed),
            None => synthetic.temperatures,
        };
        write_hourly_csv(
            &synthetic.readings,
            File::create(data.join("readings.csv")).unwrap(),
        )
        .unwrap();
        write_temperature_csv(&temps, File::create(data.join("temperatures.csv")).unwrap())
            .unwrap();
        let ws = Self { dir };
        ws.write_config(&ws.config_text("data/readings.csv"));
        ws
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn config(&self) -> PathBuf {
        self.path().join("hullcast.toml")
    }

    pub fn out(&self) -> PathBuf {
        self.path().join("out")
    }

    pub fn config_text(&self, readings: &str) -> String {
        SAMPLE_CONFIG
            .replace("../data/readings.csv", readings)
            .replace("../data/temperatures.csv", "data/temperatures.csv")
            .replace("\"../out\"", "\"out\"")
    }

    pub fn write_config(&self, text: &str) {
        fs::write(self.config(), text).unwrap();
    }
}

/// Every file under `dir`, relative path to contents, in sorted order.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(dir)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                files.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}
