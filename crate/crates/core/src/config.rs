//! Pipeline configuration, read from a TOML file.
//!
//! Relative paths are resolved against the directory holding the config
//! file. Every key except `readings`, `temperatures` and `category_map` has
//! a default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{GaConfig, LloydOptions};
use crate::forecast::{
    validate_thresholds, CategoryMap, Threshold, DEFAULT_ALPHA, DEFAULT_HALF_WIDTH_FLOOR_C,
    DEFAULT_MATCH_WINDOW_DAYS,
};
use crate::ingest::{Pollutant, DEFAULT_MIN_HOURS};
use crate::partition::Region;

/// Help text listing every key and its default.
pub const CONFIG_HELP: &str = "\
Config keys (TOML; paths relative to the config file):
  readings            hourly readings CSV (date,hour,pollutant,value)   required
  temperatures        observed temperature CSV (date,temp_c)            required
  output_dir          artifact directory                                default \"out\"
  seed                seed for the GA initialization                    default 0
  k                   clusters per region                               default 4
  alpha               priority parameter in [0, 1/3]                    default 0.25
  min_hours           hours needed for a usable day series (1-24)       default 12
  match_window_days   +/- days matched around the month-day             default 7
  half_width_floor_c  minimum half-width of a predicted range           default 1.5
  forecast_year       year to forecast                                  default latest year in data
  plot_dates          dates plotted by `run`, e.g. [\"2016-01-02\"]       default []
  kmeans_tol          Lloyd convergence tolerance (scaled space)        default 1e-6
  kmeans_max_iter     Lloyd iteration cap                               default 100
  [ga]                population=20 generations=50 crossover_rate=0.9
                      mutation_rate=0.1 mutation_scale=0.1
  [units]             per-pollutant unit labels, e.g. CO = \"mg/m3\"
  [[thresholds]]      max_center_c, label   default <=20 cool, <=30 warm, else hot
  [[category_map]]    region, cluster, label                            required
";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaSettings {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub mutation_scale: f64,
}

impl Default for GaSettings {
    fn default() -> Self {
        let d = GaConfig::default();
        Self {
            population: d.population,
            generations: d.generations,
            crossover_rate: d.crossover_rate,
            mutation_rate: d.mutation_rate,
            mutation_scale: d.mutation_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryEntry {
    pub region: Region,
    pub cluster: usize,
    pub label: String,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_k() -> usize {
    4
}
fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_min_hours() -> usize {
    DEFAULT_MIN_HOURS
}
fn default_window() -> u32 {
    DEFAULT_MATCH_WINDOW_DAYS
}
fn default_floor() -> f64 {
    DEFAULT_HALF_WIDTH_FLOOR_C
}
fn default_tol() -> f64 {
    LloydOptions::default().tol
}
fn default_max_iter() -> usize {
    LloydOptions::default().max_iter
}
fn default_thresholds() -> Vec<Threshold> {
    [(20.0, "cool"), (30.0, "warm"), (f64::INFINITY, "hot")]
        .into_iter()
        .map(|(max_center_c, label)| Threshold {
            max_center_c,
            label: label.to_string(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub readings: PathBuf,
    pub temperatures: PathBuf,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_min_hours")]
    pub min_hours: usize,
    #[serde(default = "default_window")]
    pub match_window_days: u32,
    #[serde(default = "default_floor")]
    pub half_width_floor_c: f64,
    #[serde(default)]
    pub forecast_year: Option<i32>,
    #[serde(default)]
    pub plot_dates: Vec<NaiveDate>,
    #[serde(default = "default_tol")]
    pub kmeans_tol: f64,
    #[serde(default = "default_max_iter")]
    pub kmeans_max_iter: usize,
    #[serde(default)]
    pub ga: GaSettings,
    #[serde(default)]
    pub units: BTreeMap<String, String>,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<Threshold>,
    pub category_map: Vec<CategoryEntry>,
}

impl PipelineConfig {
    /// Reads, resolves and validates a config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut cfg = Self::from_toml(&text)?;
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [
            &mut self.readings,
            &mut self.temperatures,
            &mut self.output_dir,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if self.readings == self.temperatures {
            return invalid("readings and temperatures must be different files".into());
        }
        if self.output_dir == self.readings || self.output_dir == self.temperatures {
            return invalid("output_dir must differ from the input files".into());
        }
        if self.k == 0 {
            return invalid("k must be at least 1".into());
        }
        if !(0.0..=1.0 / 3.0).contains(&self.alpha) {
            return invalid(format!("alpha must be in [0, 1/3], got {}", self.alpha));
        }
        if !(1..=24).contains(&self.min_hours) {
            return invalid(format!(
                "min_hours must be in 1..=24, got {}",
                self.min_hours
            ));
        }
        if !(self.half_width_floor_c >= 0.0 && self.half_width_floor_c.is_finite()) {
            return invalid("half_width_floor_c must be finite and non-negative".into());
        }
        if self.kmeans_tol.is_nan() || self.kmeans_tol <= 0.0 || self.kmeans_max_iter == 0 {
            return invalid("kmeans_tol must be positive and kmeans_max_iter at least 1".into());
        }
        self.ga_config()
            .validate()
            .or_else(|e| invalid(e.to_string()))?;
        validate_thresholds(&self.thresholds).or_else(|e| invalid(e.to_string()))?;
        for unit in self.units.keys() {
            if unit.parse::<Pollutant>().is_err() {
                return invalid(format!("unknown pollutant `{unit}` in [units]"));
            }
        }
        for e in &self.category_map {
            if e.cluster >= self.k {
                return invalid(format!(
                    "category_map entry for region {} cluster {} exceeds k = {}",
                    e.region, e.cluster, self.k
                ));
            }
        }
        let map = self.category_map();
        let missing = map.missing(
            Region::ALL
                .into_iter()
                .flat_map(|r| (0..self.k).map(move |c| (r, c))),
        );
        if !missing.is_empty() {
            let keys: Vec<String> = missing.iter().map(|(r, c)| format!("{r}{c}")).collect();
            return invalid(format!("category_map has no label for {}", keys.join(", ")));
        }
        Ok(())
    }

    pub fn ga_config(&self) -> GaConfig {
        GaConfig {
            population: self.ga.population,
            generations: self.ga.generations,
            crossover_rate: self.ga.crossover_rate,
            mutation_rate: self.ga.mutation_rate,
            mutation_scale: self.ga.mutation_scale,
            seed: self.seed,
        }
    }

    pub fn lloyd_options(&self) -> LloydOptions {
        LloydOptions {
            tol: self.kmeans_tol,
            max_iter: self.kmeans_max_iter,
        }
    }

    pub fn category_map(&self) -> CategoryMap {
        self.category_map
            .iter()
            .map(|e| (e.region, e.cluster, e.label.clone()))
            .collect()
    }

    pub fn unit(&self, pollutant: Pollutant) -> Option<&str> {
        self.units
            .iter()
            .find(|(k, _)| k.parse::<Pollutant>().ok() == Some(pollutant))
            .map(|(_, v)| v.as_str())
    }
}
