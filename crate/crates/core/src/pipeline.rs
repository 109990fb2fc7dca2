//! Stage-by-stage orchestration over one output directory.
//!
//! Each stage reads its inputs from the configured files or from artifacts
//! written by earlier stages, so stages can run separately or all at once
//! through [`Pipeline::run`] with identical results.
//!
//! Artifacts (fixed names inside `output_dir`). The eleven top-level files
//! are the core set; `reports/` and `plots/` hold readable extras.
//!
//! | file                      | stage       |
//! |---------------------------|-------------|
//! | `structural.csv`          | `summarize` |
//! | `structural_<R>.csv` (x4) | `split`     |
//! | `model_<R>.json` (x4)     | `cluster`   |
//! | `reports/ranges_<R>.csv`  | `cluster`   |
//! | `forecast.csv`            | `predict`   |
//! | `evaluation.csv`          | `evaluate`  |
//! | `reports/evaluation.json` | `evaluate`  |
//! | `plots/hull_<date>_<pollutant>.svg` | `plot` |

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use thiserror::Error;

use crate::clustering::{fit_region_model, ClusterError, ClusterModel};
use crate::config::{ConfigError, PipelineConfig};
use crate::evaluate::{build_report, EvaluateError, EvaluationReport};
use crate::forecast::{
    self, historical_pools, predict_from_pools, threshold_condition, CategoryMap, ForecastError,
    ForecastRecord, HistoryArchive, HistoryDay,
};
use crate::fsutil::write_atomic;
use crate::hull::{self, monotone_chain_hull, series_points, DailySummary, HullError};
use crate::ingest::{self, DailyGroups, IngestError, Pollutant, SeriesKey};
use crate::partition::{split_by_region, Region};
use crate::plot::{emit_hull_plot, plot_file_name, PlotError};
use crate::structural::{self, StructuralError};

pub const STRUCTURAL_FILE: &str = "structural.csv";
pub const FORECAST_FILE: &str = "forecast.csv";
pub const EVALUATION_CSV: &str = "evaluation.csv";
pub const EVALUATION_JSON: &str = "reports/evaluation.json";
pub const PLOTS_DIR: &str = "plots";
pub const REPORTS_DIR: &str = "reports";

pub fn region_file(region: Region) -> String {
    format!("structural_{region}.csv")
}

pub fn model_file(region: Region) -> String {
    format!("model_{region}.json")
}

pub fn range_file(region: Region) -> String {
    format!("{REPORTS_DIR}/ranges_{region}.csv")
}

/// The structural database, the four region splits, the four models, the
/// forecast and the evaluation report.
pub fn core_artifacts() -> Vec<String> {
    let mut names = vec![STRUCTURAL_FILE.to_string()];
    names.extend(Region::ALL.into_iter().map(region_file));
    names.extend(Region::ALL.into_iter().map(model_file));
    names.push(FORECAST_FILE.to_string());
    names.push(EVALUATION_CSV.to_string());
    names
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("input file {0} does not exist")]
    MissingInput(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Ingest { path: PathBuf, source: IngestError },
    #[error("{0}")]
    Incomplete(String),
    #[error(transparent)]
    Hull(#[from] HullError),
    #[error("{path}: {source}")]
    Structural {
        path: PathBuf,
        source: StructuralError,
    },
    #[error("{path}: {source}")]
    Model { path: PathBuf, source: ClusterError },
    #[error("region {region}: {source}")]
    Cluster {
        region: Region,
        source: ClusterError,
    },
    #[error("insufficient history: {0}")]
    InsufficientHistory(String),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Evaluate(#[from] EvaluateError),
    #[error(transparent)]
    Plot(#[from] PlotError),
}

impl PipelineError {
    /// Process exit status: 1 configuration, 2 input data, 3 not enough
    /// history or data to cluster and forecast.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Ingest { .. }
            | PipelineError::Incomplete(_)
            | PipelineError::Hull(_)
            | PipelineError::Structural { .. } => 2,
            PipelineError::InsufficientHistory(_) => 3,
            PipelineError::Cluster {
                source: ClusterError::TooFewDistinct { .. } | ClusterError::Empty,
                ..
            } => 3,
            _ => 1,
        }
    }
}

type Result<T, E = PipelineError> = std::result::Result<T, E>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    if !path.exists() {
        return Err(PipelineError::MissingInput(path.to_path_buf()));
    }
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestSummary {
    pub rows: usize,
    pub readings: usize,
    pub superseded: usize,
    pub dates: usize,
    pub series: usize,
    pub incomplete: Vec<SeriesKey>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictSummary {
    pub forecasts: Vec<ForecastRecord>,
    pub year: i32,
    /// Target dates with no same-cluster history in any of the three years.
    pub skipped: Vec<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub summaries: usize,
    pub complete: usize,
    pub predict: PredictSummary,
    pub report: EvaluationReport,
    pub plots: Vec<PathBuf>,
}

/// One-day result of a live insert.
#[derive(Debug, Clone, PartialEq)]
pub struct InsertOutcome {
    pub cluster: usize,
    pub forecast: ForecastRecord,
}

pub struct Pipeline {
    cfg: PipelineConfig,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Self {
        Self { cfg }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.cfg.output_dir.join(name)
    }

    fn write(&self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = self.artifact(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        write_atomic(&path, contents).map_err(io_err(&path))?;
        Ok(path)
    }

    fn read_readings(&self, path: &Path) -> Result<ingest::ParsedReadings> {
        ingest::parse_hourly_csv(open(path)?).map_err(|source| PipelineError::Ingest {
            path: path.to_path_buf(),
            source,
        })
    }

    fn group(&self, readings: &[ingest::HourlyReading]) -> Result<DailyGroups> {
        ingest::group_daily(readings, self.cfg.min_hours).map_err(|source| PipelineError::Ingest {
            path: self.cfg.readings.clone(),
            source,
        })
    }

    fn read_temperatures(&self) -> Result<BTreeMap<NaiveDate, f64>> {
        let path = &self.cfg.temperatures;
        ingest::parse_temperature_csv(open(path)?).map_err(|source| PipelineError::Ingest {
            path: path.clone(),
            source,
        })
    }

    fn read_structural(&self, name: &str) -> Result<Vec<DailySummary>> {
        let path = self.artifact(name);
        structural::read_structural_csv(open(&path)?)
            .map_err(|source| PipelineError::Structural { path, source })
    }

    fn write_structural(&self, name: &str, summaries: &[DailySummary]) -> Result<PathBuf> {
        let mut buf = Vec::new();
        structural::write_structural_csv(summaries, &mut buf).map_err(|source| {
            PipelineError::Structural {
                path: self.artifact(name),
                source,
            }
        })?;
        self.write(name, &buf)
    }

    pub fn read_model(path: &Path) -> Result<ClusterModel> {
        let text = fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                PipelineError::MissingInput(path.to_path_buf())
            } else {
                io_err(path)(e)
            }
        })?;
        ClusterModel::from_json(&text).map_err(|source| PipelineError::Model {
            path: path.to_path_buf(),
            source,
        })
    }

    fn write_model(path: &Path, model: &ClusterModel) -> Result<()> {
        let json = model.to_json().map_err(|source| PipelineError::Model {
            path: path.to_path_buf(),
            source,
        })?;
        write_atomic(path, json.as_bytes()).map_err(io_err(path))
    }

    /// Parses and groups the readings without writing anything.
    pub fn ingest(&self) -> Result<IngestSummary> {
        let parsed = self.read_readings(&self.cfg.readings)?;
        let groups = self.group(&parsed.readings)?;
        Ok(IngestSummary {
            rows: parsed.row_count(),
            readings: parsed.readings.len(),
            superseded: parsed.superseded,
            dates: groups.dates().len(),
            series: groups.series.len(),
            incomplete: groups.incomplete,
        })
    }

    /// Builds the structural database from the readings.
    pub fn summarize(&self) -> Result<Vec<DailySummary>> {
        let parsed = self.read_readings(&self.cfg.readings)?;
        let groups = self.group(&parsed.readings)?;
        let summaries = hull::summarize_all(&groups)?;
        self.write_structural(STRUCTURAL_FILE, &summaries)?;
        Ok(summaries)
    }

    /// Writes the per-region slices of the structural database.
    pub fn split(&self) -> Result<BTreeMap<Region, usize>> {
        let summaries = self.read_structural(STRUCTURAL_FILE)?;
        let mut sizes = BTreeMap::new();
        for (region, days) in split_by_region(&summaries) {
            self.write_structural(&region_file(region), &days)?;
            sizes.insert(region, days.len());
        }
        Ok(sizes)
    }

    /// Fits one model per region over the complete days.
    pub fn cluster(&self) -> Result<BTreeMap<Region, ClusterModel>> {
        let summaries = self.read_structural(STRUCTURAL_FILE)?;
        let ga = self.cfg.ga_config();
        let mut models = BTreeMap::new();
        for (region, days) in split_by_region(&summaries) {
            let raw: Vec<Vec<f64>> = days
                .iter()
                .filter_map(DailySummary::feature_vector)
                .map(|f| f.to_vec())
                .collect();
            let (model, _) =
                fit_region_model(region, raw, self.cfg.k, &ga, self.cfg.lloyd_options())
                    .map_err(|source| PipelineError::Cluster { region, source })?;
            Self::write_model(&self.artifact(&model_file(region)), &model)?;
            let mut ranges = Vec::new();
            model
                .write_range_csv(&mut ranges)
                .map_err(|source| PipelineError::Cluster { region, source })?;
            self.write(&range_file(region), &ranges)?;
            models.insert(region, model);
        }
        Ok(models)
    }

    fn load_models(&self) -> Result<BTreeMap<Region, ClusterModel>> {
        let mut models = BTreeMap::new();
        for region in Region::ALL {
            let path = self.artifact(&model_file(region));
            let model = Self::read_model(&path)?;
            if model.region != region {
                return Err(PipelineError::Model {
                    path,
                    source: ClusterError::Model(format!("holds region {}", model.region)),
                });
            }
            models.insert(region, model);
        }
        Ok(models)
    }

    fn archive(
        summaries: &[DailySummary],
        temps: &BTreeMap<NaiveDate, f64>,
        models: &BTreeMap<Region, ClusterModel>,
    ) -> HistoryArchive {
        HistoryArchive::new(
            summaries
                .iter()
                .filter_map(|s| {
                    let features = s.feature_vector()?;
                    let temp_c = *temps.get(&s.date)?;
                    let region = Region::of_date(s.date);
                    let model = models.get(&region)?;
                    Some(HistoryDay {
                        date: s.date,
                        region,
                        cluster: model.assign_raw(&features),
                        temp_c,
                    })
                })
                .collect(),
        )
    }

    fn forecast_day(
        &self,
        date: NaiveDate,
        cluster: usize,
        archive: &HistoryArchive,
        categories: &CategoryMap,
    ) -> Result<Option<ForecastRecord>> {
        let region = Region::of_date(date);
        let pools = historical_pools(archive, date, region, cluster, self.cfg.match_window_days);
        let range = match predict_from_pools(self.cfg.alpha, &pools, self.cfg.half_width_floor_c) {
            Ok(range) => range,
            Err(ForecastError::NoHistory) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let (low_c, high_c) = range.reported();
        Ok(Some(ForecastRecord {
            date,
            region,
            cluster,
            low_c,
            high_c,
            category: categories.categorize(region, cluster)?.to_string(),
            condition: threshold_condition(range.low, range.high, &self.cfg.thresholds)?
                .to_string(),
        }))
    }

    /// Forecasts every complete day of the target year from earlier years.
    pub fn predict(&self) -> Result<PredictSummary> {
        let summaries = self.read_structural(STRUCTURAL_FILE)?;
        let temps = self.read_temperatures()?;
        let models = self.load_models()?;
        let categories = self.cfg.category_map();
        let keys = models
            .values()
            .flat_map(|m| m.clusters.iter().map(move |c| (m.region, c.id)));
        let missing = categories.missing(keys);
        if !missing.is_empty() {
            let keys: Vec<String> = missing.iter().map(|(r, c)| format!("{r}{c}")).collect();
            return Err(ConfigError::Invalid(format!(
                "category_map has no label for {}",
                keys.join(", ")
            ))
            .into());
        }

        let complete: Vec<&DailySummary> = summaries.iter().filter(|s| s.is_complete()).collect();
        let year = match self.cfg.forecast_year {
            Some(y) => y,
            None => complete
                .iter()
                .map(|s| s.date.year())
                .max()
                .ok_or_else(|| PipelineError::InsufficientHistory("no complete days".into()))?,
        };
        let archive = Self::archive(&summaries, &temps, &models);

        let mut forecasts = Vec::new();
        let mut skipped = Vec::new();
        for s in complete.into_iter().filter(|s| s.date.year() == year) {
            let features = s.feature_vector().expect("complete");
            let cluster = models[&Region::of_date(s.date)].assign_raw(&features);
            match self.forecast_day(s.date, cluster, &archive, &categories)? {
                Some(record) => forecasts.push(record),
                None => skipped.push(s.date),
            }
        }
        if forecasts.is_empty() {
            return Err(PipelineError::InsufficientHistory(format!(
                "no day of {year} has same-cluster history in the three years before it"
            )));
        }
        let mut buf = Vec::new();
        forecast::write_forecast_csv(&forecasts, &mut buf)?;
        self.write(FORECAST_FILE, &buf)?;
        Ok(PredictSummary {
            forecasts,
            year,
            skipped,
        })
    }

    /// Scores the forecast file against observed temperatures.
    pub fn evaluate(&self) -> Result<EvaluationReport> {
        let path = self.artifact(FORECAST_FILE);
        let forecasts = forecast::read_forecast_csv(open(&path)?)?;
        let temps = self.read_temperatures()?;
        let report = build_report(&forecasts, &temps);
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        self.write(EVALUATION_CSV, &buf)?;
        self.write(EVALUATION_JSON, report.to_json()?.as_bytes())?;
        Ok(report)
    }

    /// Renders hull plots for the given dates (all pollutants unless one is
    /// named). Dates without a usable series are skipped.
    pub fn plot(&self, dates: &[NaiveDate], pollutant: Option<Pollutant>) -> Result<Vec<PathBuf>> {
        if dates.is_empty() {
            return Ok(Vec::new());
        }
        let parsed = self.read_readings(&self.cfg.readings)?;
        let groups = self.group(&parsed.readings)?;
        let mut written = Vec::new();
        for &date in dates {
            for p in Pollutant::ALL {
                if pollutant.is_some_and(|only| only != p) {
                    continue;
                }
                let Some(series) = groups.series.get(&(date, p)) else {
                    continue;
                };
                let polygon = monotone_chain_hull(&series_points(series))?;
                let svg = emit_hull_plot(series, &polygon, self.cfg.unit(p))?;
                let name = format!("{PLOTS_DIR}/{}", plot_file_name(series));
                written.push(self.write(&name, svg.as_bytes())?);
            }
        }
        Ok(written)
    }

    /// Every stage in order.
    pub fn run(&self) -> Result<RunSummary> {
        for input in [&self.cfg.readings, &self.cfg.temperatures] {
            if !input.exists() {
                return Err(PipelineError::MissingInput(input.clone()));
            }
        }
        let summaries = self.summarize()?;
        self.split()?;
        self.cluster()?;
        let predict = self.predict()?;
        let report = self.evaluate()?;
        let plots = self.plot(&self.cfg.plot_dates, None)?;
        Ok(RunSummary {
            summaries: summaries.len(),
            complete: summaries.iter().filter(|s| s.is_complete()).count(),
            predict,
            report,
            plots,
        })
    }

    /// Adds one new day to a region model and forecasts it.
    ///
    /// The day must pass ingestion and be complete; otherwise the model file
    /// is left untouched. The model is rewritten atomically before the
    /// forecast is made from the archive in `output_dir`.
    pub fn insert(&self, model_path: &Path, readings_path: &Path) -> Result<InsertOutcome> {
        let mut model = Self::read_model(model_path)?;
        let parsed = self.read_readings(readings_path)?;
        let groups = self.group(&parsed.readings)?;
        let dates = groups.dates();
        let [date] = dates.as_slice() else {
            return Err(PipelineError::Incomplete(format!(
                "expected readings for exactly one date, found {}",
                dates.len()
            )));
        };
        let summary = hull::summarize_all(&groups)?.pop().expect("one date");
        let Some(features) = summary.feature_vector() else {
            let missing: Vec<&str> = summary.missing().iter().map(|p| p.code()).collect();
            return Err(PipelineError::Incomplete(format!(
                "{date} is incomplete, missing {}",
                missing.join(", ")
            )));
        };
        let region = Region::of_date(*date);
        if model.region != region {
            return Err(PipelineError::Model {
                path: model_path.to_path_buf(),
                source: ClusterError::Model(format!(
                    "model is for region {} but {date} falls in region {region}",
                    model.region
                )),
            });
        }
        let cluster =
            model
                .incremental_insert(&features)
                .map_err(|source| PipelineError::Model {
                    path: model_path.to_path_buf(),
                    source,
                })?;
        Self::write_model(model_path, &model)?;

        let history = match self.read_structural(STRUCTURAL_FILE) {
            Ok(s) => s,
            Err(PipelineError::MissingInput(_)) => Vec::new(),
            Err(e) => return Err(e),
        };
        let temps = self.read_temperatures()?;
        let models = BTreeMap::from([(region, model)]);
        let archive = Self::archive(&history, &temps, &models);
        let forecast = self
            .forecast_day(*date, cluster, &archive, &self.cfg.category_map())?
            .ok_or_else(|| {
                PipelineError::InsufficientHistory(format!("no same-cluster history for {date}"))
            })?;
        Ok(InsertOutcome { cluster, forecast })
    }
}
