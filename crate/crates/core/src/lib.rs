//! Forecasting daily temperature ranges from hourly air-pollutant readings.
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! 1. [`ingest`] parses hourly readings and groups them into per-day series.
//! 2. [`hull`] reduces each day's series to the mean of its convex-hull
//!    vertices, giving one [`hull::DailySummary`] per date.
//! 3. [`partition`] splits the summaries into the four seasonal regions.
//! 4. [`clustering`] fits a GA-seeded K-means model per region and supports
//!    incremental inserts of new days.
//! 5. [`forecast`] predicts a temperature range from same-cluster history of
//!    up to three previous years.
//! 6. [`evaluate`] scores predictions against observed temperatures.
//!
//! [`pipeline`] ties the stages together behind a single [`config::PipelineConfig`].

pub mod clustering;
pub mod config;
pub mod evaluate;
pub mod forecast;
pub mod hull;
pub mod ingest;
pub mod partition;
pub mod pipeline;
pub mod plot;
pub mod structural;
pub mod synth;

mod fsutil;

pub use clustering::{ClusterMeta, ClusterModel, GaConfig, Scaling};
pub use evaluate::{Accuracy, EvaluationReport};
pub use forecast::{ForecastRecord, PriorityWeights};
pub use hull::{DailySummary, HullPolygon, Point};
pub use ingest::{DaySeries, HourlyReading, Pollutant};
pub use partition::Region;
