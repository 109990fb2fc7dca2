use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};

use hullcast::config::{PipelineConfig, CONFIG_HELP};
use hullcast::pipeline::{Pipeline, PipelineError};
use hullcast::Pollutant;

#[derive(Parser)]
#[command(name = "hullcast", version, about = "Temperature-range forecasts from hourly air-pollutant readings", after_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Pipeline config file (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override `output_dir`
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override `seed`
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and group the readings; report counts
    Ingest,
    /// Write the structural database of daily hull means
    Summarize,
    /// Write the four seasonal region slices
    Split,
    /// Fit one cluster model per region
    Cluster,
    /// Forecast the target year
    Predict,
    /// Score the forecast against observed temperatures
    Evaluate,
    /// Add one new day to a model and forecast it
    Insert {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        readings: PathBuf,
    },
    /// Render hull plots
    Plot {
        /// Dates to plot (defaults to `plot_dates`)
        #[arg(long = "date")]
        dates: Vec<NaiveDate>,
        #[arg(long)]
        pollutant: Option<Pollutant>,
    },
    /// All stages in order
    Run,
}

fn execute(cli: Cli) -> Result<(), PipelineError> {
    let Some(path) = cli.config else {
        return Err(hullcast::config::ConfigError::Invalid("--config is required".into()).into());
    };
    let mut cfg = PipelineConfig::load(&path)?;
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let pipeline = Pipeline::new(cfg);
    match cli.command {
        Command::Ingest => {
            let s = pipeline.ingest()?;
            println!(
                "{} rows, {} readings ({} superseded), {} dates, {} day series, {} incomplete",
                s.rows,
                s.readings,
                s.superseded,
                s.dates,
                s.series,
                s.incomplete.len()
            );
        }
        Command::Summarize => {
            let s = pipeline.summarize()?;
            let complete = s.iter().filter(|d| d.is_complete()).count();
            println!("{} days summarized, {complete} complete", s.len());
        }
        Command::Split => {
            for (region, n) in pipeline.split()? {
                println!("region {region}: {n} days");
            }
        }
        Command::Cluster => {
            for (region, model) in pipeline.cluster()? {
                let counts: Vec<String> =
                    model.clusters.iter().map(|c| c.count.to_string()).collect();
                println!("region {region}: cluster sizes {}", counts.join(" "));
            }
        }
        Command::Predict => {
            let s = pipeline.predict()?;
            println!(
                "{} forecasts for {}, {} days without history",
                s.forecasts.len(),
                s.year,
                s.skipped.len()
            );
        }
        Command::Evaluate => {
            let r = pipeline.evaluate()?;
            println!("accuracy {}/{} = {}", r.hits, r.total, r.accuracy_display);
        }
        Command::Insert { model, readings } => {
            let outcome = pipeline.insert(&model, &readings)?;
            let f = outcome.forecast;
            println!(
                "{},{},{},{},{},{},{}",
                f.date, f.region, f.cluster, f.low_c, f.high_c, f.category, f.condition
            );
        }
        Command::Plot { dates, pollutant } => {
            let dates = if dates.is_empty() {
                pipeline.config().plot_dates.clone()
            } else {
                dates
            };
            for path in pipeline.plot(&dates, pollutant)? {
                println!("{}", path.display());
            }
        }
        Command::Run => {
            let s = pipeline.run()?;
            println!(
                "{} days ({} complete), {} forecasts for {}, accuracy {}/{} = {}",
                s.summaries,
                s.complete,
                s.predict.forecasts.len(),
                s.predict.year,
                s.report.hits,
                s.report.total,
                s.report.accuracy_display
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hullcast: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
