//! Writes a synthetic `readings.csv` and `temperatures.csv` for trying the
//! pipeline:
//!
//! ```text
//! cargo run --example synthetic -- data
//! cargo run --release -- run --config config/hullcast.sample.toml
//! ```

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use clap::Parser;
use hullcast::ingest::{write_hourly_csv, write_temperature_csv};
use hullcast::synth::{generate, shuffled_temperatures, SyntheticSpec};

#[derive(Parser)]
struct Args {
    /// Output directory
    #[arg(default_value = "data")]
    dir: PathBuf,
    #[arg(long, default_value_t = 2014)]
    start_year: i32,
    #[arg(long, default_value_t = 3)]
    years: u32,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Reassign the temperatures among the dates with this seed
    #[arg(long)]
    shuffle: Option<u64>,
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args = Args::parse();
    let spec = SyntheticSpec {
        start_year: args.start_year,
        years: args.years,
        seed: args.seed,
        ..SyntheticSpec::default()
    };
    let data = generate(&spec);
    let temps = match args.shuffle {
        Some(seed) => shuffled_temperatures(&data.temperatures, seed),
        None => data.temperatures,
    };
    fs::create_dir_all(&args.dir)?;
    write_hourly_csv(
        &data.readings,
        BufWriter::new(File::create(args.dir.join("readings.csv"))?),
    )?;
    write_temperature_csv(
        &temps,
        BufWriter::new(File::create(args.dir.join("temperatures.csv"))?),
    )?;
    println!(
        "{} readings over {} days in {}",
        data.readings.len(),
        temps.len(),
        args.dir.display()
    );
    Ok(())
}
