//! Synthetic multi-year datasets with planted pollution regimes.
//!
//! Every day draws one of four regimes. The regime fixes the level of all
//! five pollutants (hourly values follow a diurnal cycle with multiplicative
//! noise around that level) and, together with the seasonal region, the
//! day's temperature. A forecaster that recovers the regimes from pollution
//! alone can therefore predict temperature well.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ingest::{HourlyReading, Pollutant};
use crate::partition::Region;

pub const REGIMES: usize = 4;

/// Regime levels per pollutant, in [`Pollutant::ALL`] order.
const LEVELS: [[f64; REGIMES]; 5] = [
    [0.8, 1.6, 2.4, 3.2],
    [60.0, 105.0, 150.0, 195.0],
    [6.0, 12.0, 18.0, 24.0],
    [70.0, 130.0, 190.0, 250.0],
    [2.5, 3.8, 5.1, 6.4],
];

/// Temperature offsets per regime, added to the region's base.
const TEMP_OFFSETS: [f64; REGIMES] = [-7.5, -2.5, 2.5, 7.5];

fn region_base_temp(region: Region) -> f64 {
    match region {
        Region::A => 16.0,
        Region::B => 28.0,
        Region::C => 32.0,
        Region::D => 25.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub start_year: i32,
    pub years: u32,
    pub seed: u64,
    /// Relative standard deviation of hourly values around the regime level.
    pub value_noise: f64,
    pub temp_noise_sd: f64,
    /// Chance that any single hourly reading is missing.
    pub drop_rate: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            start_year: 2014,
            years: 3,
            seed: 7,
            value_noise: 0.08,
            temp_noise_sd: 0.5,
            drop_rate: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub readings: Vec<HourlyReading>,
    pub temperatures: BTreeMap<NaiveDate, f64>,
    /// The regime planted on each date.
    pub regimes: BTreeMap<NaiveDate, usize>,
}

pub fn generate(spec: &SyntheticSpec) -> SyntheticData {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let value_noise = Normal::new(0.0, spec.value_noise).expect("finite noise");
    let temp_noise = Normal::new(0.0, spec.temp_noise_sd).expect("finite noise");
    let first = NaiveDate::from_ymd_opt(spec.start_year, 1, 1).expect("valid year");
    let end =
        NaiveDate::from_ymd_opt(spec.start_year + spec.years as i32, 1, 1).expect("valid year");

    let mut data = SyntheticData {
        readings: Vec::new(),
        temperatures: BTreeMap::new(),
        regimes: BTreeMap::new(),
    };
    for date in first.iter_days().take_while(|d| *d < end) {
        let regime = rng.random_range(0..REGIMES);
        data.regimes.insert(date, regime);
        let temp = region_base_temp(Region::of_date(date))
            + TEMP_OFFSETS[regime]
            + temp_noise.sample(&mut rng);
        data.temperatures.insert(date, (temp * 10.0).round() / 10.0);

        for pollutant in Pollutant::ALL {
            let level = LEVELS[pollutant.index()][regime];
            let phase = pollutant.index() as f64 * 0.7;
            for hour in 0..24u8 {
                if rng.random::<f64>() < spec.drop_rate {
                    continue;
                }
                let cycle = 1.0 + 0.2 * (2.0 * PI * f64::from(hour) / 24.0 + phase).sin();
                let value = level * cycle * (1.0 + value_noise.sample(&mut rng));
                data.readings.push(HourlyReading {
                    date,
                    hour,
                    pollutant,
                    value: (value.max(0.0) * 1000.0).round() / 1000.0,
                });
            }
        }
    }
    data
}

/// The same temperatures randomly reassigned among the dates.
pub fn shuffled_temperatures(
    temps: &BTreeMap<NaiveDate, f64>,
    seed: u64,
) -> BTreeMap<NaiveDate, f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<f64> = temps.values().copied().collect();
    values.shuffle(&mut rng);
    temps.keys().copied().zip(values).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_every_day_and_is_seeded() {
        let spec = SyntheticSpec {
            years: 1,
            ..SyntheticSpec::default()
        };
        let a = generate(&spec);
        assert_eq!(a.temperatures.len(), 365);
        assert_eq!(a.regimes.len(), 365);
        assert!(a.readings.iter().all(|r| r.value >= 0.0 && r.hour < 24));
        assert_eq!(a, generate(&spec));
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let spec = SyntheticSpec {
            years: 1,
            ..SyntheticSpec::default()
        };
        let temps = generate(&spec).temperatures;
        let shuffled = shuffled_temperatures(&temps, 1);
        let mut a: Vec<f64> = temps.values().copied().collect();
        let mut b: Vec<f64> = shuffled.values().copied().collect();
        assert_ne!(a, b);
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
    }
}
