//! The four seasonal regions and the split of the structural database.
//!
//! Region membership is by calendar month only:
//!
//! | region | months        | season    |
//! |--------|---------------|-----------|
//! | A      | Dec, Jan, Feb | winter    |
//! | B      | Mar, Apr      | temperate |
//! | C      | May, Jun, Jul | summer    |
//! | D      | Aug - Nov     | temperate |

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hull::DailySummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    A,
    B,
    C,
    D,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("month {0} outside 1-12")]
    Month(u32),
    #[error("unknown region code `{0}`")]
    Code(String),
}

impl Region {
    pub const ALL: [Region; 4] = [Region::A, Region::B, Region::C, Region::D];

    pub fn code(self) -> &'static str {
        match self {
            Region::A => "A",
            Region::B => "B",
            Region::C => "C",
            Region::D => "D",
        }
    }

    pub fn months(self) -> &'static [u32] {
        match self {
            Region::A => &[12, 1, 2],
            Region::B => &[3, 4],
            Region::C => &[5, 6, 7],
            Region::D => &[8, 9, 10, 11],
        }
    }

    pub fn season(self) -> &'static str {
        match self {
            Region::A => "winter",
            Region::B | Region::D => "temperate",
            Region::C => "summer",
        }
    }

    pub fn of_date(date: NaiveDate) -> Region {
        region_of(date.month()).expect("chrono months are 1-12")
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Region {
    type Err = RegionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(Region::A),
            "B" | "b" => Ok(Region::B),
            "C" | "c" => Ok(Region::C),
            "D" | "d" => Ok(Region::D),
            other => Err(RegionError::Code(other.to_string())),
        }
    }
}

pub fn region_of(month: u32) -> Result<Region, RegionError> {
    match month {
        12 | 1 | 2 => Ok(Region::A),
        3 | 4 => Ok(Region::B),
        5..=7 => Ok(Region::C),
        8..=11 => Ok(Region::D),
        m => Err(RegionError::Month(m)),
    }
}

/// Splits summaries by region, keeping input order within each region.
/// All four regions are present in the result, possibly empty.
pub fn split_by_region(summaries: &[DailySummary]) -> BTreeMap<Region, Vec<DailySummary>> {
    let mut split: BTreeMap<Region, Vec<DailySummary>> =
        Region::ALL.into_iter().map(|r| (r, Vec::new())).collect();
    for s in summaries {
        split
            .get_mut(&Region::of_date(s.date))
            .expect("all regions present")
            .push(s.clone());
    }
    split
}
