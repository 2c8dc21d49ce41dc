//! Calendar months and quarters.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Months, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

pub fn month_start(d: NaiveDate) -> NaiveDate {
    NaiveDate::from_ymd_opt(d.year(), d.month(), 1).expect("first of month")
}

/// Adds calendar months, clamping the day to the end of the target month.
pub fn add_months(d: NaiveDate, months: u32) -> NaiveDate {
    d.checked_add_months(Months::new(months))
        .expect("date in range")
}

/// Months since year 0, for cheap month arithmetic.
pub fn month_number(d: NaiveDate) -> i32 {
    d.year() * 12 + d.month0() as i32
}

/// Number of whole calendar months from `from` to `to` (floored).
pub fn whole_months_between(from: NaiveDate, to: NaiveDate) -> i32 {
    let mut months = month_number(to) - month_number(from);
    if months > 0 && to.day() < from.day() && add_months(from, months as u32) > to {
        months -= 1;
    }
    months
}

/// Parses `YYYY-MM` (or a full ISO date) to the first day of that month.
pub fn parse_month(s: &str) -> Result<NaiveDate, Error> {
    let s = s.trim();
    NaiveDate::parse_from_str(&format!("{s}-01"), "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(s, "%Y-%m-%d").map(month_start))
        .map_err(|_| Error::Config(format!("`{s}` is not a YYYY-MM month")))
}

/// A calendar quarter (Jan–Mar is Q1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quarter {
    year: i32,
    quarter: u8,
}

impl Quarter {
    pub fn new(year: i32, quarter: u8) -> Option<Self> {
        (1..=4)
            .contains(&quarter)
            .then_some(Quarter { year, quarter })
    }

    pub fn containing(d: NaiveDate) -> Self {
        Quarter {
            year: d.year(),
            quarter: (d.month0() / 3 + 1) as u8,
        }
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn quarter(self) -> u8 {
        self.quarter
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, (self.quarter as u32 - 1) * 3 + 1, 1)
            .expect("valid quarter")
    }

    /// Exclusive end: the first day of the next quarter.
    pub fn end(self) -> NaiveDate {
        self.next().first_day()
    }

    pub fn last_day(self) -> NaiveDate {
        self.end().pred_opt().expect("date in range")
    }

    pub fn contains(self, d: NaiveDate) -> bool {
        self.first_day() <= d && d < self.end()
    }

    pub fn offset(self, quarters: i32) -> Self {
        let idx = self.year * 4 + self.quarter as i32 - 1 + quarters;
        Quarter {
            year: idx.div_euclid(4),
            quarter: (idx.rem_euclid(4) + 1) as u8,
        }
    }

    pub fn next(self) -> Self {
        self.offset(1)
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.quarter)
    }
}

impl FromStr for Quarter {
    type Err = Error;

    /// Accepts `2013Q1`, `2013-Q1` and `2013q1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::Config(format!("`{s}` is not a quarter like 2013Q1"));
        let upper = s.trim().to_ascii_uppercase();
        let (y, q) = upper.split_once('Q').ok_or_else(bad)?;
        let year: i32 = y.trim_end_matches('-').parse().map_err(|_| bad())?;
        let quarter: u8 = q.parse().map_err(|_| bad())?;
        Quarter::new(year, quarter).ok_or_else(bad)
    }
}

impl Serialize for Quarter {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Quarter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
