//! Calendar dates and the decimal-year time axis.
//!
//! Time is measured in decimal years on a fixed 365-day calendar:
//! `year + day_of_year / 365`, with Jan 1 = day 1 and the leap day
//! collapsed onto day 59 (same as Feb 28). Under this convention
//! Oct 19 maps to exactly `year + 292/365 = year + 0.8000`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_DECIMAL_YEAR: f64 = 1800.0;
pub const MAX_DECIMAL_YEAR: f64 = 2200.0;

/// A point on the decimal-year time axis.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimePoint(f64);

impl TimePoint {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (MIN_DECIMAL_YEAR..=MAX_DECIMAL_YEAR).contains(&value) {
            Ok(TimePoint(value))
        } else {
            Err(Error::TimeOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A valid Gregorian calendar date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CalendarDate {
    pub year: i32,
    pub month: u32,
    pub day: u32,
}

/// Days in each month of a non-leap year.
const MONTH_LENGTHS: [u32; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

/// Cumulative day count before each month (non-leap).
const CUM_DAYS: [u32; 12] = [0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334];

fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

impl CalendarDate {
    pub fn new(year: i32, month: u32, day: u32) -> Result<Self> {
        let err = Error::InvalidDate { year, month, day };
        if !(1..=12).contains(&month) {
            return Err(err);
        }
        let mut max_day = MONTH_LENGTHS[(month - 1) as usize];
        if month == 2 && is_leap_year(year) {
            max_day = 29;
        }
        if day < 1 || day > max_day {
            return Err(err);
        }
        Ok(CalendarDate { year, month, day })
    }

    /// Day of year on the fixed 365-day calendar; Feb 29 collapses onto day 59.
    pub fn day_of_year(&self) -> u32 {
        let day = if self.month == 2 && self.day == 29 {
            28
        } else {
            self.day
        };
        CUM_DAYS[(self.month - 1) as usize] + day
    }

    /// Parse an ISO-8601 date (YYYY-MM-DD).
    pub fn parse_iso(text: &str) -> Result<Self> {
        let mut parts = text.trim().splitn(3, '-');
        let bad = || Error::Format(format!("expected ISO-8601 date (YYYY-MM-DD), got {text:?}"));
        let year: i32 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let month: u32 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let day: u32 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        CalendarDate::new(year, month, day)
    }

    /// Day of week, 0 = Monday .. 6 = Sunday.
    pub fn weekday(&self) -> u32 {
        // days-from-civil, shifted so that 1970-01-01 (a Thursday) works out.
        let y = if self.month <= 2 {
            self.year - 1
        } else {
            self.year
        } as i64;
        let era = if y >= 0 { y } else { y - 399 } / 400;
        let yoe = (y - era * 400) as u32;
        let m = self.month as i64;
        let doy = ((153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + self.day as i64 - 1) as u32;
        let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        let days = era * 146_097 + doe as i64 - 719_468;
        ((days + 3).rem_euclid(7)) as u32
    }

    pub fn is_weekday(&self) -> bool {
        self.weekday() < 5
    }

    /// The next day on the Gregorian calendar.
    pub fn succ(&self) -> CalendarDate {
        let mut max_day = MONTH_LENGTHS[(self.month - 1) as usize];
        if self.month == 2 && is_leap_year(self.year) {
            max_day = 29;
        }
        if self.day < max_day {
            CalendarDate {
                day: self.day + 1,
                ..*self
            }
        } else if self.month < 12 {
            CalendarDate {
                year: self.year,
                month: self.month + 1,
                day: 1,
            }
        } else {
            CalendarDate {
                year: self.year + 1,
                month: 1,
                day: 1,
            }
        }
    }
}

impl fmt::Display for CalendarDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

/// Convert a calendar date to decimal years: `year + day_of_year/365`.
pub fn date_to_decimal_year(d: CalendarDate) -> Result<TimePoint> {
    TimePoint::new(d.year as f64 + d.day_of_year() as f64 / 365.0)
}

fn date_from_doy(year: i32, doy: u32) -> CalendarDate {
    debug_assert!((1..=365).contains(&doy));
    let month = CUM_DAYS.iter().rposition(|&c| c < doy).unwrap();
    CalendarDate {
        year,
        month: month as u32 + 1,
        day: doy - CUM_DAYS[month],
    }
}

/// Inverse of [`date_to_decimal_year`]: the calendar date whose decimal year
/// is closest to `t`, ties broken toward the earlier date. Feb 29 never
/// appears in the output (it shares a decimal year with Feb 28).
pub fn decimal_year_to_date(t: TimePoint) -> Result<CalendarDate> {
    let v = t.value();
    let base = v.floor() as i32;
    let mut best: Option<(f64, CalendarDate)> = None;
    // Dec 31 of year Y maps to Y+1.0, so the nearest date may sit in the
    // previous year; scanning chronologically keeps ties on the earlier date.
    for year in [base - 1, base, base + 1] {
        for doy in 1..=365u32 {
            let dec = year as f64 + doy as f64 / 365.0;
            let dist = (dec - v).abs();
            if best.is_none_or(|(d, _)| dist < d) {
                best = Some((dist, date_from_doy(year, doy)));
            }
        }
    }
    let (_, date) = best.expect("candidate years are non-empty");
    if date.year < 1800 || date.year > 2200 {
        return Err(Error::TimeOutOfRange(v));
    }
    Ok(date)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn d(y: i32, m: u32, day: u32) -> CalendarDate {
        CalendarDate::new(y, m, day).unwrap()
    }

    #[test]
    fn anchor_oct_19_2017_is_exactly_point_80() {
        let t = date_to_decimal_year(d(2017, 10, 19)).unwrap();
        assert_eq!(t.value(), 2017.0 + 292.0 / 365.0);
        assert_abs_diff_eq!(t.value(), 2017.80, epsilon = 1e-12);
    }

    #[test]
    fn first_day_of_year() {
        let t = date_to_decimal_year(d(2017, 1, 1)).unwrap();
        assert_abs_diff_eq!(t.value(), 2017.0 + 1.0 / 365.0, epsilon = 0.0);
    }

    #[test]
    fn nearest_date_to_long_horizon_singularity() {
        // Enumeration oracle: among all 365 days of 2045, day 311 (= Nov 7,
        // 2045.85205) is the closest decimal year to 2045.853.
        let mut best = (f64::INFINITY, 0u32);
        for doy in 1..=365u32 {
            let dist = (2045.0 + doy as f64 / 365.0 - 2045.853).abs();
            if dist < best.0 {
                best = (dist, doy);
            }
        }
        assert_eq!(best.1, 311);
        assert_eq!(
            date_to_decimal_year(d(2045, 11, 7)).unwrap().value(),
            2045.0 + 311.0 / 365.0
        );
        assert_eq!(
            decimal_year_to_date(TimePoint::new(2045.853).unwrap()).unwrap(),
            d(2045, 11, 7)
        );
    }

    #[test]
    fn inverse_of_anchor() {
        let date = decimal_year_to_date(TimePoint::new(2017.80).unwrap()).unwrap();
        assert_eq!(date, d(2017, 10, 19));
        let date = decimal_year_to_date(TimePoint::new(2017.00274).unwrap()).unwrap();
        assert_eq!(date, d(2017, 1, 1));
    }

    #[test]
    fn round_trip_every_day_of_a_year() {
        // Leap and non-leap years, Feb 29 excluded (it collides with Feb 28).
        for year in [2015, 2016] {
            let mut date = d(year, 1, 1);
            while date.year == year {
                if !(date.month == 2 && date.day == 29) {
                    let t = date_to_decimal_year(date).unwrap();
                    assert_eq!(decimal_year_to_date(t).unwrap(), date, "{date}");
                }
                date = date.succ();
            }
        }
    }

    #[test]
    fn leap_day_collapses_onto_feb_28() {
        assert_eq!(d(2016, 2, 29).day_of_year(), 59);
        assert_eq!(d(2016, 2, 28).day_of_year(), 59);
        assert_eq!(d(2016, 3, 1).day_of_year(), 60);
    }

    #[test]
    fn monotone_within_year() {
        let mut date = d(2011, 1, 1);
        let mut prev = date_to_decimal_year(date).unwrap().value();
        for _ in 0..363 {
            date = date.succ();
            let cur = date_to_decimal_year(date).unwrap().value();
            assert!(cur > prev);
            prev = cur;
        }
    }

    #[test]
    fn rejects_invalid_dates() {
        assert!(CalendarDate::new(2017, 2, 29).is_err());
        assert!(CalendarDate::new(2016, 2, 29).is_ok());
        assert!(CalendarDate::new(2017, 13, 1).is_err());
        assert!(CalendarDate::new(2017, 4, 31).is_err());
    }

    #[test]
    fn rejects_out_of_range_times() {
        assert!(TimePoint::new(1500.0).is_err());
        assert!(TimePoint::new(f64::NAN).is_err());
        assert!(TimePoint::new(2500.0).is_err());
    }

    #[test]
    fn iso_parsing() {
        assert_eq!(CalendarDate::parse_iso("2009-03-02").unwrap(), d(2009, 3, 2));
        assert!(CalendarDate::parse_iso("2009/03/02").is_err());
        assert!(CalendarDate::parse_iso("not-a-date").is_err());
    }

    #[test]
    fn weekdays() {
        // 2009-03-02 was a Monday, 2016-04-29 a Friday.
        assert_eq!(d(2009, 3, 2).weekday(), 0);
        assert_eq!(d(2016, 4, 29).weekday(), 4);
        assert!(!d(2016, 4, 30).is_weekday());
    }
}
