//! Price series ingestion, windowing and transforms.
//!
//! CSV input follows the Yahoo-Finance historical export: a header row,
//! ISO-8601 dates, comma separation. Series are immutable once built.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timebase::{date_to_decimal_year, decimal_year_to_date, CalendarDate, TimePoint};

/// Whether prices are raw or natural-log transformed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Raw,
    Log,
}

/// Which price column to read from a CSV file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceColumn {
    Close,
    AdjustedClose,
}

impl PriceColumn {
    fn matches(&self, header: &str) -> bool {
        let h = header.trim();
        match self {
            // "Price" is the header this module writes back out.
            PriceColumn::Close => h.eq_ignore_ascii_case("Close") || h.eq_ignore_ascii_case("Price"),
            PriceColumn::AdjustedClose => {
                h.eq_ignore_ascii_case("Adj Close")
                    || h.eq_ignore_ascii_case("Adjusted Close")
                    || h.eq_ignore_ascii_case("AdjClose")
            }
        }
    }
}

/// An ordered (time, price) series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    points: Vec<(TimePoint, f64)>,
    pub label: String,
    pub scale: Scale,
}

impl PriceSeries {
    /// Build a series, enforcing the invariants: strictly increasing times,
    /// finite prices (strictly positive on the raw scale), at least 2 points.
    pub fn new(points: Vec<(TimePoint, f64)>, label: impl Into<String>, scale: Scale) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Validation(format!(
                "series needs at least 2 points, got {}",
                points.len()
            )));
        }
        for w in points.windows(2) {
            if w[1].0.value() <= w[0].0.value() {
                return Err(Error::Validation(format!(
                    "times not strictly increasing near t = {}",
                    w[1].0
                )));
            }
        }
        for &(t, p) in &points {
            if !p.is_finite() {
                return Err(Error::Validation(format!("non-finite price at t = {t}")));
            }
            if scale == Scale::Raw && p <= 0.0 {
                return Err(Error::Validation(format!(
                    "non-positive price {p} at t = {t}"
                )));
            }
        }
        Ok(PriceSeries {
            points,
            label: label.into(),
            scale,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(TimePoint, f64)] {
        &self.points
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|&(t, _)| t.value())
    }

    pub fn prices(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|&(_, p)| p)
    }

    pub fn first_time(&self) -> TimePoint {
        self.points[0].0
    }

    pub fn last_time(&self) -> TimePoint {
        self.points[self.points.len() - 1].0
    }

    /// Mean spacing between consecutive observations, in years.
    pub fn mean_interval(&self) -> f64 {
        (self.last_time().value() - self.first_time().value()) / (self.len() - 1) as f64
    }

    pub fn mean_price(&self) -> f64 {
        self.prices().sum::<f64>() / self.len() as f64
    }
}

/// Parse a CSV stream with a header row into a raw-scale series.
///
/// Rows are converted with the 365-day decimal-year rule, sorted ascending,
/// and validated: duplicate dates and non-positive prices are rejected.
pub fn parse_csv<R: Read>(reader: R, column: PriceColumn) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| Error::Format(format!("cannot read header row: {e}")))?
        .clone();
    let date_idx = headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case("Date"))
        .ok_or_else(|| Error::Format("missing Date column".into()))?;
    let price_idx = headers
        .iter()
        .position(|h| column.matches(h))
        .ok_or_else(|| Error::Format(format!("missing price column for {column:?}")))?;

    let mut rows: Vec<(CalendarDate, TimePoint, f64)> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2; // 1-based, after the header
        let record = record.map_err(|e| Error::FormatAt {
            line,
            msg: e.to_string(),
        })?;
        let date_field = record.get(date_idx).ok_or_else(|| Error::FormatAt {
            line,
            msg: "missing date field".into(),
        })?;
        let price_field = record.get(price_idx).ok_or_else(|| Error::FormatAt {
            line,
            msg: "missing price field".into(),
        })?;
        let date = CalendarDate::parse_iso(date_field).map_err(|e| Error::FormatAt {
            line,
            msg: e.to_string(),
        })?;
        let price: f64 = price_field.parse().map_err(|_| Error::FormatAt {
            line,
            msg: format!("unparseable price {price_field:?}"),
        })?;
        if price <= 0.0 {
            return Err(Error::Validation(format!(
                "non-positive price {price} on line {line} ({date})"
            )));
        }
        let t = date_to_decimal_year(date)?;
        rows.push((date, t, price));
    }

    rows.sort_by_key(|r| r.0);
    for w in rows.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::Validation(format!("duplicate date {}", w[0].0)));
        }
    }

    PriceSeries::new(
        rows.into_iter().map(|(_, t, p)| (t, p)).collect(),
        "",
        Scale::Raw,
    )
}

/// Serialize a series as `Date,Price` CSV, inverting the decimal-year rule.
/// Prices use shortest round-trip formatting so parse ∘ serialize is exact.
pub fn serialize_csv(s: &PriceSeries) -> Result<String> {
    let mut out = String::from("Date,Price\n");
    for &(t, p) in s.points() {
        let date = decimal_year_to_date(t)?;
        out.push_str(&format!("{date},{p}\n"));
    }
    Ok(out)
}

/// Restrict to observations with `start <= t <= end`, preserving order.
pub fn slice_window(s: &PriceSeries, start: TimePoint, end: TimePoint, min_points: usize) -> Result<PriceSeries> {
    if start.value() >= end.value() {
        return Err(Error::Validation(format!(
            "window start {start} must precede end {end}"
        )));
    }
    let points: Vec<_> = s
        .points()
        .iter()
        .filter(|(t, _)| t.value() >= start.value() && t.value() <= end.value())
        .copied()
        .collect();
    if points.len() < min_points.max(2) {
        return Err(Error::EmptyWindow {
            start: start.value(),
            end: end.value(),
            found: points.len(),
            required: min_points.max(2),
        });
    }
    PriceSeries::new(points, s.label.clone(), s.scale)
}

/// Replace each price by its natural logarithm.
pub fn log_transform(s: &PriceSeries) -> Result<PriceSeries> {
    if s.scale == Scale::Log {
        return Err(Error::State("series is already log-scale".into()));
    }
    let points = s.points().iter().map(|&(t, p)| (t, p.ln())).collect();
    PriceSeries::new(points, s.label.clone(), Scale::Log)
}
