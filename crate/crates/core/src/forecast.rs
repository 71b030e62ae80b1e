//! Calendar forecasts from a fitted model: critical date, expected crash
//! window and regime classification.
//!
//! The crash window ends at the critical date and opens 1.4/12 decimal
//! years earlier, the average lead between the crisis and the critical
//! point reported for historical bubbles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{FitResult, FitResultDoc};
use crate::model::{LpplParams, SCHEMA_VERSION};
use crate::timebase::{decimal_year_to_date, CalendarDate, TimePoint};

/// Average lead of the crisis before the critical time, in years.
pub const CRASH_LEAD_YEARS: f64 = 1.4 / 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Bubble,
    Antibubble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub tc_date: CalendarDate,
    pub crash_window: (CalendarDate, CalendarDate),
    pub regime: Regime,
    pub source_fit: FitResult,
}

/// Bubble iff the trend component A + B·τ^α rises toward the singularity,
/// i.e. d/dt (B·τ^α) = −αB·τ^(α−1) > 0, which reduces to αB < 0.
pub fn classify_regime(params: &LpplParams) -> Result<Regime> {
    if params.b == 0.0 {
        return Err(Error::IndeterminateRegime(
            "b = 0: the trend component is constant".into(),
        ));
    }
    if params.alpha * params.b < 0.0 {
        Ok(Regime::Bubble)
    } else {
        Ok(Regime::Antibubble)
    }
}

/// Build the calendar forecast for a converged fit.
pub fn crash_window(fr: &FitResult) -> Result<Forecast> {
    if !fr.converged {
        return Err(Error::NotConverged(
            "fit did not converge; its critical time is unreliable".into(),
        ));
    }
    let tc = fr.params.tc;
    let tc_date = decimal_year_to_date(tc)?;
    let window_start = decimal_year_to_date(TimePoint::new(tc.value() - CRASH_LEAD_YEARS)?)?;
    Ok(Forecast {
        tc_date,
        crash_window: (window_start, tc_date),
        regime: classify_regime(&fr.params)?,
        source_fit: fr.clone(),
    })
}

/// JSON-shaped forecast document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForecastDoc {
    pub schema_version: u32,
    pub tc_date: CalendarDate,
    pub crash_window_start: CalendarDate,
    pub crash_window_end: CalendarDate,
    pub regime: Regime,
    pub lead_time_convention: String,
    pub source_fit: FitResultDoc,
}

impl Forecast {
    pub fn to_doc(&self) -> ForecastDoc {
        ForecastDoc {
            schema_version: SCHEMA_VERSION,
            tc_date: self.tc_date,
            crash_window_start: self.crash_window.0,
            crash_window_end: self.crash_window.1,
            regime: self.regime,
            lead_time_convention:
                "window opens 1.4/12 decimal years (average lead) before the critical date, on the fixed 365-day calendar"
                    .into(),
            source_fit: self.source_fit.to_doc(),
        }
    }

    /// One-paragraph plain-text summary.
    pub fn summary(&self) -> String {
        let regime = match self.regime {
            Regime::Bubble => "bubble (super-exponential growth toward the critical time)",
            Regime::Antibubble => "anti-bubble (the growth pattern unwinds in reverse)",
        };
        format!(
            "Critical time {tc} (decimal year {dec:.4}): the fitted regime is a {regime}. \
             The expected crash window runs from {start} to {end}, using an average lead of \
             1.4 months (1.4/12 decimal years on the fixed 365-day calendar) before the \
             critical date.",
            tc = self.tc_date,
            dec = self.source_fit.params.tc.value(),
            start = self.crash_window.0,
            end = self.crash_window.1,
        )
    }
}
