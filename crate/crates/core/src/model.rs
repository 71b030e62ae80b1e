//! The log-periodic power-law model and its two parameterizations.
//!
//! Internally the model is kept in a linearized basis,
//!
//! ```text
//! p(t) = A + B·τ^α + τ^α·(C1·cos(ω ln τ) + C2·sin(ω ln τ)),   τ = tc − t,
//! ```
//!
//! where (A, B, C1, C2) enter linearly and only (tc, α, ω) are nonlinear.
//! The amplitude-phase form A − m·τ^α·{1 + C·cos(ω ln τ + φ)} maps onto it
//! via B = −m, C1 = −m·C·cos φ, C2 = m·C·sin φ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{PriceSeries, Scale};
use crate::timebase::TimePoint;

pub const SCHEMA_VERSION: u32 = 1;

/// Model constants in the linearized basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpplParams {
    pub tc: TimePoint,
    pub alpha: f64,
    pub omega: f64,
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    pub scale: Scale,
}

/// Model constants in the amplitude-phase basis, gauge-fixed to
/// `c >= 0` and `phi` in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeParams {
    pub a: f64,
    pub m: f64,
    pub c: f64,
    pub alpha: f64,
    pub omega: f64,
    pub phi: f64,
    pub tc: TimePoint,
}

impl LpplParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        tc: TimePoint,
        alpha: f64,
        omega: f64,
        a: f64,
        b: f64,
        c1: f64,
        c2: f64,
        scale: Scale,
    ) -> Result<Self> {
        if alpha == 0.0 || !alpha.is_finite() {
            return Err(Error::DegenerateParams("alpha must be finite and nonzero".into()));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::DegenerateParams("omega must be positive".into()));
        }
        for (name, v) in [("a", a), ("b", b), ("c1", c1), ("c2", c2)] {
            if !v.is_finite() {
                return Err(Error::DegenerateParams(format!("{name} must be finite")));
            }
        }
        Ok(LpplParams { tc, alpha, omega, a, b, c1, c2, scale })
    }

    /// Build from the trend + cosine form
    /// `a + b·τ^α + d·τ^α·cos(ω ln τ + φ)`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_cos_form(
        a: f64,
        b: f64,
        d: f64,
        alpha: f64,
        omega: f64,
        phi: f64,
        tc: TimePoint,
        scale: Scale,
    ) -> Result<Self> {
        LpplParams::new(tc, alpha, omega, a, b, d * phi.cos(), -d * phi.sin(), scale)
    }

    /// Oscillation envelope amplitude sqrt(c1² + c2²).
    pub fn oscillation_amplitude(&self) -> f64 {
        self.c1.hypot(self.c2)
    }
}

/// Evaluate the model at `t`, which must precede the critical time.
pub fn evaluate(params: &LpplParams, t: TimePoint) -> Result<f64> {
    let tau = params.tc.value() - t.value();
    if tau <= 0.0 {
        return Err(Error::Domain {
            t: t.value(),
            tc: params.tc.value(),
        });
    }
    let ln_tau = tau.ln();
    let pw = (params.alpha * ln_tau).exp(); // τ^α
    let phase = params.omega * ln_tau;
    Ok(params.a + pw * (params.b + params.c1 * phase.cos() + params.c2 * phase.sin()))
}

/// Convert from the amplitude-phase basis.
pub fn from_amplitude(ap: &AmplitudeParams, scale: Scale) -> Result<LpplParams> {
    LpplParams::new(
        ap.tc,
        ap.alpha,
        ap.omega,
        ap.a,
        -ap.m,
        -ap.m * ap.c * ap.phi.cos(),
        ap.m * ap.c * ap.phi.sin(),
        scale,
    )
}

/// Convert to the amplitude-phase basis. Requires `b != 0`; with `b = 0`
/// the amplitude and oscillation constants are not separately identifiable.
pub fn to_amplitude(lp: &LpplParams) -> Result<AmplitudeParams> {
    if lp.b == 0.0 {
        return Err(Error::DegenerateParams(
            "b = 0: amplitude form is not identifiable".into(),
        ));
    }
    let m = -lp.b;
    let r = lp.oscillation_amplitude();
    let c = r / m.abs();
    let phi = if r == 0.0 {
        0.0
    } else {
        // -m·c·cos(phi) = c1 and m·c·sin(phi) = c2, with c > 0
        let s = m.signum();
        let raw = (s * lp.c2).atan2(-s * lp.c1);
        raw.rem_euclid(std::f64::consts::TAU)
    };
    Ok(AmplitudeParams {
        a: lp.a,
        m,
        c,
        alpha: lp.alpha,
        omega: lp.omega,
        phi,
        tc: lp.tc,
    })
}

/// Per-point differences `price − model` over a series.
pub fn residuals(params: &LpplParams, s: &PriceSeries) -> Result<Vec<f64>> {
    if params.scale != s.scale {
        return Err(Error::State(format!(
            "scale mismatch: params are {:?}, series is {:?}",
            params.scale, s.scale
        )));
    }
    s.points()
        .iter()
        .map(|&(t, p)| evaluate(params, t).map(|m| p - m))
        .collect()
}

/// Sum of squared residuals.
pub fn sse(params: &LpplParams, s: &PriceSeries) -> Result<f64> {
    Ok(residuals(params, s)?.iter().map(|r| r * r).sum())
}

/// Flat document carrying both parameterizations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub schema_version: u32,
    pub scale: Scale,
    /// Gauge used for the amplitude form.
    pub gauge: String,
    pub linearized: LpplParams,
    /// Absent when b = 0 (amplitude form not identifiable).
    pub amplitude: Option<AmplitudeParams>,
}

impl ParamsDoc {
    pub fn new(lp: &LpplParams) -> Self {
        ParamsDoc {
            schema_version: SCHEMA_VERSION,
            scale: lp.scale,
            gauge: "c >= 0, phi in [0, 2pi)".into(),
            linearized: *lp,
            amplitude: to_amplitude(lp).ok(),
        }
    }
}
