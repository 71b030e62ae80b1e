//! Parameter estimation by separable least squares: an exact linear solve
//! for (A, B, C1, C2) profiled inside a multistart grid search with local
//! simplex refinement over (tc, α, ω).

mod grid;
mod linear;
mod simplex;

pub use grid::{grid_search, GridCandidate};
pub use linear::{solve_linear, LinearFit, ALPHA_DEAD_ZONE};
pub use simplex::refine_local;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LpplParams, ParamsDoc, SCHEMA_VERSION};
use crate::series::{PriceSeries, Scale};
use crate::timebase::TimePoint;

/// Search configuration. The tc grid is expressed as offsets beyond the
/// window's last observation, which keeps the critical time strictly
/// outside the fitted data for any window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Smallest tc offset beyond the window end, in years. `None` means one
    /// mean sample interval.
    pub tc_offset_min: Option<f64>,
    pub tc_offset_max: f64,
    pub tc_step: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_step: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_step: f64,
    pub min_points: usize,
    pub refine_max_iters: usize,
    /// Relative SSE spread at which refinement counts as converged.
    pub refine_tol: f64,
    pub scale: Scale,
    pub multistart_top_k: usize,
    /// Evaluate grid slices on multiple threads. Results are identical to a
    /// sequential run; requires the `parallel` feature to have any effect.
    pub parallel: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            tc_offset_min: None,
            tc_offset_max: 5.0,
            tc_step: 0.05,
            alpha_min: -3.0,
            alpha_max: 1.0,
            alpha_step: 0.05,
            omega_min: 2.0,
            omega_max: 30.0,
            omega_step: 0.5,
            min_points: 8,
            refine_max_iters: 400,
            refine_tol: 1e-9,
            scale: Scale::Raw,
            multistart_top_k: 10,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

fn range_values(min: f64, max: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if step <= 0.0 {
        return out;
    }
    let mut k = 0u64;
    loop {
        let v = min + k as f64 * step;
        if v > max + 1e-12 {
            break;
        }
        out.push(v);
        k += 1;
    }
    out
}

impl FitConfig {
    pub(crate) fn validate(&self, s: &PriceSeries) -> Result<()> {
        if self.min_points < 8 {
            return Err(Error::Config(format!(
                "min_points must be at least 8, got {}",
                self.min_points
            )));
        }
        if s.len() < self.min_points {
            return Err(Error::Config(format!(
                "series has {} points, fewer than min_points = {}",
                s.len(),
                self.min_points
            )));
        }
        if let Some(off) = self.tc_offset_min {
            if !(off > 0.0) {
                return Err(Error::Config(
                    "tc_offset_min must be positive: tc must lie beyond the window".into(),
                ));
            }
        }
        for (name, v) in [
            ("tc_step", self.tc_step),
            ("alpha_step", self.alpha_step),
            ("omega_step", self.omega_step),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !(self.omega_min > 0.0) {
            return Err(Error::Config("omega_min must be positive".into()));
        }
        if self.multistart_top_k == 0 {
            return Err(Error::Config("multistart_top_k must be at least 1".into()));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::Config("refine_tol must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn tc_values(&self, s: &PriceSeries) -> Vec<f64> {
        let end = s.last_time().value();
        let off = self.tc_offset_min.unwrap_or_else(|| s.mean_interval());
        range_values(end + off, end + self.tc_offset_max, self.tc_step)
    }

    pub(crate) fn alpha_values(&self) -> Vec<f64> {
        range_values(self.alpha_min, self.alpha_max, self.alpha_step)
            .into_iter()
            .filter(|a| a.abs() >= ALPHA_DEAD_ZONE - 1e-12)
            .collect()
    }

    pub(crate) fn omega_values(&self) -> Vec<f64> {
        range_values(self.omega_min, self.omega_max, self.omega_step)
    }
}

/// One least-squares determination of the model constants on one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: LpplParams,
    pub sse: f64,
    pub rmse: f64,
    pub n_points: usize,
    pub window: (TimePoint, TimePoint),
    pub converged: bool,
    pub iterations: usize,
    pub candidates_evaluated: usize,
}

impl FitResult {
    pub(crate) fn assemble(
        s: &PriceSeries,
        cfg: &FitConfig,
        theta: [f64; 3],
        linear: LinearFit,
        converged: bool,
        iterations: usize,
        candidates_evaluated: usize,
    ) -> Result<Self> {
        let [tc, alpha, omega] = theta;
        let params = LpplParams::new(
            TimePoint::new(tc)?,
            alpha,
            omega,
            linear.a,
            linear.b,
            linear.c1,
            linear.c2,
            cfg.scale,
        )?;
        let n = s.len();
        Ok(FitResult {
            params,
            sse: linear.sse,
            rmse: (linear.sse / n as f64).sqrt(),
            n_points: n,
            window: (s.first_time(), s.last_time()),
            converged,
            iterations,
            candidates_evaluated,
        })
    }

    pub fn to_doc(&self) -> FitResultDoc {
        FitResultDoc {
            schema_version: SCHEMA_VERSION,
            params: ParamsDoc::new(&self.params),
            sse: self.sse,
            rmse: self.rmse,
            n_points: self.n_points,
            window_start: self.window.0,
            window_end: self.window.1,
            converged: self.converged,
            iterations: self.iterations,
            candidates_evaluated: self.candidates_evaluated,
        }
    }
}

/// JSON-shaped document for one fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResultDoc {
    pub schema_version: u32,
    pub params: ParamsDoc,
    pub sse: f64,
    pub rmse: f64,
    pub n_points: usize,
    pub window_start: TimePoint,
    pub window_end: TimePoint,
    pub converged: bool,
    pub iterations: usize,
    pub candidates_evaluated: usize,
}

impl FitResultDoc {
    pub fn to_fit_result(&self) -> FitResult {
        FitResult {
            params: self.params.linearized,
            sse: self.sse,
            rmse: self.rmse,
            n_points: self.n_points,
            window: (self.window_start, self.window_end),
            converged: self.converged,
            iterations: self.iterations,
            candidates_evaluated: self.candidates_evaluated,
        }
    }
}

/// Full pipeline: grid sweep, refinement of the top candidates, best
/// refined result by SSE (grid tie-break order on exact ties).
pub fn fit(s: &PriceSeries, cfg: &FitConfig) -> Result<FitResult> {
    if s.scale != cfg.scale {
        return Err(Error::Config(format!(
            "series scale {:?} does not match configured scale {:?}",
            s.scale, cfg.scale
        )));
    }
    let candidates = grid_search(s, cfg)?;
    let attempted = grid::grid_cell_count(s, cfg);

    let top_k = cfg.multistart_top_k.min(candidates.len());
    let mut best: Option<FitResult> = None;
    let mut evals = attempted;
    let mut last_err = None;
    for cand in &candidates[..top_k] {
        match refine_local(cand, s, cfg) {
            Ok(mut fr) => {
                evals += fr.candidates_evaluated;
                fr.candidates_evaluated = evals;
                let better = match &best {
                    None => true,
                    Some(cur) => {
                        fr.sse.total_cmp(&cur.sse)
                            .then(fr.params.tc.value().total_cmp(&cur.params.tc.value()))
                            .then(fr.params.omega.total_cmp(&cur.params.omega))
                            .then(fr.params.alpha.abs().total_cmp(&cur.params.alpha.abs()))
                            .is_lt()
                    }
                };
                if better {
                    best = Some(fr);
                } else if let Some(cur) = &mut best {
                    cur.candidates_evaluated = evals;
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| {
        Error::FitFailed(format!(
            "all {top_k} refinements failed (last error: {})",
            last_err.map(|e| e.to_string()).unwrap_or_else(|| "none".into())
        ))
    })
}
