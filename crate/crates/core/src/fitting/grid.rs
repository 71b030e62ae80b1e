//! Global stage: exhaustive linear solves over the (tc, α, ω) grid.
//!
//! Candidates are evaluated independently (optionally in parallel over tc
//! slices), collected in grid order and then sorted, so parallel and
//! sequential runs produce identical output.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::series::PriceSeries;

use super::linear::{solve_cols, LinearFit, Scratch};
use super::FitConfig;

/// One grid cell with its profiled linear solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCandidate {
    pub tc: f64,
    pub alpha: f64,
    pub omega: f64,
    pub linear: LinearFit,
}

/// Candidate ordering: ascending SSE, ties broken by smaller tc, then
/// smaller ω, then smaller |α|.
pub(crate) fn candidate_order(a: &GridCandidate, b: &GridCandidate) -> Ordering {
    a.linear
        .sse
        .total_cmp(&b.linear.sse)
        .then(a.tc.total_cmp(&b.tc))
        .then(a.omega.total_cmp(&b.omega))
        .then(a.alpha.abs().total_cmp(&b.alpha.abs()))
        .then(a.alpha.total_cmp(&b.alpha))
}

/// Evaluate all (α, ω) cells for one tc, reusing the per-tc basis.
fn candidates_for_tc(
    tc: f64,
    times: &[f64],
    y: &[f64],
    alphas: &[f64],
    omegas: &[f64],
) -> Vec<GridCandidate> {
    let n = times.len();
    let ln_tau: Vec<f64> = times.iter().map(|&t| (tc - t).ln()).collect();

    // cos/sin shared across alphas
    let mut trig = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        let mut cosv = Vec::with_capacity(n);
        let mut sinv = Vec::with_capacity(n);
        for &l in &ln_tau {
            let phase = omega * l;
            cosv.push(phase.cos());
            sinv.push(phase.sin());
        }
        trig.push((cosv, sinv));
    }

    let mut scratch = Scratch::default();
    let mut pw = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(alphas.len() * omegas.len());
    for &alpha in alphas {
        pw.clear();
        pw.extend(ln_tau.iter().map(|&l| (alpha * l).exp()));
        for (oi, &omega) in omegas.iter().enumerate() {
            let (cosv, sinv) = &trig[oi];
            if let Ok(linear) = solve_cols(&pw, cosv, sinv, y, &mut scratch) {
                out.push(GridCandidate { tc, alpha, omega, linear });
            }
        }
    }
    out
}

/// Full Cartesian sweep, best-first. Degenerate cells are skipped; an error
/// is returned only when the grid is empty or no cell at all is viable.
pub fn grid_search(s: &PriceSeries, cfg: &FitConfig) -> Result<Vec<GridCandidate>> {
    cfg.validate(s)?;
    let tcs = cfg.tc_values(s);
    let alphas = cfg.alpha_values();
    let omegas = cfg.omega_values();
    if tcs.is_empty() || alphas.is_empty() || omegas.is_empty() {
        return Err(Error::Config(format!(
            "empty search grid: {} tc x {} alpha x {} omega values",
            tcs.len(),
            alphas.len(),
            omegas.len()
        )));
    }

    let times: Vec<f64> = s.times().collect();
    let y: Vec<f64> = s.prices().collect();

    let per_tc: Vec<Vec<GridCandidate>> = run_over_tcs(cfg.parallel, &tcs, |&tc| {
        candidates_for_tc(tc, &times, &y, &alphas, &omegas)
    });

    let mut all: Vec<GridCandidate> = per_tc.into_iter().flatten().collect();
    if all.is_empty() {
        return Err(Error::FitFailed(
            "every grid cell produced a degenerate design".into(),
        ));
    }
    all.sort_by(candidate_order);
    Ok(all)
}

/// Number of cells a full sweep attempts (including degenerate ones).
pub(crate) fn grid_cell_count(s: &PriceSeries, cfg: &FitConfig) -> usize {
    cfg.tc_values(s).len() * cfg.alpha_values().len() * cfg.omega_values().len()
}

#[cfg(feature = "parallel")]
fn run_over_tcs<F>(parallel: bool, tcs: &[f64], f: F) -> Vec<Vec<GridCandidate>>
where
    F: Fn(&f64) -> Vec<GridCandidate> + Sync + Send,
{
    use rayon::prelude::*;
    if parallel {
        tcs.par_iter().map(f).collect()
    } else {
        tcs.iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_over_tcs<F>(_parallel: bool, tcs: &[f64], f: F) -> Vec<Vec<GridCandidate>>
where
    F: Fn(&f64) -> Vec<GridCandidate> + Sync + Send,
{
    tcs.iter().map(f).collect()
}
