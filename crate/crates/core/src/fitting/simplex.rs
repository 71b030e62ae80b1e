//! Local stage: derivative-free simplex descent over (tc, α, ω) with the
//! linear subproblem profiled out at every trial point.

use crate::error::{Error, Result};
use crate::series::PriceSeries;

use super::grid::GridCandidate;
use super::linear::{fill_basis, solve_cols, LinearFit, Scratch, ALPHA_DEAD_ZONE};
use super::{FitConfig, FitResult};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// SSE floor added to the convergence test so perfect fits (SSE → 0) can
/// still terminate on the relative criterion.
const SSE_FLOOR: f64 = 1e-15;

/// Relative parameter-spread at which the simplex also counts as converged.
/// Near-perfect fits sit at the round-off noise floor of the SSE itself,
/// where the value-spread criterion can never trigger; a fully contracted
/// simplex is the equivalent signal there.
const THETA_TOL: f64 = 1e-9;

struct Objective<'a> {
    times: Vec<f64>,
    y: Vec<f64>,
    s: &'a PriceSeries,
    tc_min: f64,
    pw: Vec<f64>,
    cosv: Vec<f64>,
    sinv: Vec<f64>,
    scratch: Scratch,
    evals: usize,
}

#[derive(Clone, Copy)]
struct Vertex {
    theta: [f64; 3], // tc, alpha, omega (after constraint projection)
    sse: f64,
    linear: Option<LinearFit>,
}

impl<'a> Objective<'a> {
    fn new(s: &'a PriceSeries, tc_min: f64) -> Self {
        Objective {
            times: s.times().collect(),
            y: s.prices().collect(),
            s,
            tc_min,
            pw: Vec::new(),
            cosv: Vec::new(),
            sinv: Vec::new(),
            scratch: Scratch::default(),
            evals: 0,
        }
    }

    /// Project onto the feasible set and evaluate. Infeasible or degenerate
    /// points get infinite SSE so the simplex backs away from them.
    fn eval(&mut self, theta: [f64; 3]) -> Vertex {
        self.evals += 1;
        let tc = theta[0].max(self.tc_min);
        let (alpha, omega) = (theta[1], theta[2]);
        let projected = [tc, alpha, omega];
        if alpha.abs() < ALPHA_DEAD_ZONE || !(omega > 0.0) {
            return Vertex { theta: projected, sse: f64::INFINITY, linear: None };
        }
        let ok = fill_basis(
            &self.times, tc, alpha, omega, &mut self.pw, &mut self.cosv, &mut self.sinv,
        );
        if ok.is_err() {
            return Vertex { theta: projected, sse: f64::INFINITY, linear: None };
        }
        match solve_cols(&self.pw, &self.cosv, &self.sinv, &self.y, &mut self.scratch) {
            Ok(linear) => Vertex { theta: projected, sse: linear.sse, linear: Some(linear) },
            Err(_) => Vertex { theta: projected, sse: f64::INFINITY, linear: None },
        }
    }

    fn result(&self, v: &Vertex, cfg: &FitConfig, converged: bool, iterations: usize) -> Result<FitResult> {
        let linear = v.linear.ok_or_else(|| {
            Error::RefinementFailed(format!(
                "best point (tc={}, alpha={}, omega={}) has a degenerate design",
                v.theta[0], v.theta[1], v.theta[2]
            ))
        })?;
        FitResult::assemble(self.s, cfg, v.theta, linear, converged, iterations, self.evals)
    }
}

/// Polish one grid candidate. SSE never increases; terminates when the
/// simplex value spread drops below `refine_tol` (relative) or the
/// iteration budget runs out.
pub fn refine_local(candidate: &GridCandidate, s: &PriceSeries, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate(s)?;
    let tc_min = s.last_time().value() + s.mean_interval();
    let mut obj = Objective::new(s, tc_min);

    let start = obj.eval([candidate.tc, candidate.alpha, candidate.omega]);
    if start.linear.is_none() {
        return Err(Error::RefinementFailed(
            "candidate itself has a degenerate design".into(),
        ));
    }

    if cfg.refine_max_iters == 0 {
        return obj.result(&start, cfg, false, 0);
    }

    // initial simplex: half a default grid step in each direction
    let steps = [cfg.tc_step * 0.5, cfg.alpha_step * 0.5, cfg.omega_step * 0.5];
    let mut simplex = vec![start];
    for d in 0..3 {
        let mut theta = start.theta;
        theta[d] += steps[d];
        simplex.push(obj.eval(theta));
    }

    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.refine_max_iters {
        iterations += 1;
        simplex.sort_by(|a, b| a.sse.total_cmp(&b.sse));
        let best = simplex[0].sse;
        let worst = simplex[3].sse;
        if worst - best <= cfg.refine_tol * (best.abs() + SSE_FLOOR) {
            converged = true;
            break;
        }
        let contracted_out = (0..3).all(|d| {
            let b = simplex[0].theta[d];
            simplex[1..]
                .iter()
                .all(|v| (v.theta[d] - b).abs() <= THETA_TOL * (1.0 + b.abs()))
        });
        if contracted_out {
            converged = true;
            break;
        }

        let mut centroid = [0.0f64; 3];
        for v in &simplex[..3] {
            for d in 0..3 {
                centroid[d] += v.theta[d] / 3.0;
            }
        }
        let dir = |coef: f64| {
            let mut t = [0.0f64; 3];
            for d in 0..3 {
                t[d] = centroid[d] + coef * (centroid[d] - simplex[3].theta[d]);
            }
            t
        };

        let reflected = obj.eval(dir(REFLECT));
        if reflected.sse < simplex[0].sse {
            let expanded = obj.eval(dir(EXPAND));
            simplex[3] = if expanded.sse < reflected.sse { expanded } else { reflected };
        } else if reflected.sse < simplex[2].sse {
            simplex[3] = reflected;
        } else {
            let contracted = if reflected.sse < simplex[3].sse {
                obj.eval(dir(CONTRACT))
            } else {
                obj.eval(dir(-CONTRACT))
            };
            if contracted.sse < simplex[3].sse.min(reflected.sse) {
                simplex[3] = contracted;
            } else {
                // shrink toward the best vertex
                for k in 1..4 {
                    let mut theta = [0.0f64; 3];
                    for d in 0..3 {
                        theta[d] =
                            simplex[0].theta[d] + SHRINK * (simplex[k].theta[d] - simplex[0].theta[d]);
                    }
                    simplex[k] = obj.eval(theta);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.sse.total_cmp(&b.sse));
    let best = if simplex[0].sse <= start.sse { simplex[0] } else { start };
    obj.result(&best, cfg, converged, iterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::solve_linear;
    use crate::model::{evaluate, LpplParams};
    use crate::series::Scale;
    use crate::timebase::TimePoint;

    fn tp(v: f64) -> TimePoint {
        TimePoint::new(v).unwrap()
    }

    fn noiseless_series(params: &LpplParams, n: usize, a: f64, b: f64) -> PriceSeries {
        let points = (0..n)
            .map(|k| {
                let t = tp(a + (b - a) * k as f64 / (n - 1) as f64);
                (t, evaluate(params, t).unwrap())
            })
            .collect();
        PriceSeries::new(points, "synthetic", Scale::Raw).unwrap()
    }

    fn truth() -> LpplParams {
        LpplParams::new(tp(2017.45), 0.75, 8.0, 100.0, -10.0, 2.0, -1.0, Scale::Raw).unwrap()
    }

    fn candidate_at(tc: f64, alpha: f64, omega: f64, s: &PriceSeries) -> GridCandidate {
        GridCandidate {
            tc,
            alpha,
            omega,
            linear: solve_linear(tc, alpha, omega, s).unwrap(),
        }
    }

    #[test]
    fn converges_from_perturbed_truth() {
        let params = truth();
        let s = noiseless_series(&params, 250, 2009.0, 2016.0);
        let cand = candidate_at(2017.55, 0.80, 8.5, &s);
        let fit = refine_local(&cand, &s, &FitConfig::default()).unwrap();
        assert!(fit.converged);
        assert!((fit.params.tc.value() - 2017.45).abs() < 1e-3, "tc = {}", fit.params.tc);
        assert!(fit.sse <= cand.linear.sse);
    }

    #[test]
    fn optimum_candidate_is_returned_unchanged() {
        let params = truth();
        let s = noiseless_series(&params, 250, 2009.0, 2016.0);
        let cand = candidate_at(2017.45, 0.75, 8.0, &s);
        let fit = refine_local(&cand, &s, &FitConfig::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.sse <= cand.linear.sse);
        // already at the optimum: the triple moves by at most noise-level amounts
        assert!((fit.params.tc.value() - 2017.45).abs() < 1e-4);
        assert!((fit.params.alpha - 0.75).abs() < 1e-4);
        assert!((fit.params.omega - 8.0).abs() < 1e-3);
    }

    #[test]
    fn zero_iteration_budget_returns_candidate_unconverged() {
        let params = truth();
        let s = noiseless_series(&params, 100, 2009.0, 2016.0);
        let cand = candidate_at(2017.6, 0.6, 9.0, &s);
        let cfg = FitConfig { refine_max_iters: 0, ..FitConfig::default() };
        let fit = refine_local(&cand, &s, &cfg).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.iterations, 0);
        assert_eq!(fit.params.tc.value(), 2017.6);
        assert_eq!(fit.sse, cand.linear.sse);
    }

    #[test]
    fn tc_clamped_beyond_window_end() {
        let params = truth();
        let s = noiseless_series(&params, 100, 2009.0, 2016.0);
        // candidate near the boundary pushes the simplex against the clamp
        let cand = candidate_at(2016.1, 0.75, 8.0, &s);
        let fit = refine_local(&cand, &s, &FitConfig::default()).unwrap();
        assert!(fit.params.tc.value() > s.last_time().value());
    }
}
