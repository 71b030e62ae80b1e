//! Exact linear subproblem: least squares for (A, B, C1, C2) with the
//! nonlinear triple (tc, α, ω) held fixed.
//!
//! The 4-column design [1, τ^α, τ^α cos(ω ln τ), τ^α sin(ω ln τ)] is solved
//! by modified Gram-Schmidt QR with a reorthogonalization pass. Column norms
//! vary over many orders of magnitude across the grid, so rank checks are
//! relative to the original column norm.

use crate::error::{Error, Result};
use crate::series::PriceSeries;

pub const ALPHA_DEAD_ZONE: f64 = 0.05;

const RANK_TOL: f64 = 1e-10;

/// Solution of the linear subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    pub sse: f64,
}

/// Reusable buffer for the QR factorization: four columns stored
/// contiguously.
#[derive(Debug, Default)]
pub(crate) struct Scratch {
    q: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi -= alpha * xi;
    }
}

/// Least squares on precomputed basis columns. `pw` = τ^α, `cosv`/`sinv` =
/// cos/sin(ω ln τ). SSE comes from an explicit residual pass, not from the
/// norm identity, so it stays accurate near perfect fits.
pub(crate) fn solve_cols(
    pw: &[f64],
    cosv: &[f64],
    sinv: &[f64],
    y: &[f64],
    scratch: &mut Scratch,
) -> Result<LinearFit> {
    let n = y.len();
    if n < 4 {
        return Err(Error::DegenerateDesign(format!(
            "{n} points cannot determine 4 linear coefficients"
        )));
    }
    scratch.q.clear();
    scratch.q.resize(4 * n, 0.0);
    {
        let (q0, rest) = scratch.q.split_at_mut(n);
        let (q1, rest) = rest.split_at_mut(n);
        let (q2, q3) = rest.split_at_mut(n);
        for i in 0..n {
            q0[i] = 1.0;
            q1[i] = pw[i];
            q2[i] = pw[i] * cosv[i];
            q3[i] = pw[i] * sinv[i];
        }
    }

    let mut r = [[0.0f64; 4]; 4];
    for j in 0..4 {
        let (done, rest) = scratch.q.split_at_mut(j * n);
        let qj = &mut rest[..n];
        let orig_norm = dot(qj, qj).sqrt();
        for _pass in 0..2 {
            for i in 0..j {
                let qi = &done[i * n..(i + 1) * n];
                let proj = dot(qi, qj);
                r[i][j] += proj;
                axpy(qj, proj, qi);
            }
        }
        let norm = dot(qj, qj).sqrt();
        if !norm.is_finite() || norm <= RANK_TOL * orig_norm.max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateDesign(format!(
                "design column {j} is numerically dependent (norm ratio {:e})",
                norm / orig_norm.max(f64::MIN_POSITIVE)
            )));
        }
        r[j][j] = norm;
        for v in qj.iter_mut() {
            *v /= norm;
        }
    }

    let qty = [
        dot(&scratch.q[..n], y),
        dot(&scratch.q[n..2 * n], y),
        dot(&scratch.q[2 * n..3 * n], y),
        dot(&scratch.q[3 * n..], y),
    ];

    // back substitution R β = Qᵀy
    let mut beta = [0.0f64; 4];
    for j in (0..4).rev() {
        let mut v = qty[j];
        for k in (j + 1)..4 {
            v -= r[j][k] * beta[k];
        }
        beta[j] = v / r[j][j];
    }
    let [a, b, c1, c2] = beta;
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateDesign("non-finite coefficients".into()));
    }

    let mut sse = 0.0;
    for i in 0..n {
        let model = a + pw[i] * (b + c1 * cosv[i] + c2 * sinv[i]);
        let res = y[i] - model;
        sse += res * res;
    }
    Ok(LinearFit { a, b, c1, c2, sse })
}

/// Fill the basis columns for one nonlinear triple.
pub(crate) fn fill_basis(
    times: &[f64],
    tc: f64,
    alpha: f64,
    omega: f64,
    pw: &mut Vec<f64>,
    cosv: &mut Vec<f64>,
    sinv: &mut Vec<f64>,
) -> Result<()> {
    pw.clear();
    cosv.clear();
    sinv.clear();
    for &t in times {
        let tau = tc - t;
        if tau <= 0.0 {
            return Err(Error::Domain { t, tc });
        }
        let ln_tau = tau.ln();
        pw.push((alpha * ln_tau).exp());
        let phase = omega * ln_tau;
        cosv.push(phase.cos());
        sinv.push(phase.sin());
    }
    Ok(())
}

/// Exact global minimizer of SSE over (A, B, C1, C2) at a fixed triple.
pub fn solve_linear(tc: f64, alpha: f64, omega: f64, s: &PriceSeries) -> Result<LinearFit> {
    if alpha.abs() < ALPHA_DEAD_ZONE {
        return Err(Error::DegenerateParams(format!(
            "|alpha| = {} is inside the dead zone {ALPHA_DEAD_ZONE}",
            alpha.abs()
        )));
    }
    let times: Vec<f64> = s.times().collect();
    let y: Vec<f64> = s.prices().collect();
    let (mut pw, mut cosv, mut sinv) = (Vec::new(), Vec::new(), Vec::new());
    fill_basis(&times, tc, alpha, omega, &mut pw, &mut cosv, &mut sinv)?;
    solve_cols(&pw, &cosv, &sinv, &y, &mut Scratch::default())
}
