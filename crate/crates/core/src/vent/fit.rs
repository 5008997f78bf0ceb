//! Least-squares fit of the Richardson-fit coefficients.

use super::RichardsonCoefficients;
use crate::error::{Error, Result};

/// Number of deterministic starting points tried by the fit.
pub const FIT_STARTS: usize = 8;

const MAX_ITERATIONS: usize = 500;
const S_FLOOR: f64 = 1e-14;

/// One observation `(Ri_v, V̇/(A_total U))` with a positive weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitPoint {
    pub ri_v: f64,
    pub nondim_rate: f64,
    pub weight: f64,
}

impl FitPoint {
    pub fn new(ri_v: f64, nondim_rate: f64) -> Self {
        FitPoint { ri_v, nondim_rate, weight: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RichardsonFit {
    pub coeffs: RichardsonCoefficients,
    /// Weighted RMS of the residuals in nondimensional-rate units.
    pub rms_residual: f64,
    pub iterations: usize,
    pub n_points: usize,
}

fn model(p: &[f64; 3], ri: f64) -> f64 {
    (p[0] * ri + p[1]).abs().sqrt() + p[2]
}

fn cost(p: &[f64; 3], pts: &[FitPoint]) -> f64 {
    pts.iter()
        .map(|q| {
            let r = model(p, q.ri_v) - q.nondim_rate;
            q.weight * r * r
        })
        .sum()
}

/// Normal equations `(JᵀWJ, JᵀWr)` at `p`.
fn normal_equations(p: &[f64; 3], pts: &[FitPoint]) -> ([[f64; 3]; 3], [f64; 3]) {
    let mut jtj = [[0.0; 3]; 3];
    let mut jtr = [0.0; 3];
    for q in pts {
        let s = p[0] * q.ri_v + p[1];
        let d = if s == 0.0 {
            0.0
        } else {
            s.signum() / (2.0 * s.abs().max(S_FLOOR).sqrt())
        };
        let j = [d * q.ri_v, d, 1.0];
        let r = model(p, q.ri_v) - q.nondim_rate;
        for a in 0..3 {
            jtr[a] += q.weight * j[a] * r;
            for b in 0..3 {
                jtj[a][b] += q.weight * j[a] * j[b];
            }
        }
    }
    (jtj, jtr)
}

fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let a = nalgebra::Matrix3::from_fn(|i, j| m[i][j]);
    let b = nalgebra::Vector3::from_column_slice(&rhs);
    let x = a.lu().solve(&b)?;
    x.iter().all(|v| v.is_finite()).then(|| [x[0], x[1], x[2]])
}

/// Levenberg–Marquardt from one start; returns the final parameters,
/// cost and iteration count.
fn levenberg_marquardt(start: [f64; 3], pts: &[FitPoint]) -> ([f64; 3], f64, usize) {
    let mut p = start;
    p[2] = p[2].max(0.0);
    let mut c = cost(&p, pts);
    let mut lambda = 1e-3;
    let mut it = 0;
    while it < MAX_ITERATIONS && c > 1e-30 {
        it += 1;
        let (jtj, jtr) = normal_equations(&p, pts);
        let mut m = jtj;
        for (k, row) in m.iter_mut().enumerate() {
            row[k] += lambda * jtj[k][k].max(1e-12);
        }
        let Some(step) = solve3(m, [-jtr[0], -jtr[1], -jtr[2]]) else {
            lambda *= 10.0;
            if lambda > 1e16 {
                break;
            }
            continue;
        };
        // Gauss-Newton overshoots by a factor of two on a point sitting at
        // the kink of the square root; damped fractions of the step recover.
        let (trial, ct) = [1.0, 0.5, 0.25, 0.125]
            .into_iter()
            .map(|a| {
                let mut t = [p[0] + a * step[0], p[1] + a * step[1], p[2] + a * step[2]];
                t[2] = t[2].max(0.0);
                (t, cost(&t, pts))
            })
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("nonempty");
        if ct < c {
            let rel = (c - ct) / c;
            let moved = (0..3).map(|k| (trial[k] - p[k]).abs() / (1.0 + p[k].abs())).fold(0.0, f64::max);
            p = trial;
            c = ct;
            lambda = (lambda / 3.0).max(1e-15);
            if rel < 1e-14 && moved < 1e-13 {
                break;
            }
        } else {
            lambda *= 4.0;
            if lambda > 1e16 {
                break;
            }
        }
    }
    (p, c, it)
}

/// Fit `(c1, c2, c3)` by weighted nonlinear least squares with `c3 ≥ 0`.
///
/// The model is invariant under `(c1, c2) → (−c1, −c2)`; the result is
/// reported with `c1 ≥ 0`.
pub fn fit_richardson_coeffs(points: &[FitPoint]) -> Result<RichardsonFit> {
    if points.len() < 3 {
        return Err(Error::invalid("points", format!("need at least 3 points, got {}", points.len())));
    }
    for (i, q) in points.iter().enumerate() {
        if !(q.ri_v.is_finite() && q.nondim_rate.is_finite()) {
            return Err(Error::invalid(format!("points[{i}]"), "values must be finite"));
        }
        if !(q.weight.is_finite() && q.weight > 0.0) {
            return Err(Error::invalid(format!("points[{i}].weight"), "must be > 0"));
        }
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), q| (a.min(q.ri_v), b.max(q.ri_v)));
    if hi - lo <= 1e-12 * (1.0 + hi.abs()) {
        return Err(Error::invalid("points", "all Ri_v values are identical; c1 and c2 are not identifiable"));
    }

    let mut ys: Vec<f64> = points.iter().map(|q| q.nondim_rate).collect();
    ys.sort_by(f64::total_cmp);
    let y_med = ys[ys.len() / 2].abs().max(1e-3);
    let y_min = ys[0].max(0.0);
    let ri_scale = lo.abs().max(hi.abs());

    let mut best: Option<([f64; 3], f64, usize)> = None;
    for k in 0..FIT_STARTS {
        let c1 = y_med * y_med / ri_scale * [0.1, 1.0, 10.0, 100.0][k / 2];
        let c2 = if k % 2 == 0 { y_med * y_med } else { -y_med * y_med };
        let run = levenberg_marquardt([c1, c2, 0.5 * y_min], points);
        if best.as_ref().is_none_or(|b| run.1 < b.1) {
            best = Some(run);
        }
    }
    let (mut p, c, iterations) = best.expect("at least one start");
    if p[0] < 0.0 || (p[0] == 0.0 && p[1] < 0.0) {
        p[0] = -p[0];
        p[1] = -p[1];
    }
    let wsum: f64 = points.iter().map(|q| q.weight).sum();
    Ok(RichardsonFit {
        coeffs: RichardsonCoefficients::new(p[0], p[1], p[2])?,
        rms_residual: (c / wsum).sqrt(),
        iterations,
        n_points: points.len(),
    })
}
