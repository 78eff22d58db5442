//! Bounded Levenberg-Marquardt with Marquardt diagonal scaling.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
pub const STEP_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Solution {
    pub params: Vec<f64>,
    /// `s² (JᵀJ)⁻¹`; infinite on the diagonal where `JᵀJ` is singular.
    pub covariance: DMatrix<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl Solution {
    pub fn sigma(&self, j: usize) -> f64 {
        self.covariance[(j, j)].max(0.0).sqrt()
    }
}

fn residuals<F: Fn(f64, &[f64]) -> f64>(f: &F, x: &[f64], y: &[f64], p: &[f64]) -> DVector<f64> {
    DVector::from_iterator(x.len(), x.iter().zip(y).map(|(&xi, &yi)| yi - f(xi, p)))
}

fn jacobian<F: Fn(f64, &[f64]) -> f64>(f: &F, x: &[f64], p: &[f64], lower: &[f64], upper: &[f64]) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(x.len(), p.len());
    let mut q = p.to_vec();
    for k in 0..p.len() {
        let h = 1e-6 * p[k].abs().max(1e-3);
        let (lo, hi) = ((p[k] - h).max(lower[k]), (p[k] + h).min(upper[k]));
        if hi <= lo {
            continue;
        }
        for (i, &xi) in x.iter().enumerate() {
            q[k] = hi;
            let fh = f(xi, &q);
            q[k] = lo;
            let fl = f(xi, &q);
            j[(i, k)] = (fh - fl) / (hi - lo);
        }
        q[k] = p[k];
    }
    j
}

fn clamp(p: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, &lo), &hi) in p.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(lo, hi);
    }
}

/// Minimizes `Σ (y - f(x, p))²` within `[lower, upper]`. Parameters are
/// expected to be of order one; callers rescale.
pub fn levenberg_marquardt<F>(f: F, x: &[f64], y: &[f64], p0: &[f64], lower: &[f64], upper: &[f64]) -> Result<Solution>
where
    F: Fn(f64, &[f64]) -> f64,
{
    let m = p0.len();
    if x.len() != y.len() || lower.len() != m || upper.len() != m {
        return Err(Error::Fit("inconsistent problem dimensions".into()));
    }
    if x.len() < m {
        return Err(Error::Fit(format!("{} points cannot constrain {m} parameters", x.len())));
    }
    let mut p = p0.to_vec();
    clamp(&mut p, lower, upper);
    let mut r = residuals(&f, x, y, &p);
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(Error::Fit("model is not finite at the initial guess".into()));
    }
    let mut j = jacobian(&f, x, &p, lower, upper);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let a = j.transpose() * &j;
        let g = j.transpose() * &r;
        let dmax = a.diagonal().max().max(1e-300);
        let mut lhs = a.clone();
        for k in 0..m {
            lhs[(k, k)] += lambda * a[(k, k)].max(1e-12 * dmax);
        }
        let Some(delta) = lhs.clone().cholesky().map(|c| c.solve(&g)).or_else(|| lhs.lu().solve(&g)) else {
            lambda *= 10.0;
            continue;
        };
        let mut trial = p.clone();
        for k in 0..m {
            trial[k] += delta[k];
        }
        clamp(&mut trial, lower, upper);
        let r_trial = residuals(&f, x, y, &trial);
        let cost_trial = r_trial.norm_squared();
        if cost_trial.is_finite() && cost_trial <= cost {
            let step = (0..m).map(|k| (trial[k] - p[k]).abs() / (p[k].abs() + STEP_TOLERANCE)).fold(0.0, f64::max);
            let gain = cost - cost_trial;
            p = trial;
            r = r_trial;
            cost = cost_trial;
            if step < STEP_TOLERANCE || gain <= 1e-15 * cost.max(1e-300) {
                converged = true;
                break;
            }
            j = jacobian(&f, x, &p, lower, upper);
            lambda = (lambda / 3.0).max(1e-15);
        } else {
            lambda *= 4.0;
            if lambda > 1e16 {
                // no descent direction left: at a (possibly bounded) minimum
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { iterations, residual: cost.sqrt() });
    }
    let j = jacobian(&f, x, &p, lower, upper);
    let dof = (x.len() - m).max(1) as f64;
    let s2 = cost / dof;
    let a = j.transpose() * &j;
    let covariance = match a.clone().try_inverse() {
        Some(inv) if inv.iter().all(|v| v.is_finite()) => inv * s2,
        _ => {
            let mut c = DMatrix::zeros(m, m);
            for k in 0..m {
                c[(k, k)] = f64::INFINITY;
            }
            c
        }
    };
    Ok(Solution { params: p, covariance, residual_norm: cost.sqrt(), iterations })
}

/// Ordinary least squares for a linear combination of basis columns.
/// Returns the coefficients and the residual sum of squares.
pub fn linear_lsq(columns: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = y.len();
    let m = columns.len();
    let a = DMatrix::from_fn(n, m, |i, k| columns[k][i]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-12).ok()?;
    let rss = (a * &c - b).norm_squared();
    Some((c.iter().copied().collect(), rss))
}
