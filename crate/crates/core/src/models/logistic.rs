use crate::error::Result;
use crate::linalg::{cholesky_solve, dot, Matrix};

use super::{join_floats, sigmoid};

/// L2-penalized logistic regression. The penalty `l2_strength / 2 · ‖w‖²`
/// excludes the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticParams {
    pub l2_strength: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            l2_strength: 1.0,
            tol: 1e-6,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Penalized negative log-likelihood at `theta = [w..., b]`.
pub fn logistic_objective(x: &Matrix, y: &[bool], theta: &[f64], l2: f64) -> f64 {
    let d = x.cols();
    let (w, b) = (&theta[..d], theta[d]);
    let nll: f64 = x
        .iter_rows()
        .zip(y)
        .map(|(r, &yi)| {
            let z = dot(r, w) + b;
            softplus(z) - if yi { z } else { 0.0 }
        })
        .sum();
    nll + 0.5 * l2 * dot(w, w)
}

/// Gradient of [`logistic_objective`].
pub fn logistic_gradient(x: &Matrix, y: &[bool], theta: &[f64], l2: f64) -> Vec<f64> {
    let d = x.cols();
    let (w, b) = (&theta[..d], theta[d]);
    let mut g = vec![0.0; d + 1];
    for (r, &yi) in x.iter_rows().zip(y) {
        let resid = sigmoid(dot(r, w) + b) - if yi { 1.0 } else { 0.0 };
        for (gj, &xj) in g.iter_mut().zip(r) {
            *gj += resid * xj;
        }
        g[d] += resid;
    }
    for j in 0..d {
        g[j] += l2 * w[j];
    }
    g
}

fn hessian(x: &Matrix, theta: &[f64], l2: f64) -> Matrix {
    let d = x.cols();
    let (w, b) = (&theta[..d], theta[d]);
    let mut h = Matrix::zeros(d + 1, d + 1);
    let mut xa = vec![0.0; d + 1];
    for r in x.iter_rows() {
        let p = sigmoid(dot(r, w) + b);
        let s = p * (1.0 - p);
        xa[..d].copy_from_slice(r);
        xa[d] = 1.0;
        for a in 0..=d {
            let sa = s * xa[a];
            for c in a..=d {
                h[(a, c)] += sa * xa[c];
            }
        }
    }
    for a in 0..=d {
        for c in 0..a {
            h[(a, c)] = h[(c, a)];
        }
    }
    for j in 0..d {
        h[(j, j)] += l2;
    }
    h
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton iterations until the gradient's max-norm drops below `tol`
/// or the Newton decrement reaches the rounding level of the objective.
pub(super) fn fit(p: &LogisticParams, x: &Matrix, y: &[bool]) -> Result<LogisticModel> {
    let d = x.cols();
    let mut theta = vec![0.0; d + 1];
    let mut obj = logistic_objective(x, y, &theta, p.l2_strength);
    let mut grad = logistic_gradient(x, y, &theta, p.l2_strength);
    let mut iterations = 0;
    let mut converged = inf_norm(&grad) <= p.tol;

    while !converged && iterations < p.max_iter {
        iterations += 1;
        let h = hessian(x, &theta, p.l2_strength);
        let step = match cholesky_solve(&h, &grad) {
            Ok(s) => s,
            // Flat curvature: fall back to a scaled gradient step.
            Err(_) => grad.iter().map(|g| g * 1e-3).collect(),
        };
        let slope: f64 = dot(&grad, &step);
        // Newton decrement at rounding level: no representable progress left,
        // even when large-magnitude inputs keep the raw gradient above `tol`.
        if slope.abs() <= 1e-13 * obj.abs().max(1.0) {
            converged = true;
            break;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(a, s)| a - t * s).collect();
            let cand_obj = logistic_objective(x, y, &cand, p.l2_strength);
            if cand_obj <= obj - 1e-4 * t * slope {
                theta = cand;
                obj = cand_obj;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        grad = logistic_gradient(x, y, &theta, p.l2_strength);
        converged = inf_norm(&grad) <= p.tol;
        if !accepted {
            break;
        }
    }
    if !converged {
        log::warn!(
            "logistic regression stopped after {iterations} iterations, |grad| = {:e}",
            inf_norm(&grad)
        );
    }
    Ok(LogisticModel {
        weights: theta[..d].to_vec(),
        intercept: theta[d],
        iterations,
        converged,
        gradient_norm: inf_norm(&grad),
    })
}

impl LogisticModel {
    pub(super) fn scores(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows()
            .map(|r| sigmoid(dot(r, &self.weights) + self.intercept))
            .collect()
    }

    pub(super) fn write_text(&self, s: &mut String) {
        s.push_str(&format!("weights = {}\n", join_floats(&self.weights)));
        s.push_str(&format!("intercept = {}\n", self.intercept));
        s.push_str(&format!("iterations = {}\nconverged = {}\n", self.iterations, self.converged));
    }
}
