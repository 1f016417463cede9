use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, dot, Matrix};

use super::{join_floats, sigmoid};

/// Linear discriminant with a pooled within-class covariance. `ridge` is
/// added to the diagonal, scaled by the mean diagonal entry. `priors`
/// overrides the training class frequencies as `[gamma, hadron]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaParams {
    pub ridge: f64,
    pub priors: Option<[f64; 2]>,
}

impl Default for LdaParams {
    fn default() -> Self {
        LdaParams {
            ridge: 1e-9,
            priors: None,
        }
    }
}

/// Class index 0 is Gamma, 1 is Hadron.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub means: [Vec<f64>; 2],
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub priors: [f64; 2],
}

pub(super) fn fit(p: &LdaParams, x: &Matrix, y: &[bool]) -> Result<LdaModel> {
    let d = x.cols();
    let mut sums = [vec![0.0; d], vec![0.0; d]];
    let mut counts = [0usize; 2];
    for (r, &g) in x.iter_rows().zip(y) {
        let c = usize::from(!g);
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(r) {
            *s += v;
        }
    }
    let means = [0, 1].map(|c| sums[c].iter().map(|s| s / counts[c] as f64).collect::<Vec<_>>());

    let mut cov = Matrix::zeros(d, d);
    let mut dev = vec![0.0; d];
    for (r, &g) in x.iter_rows().zip(y) {
        let mu = &means[usize::from(!g)];
        for j in 0..d {
            dev[j] = r[j] - mu[j];
        }
        for a in 0..d {
            for b in a..d {
                cov[(a, b)] += dev[a] * dev[b];
            }
        }
    }
    let n = x.rows();
    let denom = n.saturating_sub(2).max(1) as f64;
    let scale = (0..d).map(|j| cov[(j, j)]).sum::<f64>() / (d as f64 * denom);
    let ridge = p.ridge * if scale > 0.0 { scale } else { 1.0 };
    for a in 0..d {
        for b in a..d {
            let v = cov[(a, b)] / denom;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
        cov[(a, a)] += ridge;
    }

    let priors = match p.priors {
        Some(pr) => {
            if !(pr[0] > 0.0 && pr[1] > 0.0) {
                return Err(Error::InvalidParameter("LDA priors must be positive".into()));
            }
            let t = pr[0] + pr[1];
            [pr[0] / t, pr[1] / t]
        }
        None => [counts[0] as f64 / n as f64, counts[1] as f64 / n as f64],
    };

    let diff: Vec<f64> = means[0].iter().zip(&means[1]).map(|(a, b)| a - b).collect();
    let weights = cholesky_solve(&cov, &diff)
        .map_err(|_| Error::Numeric("LDA pooled covariance is singular".into()))?;
    let mid: Vec<f64> = means[0].iter().zip(&means[1]).map(|(a, b)| a + b).collect();
    let intercept = -0.5 * dot(&weights, &mid) + (priors[0] / priors[1]).ln();
    Ok(LdaModel {
        means,
        weights,
        intercept,
        priors,
    })
}

impl LdaModel {
    /// Posterior probability of Gamma.
    pub(super) fn scores(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows()
            .map(|r| sigmoid(dot(r, &self.weights) + self.intercept))
            .collect()
    }

    pub(super) fn write_text(&self, s: &mut String) {
        s.push_str(&format!("mean_gamma = {}\n", join_floats(&self.means[0])));
        s.push_str(&format!("mean_hadron = {}\n", join_floats(&self.means[1])));
        s.push_str(&format!("weights = {}\n", join_floats(&self.weights)));
        s.push_str(&format!("intercept = {}\n", self.intercept));
        s.push_str(&format!("priors = {}\n", join_floats(&self.priors)));
    }
}
