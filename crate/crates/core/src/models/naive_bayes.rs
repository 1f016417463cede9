use crate::error::Result;
use crate::linalg::Matrix;

use super::{join_floats, sigmoid};

/// Gaussian naive Bayes. Every class variance is inflated by
/// `var_smoothing` times the largest attribute variance.
#[derive(Debug, Clone, PartialEq)]
pub struct NbParams {
    pub var_smoothing: f64,
}

impl Default for NbParams {
    fn default() -> Self {
        NbParams { var_smoothing: 1e-9 }
    }
}

/// Index 0 is Gamma, 1 is Hadron. Variances are population (1/n) estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    pub log_prior: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub vars: [Vec<f64>; 2],
}

fn mean_var<'a>(rows: impl Iterator<Item = &'a [f64]>, d: usize) -> (Vec<f64>, Vec<f64>, usize) {
    let rows: Vec<&[f64]> = rows.collect();
    let n = rows.len() as f64;
    let mut m = vec![0.0; d];
    for r in &rows {
        for j in 0..d {
            m[j] += r[j];
        }
    }
    m.iter_mut().for_each(|v| *v /= n);
    let mut v = vec![0.0; d];
    for r in &rows {
        for j in 0..d {
            v[j] += (r[j] - m[j]).powi(2);
        }
    }
    v.iter_mut().for_each(|x| *x /= n);
    (m, v, rows.len())
}

pub(super) fn fit(p: &NbParams, x: &Matrix, y: &[bool]) -> Result<NaiveBayesModel> {
    let d = x.cols();
    let n = x.rows() as f64;
    let (_, all_var, _) = mean_var(x.iter_rows(), d);
    let eps = p.var_smoothing * all_var.iter().copied().fold(0.0, f64::max);
    let class = |want: bool| {
        let (m, mut v, c) = mean_var(
            x.iter_rows().zip(y).filter(|(_, &g)| g == want).map(|(r, _)| r),
            d,
        );
        v.iter_mut().for_each(|x| *x += eps);
        (m, v, c)
    };
    let (mg, vg, cg) = class(true);
    let (mh, vh, ch) = class(false);
    Ok(NaiveBayesModel {
        log_prior: [(cg as f64 / n).ln(), (ch as f64 / n).ln()],
        means: [mg, mh],
        vars: [vg, vh],
    })
}

impl NaiveBayesModel {
    fn log_likelihood(&self, c: usize, r: &[f64]) -> f64 {
        r.iter()
            .zip(&self.means[c])
            .zip(&self.vars[c])
            .map(|((x, m), v)| {
                if *v > 0.0 {
                    -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (x - m).powi(2) / v)
                } else if x == m {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            })
            .sum()
    }

    /// Posterior probability of Gamma.
    pub(super) fn scores(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows()
            .map(|r| {
                let lg = self.log_prior[0] + self.log_likelihood(0, r);
                let lh = self.log_prior[1] + self.log_likelihood(1, r);
                match (lg.is_finite(), lh.is_finite()) {
                    (true, true) => sigmoid(lg - lh),
                    (true, false) => 1.0,
                    (false, true) => 0.0,
                    (false, false) => 0.5,
                }
            })
            .collect()
    }

    pub(super) fn write_text(&self, s: &mut String) {
        s.push_str(&format!("log_prior = {}\n", join_floats(&self.log_prior)));
        for (c, name) in ["gamma", "hadron"].iter().enumerate() {
            s.push_str(&format!("mean_{name} = {}\n", join_floats(&self.means[c])));
            s.push_str(&format!("var_{name} = {}\n", join_floats(&self.vars[c])));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameters_are_class_moments() {
        let x = Matrix::from_rows(&[vec![0.0], vec![2.0], vec![10.0], vec![14.0]]).unwrap();
        let m = fit(&NbParams { var_smoothing: 0.0 }, &x, &[false, false, true, true]).unwrap();
        assert_eq!(m.means, [vec![12.0], vec![1.0]]);
        assert_eq!(m.vars, [vec![4.0], vec![1.0]]);
        assert!((m.log_prior[0] - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn posterior_is_one_half_between_symmetric_classes() {
        let x = Matrix::from_rows(&[vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]]).unwrap();
        let m = fit(&NbParams::default(), &x, &[false, false, true, true]).unwrap();
        let q = Matrix::from_rows(&[vec![0.0]]).unwrap();
        assert!((m.scores(&q)[0] - 0.5).abs() < 1e-12);
    }
}
