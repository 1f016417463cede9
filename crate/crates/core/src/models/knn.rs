use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

/// Memorized training set, Euclidean metric.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub k: usize,
    pub train: Matrix,
    pub labels: Vec<bool>,
}

pub(super) fn fit(p: &KnnParams, x: &Matrix, y: &[bool]) -> Result<KnnModel> {
    if p.k == 0 {
        return Err(Error::InvalidParameter("KNN needs k >= 1".into()));
    }
    Ok(KnnModel {
        k: p.k.min(x.rows()),
        train: x.clone(),
        labels: y.to_vec(),
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KnnModel {
    /// Fraction of Gamma among the k nearest rows. Equidistant neighbours
    /// are ordered Gamma first, then by lower training index; an even split
    /// of votes lands on the 0.5 threshold and therefore on Gamma.
    pub(super) fn scores(&self, x: &Matrix) -> Vec<f64> {
        let n = self.train.rows();
        let k = self.k;
        let mut buf: Vec<(f64, bool, usize)> = Vec::with_capacity(n);
        x.iter_rows()
            .map(|q| {
                buf.clear();
                buf.extend(
                    self.train
                        .iter_rows()
                        .enumerate()
                        .map(|(i, r)| (sq_dist(q, r), !self.labels[i], i)),
                );
                let cmp = |a: &(f64, bool, usize), b: &(f64, bool, usize)| -> Ordering {
                    a.0.total_cmp(&b.0)
                        .then(a.1.cmp(&b.1))
                        .then(a.2.cmp(&b.2))
                };
                if k < n {
                    buf.select_nth_unstable_by(k - 1, cmp);
                }
                let gamma = buf[..k].iter().filter(|e| !e.1).count();
                gamma as f64 / k as f64
            })
            .collect()
    }

    pub(super) fn write_text(&self, s: &mut String) {
        s.push_str(&format!(
            "k = {}\ntrain_rows = {}\ntrain_cols = {}\n",
            self.k,
            self.train.rows(),
            self.train.cols()
        ));
        for (r, &g) in self.train.iter_rows().zip(&self.labels) {
            s.push_str(&format!("{} {}\n", super::join_floats(r), if g { 'g' } else { 'h' }));
        }
    }
}
