use crate::error::{Error, Result};
use crate::ingest::{mean, sample_std, Dataset};
use crate::linalg::Matrix;
use crate::models::{self, LogisticParams, ModelSpec, TrainedModel};

use super::{FeatureKind, FeatureMap, Projection};

/// Two-group one-way ANOVA F statistic per attribute. Rank 1 is the largest
/// score; equal scores rank by attribute order.
#[derive(Debug, Clone, PartialEq)]
pub struct FScoreTable {
    pub names: Vec<String>,
    pub scores: Vec<f64>,
    pub ranks: Vec<usize>,
}

impl FScoreTable {
    /// Attribute indices from best to worst.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.scores.len()).collect();
        idx.sort_by_key(|&j| self.ranks[j]);
        idx
    }
}

fn two_group_f(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let grand = (na * ma + nb * mb) / (na + nb);
    let ssb = na * (ma - grand).powi(2) + nb * (mb - grand).powi(2);
    let ssw: f64 = a.iter().map(|v| (v - ma).powi(2)).sum::<f64>()
        + b.iter().map(|v| (v - mb).powi(2)).sum::<f64>();
    let df_w = na + nb - 2.0;
    if ssb == 0.0 {
        0.0
    } else if ssw == 0.0 {
        f64::INFINITY
    } else {
        ssb / (ssw / df_w)
    }
}

pub fn f_scores(ds: &Dataset) -> Result<FScoreTable> {
    if ds.has_missing() {
        return Err(Error::MissingValues);
    }
    let (g, h) = ds.class_counts();
    if g < 2 || h < 2 {
        return Err(Error::InsufficientData("F scores need two rows per class".into()));
    }
    let mask = ds.gamma_mask();
    let scores: Vec<f64> = (0..ds.n_attributes())
        .map(|j| {
            let col = ds.column(j);
            let (a, b): (Vec<(f64, bool)>, Vec<(f64, bool)>) =
                col.into_iter().zip(mask.iter().copied()).partition(|(_, m)| *m);
            let a: Vec<f64> = a.into_iter().map(|p| p.0).collect();
            let b: Vec<f64> = b.into_iter().map(|p| p.0).collect();
            two_group_f(&a, &b)
        })
        .collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
    let mut ranks = vec![0; scores.len()];
    for (r, &j) in order.iter().enumerate() {
        ranks[j] = r + 1;
    }
    Ok(FScoreTable {
        names: ds.names().to_vec(),
        scores,
        ranks,
    })
}

fn check_k(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::InvalidParameter(format!("cannot select {k} of {d} attributes")));
    }
    Ok(())
}

/// The `k` attributes with the largest F scores, best first.
pub fn ufs_select(ds: &Dataset, k: usize) -> Result<FeatureMap> {
    check_k(k, ds.n_attributes())?;
    let table = f_scores(ds)?;
    let indices: Vec<usize> = table.order().into_iter().take(k).collect();
    let mut map = subset_map(FeatureKind::Ufs, ds, indices);
    map.notes = table
        .names
        .iter()
        .zip(&table.scores)
        .zip(&table.ranks)
        .map(|((n, s), r)| format!("F {n} = {s:e} rank {r}"))
        .collect();
    Ok(map)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfeParams {
    /// Refit on z-scored attributes rather than the values as given.
    pub standardize: bool,
    pub estimator: LogisticParams,
}

impl Default for RfeParams {
    fn default() -> Self {
        RfeParams {
            standardize: true,
            estimator: LogisticParams::default(),
        }
    }
}

/// Recursive elimination starting from `start`: fit the logistic estimator
/// on the surviving attributes and drop the one with the smallest absolute
/// coefficient, until `k` remain. Returns `(survivors, eliminated)`, the
/// survivors in their original order.
pub fn rfe_eliminate(
    ds: &Dataset,
    start: &[usize],
    k: usize,
    p: &RfeParams,
) -> Result<(Vec<usize>, Vec<usize>)> {
    check_k(k, start.len())?;
    let x = ds.to_matrix()?;
    let x = if p.standardize { standardize(&x) } else { x };
    let mut alive: Vec<usize> = start.to_vec();
    alive.sort_unstable();
    let mut eliminated = Vec::new();
    let spec = ModelSpec::Lr(p.estimator.clone());
    while alive.len() > k {
        let sub = x.select_cols(&alive);
        let TrainedModel::Lr(m) = models::fit(&spec, &sub, ds.labels(), 0)? else {
            unreachable!("logistic spec yields a logistic model")
        };
        let mut worst = 0;
        for (pos, w) in m.weights.iter().enumerate() {
            if w.abs() < m.weights[worst].abs() {
                worst = pos;
            }
        }
        eliminated.push(alive.remove(worst));
    }
    Ok((alive, eliminated))
}

pub fn rfe_select(ds: &Dataset, k: usize, p: &RfeParams) -> Result<FeatureMap> {
    let all: Vec<usize> = (0..ds.n_attributes()).collect();
    let (alive, eliminated) = rfe_eliminate(ds, &all, k, p)?;
    let mut map = subset_map(FeatureKind::Rfe, ds, alive);
    map.eliminated = eliminated;
    map.notes.push(format!(
        "estimator = L2 logistic regression, l2_strength {}, standardize {}, step 1",
        p.estimator.l2_strength, p.standardize
    ));
    Ok(map)
}

fn standardize(x: &Matrix) -> Matrix {
    let mut out = x.clone();
    for j in 0..x.cols() {
        let col = x.column(j);
        let (m, s) = (mean(&col), sample_std(&col));
        for i in 0..x.rows() {
            out.row_mut(i)[j] = if s > 0.0 { (col[i] - m) / s } else { 0.0 };
        }
    }
    out
}

fn subset_map(kind: FeatureKind, ds: &Dataset, indices: Vec<usize>) -> FeatureMap {
    let names = indices.iter().map(|&i| ds.names()[i].clone()).collect();
    FeatureMap::new(kind, ds.names().to_vec(), names, Projection::Subset { indices })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_anova() {
        assert!((two_group_f(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]) - 13.5).abs() < 1e-12);
        assert_eq!(two_group_f(&[2.0, 2.0], &[2.0, 2.0]), 0.0);
    }
}
