//! Feature extraction (PCA, FastICA) and selection (F-test filter, RFE).
//!
//! Every technique produces a [`FeatureMap`] that can be applied to any
//! dataset with the same attribute layout.

mod ica;
mod pca;
mod select;

use std::fmt;

pub use ica::{ica_fit, IcaParams};
pub use pca::{pca_fit, pca_fit_n};
pub use select::{f_scores, rfe_eliminate, rfe_select, ufs_select, FScoreTable, RfeParams};

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Pca,
    Ica,
    Ufs,
    Rfe,
}

impl FeatureKind {
    pub fn tag(self) -> &'static str {
        match self {
            FeatureKind::Pca => "pca",
            FeatureKind::Ica => "ica",
            FeatureKind::Ufs => "ufs",
            FeatureKind::Rfe => "rfe",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    /// Output `k` is `(x − center) · loadings.row(k)`.
    Linear { loadings: Matrix, center: Vec<f64> },
    /// Output `k` is input attribute `indices[k]`.
    Subset { indices: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub kind: FeatureKind,
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    pub projection: Projection,
    /// PCA: eigenvalues of every component, kept or not, descending.
    pub eigenvalues: Vec<f64>,
    /// PCA: variance fraction of each kept component.
    pub explained_variance_ratios: Vec<f64>,
    /// ICA: iterations run and whether the tolerance was reached.
    pub iterations: usize,
    pub converged: bool,
    /// RFE: attributes in the order they were dropped.
    pub eliminated: Vec<usize>,
    /// UFS/RFE: the per-round detail shown in reports.
    pub notes: Vec<String>,
}

impl FeatureMap {
    fn new(kind: FeatureKind, input_names: Vec<String>, output_names: Vec<String>, projection: Projection) -> Self {
        FeatureMap {
            kind,
            input_names,
            output_names,
            projection,
            eigenvalues: Vec::new(),
            explained_variance_ratios: Vec::new(),
            iterations: 0,
            converged: true,
            eliminated: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn n_outputs(&self) -> usize {
        self.output_names.len()
    }

    pub fn selected(&self) -> Option<&[usize]> {
        match &self.projection {
            Projection::Subset { indices } => Some(indices),
            Projection::Linear { .. } => None,
        }
    }

    pub fn loadings(&self) -> Option<&Matrix> {
        match &self.projection {
            Projection::Linear { loadings, .. } => Some(loadings),
            Projection::Subset { .. } => None,
        }
    }

    /// Apply to the rows of a dense matrix with the input layout.
    pub fn project(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.input_names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.input_names.len(),
                found: x.cols(),
            });
        }
        Ok(match &self.projection {
            Projection::Subset { indices } => x.select_cols(indices),
            Projection::Linear { loadings, center } => {
                let c = loadings.rows();
                let mut out = Matrix::zeros(x.rows(), c);
                let mut centered = vec![0.0; x.cols()];
                for (i, r) in x.iter_rows().enumerate() {
                    for (cj, (v, m)) in centered.iter_mut().zip(r.iter().zip(center)) {
                        *cj = v - m;
                    }
                    let o = out.row_mut(i);
                    for (k, ok) in o.iter_mut().enumerate() {
                        *ok = crate::linalg::dot(loadings.row(k), &centered);
                    }
                }
                out
            }
        })
    }

    /// New dataset with the mapped attributes; labels are carried over.
    pub fn transform(&self, ds: &Dataset) -> Result<Dataset> {
        let out = self.project(&ds.to_matrix()?)?;
        Dataset::from_matrix(self.output_names.clone(), &out, ds.labels().to_vec(), self.kind.tag())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "kind = {}\ninputs = {}\noutputs = {}\n",
            self.kind,
            self.input_names.join(" "),
            self.output_names.join(" ")
        );
        match &self.projection {
            Projection::Subset { indices } => {
                let names: Vec<&str> = indices.iter().map(|&i| self.input_names[i].as_str()).collect();
                s.push_str(&format!("selected = {}\n", names.join(" ")));
            }
            Projection::Linear { loadings, center } => {
                s.push_str(&format!("center = {}\n", join(center)));
                for (k, name) in self.output_names.iter().enumerate() {
                    s.push_str(&format!("{name} = {}\n", join(loadings.row(k))));
                }
            }
        }
        if !self.eigenvalues.is_empty() {
            s.push_str(&format!("eigenvalues = {}\n", join(&self.eigenvalues)));
        }
        if !self.explained_variance_ratios.is_empty() {
            s.push_str(&format!("explained_variance_ratios = {}\n", join(&self.explained_variance_ratios)));
            let total: f64 = self.explained_variance_ratios.iter().sum();
            s.push_str(&format!("cumulative_ratio = {total}\n"));
        }
        if self.kind == FeatureKind::Ica {
            s.push_str(&format!("iterations = {}\nconverged = {}\n", self.iterations, self.converged));
        }
        if !self.eliminated.is_empty() {
            let names: Vec<&str> = self.eliminated.iter().map(|&i| self.input_names[i].as_str()).collect();
            s.push_str(&format!("eliminated = {}\n", names.join(" ")));
        }
        for n in &self.notes {
            s.push_str(&format!("# {n}\n"));
        }
        s
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ")
}

/// Flip each row so that its largest-magnitude entry is positive; the first
/// such entry wins a tie.
pub(crate) fn orient_rows(m: &mut Matrix) {
    for k in 0..m.rows() {
        let row = m.row_mut(k);
        let mut best = 0;
        for (j, v) in row.iter().enumerate() {
            if v.abs() > row[best].abs() {
                best = j;
            }
        }
        if row[best] < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
    }
}
