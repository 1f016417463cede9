//! Dimension-preserving rescalings: min-max normalization and z-scores.

use std::fmt;

use crate::error::{Error, Result};
use crate::ingest::{mean, sample_std, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    MinMax,
    ZScore,
}

impl TransformKind {
    pub fn tag(self) -> &'static str {
        match self {
            TransformKind::MinMax => "minmax",
            TransformKind::ZScore => "zscore",
        }
    }

    /// Provenance tag given to transformed datasets.
    pub fn provenance(self) -> &'static str {
        match self {
            TransformKind::MinMax => "norm",
            TransformKind::ZScore => "stand",
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Per-attribute `(min, max)` or `(mean, std)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedTransform {
    pub kind: TransformKind,
    pub names: Vec<String>,
    pub params: Vec<(f64, f64)>,
    pub fitted_on: String,
}

pub fn fit(kind: TransformKind, ds: &Dataset) -> Result<FittedTransform> {
    if ds.has_missing() {
        return Err(Error::MissingValues);
    }
    let params = (0..ds.n_attributes())
        .map(|j| {
            let col = ds.column(j);
            match kind {
                TransformKind::MinMax => {
                    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    (lo, hi)
                }
                TransformKind::ZScore => (mean(&col), sample_std(&col)),
            }
        })
        .collect();
    Ok(FittedTransform {
        kind,
        names: ds.names().to_vec(),
        params,
        fitted_on: ds.provenance().to_string(),
    })
}

impl FittedTransform {
    fn is_degenerate(&self, j: usize) -> bool {
        let (a, b) = self.params[j];
        match self.kind {
            TransformKind::MinMax => b <= a,
            TransformKind::ZScore => !(b > 0.0),
        }
    }

    /// One message per attribute whose scale is zero; those columns map to 0.
    pub fn warnings(&self) -> Vec<String> {
        (0..self.params.len())
            .filter(|&j| self.is_degenerate(j))
            .map(|j| format!("{}: zero scale, mapped to 0", self.names[j]))
            .collect()
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        if ds.n_attributes() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                found: ds.n_attributes(),
            });
        }
        for w in self.warnings() {
            log::warn!("{w}");
        }
        let d = self.params.len();
        let degenerate: Vec<bool> = (0..d).map(|j| self.is_degenerate(j)).collect();
        let mut values = Vec::with_capacity(ds.n_rows() * d);
        for r in 0..ds.n_rows() {
            for (j, &x) in ds.row(r).iter().enumerate() {
                let (a, b) = self.params[j];
                let y = if x.is_nan() {
                    f64::NAN
                } else if degenerate[j] {
                    0.0
                } else {
                    match self.kind {
                        TransformKind::MinMax => (x - a) / (b - a),
                        TransformKind::ZScore => (x - a) / b,
                    }
                };
                values.push(y);
            }
        }
        Dataset::new(
            ds.names().to_vec(),
            values,
            ds.labels().to_vec(),
            self.kind.provenance(),
        )
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("kind = {}\nfitted_on = {}\n", self.kind, self.fitted_on);
        for (n, (a, b)) in self.names.iter().zip(&self.params) {
            s.push_str(&format!("{n} = {a} {b}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut fitted_on = String::new();
        let mut names = Vec::new();
        let mut params = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Config(format!("malformed line {line:?}")))?;
            match key {
                "kind" => {
                    kind = Some(match value {
                        "minmax" => TransformKind::MinMax,
                        "zscore" => TransformKind::ZScore,
                        other => return Err(Error::Config(format!("unknown kind {other:?}"))),
                    })
                }
                "fitted_on" => fitted_on = value.to_string(),
                name => {
                    let nums: Vec<f64> = value
                        .split_whitespace()
                        .map(str::parse)
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| Error::Config(format!("bad parameters for {name}")))?;
                    if nums.len() != 2 {
                        return Err(Error::Config(format!("{name}: expected two numbers")));
                    }
                    names.push(name.to_string());
                    params.push((nums[0], nums[1]));
                }
            }
        }
        Ok(FittedTransform {
            kind: kind.ok_or_else(|| Error::Config("missing kind".into()))?,
            names,
            params,
            fitted_on,
        })
    }
}
