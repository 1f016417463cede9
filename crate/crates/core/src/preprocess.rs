//! Missing-row removal and single-pass outlier filtering.

use std::fmt;

use crate::error::{Error, Result};
use crate::ingest::{mean, quantile_sorted, sample_std, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutlierKind {
    /// `x > Q3 + k·IQR` or `x < Q1 − k·IQR`.
    IqrFence,
    /// `|x − mean| > m·s`.
    ThreeSigma,
    /// `x − mean > m·s`, the one-sided literal reading of the sigma rule.
    UpperSigma,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutlierRule {
    pub kind: OutlierKind,
    pub multiplier: f64,
}

impl OutlierRule {
    pub fn new(kind: OutlierKind, multiplier: f64) -> Result<Self> {
        if !(multiplier > 0.0) || !multiplier.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "outlier multiplier must be positive, got {multiplier}"
            )));
        }
        Ok(OutlierRule { kind, multiplier })
    }

    pub fn iqr_fence() -> Self {
        OutlierRule {
            kind: OutlierKind::IqrFence,
            multiplier: 1.5,
        }
    }

    pub fn three_sigma() -> Self {
        OutlierRule {
            kind: OutlierKind::ThreeSigma,
            multiplier: 3.0,
        }
    }

    pub fn upper_sigma() -> Self {
        OutlierRule {
            kind: OutlierKind::UpperSigma,
            multiplier: 3.0,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self.kind {
            OutlierKind::IqrFence => "iqr-fence",
            OutlierKind::ThreeSigma => "three-sigma",
            OutlierKind::UpperSigma => "upper-sigma",
        }
    }
}

impl fmt::Display for OutlierRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.tag(), self.multiplier)
    }
}

impl std::str::FromStr for OutlierRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iqr-fence" | "iqr" => Ok(OutlierRule::iqr_fence()),
            "three-sigma" | "3sigma" => Ok(OutlierRule::three_sigma()),
            "upper-sigma" => Ok(OutlierRule::upper_sigma()),
            other => Err(Error::InvalidParameter(format!(
                "unknown outlier rule {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CleanReport {
    pub rows_in: usize,
    pub missing_rows_removed: usize,
    pub outlier_rows_removed: usize,
    pub per_attribute_flag_counts: Vec<usize>,
    pub attribute_names: Vec<String>,
    pub rule: OutlierRule,
}

impl CleanReport {
    pub fn rows_out(&self) -> usize {
        self.rows_in - self.missing_rows_removed - self.outlier_rows_removed
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from(
            "rule,multiplier,rows_in,missing_rows_removed,outlier_rows_removed,rows_out",
        );
        for n in &self.attribute_names {
            h.push(',');
            h.push_str(n);
        }
        h
    }

    pub fn csv_row(&self) -> String {
        let mut r = format!(
            "{},{},{},{},{},{}",
            self.rule.tag(),
            self.rule.multiplier,
            self.rows_in,
            self.missing_rows_removed,
            self.outlier_rows_removed,
            self.rows_out()
        );
        for c in &self.per_attribute_flag_counts {
            r.push_str(&format!(",{c}"));
        }
        r
    }
}

/// Drop every row with at least one missing slot.
pub fn remove_missing(ds: &Dataset) -> Result<(Dataset, usize)> {
    let keep: Vec<usize> = (0..ds.n_rows()).filter(|&r| !ds.row_has_missing(r)).collect();
    if keep.is_empty() {
        return Err(Error::AllRowsMissing);
    }
    let dropped = ds.n_rows() - keep.len();
    Ok((ds.select_rows(&keep)?, dropped))
}

/// Rows where any attribute violates `rule`, ascending. Statistics come from
/// one pass over the full input.
pub fn flag_outliers(ds: &Dataset, rule: OutlierRule) -> Result<Vec<usize>> {
    Ok(flag_with_counts(ds, rule)?.0)
}

fn flag_with_counts(ds: &Dataset, rule: OutlierRule) -> Result<(Vec<usize>, Vec<usize>)> {
    if ds.has_missing() {
        return Err(Error::MissingValues);
    }
    let d = ds.n_attributes();
    let bounds: Vec<(f64, f64)> = (0..d)
        .map(|j| {
            let mut col = ds.column(j);
            let k = rule.multiplier;
            match rule.kind {
                OutlierKind::IqrFence => {
                    col.sort_by(f64::total_cmp);
                    let q1 = quantile_sorted(&col, 0.25);
                    let q3 = quantile_sorted(&col, 0.75);
                    let iqr = q3 - q1;
                    (q1 - k * iqr, q3 + k * iqr)
                }
                OutlierKind::ThreeSigma => {
                    let (m, s) = (mean(&col), sample_std(&col));
                    (m - k * s, m + k * s)
                }
                OutlierKind::UpperSigma => {
                    let (m, s) = (mean(&col), sample_std(&col));
                    (f64::NEG_INFINITY, m + k * s)
                }
            }
        })
        .collect();

    let mut flagged = Vec::new();
    let mut per_attr = vec![0usize; d];
    for r in 0..ds.n_rows() {
        let mut hit = false;
        for (j, &x) in ds.row(r).iter().enumerate() {
            let (lo, hi) = bounds[j];
            if x < lo || x > hi {
                per_attr[j] += 1;
                hit = true;
            }
        }
        if hit {
            flagged.push(r);
        }
    }
    Ok((flagged, per_attr))
}

/// `remove_missing`, then drop the rows flagged by `rule`.
pub fn clean(ds: &Dataset, rule: OutlierRule) -> Result<(Dataset, CleanReport)> {
    let (complete, missing_rows_removed) = remove_missing(ds)?;
    let (flagged, per_attribute_flag_counts) = flag_with_counts(&complete, rule)?;
    let mut drop = vec![false; complete.n_rows()];
    for &r in &flagged {
        drop[r] = true;
    }
    let keep: Vec<usize> = (0..complete.n_rows()).filter(|&r| !drop[r]).collect();
    if keep.is_empty() {
        return Err(Error::InsufficientData(
            "outlier filtering removed every row".into(),
        ));
    }
    let cleaned = complete.select_rows(&keep)?.with_provenance("clean");
    let report = CleanReport {
        rows_in: ds.n_rows(),
        missing_rows_removed,
        outlier_rows_removed: flagged.len(),
        per_attribute_flag_counts,
        attribute_names: ds.names().to_vec(),
        rule,
    };
    Ok((cleaned, report))
}
