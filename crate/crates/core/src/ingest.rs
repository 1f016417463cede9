//! Reading and describing the MAGIC gamma telescope data file.
//!
//! The file is header-less CSV with eleven fields per line: ten image
//! parameters followed by the class character `g` or `h`. Missing values
//! appear as empty cells or as the sentinel `99999`.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// The ten image parameters, in file column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttributeName {
    FLength,
    FWidth,
    FSize,
    FConc,
    FConc1,
    FAsym,
    FM3Long,
    FM3Trans,
    FAlpha,
    FDist,
}

impl AttributeName {
    pub const ALL: [AttributeName; 10] = [
        AttributeName::FLength,
        AttributeName::FWidth,
        AttributeName::FSize,
        AttributeName::FConc,
        AttributeName::FConc1,
        AttributeName::FAsym,
        AttributeName::FM3Long,
        AttributeName::FM3Trans,
        AttributeName::FAlpha,
        AttributeName::FDist,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttributeName::FLength => "fLength",
            AttributeName::FWidth => "fWidth",
            AttributeName::FSize => "fSize",
            AttributeName::FConc => "fConc",
            AttributeName::FConc1 => "fConc1",
            AttributeName::FAsym => "fAsym",
            AttributeName::FM3Long => "fM3Long",
            AttributeName::FM3Trans => "fM3Trans",
            AttributeName::FAlpha => "fAlpha",
            AttributeName::FDist => "fDist",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|a| a.as_str() == name)
    }
}

impl fmt::Display for AttributeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const N_ATTRIBUTES: usize = 10;

/// Value that marks a missing measurement in contaminated copies of the file.
pub const SENTINEL: f64 = 99999.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Gamma,
    Hadron,
}

impl Label {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'g' => Some(Label::Gamma),
            'h' => Some(Label::Hadron),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Label::Gamma => 'g',
            Label::Hadron => 'h',
        }
    }

    pub fn is_gamma(self) -> bool {
        self == Label::Gamma
    }
}

/// Which field contents count as missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentinelPolicy {
    EmptyCell,
    Value99999,
    Both,
}

impl SentinelPolicy {
    pub fn tag(self) -> &'static str {
        match self {
            SentinelPolicy::EmptyCell => "empty-cell",
            SentinelPolicy::Value99999 => "value-99999",
            SentinelPolicy::Both => "both",
        }
    }

    fn empty_is_missing(self) -> bool {
        matches!(self, SentinelPolicy::EmptyCell | SentinelPolicy::Both)
    }

    fn sentinel_is_missing(self) -> bool {
        matches!(self, SentinelPolicy::Value99999 | SentinelPolicy::Both)
    }
}

impl std::str::FromStr for SentinelPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "empty-cell" => Ok(SentinelPolicy::EmptyCell),
            "value-99999" => Ok(SentinelPolicy::Value99999),
            "both" => Ok(SentinelPolicy::Both),
            other => Err(Error::InvalidParameter(format!(
                "unknown sentinel policy {other:?}"
            ))),
        }
    }
}

/// A labeled numeric table. Missing slots are stored as NaN and exposed as
/// `None`; parsing rejects non-finite input, so NaN never means anything else.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    values: Vec<f64>,
    labels: Vec<Label>,
    provenance: String,
}

impl Dataset {
    pub fn new(
        names: Vec<String>,
        values: Vec<f64>,
        labels: Vec<Label>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if names.is_empty() || values.len() != names.len() * labels.len() {
            return Err(Error::DimensionMismatch {
                expected: names.len() * labels.len(),
                found: values.len(),
            });
        }
        Ok(Dataset {
            names,
            values,
            labels,
            provenance: provenance.into(),
        })
    }

    pub fn from_matrix(
        names: Vec<String>,
        matrix: &Matrix,
        labels: Vec<Label>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if matrix.rows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                found: matrix.rows(),
            });
        }
        if matrix.cols() != names.len() {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                found: matrix.cols(),
            });
        }
        Dataset::new(names, matrix.as_slice().to_vec(), labels, provenance)
    }

    /// Default column names of the telescope file.
    pub fn attribute_names() -> Vec<String> {
        AttributeName::ALL.iter().map(|a| a.as_str().to_string()).collect()
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        let v = self.values[row * self.names.len() + col];
        (!v.is_nan()).then_some(v)
    }

    /// Raw row slice; missing slots are NaN.
    pub fn row(&self, row: usize) -> &[f64] {
        let d = self.names.len();
        &self.values[row * d..(row + 1) * d]
    }

    pub fn row_has_missing(&self, row: usize) -> bool {
        self.row(row).iter().any(|v| v.is_nan())
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_nan()).count()
    }

    /// `(gamma, hadron)` row counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let g = self.labels.iter().filter(|l| l.is_gamma()).count();
        (g, self.labels.len() - g)
    }

    /// Non-missing values of one column, in row order.
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows()).filter_map(|r| self.value(r, col)).collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Result<Dataset> {
        let d = self.names.len();
        let mut values = Vec::with_capacity(idx.len() * d);
        let mut labels = Vec::with_capacity(idx.len());
        for &i in idx {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset::new(self.names.clone(), values, labels, self.provenance.clone())
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<Dataset> {
        let d = self.names.len();
        if let Some(&bad) = cols.iter().find(|&&c| c >= d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad + 1,
            });
        }
        let names = cols.iter().map(|&c| self.names[c].clone()).collect();
        let mut values = Vec::with_capacity(self.n_rows() * cols.len());
        for r in 0..self.n_rows() {
            let row = self.row(r);
            values.extend(cols.iter().map(|&c| row[c]));
        }
        Dataset::new(names, values, self.labels.clone(), self.provenance.clone())
    }

    /// Dense feature matrix; fails if any slot is missing.
    pub fn to_matrix(&self) -> Result<Matrix> {
        if self.has_missing() {
            return Err(Error::MissingValues);
        }
        Matrix::from_vec(self.n_rows(), self.n_attributes(), self.values.clone())
    }

    /// `true` for Gamma rows.
    pub fn gamma_mask(&self) -> Vec<bool> {
        self.labels.iter().map(|l| l.is_gamma()).collect()
    }
}

pub fn load_csv(path: impl AsRef<Path>, policy: SentinelPolicy) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_str(&text, policy)
}

/// Parse file contents. Lines starting with `#` and a leading `fLength...`
/// header are skipped; blank lines are ignored.
pub fn parse_str(text: &str, policy: SentinelPolicy) -> Result<Dataset> {
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if labels.is_empty() && values.is_empty() && line.starts_with("fLength") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != N_ATTRIBUTES + 1 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 11 fields, found {}", fields.len()),
            });
        }
        for (col, field) in fields[..N_ATTRIBUTES].iter().enumerate() {
            values.push(parse_field(field.trim(), policy, line_no, col)?);
        }
        let label_field = fields[N_ATTRIBUTES].trim();
        let mut chars = label_field.chars();
        let label = match (chars.next(), chars.next()) {
            (Some(c), None) => Label::from_char(c),
            _ => None,
        }
        .ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("unknown label {label_field:?}"),
        })?;
        labels.push(label);
    }
    Dataset::new(Dataset::attribute_names(), values, labels, "raw")
}

fn parse_field(field: &str, policy: SentinelPolicy, line: usize, col: usize) -> Result<f64> {
    if field.is_empty() {
        if policy.empty_is_missing() {
            return Ok(f64::NAN);
        }
        return Err(Error::Parse {
            line,
            message: format!("empty field in column {}", col + 1),
        });
    }
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("unparsable number {field:?} in column {}", col + 1),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite number {field:?} in column {}", col + 1),
        });
    }
    if policy.sentinel_is_missing() && v == SENTINEL {
        return Ok(f64::NAN);
    }
    Ok(v)
}

/// Write rows as `v1,...,vd,label`. Missing values become empty fields.
/// Floats use the shortest representation that round-trips.
pub fn write_csv<W: Write>(ds: &Dataset, mut out: W, comment: Option<&str>) -> std::io::Result<()> {
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut buf = String::new();
    for r in 0..ds.n_rows() {
        buf.clear();
        for (j, v) in ds.row(r).iter().enumerate() {
            if j > 0 {
                buf.push(',');
            }
            if !v.is_nan() {
                buf.push_str(&v.to_string());
            }
        }
        buf.push(',');
        buf.push(ds.labels()[r].as_char());
        writeln!(out, "{buf}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeSummary {
    pub name: String,
    pub count: usize,
    pub missing_count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    skewness: Option<f64>,
}

impl AttributeSummary {
    pub fn skewness(&self) -> Result<f64> {
        self.skewness.ok_or_else(|| {
            Error::InsufficientData(format!(
                "{}: skewness needs at least 3 values, have {}",
                self.name, self.count
            ))
        })
    }
}

/// Per-attribute descriptive statistics over the non-missing values.
pub fn summarize(ds: &Dataset) -> Vec<AttributeSummary> {
    (0..ds.n_attributes())
        .map(|j| {
            let mut col = ds.column(j);
            let missing_count = ds.n_rows() - col.len();
            col.sort_by(f64::total_cmp);
            let (q1, median, q3, min, max) = if col.is_empty() {
                (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN)
            } else {
                (
                    quantile_sorted(&col, 0.25),
                    quantile_sorted(&col, 0.5),
                    quantile_sorted(&col, 0.75),
                    col[0],
                    col[col.len() - 1],
                )
            };
            AttributeSummary {
                name: ds.names()[j].clone(),
                count: col.len(),
                missing_count,
                mean: mean(&col),
                std: sample_std(&col),
                min,
                max,
                q1,
                median,
                q3,
                skewness: adjusted_skewness(&col),
            }
        })
        .collect()
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation, N - 1 denominator; 0 for a single value.
pub fn sample_std(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return if n == 1 { 0.0 } else { f64::NAN };
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Linear interpolation between closest ranks over sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Bias-corrected Fisher-Pearson skewness `g1 * sqrt(n(n-1)) / (n-2)`.
/// `None` with fewer than three values; zero for a constant sample.
pub fn adjusted_skewness(xs: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 3 {
        return None;
    }
    let m = mean(xs);
    let (m2, m3) = xs.iter().fold((0.0, 0.0), |(a, b), &x| {
        let d = x - m;
        (a + d * d, b + d * d * d)
    });
    let nf = n as f64;
    let (m2, m3) = (m2 / nf, m3 / nf);
    if m2 == 0.0 {
        return Some(0.0);
    }
    let g1 = m3 / m2.powf(1.5);
    Some(g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line_parses() {
        let ds = parse_str("1,2,3,4,5,6,7,8,9,10,g\n", SentinelPolicy::Both).unwrap();
        assert_eq!(ds.n_rows(), 1);
        assert_eq!(ds.labels()[0], Label::Gamma);
        assert!(!ds.has_missing());
        assert_eq!(ds.value(0, 9), Some(10.0));
    }

    #[test]
    fn sentinel_in_ninth_field_is_missing() {
        let ds = parse_str("1,2,3,4,5,6,7,8,99999,10,h", SentinelPolicy::Both).unwrap();
        assert_eq!(ds.value(0, 8), None);
        assert_eq!(ds.missing_count(), 1);
    }

    #[test]
    fn near_sentinel_is_data() {
        let ds = parse_str("1,2,3,4,5,6,7,8,99999.0001,10,h", SentinelPolicy::Both).unwrap();
        assert_eq!(ds.value(0, 8), Some(99999.0001));
    }

    #[test]
    fn policy_controls_what_counts_as_missing() {
        let line = "1,,3,4,5,6,7,8,99999,10,h";
        let both = parse_str(line, SentinelPolicy::Both).unwrap();
        assert_eq!(both.missing_count(), 2);
        let empty_only = parse_str(line, SentinelPolicy::EmptyCell).unwrap();
        assert_eq!(empty_only.missing_count(), 1);
        assert_eq!(empty_only.value(0, 8), Some(99999.0));
        let err = parse_str(line, SentinelPolicy::Value99999).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn parse_errors_name_the_line() {
        let text = "1,2,3,4,5,6,7,8,9,10,g\n1,2,3,4,5,6,7,8,9,g\n";
        assert!(matches!(
            parse_str(text, SentinelPolicy::Both),
            Err(Error::Parse { line: 2, .. })
        ));
        let text = "1,2,3,4,5,6,7,8,9,10,x\n";
        assert!(matches!(
            parse_str(text, SentinelPolicy::Both),
            Err(Error::Parse { line: 1, .. })
        ));
        let text = "1,2,3,4,5,6,7,8,abc,10,g\n";
        assert!(matches!(
            parse_str(text, SentinelPolicy::Both),
            Err(Error::Parse { line: 1, .. })
        ));
        let text = "1,2,3,4,5,6,7,8,NaN,10,g\n";
        assert!(matches!(
            parse_str(text, SentinelPolicy::Both),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn header_and_comments_are_skipped() {
        let text = "# produced by a test\nfLength,fWidth,fSize,fConc,fConc1,fAsym,fM3Long,fM3Trans,fAlpha,fDist,class\n1,2,3,4,5,6,7,8,9,10,h\n";
        let ds = parse_str(text, SentinelPolicy::Both).unwrap();
        assert_eq!(ds.n_rows(), 1);
        assert_eq!(ds.labels()[0], Label::Hadron);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            parse_str("", SentinelPolicy::Both),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn symmetric_sample_has_zero_skew() {
        let ds = parse_str(
            "1,1,1,1,1,1,1,1,1,1,g\n2,2,2,2,2,2,2,2,2,2,h\n3,3,3,3,3,3,3,3,3,3,g\n",
            SentinelPolicy::Both,
        )
        .unwrap();
        let s = summarize(&ds);
        assert_eq!(s[0].mean, 2.0);
        assert_eq!(s[0].skewness().unwrap(), 0.0);
        assert_eq!(s[0].median, 2.0);
        assert_eq!(s[0].q1, 1.5);
        assert_eq!(s[0].q3, 2.5);
    }

    #[test]
    fn too_few_values_for_skewness() {
        let ds = parse_str("1,2,3,4,5,6,7,8,9,10,g\n,2,3,4,5,6,7,8,9,10,g\n", SentinelPolicy::Both)
            .unwrap();
        let s = summarize(&ds);
        assert!(matches!(s[0].skewness(), Err(Error::InsufficientData(_))));
        assert_eq!(s[0].missing_count, 1);
        assert_eq!(s[1].count, 2);
    }

    #[test]
    fn type7_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.25), 1.75);
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
        assert_eq!(quantile_sorted(&v, 0.75), 3.25);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
    }

    #[test]
    fn writer_emits_parseable_rows() {
        let ds = parse_str("1.5,,3,4,5,6,7,8,9,10,g\n", SentinelPolicy::Both).unwrap();
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf, Some("note")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# note\n1.5,,3,4,5,6,7,8,9,10,g\n");
        assert_eq!(parse_str(&text, SentinelPolicy::Both).unwrap().missing_count(), 1);
    }
}
