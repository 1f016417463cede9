//! Stratified cross-validation, accuracy and ROC AUC, and the grid of
//! data forms × algorithms.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{ica_fit, pca_fit, rfe_select, ufs_select, FeatureMap, IcaParams, RfeParams};
use crate::ingest::{Dataset, Label};
use crate::linalg::Matrix;
use crate::models::{self, Algorithm, ModelSpec};
use crate::transform::{self, FittedTransform, TransformKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub n_folds: usize,
    pub seed: u64,
    pub stratified: bool,
    /// Held-out row indices of each fold, ascending.
    pub folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    /// Rows not in fold `f`, ascending.
    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        let n: usize = self.folds.iter().map(Vec::len).sum();
        let mut held = vec![false; n];
        for &i in &self.folds[f] {
            held[i] = true;
        }
        (0..n).filter(|&i| !held[i]).collect()
    }
}

/// Shuffle each class with one seeded stream (Gamma first, then Hadron)
/// and deal rows to folds round-robin, continuing the deal across classes
/// so fold sizes differ by at most one.
pub fn make_folds(y: &[Label], n_folds: usize, seed: u64) -> Result<FoldPlan> {
    if n_folds < 2 {
        return Err(Error::InvalidParameter("need at least two folds".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); n_folds];
    let mut next = 0;
    for class in [Label::Gamma, Label::Hadron] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if idx.len() < n_folds {
            return Err(Error::InsufficientData(format!(
                "class {} has {} rows, fewer than {n_folds} folds",
                class.as_char(),
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for i in idx {
            folds[next].push(i);
            next = (next + 1) % n_folds;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(FoldPlan {
        n_folds,
        seed,
        stratified: true,
        folds,
    })
}

/// Mann–Whitney AUC with Gamma as the positive class; tied scores count ½.
pub fn roc_auc(scores: &[f64], y: &[Label]) -> Result<f64> {
    if scores.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: scores.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("scores contain NaN".into()));
    }
    let n_pos = y.iter().filter(|l| l.is_gamma()).count();
    let n_neg = y.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1 ..= j+1 share their average.
        let avg = (i + j + 2) as f64 / 2.0;
        rank_sum += avg * order[i..=j].iter().filter(|&&k| y[k].is_gamma()).count() as f64;
        i = j + 1;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

pub fn accuracy(predicted: &[Label], truth: &[Label]) -> f64 {
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DataForm {
    Raw,
    Clean,
    Norm,
    Stand,
    Pca,
    Ica,
    Ufs,
    Rfe,
}

impl DataForm {
    pub const ALL: [DataForm; 8] = [
        DataForm::Raw,
        DataForm::Clean,
        DataForm::Norm,
        DataForm::Stand,
        DataForm::Pca,
        DataForm::Ica,
        DataForm::Ufs,
        DataForm::Rfe,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            DataForm::Raw => "raw",
            DataForm::Clean => "clean",
            DataForm::Norm => "norm",
            DataForm::Stand => "stand",
            DataForm::Pca => "pca",
            DataForm::Ica => "ica",
            DataForm::Ufs => "ufs",
            DataForm::Rfe => "rfe",
        }
    }

    /// Row label used in the summary tables.
    pub fn title(self) -> &'static str {
        match self {
            DataForm::Raw => "Raw",
            DataForm::Clean => "Clean",
            DataForm::Norm => "Norm",
            DataForm::Stand => "Stand",
            DataForm::Pca => "PCA",
            DataForm::Ica => "ICA",
            DataForm::Ufs => "UFS",
            DataForm::Rfe => "RFE",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|f| f.tag().eq_ignore_ascii_case(tag))
    }

    /// Raw is the missing-free file; every other form starts from the
    /// cleaned data.
    pub fn uses_clean_base(self) -> bool {
        self != DataForm::Raw
    }
}

impl fmt::Display for DataForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Settings of the fitted steps that turn the base data into a form.
#[derive(Debug, Clone, PartialEq)]
pub struct FormSettings {
    pub variance_target: f64,
    pub k: usize,
    pub ica: IcaParams,
    pub rfe: RfeParams,
}

impl Default for FormSettings {
    fn default() -> Self {
        FormSettings {
            variance_target: 0.95,
            k: 5,
            ica: IcaParams::default(),
            rfe: RfeParams::default(),
        }
    }
}

/// A form's learned step, ready to apply to any compatible table.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedForm {
    Identity,
    Rescale(FittedTransform),
    Features(FeatureMap),
}

impl FittedForm {
    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        match self {
            FittedForm::Identity => Ok(ds.clone()),
            FittedForm::Rescale(t) => t.apply(ds),
            FittedForm::Features(m) => m.transform(ds),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            FittedForm::Identity => "kind = identity\n".into(),
            FittedForm::Rescale(t) => t.to_text(),
            FittedForm::Features(m) => m.to_text(),
        }
    }
}

pub fn fit_form(form: DataForm, base: &Dataset, s: &FormSettings) -> Result<FittedForm> {
    Ok(match form {
        DataForm::Raw | DataForm::Clean => FittedForm::Identity,
        DataForm::Norm => FittedForm::Rescale(transform::fit(TransformKind::MinMax, base)?),
        DataForm::Stand => FittedForm::Rescale(transform::fit(TransformKind::ZScore, base)?),
        DataForm::Pca => FittedForm::Features(pca_fit(base, s.variance_target)?),
        DataForm::Ica => FittedForm::Features(ica_fit(base, &s.ica)?),
        DataForm::Ufs => FittedForm::Features(ufs_select(base, s.k)?),
        DataForm::Rfe => FittedForm::Features(rfe_select(base, s.k, &s.rfe)?),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalCell {
    pub data_form: DataForm,
    pub algorithm: Algorithm,
    pub accuracies: Vec<f64>,
    pub aucs: Vec<f64>,
    pub mean_accuracy: f64,
    pub mean_auc: f64,
}

impl EvalCell {
    fn new(data_form: DataForm, algorithm: Algorithm, accuracies: Vec<f64>, aucs: Vec<f64>) -> Self {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        EvalCell {
            data_form,
            algorithm,
            mean_accuracy: mean(&accuracies),
            mean_auc: mean(&aucs),
            accuracies,
            aucs,
        }
    }
}

/// One fold's matrices.
struct FoldData {
    train_x: Matrix,
    train_y: Vec<Label>,
    test_x: Matrix,
    test_y: Vec<Label>,
}

fn split(ds: &Dataset, plan: &FoldPlan, f: usize) -> Result<(Dataset, Dataset)> {
    Ok((ds.select_rows(&plan.train_indices(f))?, ds.select_rows(&plan.folds[f])?))
}

fn fold_data(train: &Dataset, test: &Dataset) -> Result<FoldData> {
    Ok(FoldData {
        train_x: train.to_matrix()?,
        train_y: train.labels().to_vec(),
        test_x: test.to_matrix()?,
        test_y: test.labels().to_vec(),
    })
}

fn check_plan(ds: &Dataset, plan: &FoldPlan) -> Result<()> {
    let n: usize = plan.folds.iter().map(Vec::len).sum();
    if n != ds.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: ds.n_rows(),
            found: n,
        });
    }
    Ok(())
}

/// Cross-validate an arbitrary scorer. `score` receives the training rows
/// and labels and the held-out rows, and returns held-out scores and labels.
pub fn cross_validate_with<F>(
    data_form: DataForm,
    algorithm: Algorithm,
    ds: &Dataset,
    plan: &FoldPlan,
    mut score: F,
) -> Result<EvalCell>
where
    F: FnMut(&Matrix, &[Label], &Matrix) -> Result<(Vec<f64>, Vec<Label>)>,
{
    check_plan(ds, plan)?;
    let mut acc = Vec::with_capacity(plan.n_folds);
    let mut auc = Vec::with_capacity(plan.n_folds);
    for f in 0..plan.n_folds {
        let (train, test) = split(ds, plan, f)?;
        let d = fold_data(&train, &test)?;
        let (s, labels) = score(&d.train_x, &d.train_y, &d.test_x)?;
        acc.push(accuracy(&labels, &d.test_y));
        auc.push(roc_auc(&s, &d.test_y)?);
    }
    Ok(EvalCell::new(data_form, algorithm, acc, auc))
}

fn evaluate(spec: &ModelSpec, d: &FoldData, seed: u64) -> Result<(f64, f64)> {
    let m = models::fit(spec, &d.train_x, &d.train_y, seed)?;
    let scores = m.predict_score(&d.test_x)?;
    let t = m.threshold();
    let labels: Vec<Label> = scores
        .iter()
        .map(|&s| if s >= t { Label::Gamma } else { Label::Hadron })
        .collect();
    Ok((accuracy(&labels, &d.test_y), roc_auc(&scores, &d.test_y)?))
}

/// Train `spec` on each fold's complement and score the held-out fold.
pub fn cross_validate(spec: &ModelSpec, data_form: DataForm, ds: &Dataset, plan: &FoldPlan) -> Result<EvalCell> {
    check_plan(ds, plan)?;
    let mut acc = Vec::new();
    let mut auc = Vec::new();
    for f in 0..plan.n_folds {
        let (train, test) = split(ds, plan, f)?;
        let (a, u) = evaluate(spec, &fold_data(&train, &test)?, plan.seed)?;
        acc.push(a);
        auc.push(u);
    }
    Ok(EvalCell::new(data_form, spec.algorithm(), acc, auc))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Accuracy,
    Auc,
}

impl Metric {
    pub fn tag(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Auc => "auc",
        }
    }
}

/// One data form entering the grid.
#[derive(Debug, Clone)]
pub struct GridForm {
    pub form: DataForm,
    /// The already-transformed table, or with `refit` the base table the
    /// form's step is fitted on inside every training fold.
    pub data: Dataset,
    pub refit: Option<FormSettings>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultsGrid {
    pub forms: Vec<DataForm>,
    pub algorithms: Vec<Algorithm>,
    /// Row-major: `cells[f * algorithms.len() + a]`.
    pub cells: Vec<EvalCell>,
    pub n_folds: usize,
    pub seed: u64,
}

/// Evaluate each form × spec pair. Every form gets its own stratified plan
/// from the same seed. Folds are prepared once per form and cells run on
/// the rayon pool; results do not depend on the thread count.
pub fn run_grid(forms: &[GridForm], specs: &[ModelSpec], n_folds: usize, seed: u64) -> Result<ResultsGrid> {
    let prepared: Vec<Vec<FoldData>> = forms
        .par_iter()
        .map(|gf| {
            let plan = make_folds(gf.data.labels(), n_folds, seed)?;
            (0..n_folds)
                .map(|f| {
                    let (train, test) = split(&gf.data, &plan, f)?;
                    match &gf.refit {
                        None => fold_data(&train, &test),
                        Some(s) => {
                            let step = fit_form(gf.form, &train, s)?;
                            fold_data(&step.apply(&train)?, &step.apply(&test)?)
                        }
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize, usize)> = (0..forms.len())
        .flat_map(|fi| (0..specs.len()).flat_map(move |si| (0..n_folds).map(move |k| (fi, si, k))))
        .collect();
    let results: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(fi, si, k)| evaluate(&specs[si], &prepared[fi][k], seed))
        .collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::with_capacity(forms.len() * specs.len());
    for (fi, gf) in forms.iter().enumerate() {
        for (si, spec) in specs.iter().enumerate() {
            let base = (fi * specs.len() + si) * n_folds;
            let slice = &results[base..base + n_folds];
            cells.push(EvalCell::new(
                gf.form,
                spec.algorithm(),
                slice.iter().map(|r| r.0).collect(),
                slice.iter().map(|r| r.1).collect(),
            ));
        }
    }
    Ok(ResultsGrid {
        forms: forms.iter().map(|f| f.form).collect(),
        algorithms: specs.iter().map(ModelSpec::algorithm).collect(),
        cells,
        n_folds,
        seed,
    })
}

impl ResultsGrid {
    pub fn cell(&self, form: DataForm, algorithm: Algorithm) -> Option<&EvalCell> {
        self.cells.iter().find(|c| c.data_form == form && c.algorithm == algorithm)
    }

    fn value(c: &EvalCell, metric: Metric) -> f64 {
        match metric {
            Metric::Accuracy => c.mean_accuracy,
            Metric::Auc => c.mean_auc,
        }
    }

    pub fn row(&self, form: DataForm, metric: Metric) -> Vec<f64> {
        self.cells
            .iter()
            .filter(|c| c.data_form == form)
            .map(|c| Self::value(c, metric))
            .collect()
    }

    pub fn row_mean(&self, form: DataForm, metric: Metric) -> f64 {
        let r = self.row(form, metric);
        r.iter().sum::<f64>() / r.len() as f64
    }

    /// One group of cell means per form, in form order.
    pub fn groups(&self, metric: Metric) -> Vec<Vec<f64>> {
        self.forms.iter().map(|&f| self.row(f, metric)).collect()
    }

    /// The form with the largest row mean; the earlier form wins a tie.
    pub fn best_form(&self, metric: Metric) -> Option<DataForm> {
        let mut best: Option<(DataForm, f64)> = None;
        for &f in &self.forms {
            let m = self.row_mean(f, metric);
            if best.is_none_or(|(_, b)| m > b) {
                best = Some((f, m));
            }
        }
        best.map(|b| b.0)
    }

    /// Long format: one line per (form, algorithm, fold).
    pub fn detail_csv(&self) -> String {
        let mut s = String::from("data_form,algorithm,fold,accuracy,auc\n");
        for c in &self.cells {
            for (k, (a, u)) in c.accuracies.iter().zip(&c.aucs).enumerate() {
                s.push_str(&format!("{},{},{},{},{}\n", c.data_form, c.algorithm, k, a, u));
            }
        }
        s
    }

    /// Rebuild a grid from [`ResultsGrid::detail_csv`] output. Lines starting
    /// with `#` are skipped; forms and algorithms keep first-seen order.
    pub fn from_detail_csv(text: &str, seed: u64) -> Result<ResultsGrid> {
        let bad = |line: usize, m: &str| Error::Parse { line, message: m.to_string() };
        let mut forms: Vec<DataForm> = Vec::new();
        let mut algorithms: Vec<Algorithm> = Vec::new();
        let mut values: Vec<(DataForm, Algorithm, f64, f64)> = Vec::new();
        let mut header = false;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header {
                if line != "data_form,algorithm,fold,accuracy,auc" {
                    return Err(bad(i + 1, "unexpected header"));
                }
                header = true;
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad(i + 1, "expected 5 fields"));
            }
            let form = DataForm::from_tag(f[0]).ok_or_else(|| bad(i + 1, "unknown data form"))?;
            let alg = Algorithm::from_tag(f[1]).ok_or_else(|| bad(i + 1, "unknown algorithm"))?;
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1, "bad number"));
            if !forms.contains(&form) {
                forms.push(form);
            }
            if !algorithms.contains(&alg) {
                algorithms.push(alg);
            }
            values.push((form, alg, num(f[3])?, num(f[4])?));
        }
        let mut cells = Vec::new();
        let mut n_folds = None;
        for &form in &forms {
            for &alg in &algorithms {
                let (acc, auc): (Vec<f64>, Vec<f64>) = values
                    .iter()
                    .filter(|v| v.0 == form && v.1 == alg)
                    .map(|v| (v.2, v.3))
                    .unzip();
                if acc.is_empty() || n_folds.is_some_and(|n| n != acc.len()) {
                    return Err(Error::InsufficientData(format!("grid cell {form}/{alg} is incomplete")));
                }
                n_folds = Some(acc.len());
                cells.push(EvalCell::new(form, alg, acc, auc));
            }
        }
        Ok(ResultsGrid {
            forms,
            algorithms,
            cells,
            n_folds: n_folds.ok_or(Error::EmptyDataset)?,
            seed,
        })
    }

    /// Wide format mirroring the summary tables: cell means, row mean, and
    /// flags for "above the raw row" and "largest row mean".
    pub fn summary_csv(&self, metric: Metric) -> String {
        let mut s = String::from("data");
        for a in &self.algorithms {
            s.push_str(&format!(",{a}"));
        }
        s.push_str(",mean,above_raw,best\n");
        let raw = self.forms.contains(&DataForm::Raw).then(|| self.row_mean(DataForm::Raw, metric));
        let best = self.best_form(metric);
        for &f in &self.forms {
            s.push_str(f.title());
            for v in self.row(f, metric) {
                s.push_str(&format!(",{v}"));
            }
            let m = self.row_mean(f, metric);
            let above = raw.is_some_and(|r| f != DataForm::Raw && m > r);
            s.push_str(&format!(",{m},{above},{}\n", best == Some(f)));
        }
        s
    }

    /// Markdown table with four-decimal cells, `*` on row means above the
    /// raw row and bold on the largest.
    pub fn summary_markdown(&self, metric: Metric) -> String {
        let mut s = String::from("| Data |");
        for a in &self.algorithms {
            s.push_str(&format!(" {a} |"));
        }
        s.push_str(" Mean |\n|---|");
        for _ in &self.algorithms {
            s.push_str("---|");
        }
        s.push_str("---|\n");
        let raw = self.forms.contains(&DataForm::Raw).then(|| self.row_mean(DataForm::Raw, metric));
        let best = self.best_form(metric);
        for &f in &self.forms {
            s.push_str(&format!("| {} |", f.title()));
            for v in self.row(f, metric) {
                s.push_str(&format!(" {v:.4} |"));
            }
            let m = self.row_mean(f, metric);
            let star = if raw.is_some_and(|r| f != DataForm::Raw && m > r) { "*" } else { "" };
            let cell = format!("{star}{m:.4}");
            if best == Some(f) {
                s.push_str(&format!(" **{cell}** |\n"));
            } else {
                s.push_str(&format!(" {cell} |\n"));
            }
        }
        s.push_str("\n\\* row mean above the raw baseline; bold: highest row mean.\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(g: usize, h: usize) -> Vec<Label> {
        let mut v = vec![Label::Gamma; g];
        v.extend(vec![Label::Hadron; h]);
        v
    }

    #[test]
    fn sixty_forty_folds_are_exact() {
        let y = labels(60, 40);
        let plan = make_folds(&y, 10, 1).unwrap();
        for f in &plan.folds {
            let g = f.iter().filter(|&&i| y[i].is_gamma()).count();
            assert_eq!((g, f.len() - g), (6, 4));
        }
        assert_eq!(plan, make_folds(&y, 10, 1).unwrap());
    }

    #[test]
    fn small_class_rejected() {
        assert!(make_folds(&labels(20, 5), 10, 0).is_err());
    }

    #[test]
    fn auc_extremes() {
        let y = labels(2, 2);
        assert_eq!(roc_auc(&[0.9, 0.8, 0.1, 0.2], &y).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.5; 4], &y).unwrap(), 0.5);
        assert_eq!(roc_auc(&[0.1, 0.2, 0.9, 0.8], &y).unwrap(), 0.0);
    }

    #[test]
    fn auc_single_class_is_an_error() {
        assert!(matches!(roc_auc(&[0.1, 0.2], &labels(2, 0)), Err(Error::SingleClass)));
    }

    #[test]
    fn train_indices_complement_the_fold() {
        let plan = make_folds(&labels(30, 20), 5, 4).unwrap();
        let tr = plan.train_indices(2);
        assert_eq!(tr.len() + plan.folds[2].len(), 50);
        assert!(tr.iter().all(|i| !plan.folds[2].contains(i)));
    }
}
