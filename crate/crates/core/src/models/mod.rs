//! Six binary classifiers behind one fit / score / label interface.
//!
//! Scores are oriented so that larger means "more Gamma". Each model has a
//! fixed decision threshold: 0.5 for probability outputs (LR, LDA, KNN,
//! CART, NB) and 0 for the SVM margin. A score exactly at the threshold is
//! labeled Gamma.

mod cart;
mod knn;
mod lda;
mod logistic;
mod naive_bayes;
mod svm;

use std::fmt;

pub use cart::{CartModel, CartParams, Node, SplitSummary};
pub use knn::{KnnModel, KnnParams};
pub use lda::{LdaModel, LdaParams};
pub use logistic::{
    logistic_gradient, logistic_objective, LogisticModel, LogisticParams,
};
pub use naive_bayes::{NaiveBayesModel, NbParams};
pub use svm::{solve_dual, DualProblem, DualSolution, GammaRule, SvmModel, SvmParams};

use crate::error::{Error, Result};
use crate::ingest::Label;
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Lr,
    Lda,
    Knn,
    Cart,
    Nb,
    Svm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Lr,
        Algorithm::Lda,
        Algorithm::Knn,
        Algorithm::Cart,
        Algorithm::Nb,
        Algorithm::Svm,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Lr => "LR",
            Algorithm::Lda => "LDA",
            Algorithm::Knn => "KNN",
            Algorithm::Cart => "CART",
            Algorithm::Nb => "NB",
            Algorithm::Svm => "SVM",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|a| a.tag().eq_ignore_ascii_case(tag))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// An algorithm together with its hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Lr(LogisticParams),
    Lda(LdaParams),
    Knn(KnnParams),
    Cart(CartParams),
    Nb(NbParams),
    Svm(SvmParams),
}

impl ModelSpec {
    pub fn default_for(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::Lr => ModelSpec::Lr(LogisticParams::default()),
            Algorithm::Lda => ModelSpec::Lda(LdaParams::default()),
            Algorithm::Knn => ModelSpec::Knn(KnnParams::default()),
            Algorithm::Cart => ModelSpec::Cart(CartParams::default()),
            Algorithm::Nb => ModelSpec::Nb(NbParams::default()),
            Algorithm::Svm => ModelSpec::Svm(SvmParams::default()),
        }
    }

    /// The six default specs in table column order.
    pub fn defaults() -> Vec<ModelSpec> {
        Algorithm::ALL.iter().map(|&a| ModelSpec::default_for(a)).collect()
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            ModelSpec::Lr(_) => Algorithm::Lr,
            ModelSpec::Lda(_) => Algorithm::Lda,
            ModelSpec::Knn(_) => Algorithm::Knn,
            ModelSpec::Cart(_) => Algorithm::Cart,
            ModelSpec::Nb(_) => Algorithm::Nb,
            ModelSpec::Svm(_) => Algorithm::Svm,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Lr(LogisticModel),
    Lda(LdaModel),
    Knn(KnnModel),
    Cart(CartModel),
    Nb(NaiveBayesModel),
    Svm(SvmModel),
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Train `spec` on rows of `x` with labels `y`. The seed is accepted for
/// interface uniformity; none of the current algorithms draws random numbers.
pub fn fit(spec: &ModelSpec, x: &Matrix, y: &[Label], _seed: u64) -> Result<TrainedModel> {
    validate_training(x, y)?;
    let gamma: Vec<bool> = y.iter().map(|l| l.is_gamma()).collect();
    Ok(match spec {
        ModelSpec::Lr(p) => TrainedModel::Lr(logistic::fit(p, x, &gamma)?),
        ModelSpec::Lda(p) => TrainedModel::Lda(lda::fit(p, x, &gamma)?),
        ModelSpec::Knn(p) => TrainedModel::Knn(knn::fit(p, x, &gamma)?),
        ModelSpec::Cart(p) => TrainedModel::Cart(cart::fit(p, x, &gamma)?),
        ModelSpec::Nb(p) => TrainedModel::Nb(naive_bayes::fit(p, x, &gamma)?),
        ModelSpec::Svm(p) => TrainedModel::Svm(svm::fit(p, x, &gamma)?),
    })
}

fn validate_training(x: &Matrix, y: &[Label]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: x.rows(),
        });
    }
    if x.rows() < 2 || x.cols() == 0 {
        return Err(Error::InsufficientData(
            "training needs at least two rows and one attribute".into(),
        ));
    }
    if !x.is_finite() {
        return Err(Error::InvalidParameter("features must be finite".into()));
    }
    let g = y.iter().filter(|l| l.is_gamma()).count();
    if g == 0 || g == y.len() {
        return Err(Error::SingleClass);
    }
    Ok(())
}

impl TrainedModel {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            TrainedModel::Lr(_) => Algorithm::Lr,
            TrainedModel::Lda(_) => Algorithm::Lda,
            TrainedModel::Knn(_) => Algorithm::Knn,
            TrainedModel::Cart(_) => Algorithm::Cart,
            TrainedModel::Nb(_) => Algorithm::Nb,
            TrainedModel::Svm(_) => Algorithm::Svm,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::Lr(m) => m.weights.len(),
            TrainedModel::Lda(m) => m.weights.len(),
            TrainedModel::Knn(m) => m.train.cols(),
            TrainedModel::Cart(m) => m.n_features,
            TrainedModel::Nb(m) => m.means[0].len(),
            TrainedModel::Svm(m) => m.support.cols(),
        }
    }

    pub fn threshold(&self) -> f64 {
        match self {
            TrainedModel::Svm(_) => 0.0,
            _ => 0.5,
        }
    }

    /// Real-valued scores, larger meaning more Gamma.
    pub fn predict_score(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: x.cols(),
            });
        }
        Ok(match self {
            TrainedModel::Lr(m) => m.scores(x),
            TrainedModel::Lda(m) => m.scores(x),
            TrainedModel::Knn(m) => m.scores(x),
            TrainedModel::Cart(m) => m.scores(x),
            TrainedModel::Nb(m) => m.scores(x),
            TrainedModel::Svm(m) => m.scores(x),
        })
    }

    pub fn predict_label(&self, x: &Matrix) -> Result<Vec<Label>> {
        let t = self.threshold();
        Ok(self
            .predict_score(x)?
            .into_iter()
            .map(|s| if s >= t { Label::Gamma } else { Label::Hadron })
            .collect())
    }

    /// Versioned text dump used for audit and determinism checks.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "gammasep-model v{MODEL_FORMAT_VERSION}\nalgorithm = {}\n",
            self.algorithm()
        );
        match self {
            TrainedModel::Lr(m) => m.write_text(&mut s),
            TrainedModel::Lda(m) => m.write_text(&mut s),
            TrainedModel::Knn(m) => m.write_text(&mut s),
            TrainedModel::Cart(m) => m.write_text(&mut s),
            TrainedModel::Nb(m) => m.write_text(&mut s),
            TrainedModel::Svm(m) => m.write_text(&mut s),
        }
        s
    }
}

pub(crate) fn join_floats(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

/// Logistic function evaluated without overflow.
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> (Matrix, Vec<Label>) {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y = (0..12)
            .map(|i| if i < 6 { Label::Hadron } else { Label::Gamma })
            .collect();
        (x, y)
    }

    #[test]
    fn single_class_rejected() {
        let (x, _) = tiny();
        let y = vec![Label::Gamma; 12];
        for spec in ModelSpec::defaults() {
            assert!(matches!(fit(&spec, &x, &y, 0), Err(Error::SingleClass)));
        }
    }

    #[test]
    fn non_finite_rejected() {
        let x = Matrix::from_rows(&[vec![f64::INFINITY], vec![1.0]]).unwrap();
        let y = vec![Label::Gamma, Label::Hadron];
        assert!(fit(&ModelSpec::default_for(Algorithm::Lr), &x, &y, 0).is_err());
    }

    #[test]
    fn dimension_mismatch_on_predict() {
        let (x, y) = tiny();
        let wide = Matrix::zeros(2, 3);
        for spec in ModelSpec::defaults() {
            let m = fit(&spec, &x, &y, 0).unwrap();
            assert!(matches!(
                m.predict_score(&wide),
                Err(Error::DimensionMismatch { .. })
            ));
        }
    }

    #[test]
    fn every_model_separates_a_trivial_line() {
        let (x, y) = tiny();
        for spec in ModelSpec::defaults() {
            let m = fit(&spec, &x, &y, 0).unwrap();
            let s = m.predict_score(&x).unwrap();
            assert!(s[11] > s[0], "{}: {s:?}", spec.algorithm());
            assert!(m.to_text().starts_with("gammasep-model v1\n"));
        }
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(800.0) == 1.0 && sigmoid(-800.0) == 0.0);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn algorithm_tags_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(Algorithm::from_tag(a.tag()), Some(a));
        }
    }
}
