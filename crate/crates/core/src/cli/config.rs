use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::eval::FormSettings;
use crate::features::{IcaParams, RfeParams};
use crate::ingest::SentinelPolicy;
use crate::models::{Algorithm, GammaRule, ModelSpec, SvmParams};
use crate::preprocess::OutlierRule;

/// Everything a run depends on. All randomness is driven by the explicit
/// seeds below.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub sentinel_policy: SentinelPolicy,
    pub outlier_rule: OutlierRule,
    pub folds: usize,
    pub fold_seed: u64,
    pub ica_seed: u64,
    /// Recorded with the other seeds; elimination itself draws no numbers.
    pub rfe_seed: u64,
    pub dunnett_seed: u64,
    pub dunnett_draws: usize,
    pub variance_target: f64,
    pub k: usize,
    pub alpha: f64,
    pub svm_gamma: GammaRule,
    pub rfe_standardize: bool,
    pub per_fold_transform: bool,
    pub force_anova: bool,
    pub output_dir: PathBuf,
    pub jobs: usize,
    /// Scorecard tolerance overrides by item id.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: PathBuf::from("data/magic04.data"),
            sentinel_policy: SentinelPolicy::Both,
            outlier_rule: OutlierRule::iqr_fence(),
            folds: 10,
            fold_seed: 20240601,
            ica_seed: 7,
            rfe_seed: 0,
            dunnett_seed: 12345,
            dunnett_draws: 1_000_000,
            variance_target: 0.95,
            k: 5,
            alpha: 0.05,
            svm_gamma: GammaRule::InverseDim,
            rfe_standardize: true,
            per_fold_transform: false,
            force_anova: false,
            output_dir: PathBuf::from("runs/default"),
            jobs: 1,
            tolerances: BTreeMap::new(),
        }
    }
}

/// On-disk form: every key optional, unknown keys rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    input: Option<PathBuf>,
    sentinel_policy: Option<String>,
    outlier_rule: Option<String>,
    outlier_multiplier: Option<f64>,
    folds: Option<usize>,
    fold_seed: Option<u64>,
    ica_seed: Option<u64>,
    rfe_seed: Option<u64>,
    dunnett_seed: Option<u64>,
    dunnett_draws: Option<usize>,
    variance_target: Option<f64>,
    k: Option<usize>,
    alpha: Option<f64>,
    svm_gamma: Option<toml::Value>,
    rfe_standardize: Option<bool>,
    per_fold_transform: Option<bool>,
    force_anova: Option<bool>,
    output_dir: Option<PathBuf>,
    jobs: Option<usize>,
    tolerances: Option<BTreeMap<String, f64>>,
}

pub fn parse_gamma(s: &str) -> Result<GammaRule> {
    match s {
        "inverse-dim" => Ok(GammaRule::InverseDim),
        "variance-scaled" => Ok(GammaRule::VarianceScaled),
        other => other
            .parse::<f64>()
            .ok()
            .filter(|g| *g > 0.0 && g.is_finite())
            .map(GammaRule::Fixed)
            .ok_or_else(|| Error::Config(format!("svm_gamma must be inverse-dim, variance-scaled or a positive number, got {other:?}"))),
    }
}

fn gamma_text(g: GammaRule) -> String {
    match g {
        GammaRule::InverseDim => "inverse-dim".into(),
        GammaRule::VarianceScaled => "variance-scaled".into(),
        GammaRule::Fixed(v) => v.to_string(),
    }
}

impl RunConfig {
    /// Defaults overlaid with the keys present in `text`.
    pub fn from_toml(text: &str) -> Result<Self> {
        let f: FileConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut c = RunConfig::default();
        if let Some(v) = f.input {
            c.input = v;
        }
        if let Some(v) = f.sentinel_policy {
            c.sentinel_policy = v.parse()?;
        }
        if let Some(v) = f.outlier_rule {
            c.outlier_rule = v.parse()?;
        }
        if let Some(m) = f.outlier_multiplier {
            c.outlier_rule = OutlierRule::new(c.outlier_rule.kind, m)?;
        }
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = f.$field { c.$field = v; } )* };
        }
        take!(folds, fold_seed, ica_seed, rfe_seed, dunnett_seed, dunnett_draws, variance_target, k, alpha);
        take!(rfe_standardize, per_fold_transform, force_anova, output_dir, jobs, tolerances);
        if let Some(v) = f.svm_gamma {
            c.svm_gamma = match v {
                toml::Value::String(s) => parse_gamma(&s)?,
                toml::Value::Float(g) => parse_gamma(&g.to_string())?,
                toml::Value::Integer(g) => parse_gamma(&g.to_string())?,
                other => return Err(Error::Config(format!("svm_gamma: unexpected {other}"))),
            };
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.folds < 2 {
            return bad("folds must be at least 2");
        }
        if !(self.variance_target > 0.0 && self.variance_target <= 1.0) {
            return bad("variance_target must be in (0, 1]");
        }
        if self.k == 0 || self.k > crate::ingest::N_ATTRIBUTES {
            return bad("k must be between 1 and 10");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must be in (0, 1)");
        }
        if self.dunnett_draws < 1000 {
            return bad("dunnett_draws must be at least 1000");
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1");
        }
        Ok(())
    }

    /// Canonical text of every setting that affects results. The output
    /// directory and worker count are excluded, and the input is identified
    /// by the digest of its contents rather than its path.
    pub fn canonical(&self, input_digest: &str) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        kv("input_sha256", format!("{input_digest:?}"));
        kv("sentinel_policy", format!("{:?}", self.sentinel_policy.tag()));
        kv("outlier_rule", format!("{:?}", self.outlier_rule.tag()));
        kv("outlier_multiplier", format!("{:?}", self.outlier_rule.multiplier));
        kv("folds", self.folds.to_string());
        kv("fold_seed", self.fold_seed.to_string());
        kv("ica_seed", self.ica_seed.to_string());
        kv("rfe_seed", self.rfe_seed.to_string());
        kv("dunnett_seed", self.dunnett_seed.to_string());
        kv("dunnett_draws", self.dunnett_draws.to_string());
        kv("variance_target", format!("{:?}", self.variance_target));
        kv("k", self.k.to_string());
        kv("alpha", format!("{:?}", self.alpha));
        kv("svm_gamma", format!("{:?}", gamma_text(self.svm_gamma)));
        kv("rfe_standardize", self.rfe_standardize.to_string());
        kv("per_fold_transform", self.per_fold_transform.to_string());
        kv("force_anova", self.force_anova.to_string());
        if !self.tolerances.is_empty() {
            s.push_str("\n[tolerances]\n");
            for (k, v) in &self.tolerances {
                s.push_str(&format!("{k:?} = {v:?}\n"));
            }
        }
        s
    }

    pub fn hash(&self, input_digest: &str) -> String {
        hex::encode(Sha256::digest(self.canonical(input_digest).as_bytes()))
    }

    pub fn seeds_text(&self) -> String {
        format!(
            "fold:{},ica:{},rfe:{},dunnett:{}",
            self.fold_seed, self.ica_seed, self.rfe_seed, self.dunnett_seed
        )
    }

    pub fn form_settings(&self) -> FormSettings {
        FormSettings {
            variance_target: self.variance_target,
            k: self.k,
            ica: IcaParams {
                seed: self.ica_seed,
                ..IcaParams::default()
            },
            rfe: RfeParams {
                standardize: self.rfe_standardize,
                ..RfeParams::default()
            },
        }
    }

    pub fn model_specs(&self) -> Vec<ModelSpec> {
        Algorithm::ALL
            .iter()
            .map(|&a| match a {
                Algorithm::Svm => ModelSpec::Svm(SvmParams {
                    gamma: self.svm_gamma,
                    ..SvmParams::default()
                }),
                other => ModelSpec::default_for(other),
            })
            .collect()
    }
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
