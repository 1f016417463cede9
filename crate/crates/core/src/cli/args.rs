use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::config::parse_gamma;
use super::{Command, RunConfig};
use crate::error::Result;

/// Gamma/hadron separation: cleaning, data forms, classifier grid and the
/// statistical comparison of data forms.
#[derive(Debug, Parser)]
#[command(name = "gammasep", version)]
pub struct Args {
    #[command(subcommand)]
    pub command: CommandName,

    /// Config file (TOML key = value); flags below override it.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,

    /// Dataset path.
    #[arg(long, global = true, env = "GAMMASEP_DATA")]
    pub input: Option<PathBuf>,

    /// Run directory receiving every artifact.
    #[arg(long, short, global = true)]
    pub output_dir: Option<PathBuf>,

    /// Worker threads for the grid.
    #[arg(long, short, global = true)]
    pub jobs: Option<usize>,

    /// Outlier rule: iqr-fence, three-sigma or upper-sigma.
    #[arg(long, global = true)]
    pub rule: Option<String>,

    /// Cross-validation folds
    #[arg(long, global = true)]
    pub folds: Option<usize>,

    /// Seed of the fold shuffle
    #[arg(long, global = true)]
    pub fold_seed: Option<u64>,

    /// Seed of the FastICA starting matrix
    #[arg(long, global = true)]
    pub ica_seed: Option<u64>,

    /// Seed of the Dunnett Monte Carlo
    #[arg(long, global = true)]
    pub dunnett_seed: Option<u64>,

    /// Monte Carlo draws for the Dunnett critical value
    #[arg(long, global = true)]
    pub dunnett_draws: Option<usize>,

    /// inverse-dim, variance-scaled, or a positive number.
    #[arg(long, global = true)]
    pub svm_gamma: Option<String>,

    /// Fit each form's step inside every training fold.
    #[arg(long, global = true)]
    pub per_fold_transform: bool,

    /// Run ANOVA and Dunnett even when adequacy checks fail.
    #[arg(long, global = true)]
    pub force_anova: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CommandName {
    /// Remove missing rows and outliers; compare outlier rules.
    Clean,
    /// Min-max and z-score versions of the clean data.
    Transform,
    /// PCA, ICA, F-test and RFE on the clean data.
    Features,
    /// Cross-validate six classifiers on the eight data forms.
    Grid,
    /// Adequacy checks, ANOVA, Dunnett and the AUC box plot.
    Stats,
    /// Scorecard against the published numbers.
    Report,
    /// Every step in order.
    All,
}

impl From<CommandName> for Command {
    fn from(c: CommandName) -> Self {
        match c {
            CommandName::Clean => Command::Clean,
            CommandName::Transform => Command::Transform,
            CommandName::Features => Command::Features,
            CommandName::Grid => Command::Grid,
            CommandName::Stats => Command::Stats,
            CommandName::Report => Command::Report,
            CommandName::All => Command::All,
        }
    }
}

impl Args {
    /// Config file values (or defaults) overlaid with the flags given.
    pub fn resolve(&self) -> Result<(Command, RunConfig)> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.input {
            c.input = v.clone();
        }
        if let Some(v) = &self.output_dir {
            c.output_dir = v.clone();
        }
        if let Some(v) = &self.rule {
            c.outlier_rule = v.parse()?;
        }
        if let Some(v) = &self.svm_gamma {
            c.svm_gamma = parse_gamma(v)?;
        }
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { c.$field = v; } )* };
        }
        take!(jobs, folds, fold_seed, ica_seed, dunnett_seed, dunnett_draws);
        c.per_fold_transform |= self.per_fold_transform;
        c.force_anova |= self.force_anova;
        c.validate()?;
        Ok((self.command.into(), c))
    }
}
