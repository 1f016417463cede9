//! The reproduction pipeline as run-directory commands:
//! clean → transform → features → grid → stats → report.
//!
//! Every artifact starts with a comment line carrying the config hash and
//! seeds. Steps that feed the scorecard also write `<step>/values.txt`, a
//! flat `key = value` list the report reads back.

mod args;
mod config;
mod scorecard;
mod svg;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::eval::{fit_form, run_grid, DataForm, FittedForm, GridForm, Metric, ResultsGrid};
use crate::features::{f_scores, ica_fit, pca_fit, rfe_eliminate, ufs_select};
use crate::ingest::{load_csv, summarize, write_csv, Dataset};
use crate::preprocess::{clean, remove_missing, OutlierRule};
use crate::stats::{adequacy, anova_oneway, dunnett};
use crate::transform::{self, TransformKind};

pub use args::{Args, CommandName};
pub use config::{file_digest, parse_gamma, RunConfig};
pub use scorecard::{reference_auc_table, scorecard, ScoreItem, Verdict};
pub use svg::boxplot_svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Clean,
    Transform,
    Features,
    Grid,
    Stats,
    Report,
    All,
}

pub const MANIFEST: &str = "manifest.txt";
/// Line prefix of the only run-dependent manifest entry.
pub const TIMESTAMP_KEY: &str = "created_unix";

/// Flat scorecard inputs written by one step.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Values(pub BTreeMap<String, String>);

impl Values {
    pub fn set(&mut self, key: impl Into<String>, v: impl ToString) {
        self.0.insert(key.into(), v.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn num(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    fn to_text(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn parse(text: &str) -> Values {
        let mut v = Values::default();
        for line in text.lines().filter(|l| !l.starts_with('#')) {
            if let Some((k, val)) = line.split_once(" = ") {
                v.set(k.trim(), val.trim());
            }
        }
        v
    }

    /// Merge every `*/values.txt` under `dir`; absent steps contribute nothing.
    pub fn load_run(dir: &Path) -> Values {
        let mut all = Values::default();
        for step in ["clean", "transform", "features", "grid", "stats"] {
            if let Ok(text) = fs::read_to_string(dir.join(step).join("values.txt")) {
                all.0.extend(Values::parse(&text).0);
            }
        }
        all
    }
}

/// Resolved configuration plus the identity stamped on every artifact.
pub struct Context {
    pub cfg: RunConfig,
    pub hash: String,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let hash = cfg.hash(&file_digest(&cfg.input)?);
        Ok(Context { cfg, hash })
    }

    /// For commands that never read the input: an unreadable input file
    /// leaves the hash computed over a placeholder digest.
    fn without_input(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let digest = file_digest(&cfg.input).unwrap_or_else(|_| "unavailable".into());
        let hash = cfg.hash(&digest);
        Ok(Context { cfg, hash })
    }

    fn stamp(&self) -> String {
        format!("gammasep config_hash={} seeds={}", self.hash, self.cfg.seeds_text())
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.cfg.output_dir.join(rel)
    }

    /// Write `body` under the run directory with the stamp as a leading
    /// comment in the file's own syntax. Files are renamed into place so a
    /// failed step never leaves a partial artifact.
    fn write(&self, rel: &str, body: &str) -> Result<()> {
        let head = match Path::new(rel).extension().and_then(|e| e.to_str()) {
            Some("md") | Some("svg") => format!("<!-- {} -->\n", self.stamp()),
            _ => format!("# {}\n", self.stamp()),
        };
        let text = format!("{head}{body}");
        let path = self.path(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let tmp = path.with_extension("partial");
        fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }

    fn write_dataset(&self, rel: &str, ds: &Dataset) -> Result<()> {
        let mut buf = Vec::new();
        write_csv(ds, &mut buf, None).map_err(|e| Error::io(self.path(rel), e))?;
        self.write(rel, &String::from_utf8(buf).expect("csv output is utf-8"))
    }

    fn write_values(&self, step: &str, v: &Values) -> Result<()> {
        self.write(&format!("{step}/values.txt"), &v.to_text())
    }

    fn load(&self) -> Result<Dataset> {
        load_csv(&self.cfg.input, self.cfg.sentinel_policy)
    }
}

/// Input file minus rows with missing values, and the cleaned table.
pub struct Bases {
    pub raw: Dataset,
    pub clean: Dataset,
}

pub fn bases(ctx: &Context) -> Result<Bases> {
    let ds = ctx.load()?;
    let (raw, _) = remove_missing(&ds)?;
    let (clean, _) = clean(&ds, ctx.cfg.outlier_rule)?;
    Ok(Bases { raw, clean })
}

pub fn cmd_clean(ctx: &Context) -> Result<Bases> {
    let ds = ctx.load()?;
    let rule = ctx.cfg.outlier_rule;
    let (cleaned, report) = clean(&ds, rule)?;
    let (raw, _) = remove_missing(&ds)?;

    let mut rules = vec![OutlierRule::iqr_fence(), OutlierRule::three_sigma(), OutlierRule::upper_sigma()];
    for r in rules.iter_mut() {
        if r.kind == rule.kind {
            *r = rule;
        }
    }
    let mut outliers = format!("{},selected\n", report.csv_header());
    let mut v = Values::default();
    for r in &rules {
        let rep = if *r == rule { report.clone() } else { clean(&ds, *r)?.1 };
        outliers.push_str(&format!("{},{}\n", rep.csv_row(), *r == rule));
        v.set(format!("outliers.{}", r.tag()), rep.outlier_rows_removed);
    }

    let mut summary = String::from("stage,attribute,count,missing,mean,std,min,max,q1,median,q3,skewness\n");
    for (stage, d) in [("input", &ds), ("clean", &cleaned)] {
        for s in summarize(d) {
            let skew = s.skewness().map(|k| k.to_string()).unwrap_or_default();
            summary.push_str(&format!(
                "{stage},{},{},{},{},{},{},{},{},{},{},{skew}\n",
                s.name, s.count, s.missing_count, s.mean, s.std, s.min, s.max, s.q1, s.median, s.q3
            ));
            if !skew.is_empty() {
                v.set(format!("skew.{stage}.{}", s.name), &skew);
            }
        }
    }
    let (g, h) = cleaned.class_counts();
    v.set("rows.input", report.rows_in);
    v.set("rows.missing_removed", report.missing_rows_removed);
    v.set("values.missing", ds.missing_count());
    v.set("rows.clean", report.rows_out());
    v.set("rows.clean_gamma", g);
    v.set("rows.clean_hadron", h);
    v.set("rule", rule);

    ctx.write_dataset("clean/clean.csv", &cleaned)?;
    ctx.write("clean/outliers.csv", &outliers)?;
    ctx.write("clean/summary.csv", &summary)?;
    ctx.write_values("clean", &v)?;
    log::info!(
        "clean: {} rows in, {} with missing values, {} outliers ({rule}), {} kept",
        report.rows_in,
        report.missing_rows_removed,
        report.outlier_rows_removed,
        report.rows_out()
    );
    Ok(Bases { raw, clean: cleaned })
}

pub fn cmd_transform(ctx: &Context, b: &Bases) -> Result<()> {
    let mut v = Values::default();
    for kind in [TransformKind::MinMax, TransformKind::ZScore] {
        let t = transform::fit(kind, &b.clean)?;
        let out = t.apply(&b.clean)?;
        v.set(format!("transform.{}.warnings", kind.tag()), t.warnings().len());
        ctx.write(&format!("transform/{}.txt", kind.tag()), &t.to_text())?;
        ctx.write_dataset(&format!("transform/{}.csv", kind.provenance()), &out)?;
    }
    ctx.write_values("transform", &v)
}

pub fn cmd_features(ctx: &Context, b: &Bases) -> Result<()> {
    let s = ctx.cfg.form_settings();
    let ds = &b.clean;
    let mut v = Values::default();

    let pca = pca_fit(ds, s.variance_target)?;
    v.set("pca.components", pca.n_outputs());
    let mut cum = 0.0;
    for (i, r) in pca.explained_variance_ratios.iter().take(pca.n_outputs()).enumerate() {
        v.set(format!("pca.ratio.{}", i + 1), r);
        cum += r;
    }
    v.set("pca.cumulative", cum);

    let ica = ica_fit(ds, &s.ica)?;
    v.set("ica.iterations", ica.iterations);
    v.set("ica.converged", ica.converged);

    let table = f_scores(ds)?;
    let mut fcsv = String::from("attribute,f_score,rank\n");
    for ((n, f), r) in table.names.iter().zip(&table.scores).zip(&table.ranks) {
        fcsv.push_str(&format!("{n},{f},{r}\n"));
        v.set(format!("f.{n}"), f);
    }
    let ufs = ufs_select(ds, s.k)?;
    v.set("ufs.selected", ufs.output_names.join(" "));

    let all: Vec<usize> = (0..ds.n_attributes()).collect();
    let (kept, eliminated) = rfe_eliminate(ds, &all, s.k, &s.rfe)?;
    let rfe = fit_form(DataForm::Rfe, ds, &s)?;
    let names = |idx: &[usize]| idx.iter().map(|&j| ds.names()[j].clone()).collect::<Vec<_>>().join(" ");
    v.set("rfe.selected", names(&kept));
    v.set("rfe.eliminated", names(&eliminated));

    ctx.write("features/fscores.csv", &fcsv)?;
    for (tag, step) in [
        ("pca", FittedForm::Features(pca)),
        ("ica", FittedForm::Features(ica)),
        ("ufs", FittedForm::Features(ufs)),
        ("rfe", rfe),
    ] {
        ctx.write(&format!("features/{tag}.txt"), &step.to_text())?;
        ctx.write_dataset(&format!("features/{tag}.csv"), &step.apply(ds)?)?;
    }
    ctx.write_values("features", &v)
}

/// The eight grid inputs. Without per-fold refitting every step is fitted
/// once on its whole base table.
pub fn grid_forms(ctx: &Context, b: &Bases) -> Result<Vec<GridForm>> {
    let s = ctx.cfg.form_settings();
    DataForm::ALL
        .iter()
        .map(|&form| {
            let base = if form.uses_clean_base() { &b.clean } else { &b.raw };
            Ok(if ctx.cfg.per_fold_transform {
                GridForm {
                    form,
                    data: base.clone(),
                    refit: Some(s.clone()),
                }
            } else {
                GridForm {
                    form,
                    data: fit_form(form, base, &s)?.apply(base)?,
                    refit: None,
                }
            })
        })
        .collect()
}

pub fn cmd_grid(ctx: &Context, b: &Bases) -> Result<ResultsGrid> {
    let forms = grid_forms(ctx, b)?;
    let grid = run_grid(&forms, &ctx.cfg.model_specs(), ctx.cfg.folds, ctx.cfg.fold_seed)?;
    let mut v = Values::default();
    for m in [Metric::Accuracy, Metric::Auc] {
        for c in &grid.cells {
            let val = match m {
                Metric::Accuracy => c.mean_accuracy,
                Metric::Auc => c.mean_auc,
            };
            v.set(format!("cell.{}.{}.{}", c.data_form, c.algorithm, m.tag()), val);
        }
        for &f in &grid.forms {
            v.set(format!("row.{f}.{}", m.tag()), grid.row_mean(f, m));
        }
        if let Some(best) = grid.best_form(m) {
            v.set(format!("best.{}", m.tag()), best);
        }
    }
    let mut md = String::from("## Cross-validation accuracy\n\n");
    md.push_str(&grid.summary_markdown(Metric::Accuracy));
    md.push_str("\n## ROC AUC\n\n");
    md.push_str(&grid.summary_markdown(Metric::Auc));

    ctx.write("grid/detail.csv", &grid.detail_csv())?;
    ctx.write("grid/accuracy.csv", &grid.summary_csv(Metric::Accuracy))?;
    ctx.write("grid/auc.csv", &grid.summary_csv(Metric::Auc))?;
    ctx.write("grid/tables.md", &md)?;
    ctx.write_values("grid", &v)?;
    Ok(grid)
}

pub fn load_grid(ctx: &Context) -> Result<ResultsGrid> {
    let path = ctx.path("grid/detail.csv");
    let text = fs::read_to_string(&path).map_err(|_| Error::MissingArtifact(path.clone()))?;
    ResultsGrid::from_detail_csv(&text, ctx.cfg.fold_seed)
}

/// Adequacy, then ANOVA and Dunnett against the first group for one table
/// of cell means. Returns the text report; `v` receives the numbers under
/// `prefix`.
fn analyze(
    ctx: &Context,
    groups: &[Vec<f64>],
    names: &[&str],
    response: &str,
    prefix: &str,
    force: bool,
    v: &mut Values,
) -> Result<String> {
    let alpha = ctx.cfg.alpha;
    let ad = adequacy(groups, alpha)?;
    v.set(format!("{prefix}.normality_p"), ad.normality_p);
    v.set(format!("{prefix}.homogeneity_p"), ad.homogeneity_p);
    v.set(format!("{prefix}.adequate"), ad.passed());
    let mut s = format!("## {response}\n\n{}\n", ad.to_text());
    if !ad.passed() && !force {
        let msg = format!(
            "{response}: adequacy checks failed (normality {}, homogeneity {}); ANOVA not performed. Set force_anova to run it anyway.",
            if ad.normality_pass() { "passed" } else { "failed" },
            if ad.homogeneity_pass() { "passed" } else { "failed" },
        );
        log::warn!("{msg}");
        v.set(format!("{prefix}.anova_performed"), false);
        s.push_str(&msg);
        s.push('\n');
        return Ok(s);
    }
    if !ad.passed() {
        s.push_str("adequacy checks failed; ANOVA forced.\n\n");
    }
    let an = anova_oneway(groups)?;
    v.set(format!("{prefix}.anova_performed"), true);
    v.set(format!("{prefix}.f"), an.f);
    v.set(format!("{prefix}.p"), an.p);
    v.set(format!("{prefix}.ss_model"), an.ss_model);
    v.set(format!("{prefix}.grand_mean"), an.grand_mean);
    s.push_str(&an.to_text(response));
    let verdict = if an.p > alpha {
        "no significant difference between data forms"
    } else {
        "data-form means differ significantly"
    };
    let _ = writeln!(s, "\nconclusion: {verdict} (p = {:.4}, alpha = {alpha})\n", an.p);

    let dn = dunnett(groups, 0, alpha, ctx.cfg.dunnett_draws, ctx.cfg.dunnett_seed)?;
    v.set(format!("{prefix}.dunnett.critical"), dn.critical_value);
    v.set(
        format!("{prefix}.dunnett.significant"),
        dn.comparisons.iter().filter(|c| c.significant()).count(),
    );
    for c in &dn.comparisons {
        let key = format!("{prefix}.dunnett.{}", names[c.group].to_lowercase());
        v.set(format!("{key}.diff"), c.difference);
        v.set(format!("{key}.low"), c.low);
        v.set(format!("{key}.high"), c.high);
    }
    s.push_str(&dn.to_text(names));
    Ok(s)
}

pub fn cmd_stats(ctx: &Context) -> Result<()> {
    let grid = load_grid(ctx)?;
    let names: Vec<&str> = grid.forms.iter().map(|f| f.title()).collect();
    let mut v = Values::default();
    for m in [Metric::Accuracy, Metric::Auc] {
        let text = analyze(
            ctx,
            &grid.groups(m),
            &names,
            m.tag(),
            m.tag(),
            ctx.cfg.force_anova,
            &mut v,
        )?;
        ctx.write(&format!("stats/{}.txt", m.tag()), &text)?;
    }
    let svg = boxplot_svg(&names, &grid.groups(Metric::Auc), "AUC by data form");
    ctx.write("stats/auc_boxplot.svg", &svg)?;

    // The same analysis on the published AUC table, which is fixed input.
    let published = reference_auc_table();
    let ref_names: Vec<&str> = DataForm::ALL.iter().map(|f| f.title()).collect();
    let text = analyze(ctx, &published, &ref_names, "AUC", "published", true, &mut v)?;
    ctx.write("stats/published_auc.txt", &text)?;
    ctx.write_values("stats", &v)
}

pub fn cmd_report(ctx: &Context) -> Result<usize> {
    let v = Values::load_run(&ctx.cfg.output_dir);
    if v.0.is_empty() {
        log::warn!(
            "no artifacts under {}; every scorecard row is N/A",
            ctx.cfg.output_dir.display()
        );
    }
    let items = scorecard(&v, &ctx.cfg.tolerances);
    let mut md = String::from("# Reproduction scorecard\n\n");
    md.push_str("| Item | Reference | Reproduced | Tolerance | Verdict |\n|---|---|---|---|---|\n");
    let mut counts = BTreeMap::new();
    for it in &items {
        *counts.entry(it.verdict.tag()).or_insert(0) += 1;
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} |",
            it.label, it.reference, it.reproduced, it.tolerance, it.verdict.tag()
        );
    }
    md.push('\n');
    for (k, n) in &counts {
        let _ = writeln!(md, "- {k}: {n}");
    }
    ctx.write("report/scorecard.md", &md)?;
    Ok(items.len())
}

/// Rewrite the manifest: config identity, worker count, creation time, and
/// a digest of every other file in the run directory.
fn write_manifest(ctx: &Context) -> Result<()> {
    let dir = &ctx.cfg.output_dir;
    let mut files = Vec::new();
    collect_files(dir, dir, &mut files)?;
    files.sort();
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut s = format!(
        "# {}\nconfig_hash = {}\nseeds = {}\njobs = {}\n{TIMESTAMP_KEY} = {created}\n\n",
        ctx.stamp(),
        ctx.hash,
        ctx.cfg.seeds_text(),
        ctx.cfg.jobs
    );
    for rel in files.iter().filter(|r| r.as_str() != MANIFEST) {
        let bytes = fs::read(dir.join(rel)).map_err(|e| Error::io(dir.join(rel), e))?;
        let _ = writeln!(s, "{} {} {rel}", hex::encode(Sha256::digest(&bytes)), bytes.len());
    }
    let path = dir.join(MANIFEST);
    fs::write(&path, s).map_err(|e| Error::io(&path, e))
}

pub fn collect_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for e in entries {
        let e = e.map_err(|e| Error::io(dir, e))?;
        let p = e.path();
        if p.is_dir() {
            collect_files(root, &p, out)?;
        } else if let Ok(rel) = p.strip_prefix(root) {
            out.push(rel.to_string_lossy().replace('\\', "/"));
        }
    }
    Ok(())
}

fn dispatch(cmd: Command, ctx: &Context) -> Result<()> {
    match cmd {
        Command::Clean => cmd_clean(ctx).map(drop),
        Command::Transform => cmd_transform(ctx, &bases(ctx)?),
        Command::Features => cmd_features(ctx, &bases(ctx)?),
        Command::Grid => cmd_grid(ctx, &bases(ctx)?).map(drop),
        Command::Stats => cmd_stats(ctx),
        Command::Report => cmd_report(ctx).map(drop),
        Command::All => {
            let b = cmd_clean(ctx)?;
            cmd_transform(ctx, &b)?;
            cmd_features(ctx, &b)?;
            cmd_grid(ctx, &b)?;
            cmd_stats(ctx)?;
            cmd_report(ctx).map(drop)
        }
    }
}

/// Run one command into the configured output directory on a worker pool
/// of `cfg.jobs` threads, then refresh the manifest.
pub fn run(cmd: Command, cfg: RunConfig) -> Result<()> {
    let ctx = if cmd == Command::Report {
        Context::without_input(cfg)?
    } else {
        Context::new(cfg)?
    };
    let dir = &ctx.cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.cfg.jobs)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| dispatch(cmd, &ctx))?;
    write_manifest(&ctx)
}

/// Manifest text with the timestamp line removed.
pub fn manifest_without_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with(TIMESTAMP_KEY))
        .map(|l| format!("{l}\n"))
        .collect()
}

impl Verdict {
    pub fn tag(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Near => "NEAR",
            Verdict::Fail => "FAIL",
            Verdict::NotAvailable => "N/A",
        }
    }
}
