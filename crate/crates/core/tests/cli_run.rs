mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Proc;

use gammasep::cli::{collect_files, file_digest, manifest_without_timestamp, run, Command, RunConfig, Values, MANIFEST};
use tempfile::TempDir;

/// Every 25th line of the full file: 761 rows, both classes.
fn small_input(dir: &Path) -> PathBuf {
    let text = fs::read_to_string(common::data_path()).unwrap();
    let lines: String = text.lines().step_by(25).map(|l| format!("{l}\n")).collect();
    let p = dir.join("small.data");
    fs::write(&p, lines).unwrap();
    p
}

fn config(input: &Path, out: &Path) -> RunConfig {
    RunConfig {
        input: input.to_path_buf(),
        output_dir: out.to_path_buf(),
        folds: 3,
        dunnett_draws: 20_000,
        ..RunConfig::default()
    }
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    collect_files(dir, dir, &mut files).unwrap();
    files.sort();
    files
        .into_iter()
        .map(|rel| {
            let bytes = fs::read(dir.join(&rel)).unwrap();
            let bytes = if rel == MANIFEST {
                manifest_without_timestamp(&String::from_utf8(bytes).unwrap()).into_bytes()
            } else {
                bytes
            };
            (rel, bytes)
        })
        .collect()
}

fn bin() -> Proc {
    Proc::new(env!("CARGO_BIN_EXE_gammasep"))
}

#[test]
fn full_run_is_deterministic_and_stamped() {
    let tmp = TempDir::new().unwrap();
    let input = small_input(tmp.path());
    let before = file_digest(&input).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run(Command::All, config(&input, &a)).unwrap();
    run(Command::All, RunConfig { jobs: 2, ..config(&input, &b) }).unwrap();
    assert_eq!(file_digest(&input).unwrap(), before, "input was modified");

    let (ta, tb) = (tree(&a), tree(&b));
    let names: Vec<&str> = ta.iter().map(|f| f.0.as_str()).collect();
    for want in ["clean/clean.csv", "grid/detail.csv", "stats/auc_boxplot.svg", "report/scorecard.md", MANIFEST] {
        assert!(names.contains(&want), "missing {want}");
    }
    for ((na, ba), (nb, bb)) in ta.iter().zip(&tb) {
        assert_eq!(na, nb);
        if na != MANIFEST {
            assert!(ba == bb, "{na} differs between runs");
        }
    }
    let hash = RunConfig { ..config(&input, &a) }.hash(&before);
    for (name, bytes) in &ta {
        let first = String::from_utf8_lossy(bytes).lines().next().unwrap_or_default().to_string();
        assert!(first.contains(&hash), "{name} lacks the config hash");
        assert!(first.contains("seeds=fold:20240601"), "{name} lacks the seeds");
    }
    let svg = fs::read_to_string(a.join("stats/auc_boxplot.svg")).unwrap();
    assert_eq!(svg.matches(r#"<rect class="box""#).count(), 8);
    let order: Vec<usize> = ["Raw", "Clean", "Norm", "Stand", "PCA", "ICA", "UFS", "RFE"]
        .iter()
        .map(|n| svg.find(&format!(r#"data-name="{n}""#)).unwrap())
        .collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]));
}

fn fake_grid(dir: &Path, accuracy_outlier: bool) {
    let mut s = String::from("data_form,algorithm,fold,accuracy,auc\n");
    for (fi, form) in ["raw", "clean", "norm", "stand", "pca", "ica", "ufs", "rfe"].iter().enumerate() {
        for (ai, alg) in ["LR", "LDA", "KNN", "CART", "NB", "SVM"].iter().enumerate() {
            let jitter = ((fi * 7 + ai * 3) % 11) as f64 / 200.0;
            let acc = if accuracy_outlier && ai == 5 && fi < 4 { 0.2 } else { 0.75 + jitter };
            let auc = 0.78 + jitter;
            s.push_str(&format!("{form},{alg},0,{acc},{auc}\n"));
        }
    }
    fs::create_dir_all(dir.join("grid")).unwrap();
    fs::write(dir.join("grid/detail.csv"), s).unwrap();
}

#[test]
fn stats_refuses_anova_on_inadequate_metric_unless_forced() {
    let tmp = TempDir::new().unwrap();
    let input = small_input(tmp.path());
    let out = tmp.path().join("run");
    fake_grid(&out, true);
    run(Command::Stats, config(&input, &out)).unwrap();
    let acc = fs::read_to_string(out.join("stats/accuracy.txt")).unwrap();
    assert!(acc.contains("ANOVA not performed"), "{acc}");
    let auc = fs::read_to_string(out.join("stats/auc.txt")).unwrap();
    assert!(auc.contains("conclusion: no significant difference"), "{auc}");
    let v = Values::load_run(&out);
    assert_eq!(v.get("accuracy.anova_performed"), Some("false"));
    assert_eq!(v.get("auc.anova_performed"), Some("true"));

    run(Command::Stats, RunConfig { force_anova: true, ..config(&input, &out) }).unwrap();
    let acc = fs::read_to_string(out.join("stats/accuracy.txt")).unwrap();
    assert!(acc.contains("ANOVA forced") && acc.contains("Dunnett"), "{acc}");
}

#[test]
fn stats_without_grid_is_a_missing_artifact() {
    let tmp = TempDir::new().unwrap();
    let input = small_input(tmp.path());
    let err = run(Command::Stats, config(&input, &tmp.path().join("run"))).unwrap_err();
    assert!(matches!(err, gammasep::Error::MissingArtifact(_)));
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn report_on_empty_directory_is_all_not_available() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("empty");
    let o = bin()
        .args(["report", "--output-dir"])
        .arg(&out)
        .env("GAMMASEP_DATA", common::data_path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("N/A"));
    let md = fs::read_to_string(out.join("report/scorecard.md")).unwrap();
    assert!(!md.contains("| PASS |") && !md.contains("| FAIL |"));
    assert!(md.contains("| N/A |"));
}

#[test]
fn exit_codes_and_env_override() {
    let tmp = TempDir::new().unwrap();
    let input = small_input(tmp.path());
    let out = tmp.path().join("run");

    let o = bin().args(["clean", "--folds", "1"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().args(["clean", "--config", "/nonexistent.toml"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().args(["clean", "--input", "/nonexistent.data"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));

    let o = bin().arg("clean").arg("-o").arg(&out).env("GAMMASEP_DATA", &input).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = Values::load_run(&out);
    assert_eq!(v.get("rows.input"), Some("761"));
}

#[test]
fn cleaning_the_clean_output_reports_what_it_removes() {
    let tmp = TempDir::new().unwrap();
    let input = small_input(tmp.path());
    let first = tmp.path().join("first");
    run(Command::Clean, config(&input, &first)).unwrap();
    let v1 = Values::load_run(&first);
    let second = tmp.path().join("second");
    run(Command::Clean, config(&first.join("clean/clean.csv"), &second)).unwrap();
    let v2 = Values::load_run(&second);
    let (kept, again) = (v1.num("rows.clean").unwrap(), v2.num("rows.input").unwrap());
    assert_eq!(kept, again);
    let removed = v2.num("outliers.iqr-fence").unwrap();
    assert_eq!(v2.num("rows.clean").unwrap(), again - removed);
}

#[test]
fn config_tolerances_reach_the_scorecard() {
    let tmp = TempDir::new().unwrap();
    let input = small_input(tmp.path());
    let out = tmp.path().join("run");
    run(Command::Clean, config(&input, &out)).unwrap();
    let cfg_path = tmp.path().join("c.toml");
    fs::write(
        &cfg_path,
        format!(
            "input = {:?}\noutput_dir = {:?}\n[tolerances]\noutliers_iqr = 100.0\n",
            input.display().to_string(),
            out.display().to_string()
        ),
    )
    .unwrap();
    let o = bin().args(["report", "-c"]).arg(&cfg_path).output().unwrap();
    assert!(o.status.success());
    let md = fs::read_to_string(out.join("report/scorecard.md")).unwrap();
    let line = md.lines().find(|l| l.starts_with("| Outlier rows, IQR fence")).unwrap();
    assert!(line.contains("±10000%") && line.ends_with("| PASS |"), "{line}");
}

#[test]
fn checked_in_config_parses_to_the_defaults() {
    let text = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../gammasep.toml")).unwrap();
    assert_eq!(RunConfig::from_toml(&text).unwrap(), RunConfig::default());
}
