//! Published numbers against reproduced ones.

use std::collections::{BTreeMap, BTreeSet};

use super::Values;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// Outside the tolerance but within twice it.
    Near,
    Fail,
    NotAvailable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreItem {
    pub id: String,
    pub label: String,
    pub reference: String,
    pub reproduced: String,
    pub tolerance: String,
    pub verdict: Verdict,
}

const ATTRS: [&str; 10] = [
    "fLength", "fWidth", "fSize", "fConc", "fConc1", "fAsym", "fM3Long", "fM3Trans", "fAlpha", "fDist",
];

const SKEW_CLEAN: [f64; 10] = [
    1.146622, 0.811858, 0.695432, 0.445778, 0.543348, -0.313774, 0.138903, -0.005655, 0.937793, 0.139228,
];

const PCA_RATIOS: [f64; 5] = [0.627236, 0.165211, 0.082783, 0.067893, 0.033773];

const F_SCORES: [f64; 10] = [7.577, 300.9, 88.55, 322.5, 380.7, 22.06, 154.0, 0.8226, 3882.0, 30.68];

const UFS_SET: [&str; 5] = ["fAlpha", "fConc1", "fConc", "fWidth", "fM3Long"];
const RFE_SET: [&str; 5] = ["fWidth", "fSize", "fConc", "fConc1", "fAlpha"];

/// Published cross-validation accuracy, rows in data-form order, columns
/// LR LDA KNN CART NB SVM.
const ACCURACY: [[f64; 6]; 8] = [
    [0.7604, 0.7606, 0.7531, 0.7944, 0.6435, 0.5148],
    [0.7379, 0.7385, 0.7094, 0.7440, 0.6773, 0.5019],
    [0.7377, 0.7385, 0.7646, 0.7450, 0.6773, 0.7533],
    [0.7408, 0.7385, 0.7648, 0.7452, 0.6773, 0.8215],
    [0.7314, 0.7262, 0.7112, 0.6712, 0.7181, 0.5077],
    [0.7198, 0.7262, 0.7160, 0.6944, 0.7115, 0.4860],
    [0.7152, 0.7135, 0.7258, 0.7044, 0.6883, 0.7002],
    [0.7285, 0.7277, 0.7050, 0.7273, 0.6942, 0.7383],
];

const AUC: [[f64; 6]; 8] = [
    [0.8394, 0.8364, 0.8264, 0.7901, 0.7558, 0.6979],
    [0.7958, 0.7975, 0.7768, 0.7502, 0.7342, 0.6672],
    [0.7976, 0.7975, 0.8441, 0.7460, 0.7342, 0.8312],
    [0.7967, 0.7975, 0.8410, 0.7473, 0.7342, 0.8964],
    [0.7780, 0.7789, 0.7793, 0.6711, 0.7816, 0.6661],
    [0.7757, 0.7789, 0.7892, 0.6944, 0.7813, 0.7759],
    [0.7813, 0.7816, 0.7887, 0.7085, 0.7486, 0.7389],
    [0.7863, 0.7865, 0.7653, 0.7258, 0.7451, 0.8079],
];

/// The published AUC table as eight groups of six, Raw first.
pub fn reference_auc_table() -> Vec<Vec<f64>> {
    AUC.iter().map(|r| r.to_vec()).collect()
}

enum Rule {
    /// `|x − reference| ≤ tol`.
    Abs(f64, f64),
    /// `|x − reference| ≤ tol·|reference|`.
    Rel(f64, f64),
    /// `x ≥ min`.
    AtLeast(f64),
    /// A yes/no expectation described in words.
    Check(&'static str),
}

struct Spec {
    id: String,
    label: String,
    rule: Rule,
    value: Option<f64>,
    /// Display form of a `Check` outcome.
    shown: Option<String>,
}

/// Decimal places of the reference as written, at least four.
fn decimals(r: f64) -> usize {
    let t = r.to_string();
    t.split_once('.').map_or(0, |(_, f)| f.len()).max(4)
}

fn show(x: f64, dp: usize) -> String {
    if x.fract() == 0.0 && x.abs() < 1e9 {
        format!("{x:.0}")
    } else {
        format!("{x:.dp$}")
    }
}

fn evaluate(s: Spec, overrides: &BTreeMap<String, f64>) -> ScoreItem {
    let o = overrides.get(&s.id).copied();
    let (reference, tolerance, verdict, reproduced) = match s.rule {
        Rule::Abs(r, t) | Rule::Rel(r, t) => {
            let t = o.unwrap_or(t);
            let (abs, tol_text) = match s.rule {
                Rule::Rel(..) => (t * r.abs(), format!("±{}%", t * 100.0)),
                _ => (t, format!("±{t}")),
            };
            let dp = decimals(r);
            let verdict = match s.value {
                None => Verdict::NotAvailable,
                Some(x) if (x - r).abs() <= abs => Verdict::Pass,
                Some(x) if (x - r).abs() <= 2.0 * abs => Verdict::Near,
                Some(_) => Verdict::Fail,
            };
            let shown = s.value.map_or("—".into(), |x| show(x, dp));
            (r.to_string(), tol_text, verdict, shown)
        }
        Rule::AtLeast(m) => {
            let m = o.unwrap_or(m);
            let verdict = match s.value {
                None => Verdict::NotAvailable,
                Some(x) if x >= m => Verdict::Pass,
                Some(x) if x >= m - 0.1 * m.abs() => Verdict::Near,
                Some(_) => Verdict::Fail,
            };
            let shown = s.value.map_or("—".into(), |x| show(x, 4));
            (format!("≥ {m}"), "—".into(), verdict, shown)
        }
        Rule::Check(expect) => {
            let verdict = match s.value {
                None => Verdict::NotAvailable,
                Some(x) if x > 0.5 => Verdict::Pass,
                Some(_) => Verdict::Fail,
            };
            (expect.to_string(), "exact".into(), verdict, s.shown.unwrap_or_else(|| "—".into()))
        }
    };
    ScoreItem {
        id: s.id,
        label: s.label,
        reference,
        reproduced,
        tolerance,
        verdict,
    }
}

fn spec(id: impl Into<String>, label: impl Into<String>, rule: Rule, value: Option<f64>) -> Spec {
    Spec {
        id: id.into(),
        label: label.into(),
        rule,
        value,
        shown: None,
    }
}

fn check(id: &str, label: &str, expect: &'static str, outcome: Option<bool>, shown: Option<String>) -> Spec {
    Spec {
        id: id.into(),
        label: label.into(),
        rule: Rule::Check(expect),
        value: outcome.map(|b| if b { 1.0 } else { 0.0 }),
        shown: shown.or_else(|| outcome.map(|b| b.to_string())),
    }
}

fn flag(v: &Values, key: &str) -> Option<bool> {
    v.get(key)?.parse().ok()
}

fn name_set(v: &Values, key: &str) -> Option<BTreeSet<String>> {
    Some(v.get(key)?.split_whitespace().map(String::from).collect())
}

/// Every scored item in a fixed order. Items whose inputs are absent from
/// `v` come out as `N/A`; `overrides` replaces tolerances (or minimums)
/// by item id.
pub fn scorecard(v: &Values, overrides: &BTreeMap<String, f64>) -> Vec<ScoreItem> {
    let mut s = Vec::new();

    s.push(spec("outliers_iqr", "Outlier rows, IQR fence", Rule::Rel(975.0, 0.05), v.num("outliers.iqr-fence")));
    s.push(spec("outliers_sigma", "Outlier rows, 3-sigma", Rule::Rel(2998.0, 0.05), v.num("outliers.three-sigma")));
    for (a, r) in ATTRS.iter().zip(SKEW_CLEAN) {
        s.push(spec(format!("skew_{a}"), format!("Clean skewness {a}"), Rule::Abs(r, 0.15), v.num(&format!("skew.clean.{a}"))));
    }

    s.push(spec("pca_components", "PCA components kept", Rule::Abs(5.0, 0.0), v.num("pca.components")));
    s.push(spec("pca_cumulative", "PCA cumulative variance", Rule::Abs(0.9769, 0.01), v.num("pca.cumulative")));
    for (i, r) in PCA_RATIOS.iter().enumerate() {
        let key = format!("pca.ratio.{}", i + 1);
        s.push(spec(format!("pca_ratio_{}", i + 1), format!("PCA variance ratio {}", i + 1), Rule::Abs(*r, 0.02), v.num(&key)));
    }
    for (a, r) in ATTRS.iter().zip(F_SCORES) {
        s.push(spec(format!("f_{a}"), format!("F-score {a}"), Rule::Rel(r, 0.10), v.num(&format!("f.{a}"))));
    }
    let ufs = name_set(v, "ufs.selected");
    let want: BTreeSet<String> = UFS_SET.iter().map(|x| x.to_string()).collect();
    s.push(check(
        "ufs_set",
        "UFS top-5 set",
        "fAlpha fConc1 fConc fWidth fM3Long",
        ufs.as_ref().map(|u| *u == want),
        v.get("ufs.selected").map(String::from),
    ));
    let rfe_overlap = name_set(v, "rfe.selected").map(|r| RFE_SET.iter().filter(|a| r.contains(**a)).count() as f64);
    s.push(spec("rfe_overlap", "RFE overlap with published set", Rule::AtLeast(4.0), rfe_overlap));

    let forms = [("clean", 1), ("norm", 2), ("stand", 3)];
    for (metric, table) in [("accuracy", &ACCURACY), ("auc", &AUC)] {
        for (form, row) in forms {
            for (alg, col) in [("LR", 0), ("LDA", 1)] {
                let key = format!("cell.{form}.{alg}.{metric}");
                s.push(spec(
                    format!("{metric}_{form}_{alg}"),
                    format!("{metric} {alg} on {form}"),
                    Rule::Abs(table[row][col], 0.03),
                    v.num(&key),
                ));
            }
        }
    }
    for metric in ["accuracy", "auc"] {
        let best = v.get(&format!("best.{metric}"));
        s.push(check(
            &format!("best_{metric}"),
            &format!("Largest {metric} row mean"),
            "stand",
            best.map(|b| b == "stand"),
            best.map(String::from),
        ));
    }
    let gap = v
        .num("cell.stand.SVM.accuracy")
        .zip(v.num("cell.raw.SVM.accuracy"))
        .map(|(a, b)| a - b);
    s.push(spec("svm_gap", "SVM accuracy, stand − raw", Rule::AtLeast(0.2), gap));
    for form in ["norm", "stand"] {
        let pair = v.num(&format!("row.{form}.auc")).zip(v.num("row.raw.auc"));
        s.push(check(
            &format!("{form}_auc_above_raw"),
            &format!("{form} AUC row mean above raw"),
            "true",
            pair.map(|(a, b)| a > b),
            pair.map(|(a, b)| format!("{a:.4} vs {b:.4}")),
        ));
    }

    let acc_ok = flag(v, "accuracy.adequate");
    s.push(check(
        "accuracy_inadequate",
        "Accuracy grid fails adequacy",
        "true",
        acc_ok.map(|b| !b),
        v.num("accuracy.normality_p")
            .zip(v.num("accuracy.homogeneity_p"))
            .map(|(n, h)| format!("normality p {n:.4}, homogeneity p {h:.4}")),
    ));
    s.push(check(
        "auc_adequate",
        "AUC grid passes adequacy",
        "true",
        flag(v, "auc.adequate"),
        v.num("auc.normality_p")
            .zip(v.num("auc.homogeneity_p"))
            .map(|(n, h)| format!("normality p {n:.4}, homogeneity p {h:.4}")),
    ));
    let auc_p = v.num("auc.p");
    s.push(check(
        "auc_not_significant",
        "AUC grid ANOVA p > 0.05",
        "true",
        auc_p.map(|p| p > 0.05),
        auc_p.map(|p| format!("{p:.4}")),
    ));
    s.push(spec("auc_stand_minus_raw", "AUC grid Stand − Raw", Rule::Abs(0.01118, 0.03), v.num("auc.dunnett.stand.diff")));

    s.push(spec("published_f", "ANOVA F on the published AUC table", Rule::Abs(1.22, 0.02), v.num("published.f")));
    s.push(spec("published_p", "ANOVA p on the published AUC table", Rule::Abs(0.3165, 0.005), v.num("published.p")));
    s.push(spec("published_ss_model", "ANOVA model SS", Rule::Rel(0.01866357, 0.01), v.num("published.ss_model")));
    s.push(spec("published_grand_mean", "AUC grand mean", Rule::Abs(0.771795, 1e-4), v.num("published.grand_mean")));
    s.push(spec("published_stand_diff", "Dunnett Stand − Raw difference", Rule::Abs(0.01118, 1e-4), v.num("published.dunnett.stand.diff")));
    s.push(spec("published_stand_low", "Dunnett Stand − Raw lower limit", Rule::Abs(-0.06264, 0.002), v.num("published.dunnett.stand.low")));
    s.push(spec("published_stand_high", "Dunnett Stand − Raw upper limit", Rule::Abs(0.08499, 0.002), v.num("published.dunnett.stand.high")));
    s.push(spec("published_critical", "Dunnett critical value", Rule::Abs(2.73, 0.02), v.num("published.dunnett.critical")));
    let sig = v.num("published.dunnett.significant");
    s.push(check(
        "published_none_significant",
        "Dunnett comparisons significant",
        "0 of 7",
        sig.map(|n| n == 0.0),
        sig.map(|n| format!("{n} of 7")),
    ));

    s.into_iter().map(|x| evaluate(x, overrides)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_values_are_all_not_available() {
        let items = scorecard(&Values::default(), &BTreeMap::new());
        assert!(items.len() > 50);
        assert!(items.iter().all(|i| i.verdict == Verdict::NotAvailable));
    }

    #[test]
    fn verdict_bands() {
        let mut v = Values::default();
        v.set("pca.cumulative", 0.9769 + 0.005);
        v.set("published.p", 0.3165 + 0.008);
        v.set("published.f", 1.30);
        let items = scorecard(&v, &BTreeMap::new());
        let get = |id: &str| items.iter().find(|i| i.id == id).unwrap().verdict;
        assert_eq!(get("pca_cumulative"), Verdict::Pass);
        assert_eq!(get("published_p"), Verdict::Near);
        assert_eq!(get("published_f"), Verdict::Fail);
    }

    #[test]
    fn override_widens_tolerance() {
        let mut v = Values::default();
        v.set("published.f", 1.30);
        let o = BTreeMap::from([("published_f".to_string(), 0.1)]);
        let items = scorecard(&v, &o);
        let it = items.iter().find(|i| i.id == "published_f").unwrap();
        assert_eq!(it.verdict, Verdict::Pass);
        assert_eq!(it.tolerance, "±0.1");
    }

    #[test]
    fn set_checks() {
        let mut v = Values::default();
        v.set("ufs.selected", "fAlpha fConc1 fConc fWidth fM3Long");
        v.set("rfe.selected", "fLength fWidth fSize fConc1 fAlpha");
        let items = scorecard(&v, &BTreeMap::new());
        let get = |id: &str| items.iter().find(|i| i.id == id).unwrap().clone();
        assert_eq!(get("ufs_set").verdict, Verdict::Pass);
        assert_eq!(get("rfe_overlap").verdict, Verdict::Pass);
        assert_eq!(get("rfe_overlap").reproduced, "4");
    }
}
