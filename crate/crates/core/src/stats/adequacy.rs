use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

use super::anova::{anova_oneway, check_groups};

#[derive(Debug, Clone, PartialEq)]
pub struct AdequacyReport {
    /// Anderson–Darling `A²` with the small-sample factor `1 + 0.75/n + 2.25/n²`.
    pub normality_statistic: f64,
    pub normality_p: f64,
    /// Brown–Forsythe: ANOVA F on absolute deviations from group medians.
    pub homogeneity_statistic: f64,
    pub homogeneity_p: f64,
    pub alpha: f64,
}

impl AdequacyReport {
    pub fn normality_pass(&self) -> bool {
        self.normality_p > self.alpha
    }

    pub fn homogeneity_pass(&self) -> bool {
        self.homogeneity_p > self.alpha
    }

    pub fn passed(&self) -> bool {
        self.normality_pass() && self.homogeneity_pass()
    }

    pub fn to_text(&self) -> String {
        let verdict = |ok: bool| if ok { "pass" } else { "fail" };
        format!(
            "Normality (Anderson-Darling on residuals): A*={:.4} p={:.4} {}\n\
             Homogeneity (Brown-Forsythe): F={:.4} p={:.4} {}\n\
             alpha = {}\n",
            self.normality_statistic,
            self.normality_p,
            verdict(self.normality_pass()),
            self.homogeneity_statistic,
            self.homogeneity_p,
            verdict(self.homogeneity_pass()),
            self.alpha
        )
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Anderson–Darling normality test with mean and variance estimated from
/// the sample. Returns the adjusted statistic and its approximate p-value.
pub fn anderson_darling(sample: &[f64]) -> Result<(f64, f64)> {
    let n = sample.len();
    if n < 3 {
        return Err(Error::InsufficientData("Anderson-Darling needs three values".into()));
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let var = sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if !(var > 0.0) {
        return Err(Error::Numeric("residuals are degenerate (zero variance)".into()));
    }
    let sd = var.sqrt();
    let mut z: Vec<f64> = sample.iter().map(|v| (v - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let std_normal = Normal::standard();
    let mut s = 0.0;
    for i in 0..n {
        let lo = std_normal.cdf(z[i]);
        let hi = std_normal.sf(z[n - 1 - i]);
        s += (2.0 * i as f64 + 1.0) * (lo.ln() + hi.ln());
    }
    let a2 = -nf - s / nf;
    let a = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p = if a >= 0.6 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else if a >= 0.34 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a >= 0.2 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    };
    Ok((a, p.clamp(0.0, 1.0)))
}

/// Brown–Forsythe test for equal variances.
pub fn brown_forsythe(groups: &[Vec<f64>]) -> Result<(f64, f64)> {
    check_groups(groups)?;
    let dev: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let m = median(g);
            g.iter().map(|v| (v - m).abs()).collect()
        })
        .collect();
    let r = anova_oneway(&dev)?;
    Ok((r.f, r.p))
}

/// Normality of the within-group residuals and homogeneity of variance.
pub fn adequacy(groups: &[Vec<f64>], alpha: f64) -> Result<AdequacyReport> {
    check_groups(groups)?;
    let residuals: Vec<f64> = groups
        .iter()
        .flat_map(|g| {
            let m = g.iter().sum::<f64>() / g.len() as f64;
            g.iter().map(move |v| v - m)
        })
        .collect();
    let (normality_statistic, normality_p) = anderson_darling(&residuals)?;
    let (homogeneity_statistic, homogeneity_p) = brown_forsythe(groups)?;
    Ok(AdequacyReport {
        normality_statistic,
        normality_p,
        homogeneity_statistic,
        homogeneity_p,
        alpha,
    })
}
