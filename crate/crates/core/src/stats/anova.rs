use crate::error::{Error, Result};

use super::special::f_sf;

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaReport {
    pub df_model: usize,
    pub df_error: usize,
    pub ss_model: f64,
    pub ss_error: f64,
    pub ss_total: f64,
    pub ms_model: f64,
    pub ms_error: f64,
    pub f: f64,
    pub p: f64,
    pub r_square: f64,
    /// `100 · root_mse / grand_mean`.
    pub coeff_var: f64,
    pub root_mse: f64,
    pub grand_mean: f64,
}

pub(crate) fn check_groups(groups: &[Vec<f64>]) -> Result<()> {
    if groups.len() < 2 {
        return Err(Error::InsufficientData("ANOVA needs at least two groups".into()));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::InsufficientData("every group needs a value".into()));
    }
    if groups.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("group values must be finite".into()));
    }
    Ok(())
}

/// One-way analysis of variance.
pub fn anova_oneway(groups: &[Vec<f64>]) -> Result<AnovaReport> {
    check_groups(groups)?;
    let n: usize = groups.iter().map(Vec::len).sum();
    let k = groups.len();
    if n <= k {
        return Err(Error::InsufficientData("ANOVA has zero error degrees of freedom".into()));
    }
    let grand_mean = groups.iter().flatten().sum::<f64>() / n as f64;
    let mut ss_model = 0.0;
    let mut ss_error = 0.0;
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ss_model += g.len() as f64 * (m - grand_mean).powi(2);
        ss_error += g.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    }
    let ss_total: f64 = groups.iter().flatten().map(|v| (v - grand_mean).powi(2)).sum();
    let (df_model, df_error) = (k - 1, n - k);
    let ms_model = ss_model / df_model as f64;
    let ms_error = ss_error / df_error as f64;
    // Rounding can leave a hair of between-group variation among identical
    // groups; treat it as none.
    let f = if ss_model <= 1e-15 * ss_total.max(f64::MIN_POSITIVE) {
        0.0
    } else if ms_error == 0.0 {
        f64::INFINITY
    } else {
        ms_model / ms_error
    };
    let p = f_sf(f, df_model as f64, df_error as f64);
    let root_mse = ms_error.sqrt();
    Ok(AnovaReport {
        df_model,
        df_error,
        ss_model,
        ss_error,
        ss_total,
        ms_model,
        ms_error,
        f,
        p,
        r_square: if ss_total > 0.0 { ss_model / ss_total } else { 0.0 },
        coeff_var: 100.0 * root_mse / grand_mean,
        root_mse,
        grand_mean,
    })
}

impl AnovaReport {
    /// Aligned table in the usual source / DF / SS / MS / F / p layout.
    pub fn to_text(&self, response: &str) -> String {
        let mut s = format!("Dependent variable: {response}\n");
        s.push_str(&format!(
            "{:<16} {:>4} {:>16} {:>14} {:>8} {:>8}\n",
            "Source", "DF", "Sum of Squares", "Mean Square", "F Value", "Pr > F"
        ));
        s.push_str(&format!(
            "{:<16} {:>4} {:>16.8} {:>14.8} {:>8.2} {:>8.4}\n",
            "Model", self.df_model, self.ss_model, self.ms_model, self.f, self.p
        ));
        s.push_str(&format!(
            "{:<16} {:>4} {:>16.8} {:>14.8}\n",
            "Error", self.df_error, self.ss_error, self.ms_error
        ));
        s.push_str(&format!(
            "{:<16} {:>4} {:>16.8}\n\n",
            "Corrected Total",
            self.df_model + self.df_error,
            self.ss_total
        ));
        s.push_str(&format!(
            "{:>10} {:>10} {:>10} {:>10}\n{:>10.6} {:>10.6} {:>10.6} {:>10.6}\n",
            "R-Square", "Coeff Var", "Root MSE", "Mean", self.r_square, self.coeff_var, self.root_mse, self.grand_mean
        ));
        s
    }

    pub fn csv_header() -> &'static str {
        "df_model,df_error,ss_model,ss_error,ss_total,ms_model,ms_error,f,p,r_square,coeff_var,root_mse,grand_mean"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.df_model,
            self.df_error,
            self.ss_model,
            self.ss_error,
            self.ss_total,
            self.ms_model,
            self.ms_error,
            self.f,
            self.p,
            self.r_square,
            self.coeff_var,
            self.root_mse,
            self.grand_mean
        )
    }
}
