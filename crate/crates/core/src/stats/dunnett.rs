use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::ingest::quantile_sorted;

use super::anova::anova_oneway;

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub group: usize,
    /// Treatment mean minus control mean.
    pub difference: f64,
    pub low: f64,
    pub high: f64,
}

impl Comparison {
    pub fn significant(&self) -> bool {
        self.low > 0.0 || self.high < 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DunnettReport {
    pub control: usize,
    pub comparisons: Vec<Comparison>,
    pub critical_value: f64,
    pub std_error: f64,
    pub df: usize,
    pub alpha: f64,
    pub mc_draws: usize,
    pub mc_seed: u64,
}

/// Two-sided critical value of Dunnett's many-to-one statistic with `k`
/// treatments and `df` error degrees of freedom, by Monte Carlo.
///
/// Draw `t` takes `k + 1` standard normals `Z_0..Z_k` followed by one
/// `χ²_df` from a single ChaCha8 stream seeded with `seed`, and records
/// `max_i |Z_i − Z_0| / (S·√2)` with `S² = χ²_df / df`. The result is the
/// `1 − alpha` quantile (linear interpolation) of the recorded maxima.
pub fn dunnett_critical(k: usize, df: usize, alpha: f64, draws: usize, seed: u64) -> Result<f64> {
    if k == 0 || df == 0 || draws < 2 || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(
            "Dunnett critical value needs k >= 1, df >= 1, draws >= 2, 0 < alpha < 1".into(),
        ));
    }
    let chi = ChiSquared::new(df as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = Vec::with_capacity(draws);
    let root2 = std::f64::consts::SQRT_2;
    for _ in 0..draws {
        let z0: f64 = StandardNormal.sample(&mut rng);
        let mut m: f64 = 0.0;
        for _ in 0..k {
            let z: f64 = StandardNormal.sample(&mut rng);
            m = m.max((z - z0).abs());
        }
        let s = (chi.sample(&mut rng) / df as f64).sqrt();
        stats.push(m / (s * root2));
    }
    stats.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&stats, 1.0 - alpha))
}

/// Compare every group against `control` with simultaneous intervals.
/// Groups must all have the same size.
pub fn dunnett(
    groups: &[Vec<f64>],
    control: usize,
    alpha: f64,
    mc_draws: usize,
    seed: u64,
) -> Result<DunnettReport> {
    if control >= groups.len() {
        return Err(Error::InvalidParameter(format!("no group {control} to use as control")));
    }
    let n = groups[0].len();
    if groups.iter().any(|g| g.len() != n) {
        return Err(Error::Unbalanced("Dunnett's test needs equal group sizes".into()));
    }
    let anova = anova_oneway(groups)?;
    let k = groups.len() - 1;
    let d = dunnett_critical(k, anova.df_error, alpha, mc_draws, seed)?;
    let se = (2.0 * anova.ms_error / n as f64).sqrt();
    let mean = |g: &[f64]| g.iter().sum::<f64>() / g.len() as f64;
    let m0 = mean(&groups[control]);
    let comparisons = (0..groups.len())
        .filter(|&i| i != control)
        .map(|i| {
            let difference = mean(&groups[i]) - m0;
            Comparison {
                group: i,
                difference,
                low: difference - d * se,
                high: difference + d * se,
            }
        })
        .collect();
    Ok(DunnettReport {
        control,
        comparisons,
        critical_value: d,
        std_error: se,
        df: anova.df_error,
        alpha,
        mc_draws,
        mc_seed: seed,
    })
}

impl DunnettReport {
    pub fn to_text(&self, names: &[&str]) -> String {
        let name = |i: usize| names.get(i).copied().map_or_else(|| i.to_string(), str::to_string);
        let mut s = format!(
            "Dunnett's two-sided test against {} (alpha {}, error df {}, critical value {:.5}, {} draws, seed {})\n",
            name(self.control),
            self.alpha,
            self.df,
            self.critical_value,
            self.mc_draws,
            self.mc_seed
        );
        s.push_str(&format!(
            "{:<18} {:>12} {:>12} {:>12}  {}\n",
            "Comparison", "Difference", "Lower", "Upper", "Significant"
        ));
        for c in &self.comparisons {
            s.push_str(&format!(
                "{:<18} {:>12.5} {:>12.5} {:>12.5}  {}\n",
                format!("{} - {}", name(c.group), name(self.control)),
                c.difference,
                c.low,
                c.high,
                if c.significant() { "***" } else { "no" }
            ));
        }
        s
    }

    pub fn csv(&self, names: &[&str]) -> String {
        let name = |i: usize| names.get(i).copied().map_or_else(|| i.to_string(), str::to_string);
        let mut s = String::from("group,control,difference,low,high,significant,critical_value\n");
        for c in &self.comparisons {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                name(c.group),
                name(self.control),
                c.difference,
                c.low,
                c.high,
                c.significant(),
                self.critical_value
            ));
        }
        s
    }
}
