//! Test-only oracles, written independently of the library code they check.
#![allow(dead_code)]

use std::path::PathBuf;

use gammasep::{Dataset, Label, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn data_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/magic04.data")
}

/// AUC by counting every (gamma, hadron) pair; ties count one half.
pub fn brute_auc(scores: &[f64], y: &[Label]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, yi) in y.iter().enumerate() {
        if !yi.is_gamma() {
            continue;
        }
        for (j, yj) in y.iter().enumerate() {
            if yj.is_gamma() {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Adjusted Fisher–Pearson skewness straight from the central moments.
pub fn direct_skewness(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    let g1 = m3 / m2.powf(1.5);
    g1 * (n * (n - 1.0)).sqrt() / (n - 2.0)
}

/// Tanh–sinh quadrature of `f` over `[a, b]`. `f` receives the abscissa
/// and its distances to both ends, computed without cancellation so that
/// endpoint singularities are handled.
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mut prev = f64::NAN;
    let mut h = 0.5;
    for _ in 0..10 {
        let mut sum = 0.0;
        let n = (6.5 / h) as i64;
        for j in -n..=n {
            let t = j as f64 * h;
            let s = std::f64::consts::FRAC_PI_2 * t.sinh();
            let w = std::f64::consts::FRAC_PI_2 * t.cosh() / s.cosh().powi(2);
            let da = half * 2.0 / (1.0 + (-2.0 * s).exp());
            let db = half * 2.0 / (1.0 + (2.0 * s).exp());
            if da == 0.0 || db == 0.0 || w == 0.0 {
                continue;
            }
            sum += w * f(a + da, da, db);
        }
        let est = sum * h * half;
        if (est - prev).abs() <= 1e-14 * est.abs().max(1e-300) {
            return est;
        }
        prev = est;
        h /= 2.0;
    }
    prev
}

/// Upper tail of the F(d1, d2) distribution by integrating the Beta
/// density of `d1·F / (d1·F + d2)`.
pub fn f_sf_oracle(f: f64, d1: f64, d2: f64) -> f64 {
    let (a, b) = (d1 / 2.0, d2 / 2.0);
    let u0 = d1 * f / (d1 * f + d2);
    let ln_beta = statrs::function::gamma::ln_gamma(a) + statrs::function::gamma::ln_gamma(b)
        - statrs::function::gamma::ln_gamma(a + b);
    // Arguments are u and 1 − u, each taken from the side where it is exact.
    let dens = |u: f64, one_minus: f64| ((a - 1.0) * u.ln() + (b - 1.0) * one_minus.ln() - ln_beta).exp();
    if u0 <= 0.5 {
        1.0 - tanh_sinh(|_, da, _| dens(da, 1.0 - da), 0.0, u0)
    } else {
        tanh_sinh(|u, _, db| dens(u, db), u0, 1.0)
    }
}

/// Ten-attribute dataset of standard normals with the labels given.
pub fn gaussian_dataset(rng: &mut ChaCha8Rng, labels: &[Label], shift: f64) -> Dataset {
    let mut values = Vec::with_capacity(labels.len() * 10);
    for l in labels {
        for j in 0..10 {
            let z: f64 = StandardNormal.sample(rng);
            let m = if l.is_gamma() { shift * (j % 3) as f64 } else { 0.0 };
            values.push(z * (1.0 + j as f64) + m);
        }
    }
    Dataset::new(Dataset::attribute_names(), values, labels.to_vec(), "test").unwrap()
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<Label> {
    let mut y: Vec<Label> = (0..n)
        .map(|_| if rng.random_bool(0.6) { Label::Gamma } else { Label::Hadron })
        .collect();
    y[0] = Label::Gamma;
    y[1] = Label::Hadron;
    y
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sample_cov(x: &Matrix) -> Vec<Vec<f64>> {
    let (n, d) = (x.rows(), x.cols());
    let m: Vec<f64> = (0..d).map(|j| (0..n).map(|i| x.row(i)[j]).sum::<f64>() / n as f64).collect();
    let mut c = vec![vec![0.0; d]; d];
    for i in 0..n {
        let r = x.row(i);
        for a in 0..d {
            for b in 0..d {
                c[a][b] += (r[a] - m[a]) * (r[b] - m[b]);
            }
        }
    }
    for row in &mut c {
        for v in row.iter_mut() {
            *v /= (n - 1) as f64;
        }
    }
    c
}

/// A seeded random SVM dual problem: `(x, y)` with both classes present.
pub fn svm_problem(seed: u64) -> (Matrix, Vec<bool>) {
    let mut r = rng(seed);
    let n = r.random_range(8..60);
    let d = r.random_range(1..5);
    let y: Vec<bool> = (0..n).map(|i| i == 0 || (i != 1 && r.random_bool(0.5))).collect();
    let rows: Vec<Vec<f64>> = y
        .iter()
        .map(|&g| {
            (0..d)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut r);
                    z + if g { 0.7 } else { 0.0 }
                })
                .collect()
        })
        .collect();
    (Matrix::from_rows(&rows).unwrap(), y)
}

/// Box and equality feasibility of the returned α, and a trace of dual
/// objective values that never decreases. Returns a description of the
/// first violation.
pub fn check_svm_dual(seed: u64) -> Result<(), String> {
    use gammasep::models::{solve_dual, DualProblem};
    let (x, y) = svm_problem(seed);
    let mut r = rng(seed ^ 0x5eed);
    let c = [0.1, 1.0, 10.0][r.random_range(0..3)];
    let gamma = r.random_range(0.05..2.0);
    let sol = solve_dual(&DualProblem {
        x: &x,
        y: &y,
        c,
        gamma,
        tol: 1e-3,
        max_iter: 1_000_000,
        cache_mb: 1,
        shrinking: seed % 2 == 0,
        trace: true,
    })
    .map_err(|e| e.to_string())?;
    let eq: f64 = sol.alpha.iter().zip(&y).map(|(a, &g)| if g { *a } else { -*a }).sum();
    if eq.abs() > 1e-9 * c.max(1.0) * y.len() as f64 {
        return Err(format!("seed {seed}: sum y_i alpha_i = {eq}"));
    }
    if let Some(a) = sol.alpha.iter().find(|a| **a < -1e-12 || **a > c + 1e-12) {
        return Err(format!("seed {seed}: alpha {a} outside [0, {c}]"));
    }
    let trace = sol.objective_trace.as_ref().ok_or("no trace")?;
    for w in trace.windows(2) {
        if w[1] < w[0] - 1e-12 * w[0].abs().max(1.0) {
            return Err(format!("seed {seed}: objective fell from {} to {}", w[0], w[1]));
        }
    }
    if !sol.converged {
        return Err(format!("seed {seed}: did not converge"));
    }
    Ok(())
}

/// Largest relative error between the analytic logistic gradient and
/// central differences of the objective, on a seeded random problem.
pub fn lr_gradient_error(seed: u64) -> f64 {
    use gammasep::models::{logistic_gradient, logistic_objective};
    let (x, y) = svm_problem(seed);
    let mut r = rng(seed ^ 0xfeed);
    let theta: Vec<f64> = (0..=x.cols()).map(|_| r.random_range(-1.5..1.5)).collect();
    let l2 = r.random_range(0.0..2.0);
    let g = logistic_gradient(&x, &y, &theta, l2);
    let mut worst: f64 = 0.0;
    for j in 0..theta.len() {
        let h = 1e-5 * theta[j].abs().max(1.0);
        let (mut up, mut dn) = (theta.clone(), theta.clone());
        up[j] += h;
        dn[j] -= h;
        let fd = (logistic_objective(&x, &y, &up, l2) - logistic_objective(&x, &y, &dn, l2)) / (2.0 * h);
        let norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-8);
        worst = worst.max((fd - g[j]).abs() / norm);
    }
    worst
}

/// Ten correlated attributes: the later ones mix the earlier ones.
pub fn correlated_dataset(seed: u64, n: usize) -> Dataset {
    let mut rng = rng(seed);
    let y = random_labels(&mut rng, n);
    let base = gaussian_dataset(&mut rng, &y, 0.8);
    let mut values = Vec::new();
    for r in 0..n {
        let row = base.row(r);
        for j in 0..10 {
            values.push(row[j] + if j > 0 { 0.6 * row[j - 1] } else { 0.0 });
        }
    }
    Dataset::new(Dataset::attribute_names(), values, y, "test").unwrap()
}

/// PCA reconstruction from all ten components: largest absolute error.
pub fn pca_reconstruction_error(ds: &Dataset) -> f64 {
    let pca = gammasep::features::pca_fit_n(ds, 10).unwrap();
    let x = ds.to_matrix().unwrap();
    let scores = pca.project(&x).unwrap();
    let w = pca.loadings().unwrap();
    let back = scores.matmul(w).unwrap();
    let m = x.col_means();
    let mut err: f64 = 0.0;
    for i in 0..x.rows() {
        for j in 0..10 {
            err = err.max((back.row(i)[j] + m[j] - x.row(i)[j]).abs());
        }
    }
    err
}

/// Seeded groups with ragged sizes and a shifted mean per group.
pub fn random_groups(seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let k = r.random_range(2..9);
    (0..k)
        .map(|g| {
            let n = r.random_range(2..12);
            let shift = r.random_range(-1.0..1.0) * g as f64 * 0.3;
            (0..n).map(|_| { let z: f64 = StandardNormal.sample(&mut r); z + shift }).collect()
        })
        .collect()
}
