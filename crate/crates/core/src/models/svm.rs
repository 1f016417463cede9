//! C-SVM with an RBF kernel, trained by SMO on the dual
//!
//! ```text
//! max  Σ α_i − ½ Σ_ij α_i α_j y_i y_j K(x_i, x_j)
//! s.t. 0 ≤ α_i ≤ C,  Σ α_i y_i = 0
//! ```
//!
//! Working pairs are chosen by maximal violation for `i` and by
//! second-order gain for `j`; iteration stops once the maximal KKT
//! violation falls below `tol`. Kernel rows are kept in an LRU cache in
//! single precision while gradients accumulate in double.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::join_floats;

/// Curvature floor for non-positive-definite pairs.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaRule {
    /// `1 / d`.
    InverseDim,
    /// `1 / (d · mean attribute variance)` of the training data.
    VarianceScaled,
    Fixed(f64),
}

impl GammaRule {
    pub fn resolve(self, x: &Matrix) -> f64 {
        let d = x.cols() as f64;
        match self {
            GammaRule::InverseDim => 1.0 / d,
            GammaRule::VarianceScaled => {
                let n = x.rows() as f64;
                let mean_var = (0..x.cols())
                    .map(|j| {
                        let c = x.column(j);
                        let m = c.iter().sum::<f64>() / n;
                        c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n
                    })
                    .sum::<f64>()
                    / d;
                if mean_var > 0.0 {
                    1.0 / (d * mean_var)
                } else {
                    1.0 / d
                }
            }
            GammaRule::Fixed(g) => g,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: GammaRule,
    pub tol: f64,
    /// `None` means `max(10⁷, 100·n)`.
    pub max_iter: Option<usize>,
    pub cache_mb: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            gamma: GammaRule::InverseDim,
            tol: 1e-3,
            max_iter: None,
            cache_mb: 2048,
        }
    }
}

/// One dual problem instance, exposed so the solver can be checked directly.
#[derive(Debug, Clone)]
pub struct DualProblem<'a> {
    pub x: &'a Matrix,
    pub y: &'a [bool],
    pub c: f64,
    pub gamma: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub cache_mb: usize,
    /// Temporarily drop bounded variables unlikely to move.
    pub shrinking: bool,
    /// Record the dual objective after every iteration.
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Gradient of the minimization form `½αᵀQα − Σα`.
    pub grad: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The maximized dual objective; the first entry is at `α = 0`.
    pub objective_trace: Option<Vec<f64>>,
}

impl DualSolution {
    pub fn objective(&self) -> f64 {
        self.alpha
            .iter()
            .zip(&self.grad)
            .map(|(a, g)| -0.5 * a * (g - 1.0))
            .sum()
    }
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// Beyond this exponent the kernel rounds to zero in single precision.
const F32_UNDERFLOW: f64 = 110.0;

/// Rows of `Q_ij = y_i y_j K(x_i, x_j)`, least recently used evicted first.
struct KernelCache {
    /// Attribute-major copy of the training rows, so one kernel row is a
    /// handful of contiguous passes.
    xt: Matrix,
    sign: Vec<f64>,
    gamma: f64,
    rows: Vec<Option<Vec<f32>>>,
    stamp: Vec<u64>,
    clock: u64,
    used: usize,
    capacity: usize,
    dist: Vec<f64>,
}

impl KernelCache {
    fn new(x: &Matrix, sign: Vec<f64>, gamma: f64, cache_mb: usize) -> Self {
        let n = x.rows();
        let row_bytes = (n * std::mem::size_of::<f32>()).max(1);
        let capacity = ((cache_mb << 20) / row_bytes).clamp(2, n.max(2));
        KernelCache {
            xt: x.transpose(),
            sign,
            gamma,
            rows: vec![None; n],
            stamp: vec![0; n],
            clock: 0,
            used: 0,
            capacity,
            dist: vec![0.0; n],
        }
    }

    fn ensure(&mut self, i: usize) {
        self.clock += 1;
        self.stamp[i] = self.clock;
        if self.rows[i].is_some() {
            return;
        }
        let n = self.rows.len();
        let mut buf = if self.used >= self.capacity {
            let victim = (0..n)
                .filter(|&k| k != i && self.rows[k].is_some())
                .min_by_key(|&k| self.stamp[k])
                .expect("cache holds at least one row");
            self.rows[victim].take().expect("victim is cached")
        } else {
            self.used += 1;
            vec![0f32; n]
        };
        self.dist.iter_mut().for_each(|v| *v = 0.0);
        for a in 0..self.xt.rows() {
            let col = self.xt.row(a);
            let xi = col[i];
            for (d, &v) in self.dist.iter_mut().zip(col) {
                let t = v - xi;
                *d += t * t;
            }
        }
        let si = self.sign[i];
        for ((q, &d), &sj) in buf.iter_mut().zip(&self.dist).zip(&self.sign) {
            let e = self.gamma * d;
            // Past this point the exponential rounds to zero in f32 anyway.
            let k = if e > F32_UNDERFLOW { 0.0 } else { (-e).exp() as f32 };
            *q = if si == sj { k } else { -k };
        }
        self.rows[i] = Some(buf);
    }

    fn get(&self, i: usize) -> &[f32] {
        self.rows[i].as_deref().expect("row cached")
    }
}

/// Iterations between shrinking passes.
const SHRINK_EVERY: usize = 1000;

struct Smo<'p> {
    p: &'p DualProblem<'p>,
    y: Vec<f64>,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    /// `C · Σ_{j at upper bound} Q_ij`, needed to rebuild shrunk gradients.
    grad_bar: Vec<f64>,
    active: Vec<usize>,
    cache: KernelCache,
    unshrunk: bool,
}

impl Smo<'_> {
    fn is_upper(&self, t: usize) -> bool {
        self.alpha[t] >= self.p.c
    }

    fn is_lower(&self, t: usize) -> bool {
        self.alpha[t] <= 0.0
    }

    /// `(i, j)` over the active set, or `None` once the violation is below tol.
    fn select(&mut self) -> Option<(usize, usize)> {
        let mut gmax = f64::NEG_INFINITY;
        let mut gmax_idx = usize::MAX;
        for &t in &self.active {
            if self.y[t] > 0.0 {
                if !self.is_upper(t) && -self.grad[t] >= gmax {
                    gmax = -self.grad[t];
                    gmax_idx = t;
                }
            } else if !self.is_lower(t) && self.grad[t] >= gmax {
                gmax = self.grad[t];
                gmax_idx = t;
            }
        }
        if gmax_idx == usize::MAX {
            return None;
        }
        let i = gmax_idx;
        self.cache.ensure(i);
        let qi = self.cache.get(i);
        let yi = self.y[i];
        let mut gmax2 = f64::NEG_INFINITY;
        let mut best_j = usize::MAX;
        let mut obj_min = f64::INFINITY;
        for &t in &self.active {
            let (grad_diff, quad) = if self.y[t] > 0.0 {
                if self.alpha[t] <= 0.0 {
                    continue;
                }
                gmax2 = gmax2.max(self.grad[t]);
                (gmax + self.grad[t], 2.0 - 2.0 * yi * qi[t] as f64)
            } else {
                if self.alpha[t] >= self.p.c {
                    continue;
                }
                gmax2 = gmax2.max(-self.grad[t]);
                (gmax - self.grad[t], 2.0 + 2.0 * yi * qi[t] as f64)
            };
            if grad_diff > 0.0 {
                let q = if quad > 0.0 { quad } else { TAU };
                let obj = -(grad_diff * grad_diff) / q;
                if obj <= obj_min {
                    obj_min = obj;
                    best_j = t;
                }
            }
        }
        if gmax + gmax2 < self.p.tol || best_j == usize::MAX {
            return None;
        }
        Some((i, best_j))
    }

    fn step(&mut self, i: usize, j: usize) {
        let c = self.p.c;
        self.cache.ensure(i);
        self.cache.ensure(j);
        let qij = self.cache.get(i)[j] as f64;
        let (old_ai, old_aj) = (self.alpha[i], self.alpha[j]);
        let (mut ai, mut aj) = (old_ai, old_aj);
        let (gi, gj) = (self.grad[i], self.grad[j]);
        // RBF rows have unit diagonal.
        if self.y[i] != self.y[j] {
            let quad = (2.0 + 2.0 * qij).max(TAU);
            let delta = (-gi - gj) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = (2.0 - 2.0 * qij).max(TAU);
            let delta = (gi - gj) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        let was_upper = [old_ai >= c, old_aj >= c];
        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let (dai, daj) = (ai - old_ai, aj - old_aj);
        let qi = self.cache.get(i);
        let qj = self.cache.get(j);
        for &t in &self.active {
            self.grad[t] += qi[t] as f64 * dai + qj[t] as f64 * daj;
        }
        for (k, (idx, q)) in [(i, qi), (j, qj)].into_iter().enumerate() {
            let now_upper = self.alpha[idx] >= c;
            if was_upper[k] != now_upper {
                let s = if now_upper { c } else { -c };
                for (g, &v) in self.grad_bar.iter_mut().zip(q) {
                    *g += s * v as f64;
                }
            }
        }
    }

    fn be_shrunk(&self, t: usize, gmax1: f64, gmax2: f64) -> bool {
        let g = self.grad[t];
        if self.is_upper(t) {
            if self.y[t] > 0.0 {
                -g > gmax1
            } else {
                -g > gmax2
            }
        } else if self.is_lower(t) {
            if self.y[t] > 0.0 {
                g > gmax2
            } else {
                g > gmax1
            }
        } else {
            false
        }
    }

    fn shrink(&mut self) {
        let (mut gmax1, mut gmax2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &t in &self.active {
            let g = self.grad[t];
            if self.y[t] > 0.0 {
                if !self.is_upper(t) {
                    gmax1 = gmax1.max(-g);
                }
                if !self.is_lower(t) {
                    gmax2 = gmax2.max(g);
                }
            } else {
                if !self.is_upper(t) {
                    gmax2 = gmax2.max(-g);
                }
                if !self.is_lower(t) {
                    gmax1 = gmax1.max(g);
                }
            }
        }
        if !self.unshrunk && gmax1 + gmax2 <= self.p.tol * 10.0 {
            self.unshrunk = true;
            self.reconstruct();
        }
        let keep: Vec<usize> = self
            .active
            .iter()
            .copied()
            .filter(|&t| !self.be_shrunk(t, gmax1, gmax2))
            .collect();
        self.active = keep;
    }

    /// Recompute the gradient of every inactive variable and reactivate all.
    fn reconstruct(&mut self) {
        let n = self.alpha.len();
        if self.active.len() == n {
            return;
        }
        let mut is_active = vec![false; n];
        for &t in &self.active {
            is_active[t] = true;
        }
        let inactive: Vec<usize> = (0..n).filter(|&t| !is_active[t]).collect();
        for &t in &inactive {
            self.grad[t] = self.grad_bar[t] - 1.0;
        }
        let free: Vec<usize> = self
            .active
            .iter()
            .copied()
            .filter(|&t| !self.is_upper(t) && !self.is_lower(t))
            .collect();
        for f in free {
            self.cache.ensure(f);
            let q = self.cache.get(f);
            let a = self.alpha[f];
            for &t in &inactive {
                self.grad[t] += a * q[t] as f64;
            }
        }
        self.active = (0..n).collect();
    }

    fn dual_objective(&self) -> f64 {
        self.alpha
            .iter()
            .zip(&self.grad)
            .map(|(a, g)| -0.5 * a * (g - 1.0))
            .sum()
    }
}

/// Solve the dual from `α = 0`.
pub fn solve_dual(p: &DualProblem<'_>) -> Result<DualSolution> {
    let n = p.x.rows();
    if p.y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.y.len(),
        });
    }
    if !(p.c > 0.0) || !(p.gamma > 0.0) || !(p.tol > 0.0) {
        return Err(Error::InvalidParameter("SVM needs C > 0, gamma > 0, tol > 0".into()));
    }
    let y: Vec<f64> = p.y.iter().map(|&g| if g { 1.0 } else { -1.0 }).collect();
    let mut smo = Smo {
        p,
        cache: KernelCache::new(p.x, y.clone(), p.gamma, p.cache_mb),
        y,
        alpha: vec![0.0; n],
        grad: vec![-1.0; n],
        grad_bar: vec![0.0; n],
        active: (0..n).collect(),
        unshrunk: false,
    };
    let mut trace = p.trace.then(|| vec![0.0]);

    let mut iterations = 0;
    let mut converged = false;
    let mut counter = SHRINK_EVERY.min(n);
    while iterations < p.max_iter {
        counter -= 1;
        if counter == 0 {
            counter = SHRINK_EVERY.min(n);
            if p.shrinking {
                smo.shrink();
            }
        }
        let (i, j) = match smo.select() {
            Some(pair) => pair,
            None => {
                // Optimal on the active set; confirm on the full problem.
                if smo.active.len() == n {
                    converged = true;
                    break;
                }
                smo.reconstruct();
                match smo.select() {
                    Some(pair) => {
                        counter = 1;
                        pair
                    }
                    None => {
                        converged = true;
                        break;
                    }
                }
            }
        };
        iterations += 1;
        smo.step(i, j);
        if let Some(tr) = trace.as_mut() {
            // Shrunk gradients are stale; the objective needs them all.
            if smo.active.len() < n {
                smo.reconstruct();
            }
            tr.push(smo.dual_objective());
        }
    }
    if !converged {
        log::warn!("SMO reached the iteration cap ({}) before tol {}", p.max_iter, p.tol);
        smo.reconstruct();
    }

    // Offset from free vectors, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = smo.y[t] * smo.grad[t];
        if smo.is_upper(t) {
            if smo.y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if smo.is_lower(t) {
            if smo.y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    Ok(DualSolution {
        alpha: smo.alpha,
        grad: smo.grad,
        rho,
        iterations,
        converged,
        objective_trace: trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub gamma: f64,
    pub support: Matrix,
    /// `α_i · y_i` for each support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub(super) fn fit(p: &SvmParams, x: &Matrix, y: &[bool]) -> Result<SvmModel> {
    let gamma = p.gamma.resolve(x);
    let n = x.rows();
    let sol = solve_dual(&DualProblem {
        x,
        y,
        c: p.c,
        gamma,
        tol: p.tol,
        max_iter: p.max_iter.unwrap_or_else(|| (100 * n).max(10_000_000)),
        cache_mb: p.cache_mb,
        shrinking: true,
        trace: false,
    })?;
    let sv: Vec<usize> = (0..n).filter(|&i| sol.alpha[i] > 0.0).collect();
    let coef = sv
        .iter()
        .map(|&i| if y[i] { sol.alpha[i] } else { -sol.alpha[i] })
        .collect();
    Ok(SvmModel {
        gamma,
        support: x.select_rows(&sv),
        coef,
        rho: sol.rho,
        converged: sol.converged,
        iterations: sol.iterations,
    })
}

impl SvmModel {
    /// Raw decision value `Σ α_i y_i K(x_i, x) − ρ`.
    pub(super) fn scores(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows()
            .map(|q| {
                self.support
                    .iter_rows()
                    .zip(&self.coef)
                    .map(|(s, c)| c * rbf(s, q, self.gamma))
                    .sum::<f64>()
                    - self.rho
            })
            .collect()
    }

    pub(super) fn write_text(&self, s: &mut String) {
        s.push_str(&format!(
            "gamma = {}\nrho = {}\nconverged = {}\niterations = {}\nsupport_vectors = {}\n",
            self.gamma,
            self.rho,
            self.converged,
            self.iterations,
            self.coef.len()
        ));
        for (r, c) in self.support.iter_rows().zip(&self.coef) {
            s.push_str(&format!("{c} {}\n", join_floats(r)));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (Matrix, Vec<bool>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let t = i as f64 * 0.3;
            rows.push(vec![t.sin(), t.cos()]);
            y.push(false);
            rows.push(vec![3.0 + t.cos(), 3.0 + t.sin()]);
            y.push(true);
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn separates_distant_blobs() {
        let (x, y) = blobs();
        let m = fit(&SvmParams::default(), &x, &y).unwrap();
        assert!(m.converged);
        let s = m.scores(&x);
        assert!(s.iter().zip(&y).all(|(&s, &g)| (s >= 0.0) == g));
    }

    #[test]
    fn solution_is_feasible() {
        let (x, y) = blobs();
        let p = DualProblem {
            x: &x,
            y: &y,
            c: 0.5,
            gamma: 0.5,
            tol: 1e-3,
            max_iter: 100_000,
            cache_mb: 1,
            shrinking: true,
            trace: true,
        };
        let sol = solve_dual(&p).unwrap();
        let balance: f64 = sol
            .alpha
            .iter()
            .zip(&y)
            .map(|(a, &g)| if g { *a } else { -a })
            .sum();
        assert!(balance.abs() < 1e-8);
        assert!(sol.alpha.iter().all(|&a| (0.0..=0.5).contains(&a)));
        let tr = sol.objective_trace.as_ref().unwrap();
        assert!(tr.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!((tr.last().unwrap() - sol.objective()).abs() < 1e-12);
    }

    #[test]
    fn cached_rows_are_the_rounded_signed_kernel() {
        let rows: Vec<Vec<f64>> = [0.0, 0.5, 3.0, 9.0, 10.4, 10.6, 30.0].iter().map(|&d| vec![d, 0.0]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let sign = vec![1.0, -1.0, 1.0, 1.0, -1.0, 1.0, -1.0];
        let mut cache = KernelCache::new(&x, sign.clone(), 1.0, 1);
        cache.ensure(1);
        for j in 0..rows.len() {
            let exact = (sign[1] * sign[j] * rbf(&rows[1], &rows[j], 1.0)) as f32;
            assert_eq!(cache.get(1)[j], exact, "column {j}");
        }
    }

    #[test]
    fn tiny_cache_matches_large_cache() {
        let (x, y) = blobs();
        let mk = |cache_mb| {
            let p = SvmParams {
                cache_mb,
                ..SvmParams::default()
            };
            fit(&p, &x, &y).unwrap()
        };
        assert_eq!(mk(0), mk(64));
    }

    #[test]
    fn gamma_rules() {
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(GammaRule::InverseDim.resolve(&x), 0.5);
        // population variances 1 and 4, mean 2.5
        assert!((GammaRule::VarianceScaled.resolve(&x) - 1.0 / 5.0).abs() < 1e-15);
        assert_eq!(GammaRule::Fixed(0.3).resolve(&x), 0.3);
    }
}
