use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::linalg::{symmetric_decorrelation, Matrix};

use super::pca::eigen_of;
use super::{orient_rows, FeatureKind, FeatureMap, Projection};

#[derive(Debug, Clone, PartialEq)]
pub struct IcaParams {
    pub n_components: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for IcaParams {
    fn default() -> Self {
        IcaParams {
            n_components: 5,
            max_iter: 200,
            tol: 1e-4,
            seed: 0,
        }
    }
}

/// FastICA with the log-cosh contrast and parallel (symmetric) updates.
///
/// The data are whitened by PCA, so the returned unmixing rows combine the
/// whitening and rotation and act on centered original attributes. Outputs
/// have identity sample covariance. Running out of iterations is reported
/// through `converged`, not as an error.
pub fn ica_fit(ds: &Dataset, p: &IcaParams) -> Result<FeatureMap> {
    let d = ds.n_attributes();
    let c = p.n_components;
    if c == 0 || c > d {
        return Err(Error::InvalidParameter(format!("cannot extract {c} of {d} components")));
    }
    if ds.n_rows() <= d {
        return Err(Error::InsufficientData(format!("ICA on {d} attributes needs more than {d} rows")));
    }
    let x = ds.to_matrix()?;
    let (center, eig) = eigen_of(&x)?;
    let mut whitening = Matrix::zeros(c, d);
    for k in 0..c {
        let ev = eig.values[k];
        if !(ev > 0.0) {
            return Err(Error::Numeric("rank-deficient data cannot be whitened".into()));
        }
        let s = 1.0 / ev.sqrt();
        for j in 0..d {
            whitening[(k, j)] = eig.vectors[(j, k)] * s;
        }
    }
    let n = x.rows();
    let mut z = Matrix::zeros(n, c);
    let mut centered = vec![0.0; d];
    for (i, r) in x.iter_rows().enumerate() {
        for j in 0..d {
            centered[j] = r[j] - center[j];
        }
        for k in 0..c {
            z[(i, k)] = crate::linalg::dot(whitening.row(k), &centered);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let init: Vec<f64> = (0..c * c).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut w = symmetric_decorrelation(&Matrix::from_vec(c, c, init)?)?;

    let mut iterations = 0;
    let mut converged = false;
    let mut wz = vec![0.0; c];
    while iterations < p.max_iter {
        iterations += 1;
        let mut next = Matrix::zeros(c, c);
        let mut mean_deriv = vec![0.0; c];
        for row in z.iter_rows() {
            for k in 0..c {
                wz[k] = crate::linalg::dot(w.row(k), row);
            }
            for k in 0..c {
                let g = wz[k].tanh();
                mean_deriv[k] += 1.0 - g * g;
                let nk = next.row_mut(k);
                for (a, &zv) in nk.iter_mut().zip(row) {
                    *a += g * zv;
                }
            }
        }
        let nf = n as f64;
        for k in 0..c {
            let dk = mean_deriv[k] / nf;
            let wk = w.row(k).to_vec();
            for (a, wv) in next.row_mut(k).iter_mut().zip(wk) {
                *a = *a / nf - dk * wv;
            }
        }
        let next = symmetric_decorrelation(&next)?;
        let lim = (0..c)
            .map(|k| (crate::linalg::dot(next.row(k), w.row(k)).abs() - 1.0).abs())
            .fold(0.0, f64::max);
        w = next;
        if lim < p.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::info!("FastICA stopped at the {}-iteration cap", p.max_iter);
    }

    let mut unmixing = w.matmul(&whitening)?;
    orient_rows(&mut unmixing);
    let names = (1..=c).map(|k| format!("IC{k}")).collect();
    let mut map = FeatureMap::new(
        FeatureKind::Ica,
        ds.names().to_vec(),
        names,
        Projection::Linear {
            loadings: unmixing,
            center,
        },
    );
    map.iterations = iterations;
    map.converged = converged;
    Ok(map)
}
