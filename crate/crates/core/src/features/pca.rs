use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::linalg::{jacobi_eigen, Matrix, SymmetricEigen};

use super::{orient_rows, FeatureKind, FeatureMap, Projection};

pub(super) fn eigen_of(x: &Matrix) -> Result<(Vec<f64>, SymmetricEigen)> {
    let cov = x.covariance()?;
    if !cov.is_finite() {
        return Err(Error::Numeric("covariance is not finite".into()));
    }
    Ok((x.col_means(), jacobi_eigen(&cov)?))
}

/// Principal components of the covariance matrix, keeping the fewest whose
/// cumulative variance reaches `variance_target`.
pub fn pca_fit(ds: &Dataset, variance_target: f64) -> Result<FeatureMap> {
    if !(variance_target > 0.0 && variance_target <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "variance target must be in (0, 1], got {variance_target}"
        )));
    }
    fit(ds, |ratios| {
        let mut acc = 0.0;
        for (k, r) in ratios.iter().enumerate() {
            acc += r;
            // Guard against the cumulative sum landing a hair under 1.
            if acc >= variance_target - 1e-12 {
                return k + 1;
            }
        }
        ratios.len()
    })
}

/// Principal components, keeping exactly `n_components`.
pub fn pca_fit_n(ds: &Dataset, n_components: usize) -> Result<FeatureMap> {
    if n_components == 0 || n_components > ds.n_attributes() {
        return Err(Error::InvalidParameter(format!(
            "cannot keep {n_components} of {} components",
            ds.n_attributes()
        )));
    }
    fit(ds, |_| n_components)
}

fn fit(ds: &Dataset, choose: impl Fn(&[f64]) -> usize) -> Result<FeatureMap> {
    let d = ds.n_attributes();
    if ds.n_rows() <= d {
        return Err(Error::InsufficientData(format!(
            "PCA on {d} attributes needs more than {d} rows"
        )));
    }
    let x = ds.to_matrix()?;
    let (center, eig) = eigen_of(&x)?;
    let total: f64 = eig.values.iter().map(|v| v.max(0.0)).sum();
    if !(total > 0.0) {
        return Err(Error::Numeric("data has zero total variance".into()));
    }
    let ratios: Vec<f64> = eig.values.iter().map(|v| v.max(0.0) / total).collect();
    let c = choose(&ratios);
    let mut loadings = Matrix::zeros(c, d);
    for k in 0..c {
        for j in 0..d {
            loadings[(k, j)] = eig.vectors[(j, k)];
        }
    }
    orient_rows(&mut loadings);
    let names = (1..=c).map(|k| format!("PC{k}")).collect();
    let mut map = FeatureMap::new(
        FeatureKind::Pca,
        ds.names().to_vec(),
        names,
        Projection::Linear { loadings, center },
    );
    map.eigenvalues = eig.values.clone();
    map.explained_variance_ratios = ratios[..c].to_vec();
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Label;

    fn ds(rows: &[Vec<f64>]) -> Dataset {
        let names = (0..rows[0].len()).map(|j| format!("a{j}")).collect();
        let labels = (0..rows.len())
            .map(|i| if i % 2 == 0 { Label::Gamma } else { Label::Hadron })
            .collect();
        Dataset::from_matrix(names, &Matrix::from_rows(rows).unwrap(), labels, "t").unwrap()
    }

    #[test]
    fn axis_aligned_variances() {
        // Uncorrelated columns whose variances stand 4 : 1.
        let a = [-2.0, 2.0, -2.0, 2.0];
        let b = [-1.0, -1.0, 1.0, 1.0];
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![a[i % 4], b[i % 4]]).collect();
        let m = pca_fit(&ds(&rows), 1.0).unwrap();
        let l = m.loadings().unwrap();
        assert_eq!(m.n_outputs(), 2);
        assert!((l[(0, 0)] - 1.0).abs() < 1e-12 && l[(0, 1)].abs() < 1e-12);
        assert!((m.explained_variance_ratios[0] - 0.8).abs() < 1e-12);
        assert!((m.explained_variance_ratios[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn variance_target_picks_fewest_components() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let t = i as f64;
                vec![10.0 * t, 0.1 * (t * 1.3).sin(), 0.1 * (t * 0.7).cos()]
            })
            .collect();
        let m = pca_fit(&ds(&rows), 0.95).unwrap();
        assert_eq!(m.n_outputs(), 1);
        assert_eq!(m.output_names, vec!["PC1"]);
    }

    #[test]
    fn center_maps_to_origin() {
        let rows: Vec<Vec<f64>> = (0..15)
            .map(|i| vec![i as f64, (i * i) as f64 % 7.0, (i as f64).sqrt()])
            .collect();
        let m = pca_fit_n(&ds(&rows), 3).unwrap();
        let Projection::Linear { center, .. } = &m.projection else { unreachable!() };
        let out = m.project(&Matrix::from_rows(&[center.clone()]).unwrap()).unwrap();
        assert!(out.row(0).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn too_few_rows_rejected() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(pca_fit(&ds(&rows), 0.95).is_err());
    }
}
