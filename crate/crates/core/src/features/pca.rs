use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Split;

/// Relative eigenvalue threshold below which a direction counts as null.
const RANK_TOL: f64 = 1e-10;

/// Standardize-then-project model. `components` rows are orthonormal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Per-feature standard deviation used for z-scoring (1 for constant features).
    pub scale: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.components.len()
    }

    pub fn standardize(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }

    /// Projects a raw vector onto the principal components.
    pub fn apply(&self, raw: &[f64]) -> Vec<f64> {
        let z = self.standardize(raw);
        self.components
            .iter()
            .map(|c| c.iter().zip(&z).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maps a projected vector back to raw feature units.
    pub fn reconstruct(&self, projected: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.input_dim()];
        for (c, &p) in self.components.iter().zip(projected) {
            for (zi, ci) in z.iter_mut().zip(c) {
                *zi += p * ci;
            }
        }
        z.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((z, m), s)| z * s + m)
            .collect()
    }
}

/// Fits PCA on z-scored rows, keeping the top `target_dim` eigenvectors of the
/// sample covariance. Each component's largest-magnitude entry is made positive.
pub fn fit_pca<R: AsRef<[f64]>>(rows: &[R], target_dim: usize) -> Result<PcaModel> {
    let n = rows.len();
    if target_dim == 0 {
        return Err(Error::InvalidParameter("PCA target dimension must be positive".into()));
    }
    if n < target_dim + 1 {
        return Err(Error::DegenerateGeometry(format!(
            "PCA needs at least {} rows, got {n}",
            target_dim + 1
        )));
    }
    let p = rows[0].as_ref().len();
    if p < target_dim {
        return Err(Error::InvalidParameter(format!("cannot reduce {p} features to {target_dim}")));
    }
    if rows.iter().any(|r| r.as_ref().len() != p) {
        return Err(Error::InvalidParameter("ragged feature matrix".into()));
    }
    if rows.iter().any(|r| r.as_ref().iter().any(|v| !v.is_finite())) {
        return Err(Error::Numeric("non-finite value in PCA input".into()));
    }

    let mut mean = vec![0.0; p];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r.as_ref()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut scale = vec![0.0; p];
    for r in rows {
        for ((s, v), m) in scale.iter_mut().zip(r.as_ref()).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut scale {
        *s = (*s / (n - 1) as f64).sqrt();
        if !(*s > 0.0) {
            *s = 1.0;
        }
    }

    let z = DMatrix::from_fn(n, p, |i, j| (rows[i].as_ref()[j] - mean[j]) / scale[j]);
    let cov = (z.transpose() * &z) / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let top = eig.eigenvalues[order[0]];
    let rank = order.iter().filter(|&&i| eig.eigenvalues[i] > RANK_TOL * top.max(f64::MIN_POSITIVE)).count();
    if !(top > 0.0) || rank < target_dim {
        return Err(Error::DegenerateGeometry(format!(
            "feature matrix has rank {} after standardization, need {target_dim}",
            if top > 0.0 { rank } else { 0 }
        )));
    }

    let mut components = Vec::with_capacity(target_dim);
    let mut explained_variance = Vec::with_capacity(target_dim);
    for &i in order.iter().take(target_dim) {
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        let pivot = v.iter().copied().fold(0.0, |acc: f64, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        explained_variance.push(eig.eigenvalues[i].max(0.0));
    }
    Ok(PcaModel {
        mean,
        scale,
        components,
        explained_variance,
    })
}

/// Like [`fit_pca`] but refuses rows tagged as test data.
pub fn fit_pca_tagged<R: AsRef<[f64]>>(rows: &[(Split, R)], target_dim: usize) -> Result<PcaModel> {
    if rows.iter().any(|(s, _)| *s != Split::Train) {
        return Err(Error::InvalidParameter("PCA must be fitted on training (DS1) rows only".into()));
    }
    let plain: Vec<&[f64]> = rows.iter().map(|(_, r)| r.as_ref()).collect();
    fit_pca(&plain, target_dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rows(n: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
    }

    #[test]
    fn components_orthonormal_and_sorted() {
        let m = fit_pca(&random_rows(200, 22, 1), 8).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let d: f64 = m.components[i].iter().zip(&m.components[j]).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-9);
            }
        }
        assert!(m.explained_variance.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn mean_maps_to_zero() {
        let rows = random_rows(100, 22, 2);
        let m = fit_pca(&rows, 8).unwrap();
        assert!(m.apply(&m.mean).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn degenerate_inputs() {
        let row = vec![1.0; 22];
        let rows = vec![row; 20];
        assert!(matches!(fit_pca(&rows, 8), Err(Error::DegenerateGeometry(_))));
        assert!(fit_pca(&random_rows(5, 22, 3), 8).is_err());
        let tagged = vec![(Split::Train, vec![0.0; 22]), (Split::Test, vec![1.0; 22])];
        assert!(matches!(fit_pca_tagged(&tagged, 1), Err(Error::InvalidParameter(_))));
    }
}
