use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::scalar::Scalar;

/// Relative norm below which a column is treated as dependent on earlier ones.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Classical Gram-Schmidt without normalization: column `j` minus its projections onto
/// the earlier outputs. The first column is returned unchanged.
pub fn gram_schmidt<T: Scalar>(columns: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let mut out: Vec<Vec<T>> = Vec::with_capacity(columns.len());
    for (j, c) in columns.iter().enumerate() {
        if c.len() != columns[0].len() {
            return Err(Error::InvalidParameter("columns differ in length".into()));
        }
        let mut v = c.clone();
        for u in &out {
            let coef = dot(c, u) / dot(u, u);
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi = *vi - coef * *ui;
            }
        }
        let n_in = norm(c);
        if !(norm(&v) >= T::lit(DEGENERACY_TOL) * n_in) || n_in == T::zero() {
            return Err(Error::DegenerateGeometry(format!(
                "column {j} is (nearly) linearly dependent on the previous columns; \
                 abnormal centroids must not be collinear/coplanar with the normal centroid"
            )));
        }
        out.push(v);
    }
    Ok(out)
}

/// Extends orthonormal `basis` vectors to a full orthonormal basis of `R^d`.
pub fn complete_orthonormal<T: Scalar>(basis: &[Vec<T>], d: usize) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = basis.to_vec();
    for i in 0..d {
        if out.len() == d {
            break;
        }
        let mut v = vec![T::zero(); d];
        v[i] = T::one();
        // two passes keep the result orthogonal to working precision
        for _ in 0..2 {
            for u in &out {
                let c = dot(&v, u);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi = *vi - c * *ui;
                }
            }
        }
        let n = norm(&v);
        if n > T::lit(1e-3) {
            out.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    out
}
