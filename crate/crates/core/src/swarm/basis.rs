use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::scalar::Scalar;

/// Basis functions `psi_l` over `R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisSet {
    /// `x_1 .. x_d`.
    Linear { dim: usize },
    /// `1; x_1 .. x_d; x_i x_j (i < j, lexicographic); x_1^2 .. x_d^2`.
    Polynomial2 { dim: usize },
}

impl BasisSet {
    pub fn input_dim(&self) -> usize {
        match *self {
            BasisSet::Linear { dim } | BasisSet::Polynomial2 { dim } => dim,
        }
    }

    /// Number of basis functions `d'`.
    pub fn len(&self) -> usize {
        match *self {
            BasisSet::Linear { dim } => dim,
            BasisSet::Polynomial2 { dim } => 1 + dim + dim * (dim - 1) / 2 + dim,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Indices of the plain linear terms `x_i`.
    pub fn linear_terms(&self) -> std::ops::Range<usize> {
        match *self {
            BasisSet::Linear { dim } => 0..dim,
            BasisSet::Polynomial2 { dim } => 1..1 + dim,
        }
    }

    pub fn names(&self) -> Vec<String> {
        let d = self.input_dim();
        let mut out = Vec::with_capacity(self.len());
        if let BasisSet::Polynomial2 { .. } = self {
            out.push("1".to_string());
        }
        out.extend((1..=d).map(|i| format!("x{i}")));
        if let BasisSet::Polynomial2 { .. } = self {
            for i in 1..=d {
                for j in i + 1..=d {
                    out.push(format!("x{i}*x{j}"));
                }
            }
            out.extend((1..=d).map(|i| format!("x{i}^2")));
        }
        out
    }

    /// `[psi_1(x), ..., psi_d'(x)]`.
    pub fn evaluate<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        match *self {
            BasisSet::Linear { .. } => x.to_vec(),
            BasisSet::Polynomial2 { dim } => {
                let mut out = Vec::with_capacity(self.len());
                out.push(T::one());
                out.extend_from_slice(&x[..dim]);
                for i in 0..dim {
                    for j in i + 1..dim {
                        out.push(x[i] * x[j]);
                    }
                }
                out.extend(x[..dim].iter().map(|&v| v * v));
                out
            }
        }
    }

    /// Coefficients of the untransformed space: uniform over the linear terms, unit norm.
    pub fn identity_weights<T: Scalar>(&self) -> TransformCandidate<T> {
        let mut w = vec![T::zero(); self.len()];
        let lin = self.linear_terms();
        let v = T::one() / T::from_usize_lossy(lin.len()).sqrt();
        for i in lin {
            w[i] = v;
        }
        TransformCandidate(w)
    }
}

impl BasisSet {
    /// Coefficients of a linear-basis solution expressed in this basis (the linear terms
    /// are shared, all others zero). `None` if the dimensions differ.
    pub fn embed_linear<T: Scalar>(&self, w: &[T]) -> Option<Vec<T>> {
        if w.len() != self.input_dim() {
            return None;
        }
        let mut out = vec![T::zero(); self.len()];
        for (i, &v) in self.linear_terms().zip(w) {
            out[i] = v;
        }
        Some(out)
    }
}

/// `z_l = w_l psi_l(x)`. `w` need not be normalized.
pub fn expand<T: Scalar>(basis: &BasisSet, w: &[T], x: &[T]) -> Vec<T> {
    basis.evaluate(x).into_iter().zip(w).map(|(p, &wl)| wl * p).collect()
}

/// Unit-norm coefficient vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TransformCandidate<T>(Vec<T>);

impl<T: Scalar> TransformCandidate<T> {
    pub fn normalized(w: Vec<T>) -> Result<Self> {
        let n = norm(&w);
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::InvalidParameter("coefficient vector has zero or non-finite norm".into()));
        }
        Ok(TransformCandidate(w.into_iter().map(|v| v / n).collect()))
    }

    pub fn weights(&self) -> &[T] {
        &self.0
    }

    pub fn apply(&self, basis: &BasisSet, x: &[T]) -> Vec<T> {
        expand(basis, &self.0, x)
    }
}
