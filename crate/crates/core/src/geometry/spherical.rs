use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Radius plus `d - 1` angles. `theta[0..d-2]` lie in `[0, pi]`; the last angle in `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SphericalVector<T> {
    pub r: T,
    pub theta: Vec<T>,
}

/// Cartesian to hyper-spherical coordinates.
///
/// `theta_i = arccos(x_i / |x_{i..d}|)` for `i < d - 1` and
/// `theta_{d-1} = sign(x_d) arccos(x_{d-1} / |(x_{d-1}, x_d)|)` with `sign(0) = +1`,
/// evaluated through `atan2` for accuracy. Angles whose trailing sub-vector is zero are 0.
pub fn to_spherical<T: Scalar>(x: &[T]) -> Result<SphericalVector<T>> {
    let d = x.len();
    if d < 2 {
        return Err(Error::InvalidParameter(format!("spherical coordinates need d >= 2, got {d}")));
    }
    // tail[i] = |x_{i..d}|, accumulated from the end without overflow-prone squaring of the total
    let mut tail = vec![T::zero(); d + 1];
    for i in (0..d).rev() {
        tail[i] = tail[i + 1].hypot(x[i]);
    }
    let r = tail[0];
    let mut theta = vec![T::zero(); d - 1];
    if r == T::zero() {
        return Ok(SphericalVector { r, theta });
    }
    for i in 0..d - 2 {
        theta[i] = if tail[i] == T::zero() { T::zero() } else { tail[i + 1].atan2(x[i]) };
    }
    // adding +0 turns a negative zero into +0 so that [-1, 0] maps to pi, not -pi
    let last = x[d - 1] + T::zero();
    theta[d - 2] = if tail[d - 2] == T::zero() { T::zero() } else { last.atan2(x[d - 2]) };
    Ok(SphericalVector { r, theta })
}

/// Hyper-spherical to Cartesian coordinates:
/// `x_i = r cos(theta_i) prod_{j<i} sin(theta_j)`, `x_d = r prod_j sin(theta_j)`.
pub fn to_cartesian<T: Scalar>(s: &SphericalVector<T>) -> Vec<T> {
    let d = s.theta.len() + 1;
    let mut out = Vec::with_capacity(d);
    let mut sin_prod = s.r;
    for &t in &s.theta {
        out.push(sin_prod * t.cos());
        sin_prod = sin_prod * t.sin();
    }
    out.push(sin_prod);
    out
}
