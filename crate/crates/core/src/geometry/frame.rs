use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::gram_schmidt::{complete_orthonormal, gram_schmidt};
use crate::geometry::mapping::AngularTargets;
use crate::geometry::spherical::to_spherical;
use crate::labels::Class;
use crate::linalg::{dot, norm, sub};
use crate::scalar::Scalar;

/// Which vectors define the angular target points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetBasis {
    /// Each centroid vector `c_X - c_N` maps onto its orthogonalized counterpart.
    #[default]
    Centroid,
    /// Differences `v_X - v_V` map onto the differences of the orthogonalized vectors.
    Difference,
}

/// Candidate counts for the orientation search inside the centroid subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub poles: usize,
    pub azimuths: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { poles: 128, azimuths: 24 }
    }
}

/// Centroid geometry relative to the normal cluster, plus the orthogonal change of basis
/// under which the angular maps are built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CentroidFrame<T> {
    /// Normal-cluster centroid; becomes the origin.
    pub anchor: Vec<T>,
    pub classes: Vec<Class>,
    /// Columns `v_X = c_X - c_N`, one per abnormal class.
    pub columns: Vec<Vec<T>>,
    /// Gram-Schmidt orthogonalized columns; the first equals the first of `columns`.
    pub orthogonal: Vec<Vec<T>>,
    /// Rows of an orthogonal `d x d` matrix `Q`. The centroid span lands in the last `k`
    /// coordinates of `Q v`, oriented so that angular targets are consistently ordered.
    pub rotation: Vec<Vec<T>>,
    /// Smallest gap between consecutive target knots under the chosen orientation;
    /// `None` if no orientation gave consistent ordering.
    pub ordering_margin: Option<T>,
}

fn matvec<T: Scalar>(rows: &[Vec<T>], v: &[T]) -> Vec<T> {
    rows.iter().map(|r| dot(r, v)).collect()
}

fn domain_of<T: Scalar>(dim: usize, d: usize) -> T {
    if dim + 2 == d {
        T::PI() + T::PI()
    } else {
        T::PI()
    }
}

/// Angle `dim` of `x` shifted into the target domain (`[0, 2 pi)` for the last angle).
pub fn domain_angle<T: Scalar>(theta: T, dim: usize, d: usize) -> T {
    if dim + 2 == d && theta < T::zero() {
        theta + T::PI() + T::PI()
    } else {
        theta
    }
}

/// Per-dimension raw target pairs for rotated source/target vectors.
pub fn angle_pairs<T: Scalar>(pairs: &[(Vec<T>, Vec<T>)], d: usize) -> Result<Vec<Vec<(T, T)>>> {
    let mut out = vec![Vec::with_capacity(pairs.len()); d - 1];
    for (s, t) in pairs {
        let a = to_spherical(s)?;
        let b = to_spherical(t)?;
        for i in 0..d - 1 {
            out[i].push((domain_angle(a.theta[i], i, d), domain_angle(b.theta[i], i, d)));
        }
    }
    Ok(out)
}

fn margin_for<T: Scalar>(pairs: &[(Vec<T>, Vec<T>)], d: usize) -> Option<T> {
    let dims = angle_pairs(pairs, d).ok()?;
    let mut margin: Option<T> = None;
    for (i, raw) in dims.iter().enumerate() {
        let t = AngularTargets::new(domain_of(i, d), raw);
        if t.identity_fallback {
            return None;
        }
        if t.is_identity() {
            continue;
        }
        let m = AngularTargets::margin_of(t.domain, &t.points)?;
        margin = Some(margin.map_or(m, |x: T| x.min(m)));
    }
    Some(margin.unwrap_or(T::PI()))
}

fn fibonacci_sphere<T: Scalar>(n: usize) -> Vec<[T; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..n)
        .map(|i| {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let rad = (1.0 - y * y).sqrt();
            let phi = golden * i as f64;
            [T::lit(y), T::lit(rad * phi.cos()), T::lit(rad * phi.sin())]
        })
        .collect()
}

/// Orthogonal `k x k` candidates, identity first.
fn subspace_candidates<T: Scalar>(k: usize, cfg: &SearchConfig) -> Vec<Vec<Vec<T>>> {
    let tau = std::f64::consts::TAU;
    let mut out: Vec<Vec<Vec<T>>> = Vec::new();
    match k {
        1 => out.push(vec![vec![T::one()]]),
        2 => {
            let steps = (cfg.poles * cfg.azimuths).clamp(8, 1440);
            for s in [1.0, -1.0] {
                for i in 0..steps {
                    let (sn, cs) = (tau * i as f64 / steps as f64).sin_cos();
                    out.push(vec![
                        vec![T::lit(cs), T::lit(sn)],
                        vec![T::lit(-s * sn), T::lit(s * cs)],
                    ]);
                }
            }
        }
        _ => {
            let eye = |i: usize| -> Vec<T> { (0..3).map(|j| if i == j { T::one() } else { T::zero() }).collect() };
            out.push(vec![eye(0), eye(1), eye(2)]);
            for p in fibonacci_sphere::<T>(cfg.poles.max(1)) {
                // helper axis least aligned with the pole
                let ax = (0..3).min_by(|&a, &b| p[a].abs().partial_cmp(&p[b].abs()).unwrap()).unwrap();
                let h = eye(ax);
                let c = dot(&h, &p);
                let u: Vec<T> = (0..3).map(|j| h[j] - c * p[j]).collect();
                let nu = norm(&u);
                let u: Vec<T> = u.into_iter().map(|v| v / nu).collect();
                let w = [p[1] * u[2] - p[2] * u[1],
                    p[2] * u[0] - p[0] * u[2],
                    p[0] * u[1] - p[1] * u[0]];
                for a in 0..cfg.azimuths.max(1) {
                    let (sn, cs) = (tau * a as f64 / cfg.azimuths.max(1) as f64).sin_cos();
                    let (sn, cs) = (T::lit(sn), T::lit(cs));
                    let r2: Vec<T> = (0..3).map(|j| cs * u[j] + sn * w[j]).collect();
                    let r3: Vec<T> = (0..3).map(|j| -sn * u[j] + cs * w[j]).collect();
                    for s in [T::one(), -T::one()] {
                        out.push(vec![p.to_vec(), r2.clone(), r3.iter().map(|&v| s * v).collect()]);
                    }
                }
            }
        }
    }
    out
}

impl<T: Scalar> CentroidFrame<T> {
    /// Builds the frame for an anchor and 1 to 3 abnormal centroids (in V, S, F order).
    pub fn build(
        anchor: &[T],
        abnormal: &[(Class, Vec<T>)],
        basis: TargetBasis,
        search: &SearchConfig,
    ) -> Result<Self> {
        let d = anchor.len();
        let k = abnormal.len();
        if d < 2 {
            return Err(Error::InvalidParameter(format!("transform needs d >= 2, got {d}")));
        }
        if k == 0 || k > 3 {
            return Err(Error::InvalidParameter(format!("need 1 to 3 abnormal centroids, got {k}")));
        }
        if k > d {
            return Err(Error::DegenerateGeometry(format!("{k} abnormal centroids cannot be orthogonal in {d} dimensions")));
        }
        if abnormal.iter().any(|(_, c)| c.len() != d) {
            return Err(Error::InvalidParameter("centroid dimension mismatch".into()));
        }
        let classes: Vec<Class> = abnormal.iter().map(|(c, _)| *c).collect();
        let columns: Vec<Vec<T>> = abnormal.iter().map(|(_, c)| sub(c, anchor)).collect();
        let orthogonal = gram_schmidt(&columns)?;
        let units: Vec<Vec<T>> = orthogonal
            .iter()
            .map(|v| {
                let n = norm(v);
                v.iter().map(|&x| x / n).collect()
            })
            .collect();
        let full = complete_orthonormal(&units, d);
        // rows: complement first, centroid span last
        let mut base: Vec<Vec<T>> = full[k..].to_vec();
        base.extend_from_slice(&full[..k]);

        // subspace coordinates of sources and targets
        let sub_coords = |v: &Vec<T>| -> Vec<T> { units.iter().map(|u| dot(u, v)).collect() };
        let (src, dst): (Vec<Vec<T>>, Vec<Vec<T>>) = match basis {
            TargetBasis::Centroid => (columns.iter().map(sub_coords).collect(), orthogonal.iter().map(sub_coords).collect()),
            TargetBasis::Difference => (
                columns[1..].iter().map(|c| sub_coords(&sub(c, &columns[0]))).collect(),
                orthogonal[1..].iter().map(|c| sub_coords(&sub(c, &orthogonal[0]))).collect(),
            ),
        };

        let embed = |r: &Vec<Vec<T>>, v: &Vec<T>| -> Vec<T> {
            let mut out = vec![T::zero(); d - k];
            out.extend(matvec(r, v));
            out
        };
        let mut best: Option<(T, Vec<Vec<T>>)> = None;
        for r in subspace_candidates::<T>(k, search) {
            let pairs: Vec<(Vec<T>, Vec<T>)> = src.iter().zip(&dst).map(|(s, t)| (embed(&r, s), embed(&r, t))).collect();
            if let Some(m) = margin_for(&pairs, d) {
                if best.as_ref().is_none_or(|(bm, _)| m > *bm) {
                    best = Some((m, r));
                }
            }
        }
        let (ordering_margin, r) = match best {
            Some((m, r)) => (Some(m), r),
            None => {
                log::warn!("no orientation orders the angular targets consistently; conflicting dimensions fall back to identity");
                (None, subspace_candidates::<T>(k, search).swap_remove(0))
            }
        };
        let mut rotation = base[..d - k].to_vec();
        let span = &base[d - k..];
        for row in &r {
            let mut out = vec![T::zero(); d];
            for (coef, b) in row.iter().zip(span) {
                for (o, bv) in out.iter_mut().zip(b) {
                    *o = *o + *coef * *bv;
                }
            }
            rotation.push(out);
        }

        Ok(CentroidFrame {
            anchor: anchor.to_vec(),
            classes,
            columns,
            orthogonal,
            rotation,
            ordering_margin,
        })
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn num_abnormal(&self) -> usize {
        self.columns.len()
    }

    /// `Q v`.
    pub fn rotate(&self, v: &[T]) -> Vec<T> {
        matvec(&self.rotation, v)
    }

    /// `Q^T y`.
    pub fn unrotate(&self, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        for (row, &c) in self.rotation.iter().zip(y) {
            for (o, r) in out.iter_mut().zip(row) {
                *o = *o + c * *r;
            }
        }
        out
    }

    /// Rotated `(source, target)` vectors whose angles define the targets. Coordinates
    /// outside the centroid span are exactly zero.
    pub fn target_vectors(&self, basis: TargetBasis) -> Vec<(Vec<T>, Vec<T>)> {
        let d = self.dim();
        let k = self.num_abnormal();
        let project = |v: &Vec<T>| -> Vec<T> {
            let mut out = vec![T::zero(); d - k];
            out.extend(self.rotation[d - k..].iter().map(|r| dot(r, v)));
            out
        };
        match basis {
            TargetBasis::Centroid => self.columns.iter().zip(&self.orthogonal).map(|(c, o)| (project(c), project(o))).collect(),
            TargetBasis::Difference => self.columns[1..]
                .iter()
                .zip(&self.orthogonal[1..])
                .map(|(c, o)| (project(&sub(c, &self.columns[0])), project(&sub(o, &self.orthogonal[0]))))
                .collect(),
        }
    }
}

/// Targets for angular dimension `i` (0-based) of the frame.
pub fn build_targets<T: Scalar>(frame: &CentroidFrame<T>, i: usize, basis: TargetBasis) -> Result<AngularTargets<T>> {
    let d = frame.dim();
    if i + 1 >= d {
        return Err(Error::InvalidParameter(format!("angular dimension {i} out of range for d={d}")));
    }
    let dims = angle_pairs(&frame.target_vectors(basis), d)?;
    Ok(AngularTargets::new(domain_of(i, d), &dims[i]))
}
