use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::frame::{angle_pairs, domain_angle, CentroidFrame, SearchConfig, TargetBasis};
use crate::geometry::mapping::{AngularMap, AngularTargets, MapKind};
use crate::geometry::spherical::{to_cartesian, to_spherical, SphericalVector};
use crate::labels::Class;
use crate::linalg::{cosine_distance, norm};
use crate::scalar::Scalar;

/// Below this cosine distance a direction is taken to coincide with a centroid direction.
const SAME_DIRECTION: f64 = 1e-12;

/// Direction-dependent radius normalization: every centroid lands on radius 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RadiusMap<T> {
    /// Unit target directions of the centroids, in rotated coordinates.
    pub directions: Vec<Vec<T>>,
    /// Original centroid radii `|c_X - c_N|`.
    pub radii: Vec<T>,
}

impl<T: Scalar> RadiusMap<T> {
    /// Inverse-cosine-distance weighted mean of the centroid radii.
    pub fn rho(&self, direction: &[T]) -> T {
        let mut num = T::zero();
        let mut den = T::zero();
        for (u, &r) in self.directions.iter().zip(&self.radii) {
            let Some(dist) = cosine_distance(direction, u) else {
                continue;
            };
            if dist < T::lit(SAME_DIRECTION) {
                return r;
            }
            let w = T::one() / dist;
            num = num + w * r;
            den = den + w;
        }
        if den > T::zero() {
            num / den
        } else {
            self.radii.iter().copied().sum::<T>() / T::from_usize_lossy(self.radii.len().max(1))
        }
    }

    /// `r / rho` up to `rho`, then unit slope beyond it.
    pub fn apply(&self, r: T, direction: &[T]) -> T {
        let rho = self.rho(direction);
        if r <= rho {
            r / rho
        } else {
            T::one() + (r - rho)
        }
    }
}

/// `radius_map(frame, r, direction)` in the frame's rotated coordinates.
pub fn radius_map<T: Scalar>(map: &RadiusMap<T>, r: T, direction: &[T]) -> T {
    map.apply(r, direction)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransformConfig {
    pub kind: MapKind,
    pub basis: TargetBasis,
    pub search: SearchConfig,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            kind: MapKind::Logit { alpha_g: 1.0 },
            basis: TargetBasis::Centroid,
            search: SearchConfig::default(),
        }
    }
}

/// Deterministic map `T(x) = Q^T S(Q (x - c_N))`, where `S` applies the per-angle maps and
/// the radius map in hyper-spherical coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SpatialTransform<T> {
    pub frame: CentroidFrame<T>,
    pub config: TransformConfig,
    pub maps: Vec<AngularMap<T>>,
    pub radius: RadiusMap<T>,
}

impl<T: Scalar> SpatialTransform<T> {
    pub fn build(anchor: &[T], abnormal: &[(Class, Vec<T>)], config: &TransformConfig) -> Result<Self> {
        let frame = CentroidFrame::build(anchor, abnormal, config.basis, &config.search)?;
        Self::from_frame(frame, config)
    }

    pub fn from_frame(frame: CentroidFrame<T>, config: &TransformConfig) -> Result<Self> {
        let d = frame.dim();
        let dims = angle_pairs(&frame.target_vectors(config.basis), d)?;
        let maps = dims
            .iter()
            .enumerate()
            .map(|(i, raw)| {
                let domain = if i + 2 == d { T::PI() + T::PI() } else { T::PI() };
                let targets = AngularTargets::new(domain, raw);
                if targets.identity_fallback {
                    log::warn!("angular dimension {i}: target ordering conflict, identity map used");
                }
                AngularMap::new(targets, config.kind)
            })
            .collect::<Result<Vec<_>>>()?;
        let centroid_pairs = frame.target_vectors(TargetBasis::Centroid);
        let radius = RadiusMap {
            directions: centroid_pairs
                .iter()
                .map(|(_, t)| {
                    let n = norm(t);
                    t.iter().map(|&v| v / n).collect()
                })
                .collect(),
            radii: frame.columns.iter().map(|c| norm(c)).collect(),
        };
        Ok(SpatialTransform {
            frame,
            config: *config,
            maps,
            radius,
        })
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    /// Dimensions whose targets could not be ordered and use the identity instead.
    pub fn fallback_dimensions(&self) -> Vec<usize> {
        self.maps
            .iter()
            .enumerate()
            .filter(|(_, m)| m.targets.identity_fallback)
            .map(|(i, _)| i)
            .collect()
    }

    /// Applies the transform to one point.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::InvalidParameter(format!("expected a {d}-vector, got {}", x.len())));
        }
        let shifted: Vec<T> = x.iter().zip(&self.frame.anchor).map(|(a, b)| *a - *b).collect();
        let y = self.frame.rotate(&shifted);
        let s = to_spherical(&y)?;
        if s.r == T::zero() {
            return Ok(vec![T::zero(); d]);
        }
        let theta: Vec<T> = s
            .theta
            .iter()
            .enumerate()
            .map(|(i, &t)| self.maps[i].eval(domain_angle(t, i, d)))
            .collect();
        let direction = to_cartesian(&SphericalVector { r: T::one(), theta: theta.clone() });
        let r = self.radius.apply(s.r, &direction);
        let z = to_cartesian(&SphericalVector { r, theta });
        Ok(self.frame.unrotate(&z))
    }

    /// Images of the abnormal centroids, in frame class order.
    pub fn transformed_centroids(&self) -> Result<Vec<Vec<T>>> {
        self.frame
            .columns
            .iter()
            .map(|v| {
                let x: Vec<T> = v.iter().zip(&self.frame.anchor).map(|(a, b)| *a + *b).collect();
                self.apply(&x)
            })
            .collect()
    }
}

/// Free-function form of [`SpatialTransform::apply`].
pub fn apply_transform<T: Scalar>(t: &SpatialTransform<T>, x: &[T]) -> Result<Vec<T>> {
    t.apply(x)
}

/// Orthogonality diagnostics of the transformed centroids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    /// Largest `|1 - cosine distance|` over centroid pairs.
    pub max_pair_residual: f64,
    /// Largest `| |T(c_X)| - 1 |`.
    pub max_radius_residual: f64,
    pub fallback_dimensions: Vec<usize>,
}

pub fn orthogonality_report<T: Scalar>(t: &SpatialTransform<T>) -> Result<OrthogonalityReport> {
    let zs = t.transformed_centroids()?;
    let mut pair = 0.0_f64;
    for a in 0..zs.len() {
        for b in 0..a {
            let cd = cosine_distance(&zs[a], &zs[b]).map_or(f64::INFINITY, |v| v.to_f64_lossy());
            pair = pair.max((cd - 1.0).abs());
        }
    }
    let radius = zs.iter().map(|z| (norm(z).to_f64_lossy() - 1.0).abs()).fold(0.0, f64::max);
    Ok(OrthogonalityReport {
        max_pair_residual: pair,
        max_radius_residual: radius,
        fallback_dimensions: t.fallback_dimensions(),
    })
}
