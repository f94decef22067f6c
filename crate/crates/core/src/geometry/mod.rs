//! Deterministic controlled spatial transformation: hyper-spherical coordinates,
//! Gram-Schmidt target construction, per-angle maps and the radius map.

pub mod frame;
pub mod gram_schmidt;
pub mod mapping;
pub mod spherical;
pub mod transform;

pub use frame::{build_targets, CentroidFrame, SearchConfig, TargetBasis};
pub use gram_schmidt::gram_schmidt;
pub use mapping::{eval_logit_region, eval_piecewise_linear, AngularMap, AngularTargets, LogitSegmentParams, MapKind, Region};
pub use spherical::{to_cartesian, to_spherical, SphericalVector};
pub use transform::{apply_transform, orthogonality_report, radius_map, OrthogonalityReport, RadiusMap, SpatialTransform, TransformConfig};

/// Double-precision transform.
pub type SpatialTransformF64 = SpatialTransform<f64>;
/// Single-precision transform.
pub type SpatialTransformF32 = SpatialTransform<f32>;
