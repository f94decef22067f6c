//! Basis-function expansion, symmetry/separability objectives and multi-objective
//! particle swarm optimization over unit-norm coefficient vectors.

pub mod archive;
pub mod basis;
pub mod export;
pub mod mopso;
pub mod objectives;

pub use archive::{crowding_distances, dominates, ArchiveEntry, ParetoArchive};
pub use basis::{expand, BasisSet, TransformCandidate};
pub use export::{write_archive_csv, write_pareto_svg};
pub use mopso::{mopso, mopso_observed, MopsoConfig};
pub use objectives::{objective_separability, objective_symmetry, ClusterStats, Objectives};

/// Coefficient transform `x -> w . psi(x)` selected from a front.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(bound = "T: crate::Scalar")]
pub struct PolynomialTransform<T> {
    pub basis: BasisSet,
    pub weights: Vec<T>,
}

impl<T: crate::Scalar> PolynomialTransform<T> {
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        expand(&self.basis, &self.weights, x)
    }
}

pub type ParetoArchiveF64 = ParetoArchive<f64>;
pub type ParetoArchiveF32 = ParetoArchive<f32>;
