use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{cosine_distance, mean, sq_dist, sub};
use crate::scalar::Scalar;
use crate::swarm::basis::BasisSet;

/// Objective pair `(o1, o2)`, both minimized. Infinite values mark degenerate candidates.
pub type Objectives<T> = (T, T);

/// `o1 = 1 / min_{c != d} cos_dist(v_c, v_d)` with `v_X = c_N - c_X`.
/// Coincident directions or a zero vector give `+inf`.
pub fn objective_symmetry<T: Scalar>(normal_centroid: &[T], abnormal_centroids: &[Vec<T>]) -> T {
    let vs: Vec<Vec<T>> = abnormal_centroids.iter().map(|c| sub(normal_centroid, c)).collect();
    let mut min = T::infinity();
    for a in 0..vs.len() {
        for b in a + 1..vs.len() {
            match cosine_distance(&vs[a], &vs[b]) {
                Some(d) => min = min.min(d),
                None => return T::infinity(),
            }
        }
    }
    if min > T::zero() && min.is_finite() {
        T::one() / min
    } else {
        T::infinity()
    }
}

/// `o2 = SW / SB` over all clusters; `SB = 0` gives `+inf`.
pub fn objective_separability<T: Scalar, P: AsRef<[T]>>(clusters: &[&[P]]) -> T {
    let centroids: Vec<Vec<T>> = clusters.iter().map(|c| mean(c).unwrap_or_default()).collect();
    let mut sw = T::zero();
    for (c, m) in clusters.iter().zip(&centroids) {
        for z in c.iter() {
            sw = sw + sq_dist(z.as_ref(), m);
        }
    }
    let mut sb = T::zero();
    for a in 0..centroids.len() {
        for b in 0..centroids.len() {
            if a != b {
                sb = sb + sq_dist(&centroids[a], &centroids[b]);
            }
        }
    }
    if sb > T::zero() {
        sw / sb
    } else {
        T::infinity()
    }
}

/// Per-cluster basis means and per-coordinate scatter, enough to evaluate both objectives
/// for any coefficient vector exactly: the mapped centroid is `w . mean` and the
/// within-cluster scatter is `sum_l w_l^2 scatter_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats<T> {
    /// Index 0 is the normal cluster, the rest abnormal.
    pub means: Vec<Vec<T>>,
    pub scatter: Vec<Vec<T>>,
}

impl<T: Scalar> ClusterStats<T> {
    /// `clusters[0]` must be the normal cluster. Each cluster is subsampled to at most
    /// `max_points` with a seeded draw.
    pub fn new<P: AsRef<[T]>>(basis: &BasisSet, clusters: &[&[P]], max_points: usize, seed: u64) -> Self {
        let mut means = Vec::with_capacity(clusters.len());
        let mut scatter = Vec::with_capacity(clusters.len());
        for (ci, c) in clusters.iter().enumerate() {
            let idx: Vec<usize> = if c.len() > max_points {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (ci as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let mut v = sample(&mut rng, c.len(), max_points).into_vec();
                v.sort_unstable();
                v
            } else {
                (0..c.len()).collect()
            };
            let psi: Vec<Vec<T>> = idx.iter().map(|&i| basis.evaluate(c[i].as_ref())).collect();
            let m = mean(&psi).unwrap_or_else(|| vec![T::zero(); basis.len()]);
            let mut s = vec![T::zero(); basis.len()];
            for p in &psi {
                for ((sl, pl), ml) in s.iter_mut().zip(p).zip(&m) {
                    let dv = *pl - *ml;
                    *sl = *sl + dv * dv;
                }
            }
            means.push(m);
            scatter.push(s);
        }
        ClusterStats { means, scatter }
    }

    pub fn evaluate(&self, w: &[T]) -> Objectives<T> {
        let mapped: Vec<Vec<T>> = self.means.iter().map(|m| m.iter().zip(w).map(|(a, b)| *a * *b).collect()).collect();
        let o1 = objective_symmetry(&mapped[0], &mapped[1..]);
        let sw: T = self
            .scatter
            .iter()
            .map(|s| s.iter().zip(w).map(|(a, b)| *a * *b * *b).sum::<T>())
            .sum();
        let mut sb = T::zero();
        for a in 0..mapped.len() {
            for b in 0..mapped.len() {
                if a != b {
                    sb = sb + sq_dist(&mapped[a], &mapped[b]);
                }
            }
        }
        let o2 = if sb > T::zero() { sw / sb } else { T::infinity() };
        (o1, o2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetry_examples() {
        let n = vec![0.0_f64, 0.0, 0.0];
        let ortho = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!((objective_symmetry(&n, &ortho) - 1.0).abs() < 1e-15);
        let anti = vec![vec![1.0, 0.0, 0.0], vec![-1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        assert!((objective_symmetry(&n, &anti) - 1.0).abs() < 1e-15);
        let same = vec![vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]];
        assert!(objective_symmetry(&n, &same).is_infinite());
    }

    #[test]
    fn separability_examples() {
        let a = [vec![0.0, 0.0], vec![0.0, 1.0]];
        let b = [vec![2.0, 0.0]];
        // centroid of a is (0, 0.5): SW = 0.5, SB = 2 * 4.25
        let o2 = objective_separability::<f64, _>(&[&a[..], &b[..]]);
        assert!((o2 - 0.5 / 8.5).abs() < 1e-15);
        // symmetric pair keeps the centroid at the origin: SW = 1, SB = 8
        let h = 0.5_f64.sqrt();
        let sym = [vec![0.0, h], vec![0.0, -h]];
        let o2 = objective_separability::<f64, _>(&[&sym[..], &b[..]]);
        assert!((o2 - 0.125).abs() < 1e-15);
        let collapsed = [vec![1.0, 1.0]];
        let other = [vec![2.0, 2.0]];
        assert_eq!(objective_separability::<f64, _>(&[&collapsed[..], &other[..]]), 0.0);
        let same = [vec![1.0, 1.0]];
        assert!(objective_separability::<f64, _>(&[&same[..], &same[..]]).is_infinite());
    }
}
