use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::Class;
use crate::linalg::sq_dist;
use crate::scalar::Scalar;

/// Global kNN over labelled training points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GlobalModel<T> {
    pub points: Vec<Vec<T>>,
    pub labels: Vec<Class>,
    pub k: usize,
}

impl<T: Scalar> GlobalModel<T> {
    pub fn new(points: Vec<Vec<T>>, labels: Vec<Class>, k: usize) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::InvalidParameter("points and labels differ in length".into()));
        }
        if k == 0 || k > points.len() {
            return Err(Error::InvalidParameter(format!(
                "k must be in 1..={}, got {k}",
                points.len()
            )));
        }
        if let Some(d) = points.first().map(Vec::len) {
            if points.iter().any(|p| p.len() != d) {
                return Err(Error::InvalidParameter("training points differ in dimension".into()));
            }
        }
        Ok(GlobalModel { points, labels, k })
    }

    /// The `k` nearest training indices ordered by `(squared distance, index)`.
    pub fn neighbours(&self, x: &[T]) -> Vec<(T, usize)> {
        let mut d: Vec<(T, usize)> = self.points.iter().enumerate().map(|(i, p)| (sq_dist(p, x), i)).collect();
        let cmp = |a: &(T, usize), b: &(T, usize)| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, cmp);
            d.truncate(self.k);
        }
        d.sort_by(cmp);
        d
    }

    /// Majority vote; ties go to the smaller summed distance, then to the N, V, S, F order.
    pub fn classify(&self, x: &[T]) -> Class {
        let mut votes = [0usize; 4];
        let mut dist = [T::zero(); 4];
        for (d2, i) in self.neighbours(x) {
            let c = self.labels[i].index();
            votes[c] += 1;
            dist[c] = dist[c] + d2.sqrt();
        }
        let mut best = 0;
        for c in 1..4 {
            if votes[c] > votes[best] || (votes[c] == votes[best] && votes[c] > 0 && dist[c] < dist[best]) {
                best = c;
            }
        }
        Class::from_index(best).expect("class index")
    }

    pub fn classify_batch(&self, xs: &[Vec<T>]) -> Vec<Class> {
        xs.par_iter().map(|x| self.classify(x)).collect()
    }
}

/// Free-function form of [`GlobalModel::classify`].
pub fn classify_global<T: Scalar>(model: &GlobalModel<T>, x: &[T]) -> Class {
    model.classify(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_returns_training_label() {
        let m = GlobalModel::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]], vec![Class::N, Class::V], 1).unwrap();
        assert_eq!(m.classify(&[1.0, 1.0]), Class::V);
    }

    #[test]
    fn k_too_large() {
        assert!(GlobalModel::new(vec![vec![0.0]], vec![Class::N], 2).is_err());
        assert!(GlobalModel::<f64>::new(vec![vec![0.0]], vec![Class::N], 0).is_err());
    }

    #[test]
    fn vote_tie_uses_distance_then_order() {
        // two V at distance 1, two S at distance 2: tie on votes, V closer
        let pts = vec![vec![1.0], vec![-1.0], vec![2.0], vec![-2.0]];
        let m = GlobalModel::new(pts, vec![Class::V, Class::V, Class::S, Class::S], 4).unwrap();
        assert_eq!(m.classify(&[0.0]), Class::V);
        // exact tie on votes and distance: fixed order picks the earlier class
        let m = GlobalModel::new(vec![vec![1.0], vec![-1.0]], vec![Class::F, Class::S], 2).unwrap();
        assert_eq!(m.classify(&[0.0]), Class::S);
    }
}
