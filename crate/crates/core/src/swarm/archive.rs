use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::swarm::objectives::Objectives;

/// `a` dominates `b`: no worse in both objectives and strictly better in one.
pub fn dominates<T: Scalar>(a: Objectives<T>, b: Objectives<T>) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ArchiveEntry<T> {
    pub w: Vec<T>,
    pub o1: T,
    pub o2: T,
}

impl<T: Scalar> ArchiveEntry<T> {
    pub fn objectives(&self) -> Objectives<T> {
        (self.o1, self.o2)
    }
}

/// Mutually non-dominated set with finite objectives, kept sorted by `(o1, o2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ParetoArchive<T> {
    pub capacity: usize,
    pub entries: Vec<ArchiveEntry<T>>,
}

/// Crowding distance of each point of a front (any order); extremes get `+inf`.
pub fn crowding_distances<T: Scalar>(objs: &[Objectives<T>]) -> Vec<T> {
    let n = objs.len();
    let mut dist = vec![T::zero(); n];
    if n <= 2 {
        return vec![T::infinity(); n];
    }
    for m in 0..2 {
        let key = |i: usize| if m == 0 { objs[i].0 } else { objs[i].1 };
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).unwrap().then(a.cmp(&b)));
        let span = key(idx[n - 1]) - key(idx[0]);
        dist[idx[0]] = T::infinity();
        dist[idx[n - 1]] = T::infinity();
        if span > T::zero() {
            for j in 1..n - 1 {
                dist[idx[j]] = dist[idx[j]] + (key(idx[j + 1]) - key(idx[j - 1])) / span;
            }
        }
    }
    dist
}

/// Indices (into a front sorted by `o1`) of the lower convex hull vertices: the points that
/// minimize `beta o1 + (1 - beta) o2` for some `beta` in `[0, 1]`.
pub fn lower_hull<T: Scalar>(sorted: &[Objectives<T>]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..sorted.len() {
        while hull.len() >= 2 {
            let a = sorted[hull[hull.len() - 2]];
            let b = sorted[hull[hull.len() - 1]];
            let c = sorted[i];
            let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
            if cross <= T::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

impl<T: Scalar> ParetoArchive<T> {
    pub fn new(capacity: usize) -> Self {
        ParetoArchive {
            capacity,
            entries: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn objectives(&self) -> Vec<Objectives<T>> {
        self.entries.iter().map(|e| e.objectives()).collect()
    }

    /// Inserts a candidate unless it is non-finite, dominated, or a duplicate objective pair.
    /// Returns whether it was added.
    pub fn insert(&mut self, entry: ArchiveEntry<T>) -> bool {
        let o = entry.objectives();
        if !(o.0.is_finite() && o.1.is_finite()) {
            return false;
        }
        if self.entries.iter().any(|e| dominates(e.objectives(), o) || e.objectives() == o) {
            return false;
        }
        self.entries.retain(|e| !dominates(o, e.objectives()));
        let pos = self
            .entries
            .partition_point(|e| (e.o1, e.o2).partial_cmp(&o).unwrap() == std::cmp::Ordering::Less);
        self.entries.insert(pos, entry);
        self.prune();
        true
    }

    /// Drops the most crowded members until within capacity, never removing a lower hull
    /// vertex; the archive may stay above capacity if every member is on the hull.
    fn prune(&mut self) {
        while self.entries.len() > self.capacity.max(1) {
            let objs = self.objectives();
            let hull = lower_hull(&objs);
            let cd = crowding_distances(&objs);
            let victim = (0..objs.len())
                .filter(|i| !hull.contains(i))
                .min_by(|&a, &b| cd[a].partial_cmp(&cd[b]).unwrap().then(b.cmp(&a)));
            match victim {
                Some(v) => {
                    self.entries.remove(v);
                }
                None => break,
            }
        }
    }

    /// `min beta o1 + (1 - beta) o2` over the archive.
    pub fn scalarized_best(&self, beta: T) -> T {
        self.entries
            .iter()
            .map(|e| beta * e.o1 + (T::one() - beta) * e.o2)
            .fold(T::infinity(), T::min)
    }

    pub fn is_mutually_non_dominated(&self) -> bool {
        let o = self.objectives();
        (0..o.len()).all(|i| (0..o.len()).all(|j| i == j || !dominates(o[i], o[j])))
    }

    /// Knee point: the member farthest from the chord between the front's extremes, with
    /// both objectives normalized to `[0, 1]` over the front.
    pub fn knee(&self) -> Option<&ArchiveEntry<T>> {
        let n = self.entries.len();
        if n <= 2 {
            return self.select_beta(T::lit(0.5));
        }
        let (lo1, hi1) = (self.entries[0].o1, self.entries[n - 1].o1);
        let (lo2, hi2) = (self.entries[n - 1].o2, self.entries[0].o2);
        let s1 = if hi1 > lo1 { hi1 - lo1 } else { T::one() };
        let s2 = if hi2 > lo2 { hi2 - lo2 } else { T::one() };
        let p = |e: &ArchiveEntry<T>| ((e.o1 - lo1) / s1, (e.o2 - lo2) / s2);
        let a = p(&self.entries[0]);
        let b = p(&self.entries[n - 1]);
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len = (dx * dx + dy * dy).sqrt();
        let mut best = 0;
        let mut best_d = T::neg_infinity();
        for (i, e) in self.entries.iter().enumerate() {
            let q = p(e);
            let d = if len > T::zero() {
                ((q.0 - a.0) * dy - (q.1 - a.1) * dx).abs() / len
            } else {
                T::zero()
            };
            if d > best_d {
                best_d = d;
                best = i;
            }
        }
        self.entries.get(best)
    }

    /// Member minimizing `beta o1' + (1 - beta) o2'` on front-normalized objectives.
    pub fn select_beta(&self, beta: T) -> Option<&ArchiveEntry<T>> {
        let n = self.entries.len();
        if n == 0 {
            return None;
        }
        let lo1 = self.entries.iter().map(|e| e.o1).fold(T::infinity(), T::min);
        let hi1 = self.entries.iter().map(|e| e.o1).fold(T::neg_infinity(), T::max);
        let lo2 = self.entries.iter().map(|e| e.o2).fold(T::infinity(), T::min);
        let hi2 = self.entries.iter().map(|e| e.o2).fold(T::neg_infinity(), T::max);
        let s1 = if hi1 > lo1 { hi1 - lo1 } else { T::one() };
        let s2 = if hi2 > lo2 { hi2 - lo2 } else { T::one() };
        let score = |e: &ArchiveEntry<T>| beta * (e.o1 - lo1) / s1 + (T::one() - beta) * (e.o2 - lo2) / s2;
        let mut best = 0;
        for i in 1..n {
            if score(&self.entries[i]) < score(&self.entries[best]) {
                best = i;
            }
        }
        self.entries.get(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(o1: f64, o2: f64) -> ArchiveEntry<f64> {
        ArchiveEntry { w: vec![o1, o2], o1, o2 }
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates((1.0, 1.0), (2.0, 2.0)));
        assert!(!dominates((1.0, 2.0), (2.0, 1.0)));
        assert!(!dominates((1.0, 1.0), (1.0, 1.0)));
    }

    #[test]
    fn insert_keeps_front() {
        let mut a = ParetoArchive::new(10);
        assert!(a.insert(e(2.0, 2.0)));
        assert!(a.insert(e(1.0, 3.0)));
        assert!(!a.insert(e(3.0, 3.0)));
        assert!(a.insert(e(1.5, 1.5)));
        assert_eq!(a.len(), 2);
        assert!(!a.insert(e(f64::INFINITY, 0.0)));
        assert!(a.is_mutually_non_dominated());
    }

    #[test]
    fn pruning_protects_hull() {
        let mut a = ParetoArchive::new(3);
        for i in 0..20 {
            let x = 1.0 + i as f64 * 0.1;
            a.insert(e(x, 1.0 / x + if i % 3 == 1 { 0.05 } else { 0.0 }));
        }
        let objs = a.objectives();
        assert_eq!(lower_hull(&objs).len(), objs.len());
        for beta in [0.0, 0.3, 0.7, 1.0] {
            let best_all = (0..20)
                .map(|i| {
                    let x = 1.0 + i as f64 * 0.1;
                    let y = 1.0 / x + if i % 3 == 1 { 0.05 } else { 0.0 };
                    beta * x + (1.0 - beta) * y
                })
                .fold(f64::INFINITY, f64::min);
            assert!((a.scalarized_best(beta) - best_all).abs() < 1e-12);
        }
    }

    #[test]
    fn knee_of_l_shaped_front() {
        let mut a = ParetoArchive::new(10);
        for (x, y) in [(0.0, 10.0), (1.0, 1.0), (10.0, 0.0), (5.0, 0.5)] {
            a.insert(e(x, y));
        }
        assert_eq!(a.knee().unwrap().o1, 1.0);
        assert_eq!(a.select_beta(1.0).unwrap().o1, 0.0);
    }
}
