use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::dist;
use crate::scalar::Scalar;

/// Full recomputation interval for the centroid and diameter caches.
pub const RECOMPUTE_EVERY: usize = 256;

#[derive(Debug, Clone)]
struct Member<T> {
    seq: u64,
    t: f64,
    x: Vec<T>,
}

/// Sliding window of a patient's confirmed-normal samples with cached centroid and diameter.
#[derive(Debug, Clone)]
pub struct PersonalNormalCluster<T> {
    pub patient_id: String,
    window_s: f64,
    members: VecDeque<Member<T>>,
    sum: Vec<T>,
    r_max: T,
    diameter: Option<(u64, u64)>,
    next_seq: u64,
    since_recompute: usize,
    version: u64,
}

impl<T: Scalar> PersonalNormalCluster<T> {
    pub fn new(patient_id: impl Into<String>, window_s: f64) -> Self {
        PersonalNormalCluster {
            patient_id: patient_id.into(),
            window_s,
            members: VecDeque::new(),
            sum: Vec::new(),
            r_max: T::zero(),
            diameter: None,
            next_seq: 0,
            since_recompute: 0,
            version: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.members.iter().map(|m| m.x.as_slice())
    }

    pub fn timestamps(&self) -> impl Iterator<Item = f64> + '_ {
        self.members.iter().map(|m| m.t)
    }

    /// Bumped on every change of membership.
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    pub fn centroid(&self) -> Option<Vec<T>> {
        if self.members.is_empty() {
            return None;
        }
        let n = T::from_usize_lossy(self.members.len());
        Some(self.sum.iter().map(|&s| s / n).collect())
    }

    /// Adds a sample, then evicts members older than the window relative to it.
    pub fn push(&mut self, t: f64, x: Vec<T>) -> Result<()> {
        if let Some(last) = self.members.back() {
            if t < last.t {
                return Err(Error::InvalidParameter(format!(
                    "cluster update at {t} s precedes newest member at {} s",
                    last.t
                )));
            }
            if x.len() != last.x.len() {
                return Err(Error::InvalidParameter("cluster member dimension mismatch".into()));
            }
        } else {
            self.sum = vec![T::zero(); x.len()];
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        for m in &self.members {
            let d = dist(&m.x, &x);
            if d > self.r_max || self.diameter.is_none() {
                self.r_max = d;
                self.diameter = Some((m.seq, seq));
            }
        }
        self.sum.iter_mut().zip(&x).for_each(|(s, &v)| *s = *s + v);
        self.members.push_back(Member { seq, t, x });

        let mut stale = false;
        while let Some(front) = self.members.front() {
            if t - front.t <= self.window_s {
                break;
            }
            let old = self.members.pop_front().expect("front exists");
            self.sum.iter_mut().zip(&old.x).for_each(|(s, &v)| *s = *s - v);
            if let Some((a, b)) = self.diameter {
                stale |= old.seq == a || old.seq == b;
            }
        }
        self.since_recompute += 1;
        if stale || self.since_recompute >= RECOMPUTE_EVERY {
            self.recompute();
        }
        self.version += 1;
        Ok(())
    }

    /// Rebuilds the caches from the members.
    pub fn recompute(&mut self) {
        self.since_recompute = 0;
        self.r_max = T::zero();
        self.diameter = None;
        let dim = self.members.front().map_or(0, |m| m.x.len());
        self.sum = vec![T::zero(); dim];
        for (i, a) in self.members.iter().enumerate() {
            self.sum.iter_mut().zip(&a.x).for_each(|(s, &v)| *s = *s + v);
            for b in self.members.iter().skip(i + 1) {
                let d = dist(&a.x, &b.x);
                if d > self.r_max || self.diameter.is_none() {
                    self.r_max = d;
                    self.diameter = Some((a.seq, b.seq));
                }
            }
        }
    }

    /// Brute-force diameter, for cache checks.
    pub fn diameter_oracle(&self) -> T {
        let mut best = T::zero();
        for (i, a) in self.members.iter().enumerate() {
            for b in self.members.iter().skip(i + 1) {
                best = best.max(dist(&a.x, &b.x));
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eviction_and_diameter() {
        let mut c = PersonalNormalCluster::new("p", 300.0);
        c.push(0.0, vec![0.0_f64, 0.0]).unwrap();
        c.push(10.0, vec![5.0, 0.0]).unwrap();
        c.push(20.0, vec![1.0, 0.0]).unwrap();
        assert_eq!(c.r_max(), 5.0);
        // evicts t=0, which was a diameter endpoint
        c.push(301.0, vec![2.0, 0.0]).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.r_max(), 4.0);
        assert_eq!(c.centroid().unwrap(), vec![8.0 / 3.0, 0.0]);
    }

    #[test]
    fn window_is_inclusive() {
        let mut c = PersonalNormalCluster::new("p", 300.0);
        c.push(0.0, vec![0.0_f64]).unwrap();
        c.push(300.0, vec![1.0]).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn rejects_out_of_order() {
        let mut c = PersonalNormalCluster::new("p", 300.0);
        c.push(5.0, vec![0.0_f64]).unwrap();
        assert!(c.push(4.0, vec![0.0]).is_err());
    }
}
