use serde::{Deserialize, Serialize};

use crate::classifier::personal::PersonalNormalCluster;
use crate::error::{Error, Result};
use crate::geometry::{SpatialTransform, TransformConfig};
use crate::labels::Class;
use crate::linalg::{cosine_distance, dist, mean, median_in_place, sq_dist, sub};
use crate::scalar::Scalar;
use crate::swarm::PolynomialTransform;

/// Frozen abnormal clusters built from the training set. Empty classes are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AbnormalClusters<T> {
    pub classes: Vec<Class>,
    pub members: Vec<Vec<Vec<T>>>,
    pub centroids: Vec<Vec<T>>,
}

impl<T: Scalar> AbnormalClusters<T> {
    pub fn new(clusters: Vec<(Class, Vec<Vec<T>>)>) -> Result<Self> {
        let mut out = AbnormalClusters { classes: vec![], members: vec![], centroids: vec![] };
        for (c, pts) in clusters {
            if !c.is_abnormal() {
                return Err(Error::InvalidParameter(format!("class {c} is not abnormal")));
            }
            if out.classes.contains(&c) {
                return Err(Error::InvalidParameter(format!("class {c} given twice")));
            }
            if let Some(m) = mean(&pts) {
                out.classes.push(c);
                out.centroids.push(m);
                out.members.push(pts);
            }
        }
        // fixed V, S, F order keeps tie-breaks independent of input order
        let mut idx: Vec<usize> = (0..out.classes.len()).collect();
        idx.sort_by_key(|&i| out.classes[i].index());
        Ok(AbnormalClusters {
            classes: idx.iter().map(|&i| out.classes[i]).collect(),
            members: idx.iter().map(|&i| out.members[i].clone()).collect(),
            centroids: idx.iter().map(|&i| out.centroids[i].clone()).collect(),
        })
    }

    /// Groups labelled points; N points are ignored.
    pub fn from_labelled(points: &[Vec<T>], labels: &[Class]) -> Result<Self> {
        let clusters = Class::ABNORMAL
            .iter()
            .map(|&c| {
                let pts = points.iter().zip(labels).filter(|(_, &l)| l == c).map(|(p, _)| p.clone()).collect();
                (c, pts)
            })
            .collect();
        Self::new(clusters)
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn centroid_pairs(&self) -> Vec<(Class, Vec<T>)> {
        self.classes.iter().copied().zip(self.centroids.iter().cloned()).collect()
    }
}

/// Distances of one sample to the personal normal cluster and the abnormal clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationMetrics<T> {
    pub r_max: T,
    pub d_n_max: T,
    pub d_n: T,
    pub d_x: Vec<(Class, T)>,
}

fn median_distance<T: Scalar, P: AsRef<[T]>>(x: &[T], pts: impl Iterator<Item = P>) -> T {
    let mut d: Vec<T> = pts.map(|p| dist(p.as_ref(), x)).collect();
    median_in_place(&mut d).unwrap_or(T::infinity())
}

pub fn compute_deviation_metrics<T: Scalar>(
    cluster: &PersonalNormalCluster<T>,
    abnormal: &AbnormalClusters<T>,
    x: &[T],
) -> Result<DeviationMetrics<T>> {
    if cluster.len() < 2 {
        return Err(Error::NotInitialized(format!(
            "normal cluster of {} has {} member(s), need 2",
            cluster.patient_id,
            cluster.len()
        )));
    }
    if abnormal.is_empty() {
        return Err(Error::NotInitialized("no abnormal clusters".into()));
    }
    let d_n_max = cluster.members().map(|m| dist(m, x)).fold(T::zero(), T::max);
    Ok(DeviationMetrics {
        r_max: cluster.r_max(),
        d_n_max,
        d_n: median_distance(x, cluster.members()),
        d_x: abnormal
            .classes
            .iter()
            .zip(&abnormal.members)
            .map(|(&c, m)| (c, median_distance(x, m.iter())))
            .collect(),
    })
}

/// Sample stays normal when it lies within `alpha` diameters of the personal cluster and is
/// closer (by median distance) to it than to every abnormal cluster.
pub fn confirm_normal<T: Scalar>(m: &DeviationMetrics<T>, alpha: f64) -> bool {
    m.d_n_max <= T::lit(alpha) * m.r_max && m.d_x.iter().all(|&(_, dx)| m.d_n < dx)
}

/// Cosine argmin between `z - c_n` and `c_X - z`; ties keep the earlier class (V, S, F).
/// A sample on `c_n` falls back to the nearest centroid.
pub fn deviation_label<T: Scalar>(z: &[T], c_n: &[T], c_x: &[(Class, Vec<T>)]) -> Class {
    let v_n = sub(z, c_n);
    if v_n.iter().all(|&v| v == T::zero()) {
        return nearest_centroid(z, c_x);
    }
    let mut best: Option<(T, Class)> = None;
    for (c, cx) in c_x {
        // a sample sitting on an abnormal centroid counts as perfectly aligned with it
        let d = cosine_distance(&v_n, &sub(cx, z)).unwrap_or(T::zero());
        if best.is_none_or(|(b, _)| d < b) {
            best = Some((d, *c));
        }
    }
    best.map_or(Class::V, |(_, c)| c)
}

fn nearest_centroid<T: Scalar>(z: &[T], c_x: &[(Class, Vec<T>)]) -> Class {
    let mut best = (T::infinity(), Class::V);
    for (c, cx) in c_x {
        let d = sq_dist(cx, z);
        if d < best.0 {
            best = (d, *c);
        }
    }
    best.1
}

/// Space in which deviation directions are compared.
#[derive(Debug, Clone, PartialEq)]
pub enum DeviationSpace<T> {
    Identity,
    /// Deterministic map re-anchored at the personal centroid whenever the cluster changes.
    Personal(TransformConfig),
    /// Deterministic map built once, at the training normal centroid.
    Fixed(SpatialTransform<T>),
    Polynomial(PolynomialTransform<T>),
}

enum Prepared<T> {
    Identity,
    Map(Box<SpatialTransform<T>>, Vec<(Class, Vec<T>)>),
}

/// Stateful deviation stage with per-cluster-version caches.
pub struct DeviationAnalyzer<'a, T> {
    space: &'a DeviationSpace<T>,
    abnormal: &'a AbnormalClusters<T>,
    fixed_targets: Option<Vec<(Class, Vec<T>)>>,
    cache: Option<(u64, Prepared<T>)>,
    /// Times the deterministic map could not be built and the identity was used.
    pub fallbacks: usize,
}

impl<'a, T: Scalar> DeviationAnalyzer<'a, T> {
    pub fn new(space: &'a DeviationSpace<T>, abnormal: &'a AbnormalClusters<T>) -> Result<Self> {
        let fixed_targets = match space {
            DeviationSpace::Fixed(t) => Some(
                abnormal
                    .centroid_pairs()
                    .into_iter()
                    .map(|(c, x)| Ok((c, t.apply(&x)?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            DeviationSpace::Polynomial(p) => Some(
                abnormal
                    .classes
                    .iter()
                    .zip(&abnormal.members)
                    .map(|(&c, m)| {
                        let mapped: Vec<Vec<T>> = m.iter().map(|x| p.apply(x)).collect();
                        (c, mean(&mapped).expect("non-empty cluster"))
                    })
                    .collect(),
            ),
            _ => None,
        };
        Ok(DeviationAnalyzer { space, abnormal, fixed_targets, cache: None, fallbacks: 0 })
    }

    fn prepare(&mut self, cluster: &PersonalNormalCluster<T>, c_n: &[T]) {
        if matches!(&self.cache, Some((v, _)) if *v == cluster.version()) {
            return;
        }
        let DeviationSpace::Personal(cfg) = self.space else { return };
        let prepared = SpatialTransform::build(c_n, &self.abnormal.centroid_pairs(), cfg).and_then(|t| {
            let images = t.transformed_centroids()?;
            let targets = t.frame.classes.iter().copied().zip(images).collect();
            Ok(Prepared::Map(Box::new(t), targets))
        });
        let prepared = prepared.unwrap_or_else(|e| {
            log::warn!("{}: deterministic map unavailable ({e}); comparing untransformed", cluster.patient_id);
            self.fallbacks += 1;
            Prepared::Identity
        });
        self.cache = Some((cluster.version(), prepared));
    }

    /// Yellow-alarm class for a sample that failed the normal check.
    pub fn analyze(&mut self, cluster: &PersonalNormalCluster<T>, x: &[T]) -> Result<Class> {
        let c_n = cluster
            .centroid()
            .ok_or_else(|| Error::NotInitialized(format!("empty normal cluster for {}", cluster.patient_id)))?;
        match self.space {
            DeviationSpace::Identity => Ok(deviation_label(x, &c_n, &self.abnormal.centroid_pairs())),
            DeviationSpace::Fixed(t) => {
                let z = t.apply(x)?;
                let c = t.apply(&c_n)?;
                Ok(deviation_label(&z, &c, self.fixed_targets.as_ref().expect("fixed targets")))
            }
            DeviationSpace::Polynomial(p) => {
                let mapped: Vec<Vec<T>> = cluster.members().map(|m| p.apply(m)).collect();
                let c = mean(&mapped).expect("non-empty cluster");
                Ok(deviation_label(&p.apply(x), &c, self.fixed_targets.as_ref().expect("poly targets")))
            }
            DeviationSpace::Personal(_) => {
                self.prepare(cluster, &c_n);
                match &self.cache.as_ref().expect("prepared").1 {
                    Prepared::Identity => Ok(deviation_label(x, &c_n, &self.abnormal.centroid_pairs())),
                    Prepared::Map(t, targets) => {
                        let z = t.apply(x)?;
                        Ok(deviation_label(&z, &vec![T::zero(); z.len()], targets))
                    }
                }
            }
        }
    }
}

/// One-shot form of [`DeviationAnalyzer::analyze`].
pub fn deviation_analysis<T: Scalar>(
    space: &DeviationSpace<T>,
    cluster: &PersonalNormalCluster<T>,
    abnormal: &AbnormalClusters<T>,
    x: &[T],
) -> Result<Class> {
    DeviationAnalyzer::new(space, abnormal)?.analyze(cluster, x)
}
