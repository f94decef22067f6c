use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::scalar::Scalar;
use crate::swarm::archive::{crowding_distances, dominates, ArchiveEntry, ParetoArchive};
use crate::swarm::basis::BasisSet;
use crate::swarm::objectives::{ClusterStats, Objectives};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MopsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub archive_capacity: usize,
    /// Per-component velocity bound.
    pub max_velocity: f64,
    /// Points per cluster used for objective evaluation.
    pub max_cluster_points: usize,
    pub seed: u64,
}

impl Default for MopsoConfig {
    fn default() -> Self {
        MopsoConfig {
            swarm_size: 50,
            iterations: 100,
            inertia: 0.7,
            cognitive: 1.5,
            social: 1.5,
            archive_capacity: 100,
            max_velocity: 1.0,
            max_cluster_points: 2000,
            seed: 0,
        }
    }
}

impl MopsoConfig {
    pub fn validate(&self) -> Result<()> {
        let weights = [self.inertia, self.cognitive, self.social, self.max_velocity];
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Config("MOPSO weights must be finite and non-negative".into()));
        }
        if self.swarm_size == 0 || self.archive_capacity == 0 {
            return Err(Error::Config("MOPSO swarm size and archive capacity must be positive".into()));
        }
        Ok(())
    }
}

struct Particle<T> {
    x: Vec<T>,
    v: Vec<T>,
    best_x: Vec<T>,
    best: Objectives<T>,
    rng: ChaCha8Rng,
}

fn unit<T: Scalar>(mut w: Vec<T>) -> Option<Vec<T>> {
    let n = norm(&w);
    if n > T::zero() && n.is_finite() {
        w.iter_mut().for_each(|v| *v = *v / n);
        Some(w)
    } else {
        None
    }
}

fn particle_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(i as u64);
    r
}

/// Archive state after each iteration (iteration 0 is the initial swarm).
pub type Observer<'a, T> = dyn FnMut(usize, &ParetoArchive<T>) + 'a;

/// Multi-objective particle swarm over unit-norm coefficient vectors.
///
/// Particle 0 starts at the identity coefficients; the others at random unit vectors.
/// Each particle owns a ChaCha8 stream (`seed`, stream `i`), so results do not depend on
/// thread scheduling.
pub fn mopso<T: Scalar>(stats: &ClusterStats<T>, basis: &BasisSet, config: &MopsoConfig) -> Result<ParetoArchive<T>> {
    mopso_observed(stats, basis, config, &[], &mut |_, _| {})
}

/// Like [`mopso`], with warm-start positions and a per-iteration callback. The first
/// `swarm_size - 1` seeds replace random particles; any further seeds only seed the archive.
/// The archive capacity grows by the number of seeds so that crowding pruning does not
/// immediately discard the starting front.
pub fn mopso_observed<T: Scalar>(
    stats: &ClusterStats<T>,
    basis: &BasisSet,
    config: &MopsoConfig,
    seeds: &[Vec<T>],
    observe: &mut Observer<'_, T>,
) -> Result<ParetoArchive<T>> {
    config.validate()?;
    let dim = basis.len();
    let lit = T::lit;
    let mut particles: Vec<Particle<T>> = (0..config.swarm_size)
        .map(|i| {
            let mut rng = particle_rng(config.seed, i);
            let x = if i == 0 {
                basis.identity_weights::<T>().weights().to_vec()
            } else if let Some(s) = seeds.get(i - 1).and_then(|s| unit(s.clone())) {
                s
            } else {
                loop {
                    let w: Vec<T> = (0..dim).map(|_| lit(StandardNormal.sample(&mut rng))).collect();
                    if let Some(u) = unit(w) {
                        break u;
                    }
                }
            };
            let v: Vec<T> = (0..dim)
                .map(|_| lit(rng.random_range(-1.0..1.0) * config.max_velocity * 0.1))
                .collect();
            Particle {
                best_x: x.clone(),
                x,
                v,
                best: (T::infinity(), T::infinity()),
                rng,
            }
        })
        .collect();

    let mut archive = ParetoArchive::new(config.archive_capacity + seeds.len());
    let evals: Vec<Objectives<T>> = particles.par_iter().map(|p| stats.evaluate(&p.x)).collect();
    for (p, o) in particles.iter_mut().zip(evals) {
        p.best = o;
        archive.insert(ArchiveEntry {
            w: p.x.clone(),
            o1: o.0,
            o2: o.1,
        });
    }
    // seeds that did not get a particle still enter the archive
    for s in seeds.iter().skip(config.swarm_size.saturating_sub(1)).filter_map(|s| unit(s.clone())) {
        let o = stats.evaluate(&s);
        archive.insert(ArchiveEntry { w: s, o1: o.0, o2: o.1 });
    }
    if archive.is_empty() {
        return Err(Error::Config(
            "every initial particle has degenerate objectives; check that clusters are non-empty and distinct".into(),
        ));
    }
    observe(0, &archive);

    let (w_in, c1, c2, vmax) = (lit(config.inertia), lit(config.cognitive), lit(config.social), lit(config.max_velocity));
    for it in 1..=config.iterations {
        // leaders: uniform from the less crowded half of the archive
        let objs = archive.objectives();
        let cd = crowding_distances(&objs);
        let mut order: Vec<usize> = (0..objs.len()).collect();
        order.sort_by(|&a, &b| cd[b].partial_cmp(&cd[a]).unwrap().then(a.cmp(&b)));
        order.truncate(objs.len().div_ceil(2));
        let leaders: Vec<&[T]> = order.iter().map(|&i| archive.entries[i].w.as_slice()).collect();

        let evals: Vec<Objectives<T>> = particles
            .par_iter_mut()
            .map(|p| {
                let leader = leaders[p.rng.random_range(0..leaders.len())];
                for j in 0..dim {
                    let r1 = lit(p.rng.random::<f64>());
                    let r2 = lit(p.rng.random::<f64>());
                    let v = w_in * p.v[j] + c1 * r1 * (p.best_x[j] - p.x[j]) + c2 * r2 * (leader[j] - p.x[j]);
                    p.v[j] = v.max(-vmax).min(vmax);
                }
                let moved: Vec<T> = p.x.iter().zip(&p.v).map(|(a, b)| *a + *b).collect();
                if let Some(u) = unit(moved) {
                    p.x = u;
                }
                let o = stats.evaluate(&p.x);
                let replace = if dominates(o, p.best) {
                    true
                } else if dominates(p.best, o) {
                    false
                } else {
                    p.rng.random::<bool>()
                };
                if replace {
                    p.best = o;
                    p.best_x = p.x.clone();
                }
                o
            })
            .collect();
        for (p, o) in particles.iter().zip(evals) {
            archive.insert(ArchiveEntry {
                w: p.x.clone(),
                o1: o.0,
                o2: o.1,
            });
        }
        observe(it, &archive);
    }
    Ok(archive)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clusters() -> Vec<Vec<Vec<f64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let centres = [[0.0, 0.0, 0.0], [3.0, 0.5, 0.0], [0.5, 2.5, 0.2], [2.0, 2.0, 1.5]];
        centres
            .iter()
            .map(|c| {
                (0..40)
                    .map(|_| c.iter().map(|&m| m + rng.random_range(-0.5..0.5)).collect())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn zero_iterations_single_particle() {
        let cl = clusters();
        let refs: Vec<&[Vec<f64>]> = cl.iter().map(|c| c.as_slice()).collect();
        let basis = BasisSet::Polynomial2 { dim: 3 };
        let stats = ClusterStats::new(&basis, &refs, 2000, 1);
        let cfg = MopsoConfig {
            swarm_size: 1,
            iterations: 0,
            ..Default::default()
        };
        let a = mopso(&stats, &basis, &cfg).unwrap();
        assert_eq!(a.len(), 1);
        let w = basis.identity_weights::<f64>();
        assert_eq!(a.entries[0].objectives(), stats.evaluate(w.weights()));
    }

    #[test]
    fn unit_norm_and_front_after_each_iteration() {
        let cl = clusters();
        let refs: Vec<&[Vec<f64>]> = cl.iter().map(|c| c.as_slice()).collect();
        let basis = BasisSet::Polynomial2 { dim: 3 };
        let stats = ClusterStats::new(&basis, &refs, 2000, 1);
        let cfg = MopsoConfig {
            swarm_size: 12,
            iterations: 15,
            seed: 3,
            ..Default::default()
        };
        let mut prev = f64::INFINITY;
        let a = mopso_observed(&stats, &basis, &cfg, &[], &mut |_, arch| {
            assert!(arch.is_mutually_non_dominated());
            assert!(arch.entries.iter().all(|e| (norm(&e.w) - 1.0).abs() < 1e-9));
            let b = arch.scalarized_best(0.5);
            assert!(b <= prev);
            prev = b;
        })
        .unwrap();
        assert!(!a.is_empty());
    }
}
