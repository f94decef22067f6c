use prealarm::geometry::*;
use prealarm::labels::Class;
use prealarm::linalg::{cosine_distance, norm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

#[test]
fn spherical_round_trip_d8() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = Normal::new(0.0, 1.0).unwrap();
    let mut worst = 0.0_f64;
    for i in 0..10_000 {
        let scale = 10f64.powi(i % 7 - 3);
        let mut x: Vec<f64> = (0..8).map(|_| g.sample(&mut rng) * scale).collect();
        // sprinkle exact zeros, including trailing ones
        if i % 5 == 0 {
            x[rng.random_range(0..8)] = 0.0;
        }
        if i % 11 == 0 {
            x[7] = 0.0;
            x[6] = 0.0;
        }
        let s = to_spherical(&x).unwrap();
        assert!(s.theta[..6].iter().all(|&t| (0.0..=PI).contains(&t)));
        let back = to_cartesian(&s);
        let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(err / scale.max(1.0));
    }
    assert!(worst < 1e-9, "{worst}");
}

fn random_targets(rng: &mut ChaCha8Rng, domain: f64, k: usize) -> AngularTargets<f64> {
    loop {
        let mut a: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..0.95) * domain).collect();
        let mut b: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..0.95) * domain).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let t = AngularTargets::new(domain, &a.into_iter().zip(b).collect::<Vec<_>>());
        if !t.is_identity() && AngularTargets::margin_of(domain, &t.points).unwrap() > 0.02 {
            return t;
        }
    }
}

#[test]
fn mapping_functions_hit_targets_and_stay_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..60 {
        let domain = if case % 2 == 0 { PI } else { 2.0 * PI };
        let t = random_targets(&mut rng, domain, 1 + case % 3);
        for kind in [MapKind::PiecewiseLinear, MapKind::Logit { alpha_g: [0.5, 1.0, 4.0][case % 3] }] {
            let m = AngularMap::new(t.clone(), kind).unwrap();
            for &(x, y) in &t.knots() {
                assert!((m.eval(x) - y).abs() < 1e-12, "{kind:?}: f({x}) = {} != {y}", m.eval(x));
            }
            let mut prev = m.eval(0.0);
            for i in 1..=10_000 {
                let v = m.eval(domain * i as f64 / 10_000.0);
                assert!(v >= prev, "{kind:?} not monotone at step {i}");
                prev = v;
            }
            if let MapKind::Logit { .. } = kind {
                for (r, p) in m.regions.iter().zip(&m.params) {
                    let (sg, sh) = p.slopes_at_delta();
                    assert!((sg - sh).abs() < 1e-6 * sg.abs().max(1.0), "slopes {sg} vs {sh}");
                    // one-sided finite differences agree with the analytic slopes
                    let h = 1e-7;
                    let left = (eval_logit_region(r, p, r.delta) - eval_logit_region(r, p, r.delta - h)) / h;
                    let right = (eval_logit_region(r, p, r.delta + h) - eval_logit_region(r, p, r.delta)) / h;
                    assert!((left - right).abs() < 1e-4 * left.abs().max(1.0), "{left} vs {right}");
                }
            }
        }
    }
}

#[test]
fn transformed_centroids_are_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let g = Normal::new(0.0, 1.0).unwrap();
    let mut built = 0;
    for _ in 0..40 {
        let anchor: Vec<f64> = (0..8).map(|_| g.sample(&mut rng)).collect();
        let ab: Vec<(Class, Vec<f64>)> = Class::ABNORMAL
            .iter()
            .map(|&c| (c, anchor.iter().map(|a| a + 2.0 * g.sample(&mut rng)).collect()))
            .collect();
        for kind in [MapKind::PiecewiseLinear, MapKind::Logit { alpha_g: 1.0 }] {
            let cfg = TransformConfig { kind, ..Default::default() };
            let t = SpatialTransform::build(&anchor, &ab, &cfg).unwrap();
            let zs = t.transformed_centroids().unwrap();
            for a in 0..3 {
                assert!((norm(&zs[a]) - 1.0).abs() < 1e-6);
                for b in 0..a {
                    assert!((cosine_distance(&zs[a], &zs[b]).unwrap() - 1.0).abs() < 1e-6);
                }
            }
            built += 1;
        }
    }
    assert_eq!(built, 80);
}

#[test]
fn gram_schmidt_orthogonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = Normal::new(0.0, 1.0).unwrap();
    let cols: Vec<Vec<f64>> = (0..3).map(|_| (0..8).map(|_| g.sample(&mut rng)).collect()).collect();
    let q = gram_schmidt(&cols).unwrap();
    assert_eq!(q[0], cols[0]);
    for a in 0..3 {
        for b in 0..a {
            let d: f64 = q[a].iter().zip(&q[b]).map(|(x, y)| x * y).sum();
            assert!(d.abs() < 1e-12 * norm(&q[a]) * norm(&q[b]));
        }
    }
    assert!(gram_schmidt(&[cols[0].clone(), cols[0].iter().map(|v| 2.0 * v).collect()]).is_err());
}
