//! Acceptance harness: one PASS / FAIL / SKIP line per criterion.
//!
//! Run with `cargo test -p prealarm-core --test acceptance -- --nocapture`. Set `MITDB_DIR`
//! to a directory holding the MIT-BIH `.hea`/`.dat`/`.atr` files to enable the real-data
//! checks. The test itself fails when the set of failing criteria differs from
//! `KNOWN_FAILURES`, so an unexpected regression (or an unexpected pass) is never silent.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use prealarm::classifier::*;
use prealarm::evaluation::{binary_metrics, ConfusionMatrix, PredictionTable};
use prealarm::geometry::*;
use prealarm::linalg::{cosine_distance, norm};
use prealarm::pipeline::*;
use prealarm::swarm::*;
use prealarm::synthetic::{write_cohort, CohortConfig};
use prealarm::wfdb::{decode_212, encode_212};
use prealarm::Class;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Criteria expected to fail, each with its analysis in the README.
/// 10: the published S diagonal (28.41) does not follow from its own counts (15 / 51 = 29.41).
const KNOWN_FAILURES: &[u32] = &[10];

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}
use Verdict::*;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> Verdict {
    let t = Instant::now();
    let v = f();
    let el = t.elapsed();
    let note = format!("{:.3}s", el.as_secs_f64());
    match (v, limit) {
        (Pass(d), Some(l)) if el >= l => Fail(format!("{d}; too slow: {note} (limit {:.0}s)", l.as_secs_f64())),
        (Pass(d), _) => Pass(format!("{d}; {note}")),
        (Fail(d), _) => Fail(format!("{d}; {note}")),
        (s, _) => s,
    }
}

fn mitdb_dir() -> Option<PathBuf> {
    std::env::var_os("MITDB_DIR").map(PathBuf::from).filter(|p| p.is_dir())
}

fn c1_format212() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let v: Vec<i16> = (0..200_000).map(|_| rng.random_range(-2048..=2047)).collect();
    let back = decode_212(&encode_212(&v), v.len()).expect("decodes");
    check(back == v, format!("{} pairs bit-exact: {}", v.len() / 2, back == v))
}

fn c2_spherical() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = Normal::new(0.0, 1.0).unwrap();
    let mut worst = 0.0_f64;
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..8).map(|_| g.sample(&mut rng)).collect();
        let back = to_cartesian(&to_spherical(&x).unwrap());
        worst = worst.max(x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    check(worst < 1e-9, format!("max error {worst:.2e}"))
}

fn c3_orthogonality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = Normal::new(0.0, 1.0).unwrap();
    let (mut pair, mut radius) = (0.0_f64, 0.0_f64);
    for _ in 0..20 {
        let anchor: Vec<f64> = (0..8).map(|_| g.sample(&mut rng)).collect();
        let ab: Vec<(Class, Vec<f64>)> =
            Class::ABNORMAL.iter().map(|&c| (c, anchor.iter().map(|a| a + 2.0 * g.sample(&mut rng)).collect())).collect();
        for kind in [MapKind::PiecewiseLinear, MapKind::Logit { alpha_g: 1.0 }] {
            let t = match SpatialTransform::build(&anchor, &ab, &TransformConfig { kind, ..Default::default() }) {
                Ok(t) => t,
                Err(e) => return Fail(format!("build failed: {e}")),
            };
            let zs = t.transformed_centroids().unwrap();
            for a in 0..zs.len() {
                radius = radius.max((norm(&zs[a]) - 1.0).abs());
                for b in 0..a {
                    pair = pair.max((cosine_distance(&zs[a], &zs[b]).unwrap() - 1.0).abs());
                }
            }
        }
    }
    check(pair < 1e-6 && radius < 1e-6, format!("40 transforms; max |cd-1| {pair:.1e}, max ||z|-1| {radius:.1e}"))
}

fn c4_mapping() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut knot_err, mut slope_err, mut monotone) = (0.0_f64, 0.0_f64, true);
    let mut maps = 0;
    while maps < 40 {
        let domain = if maps % 2 == 0 { std::f64::consts::PI } else { std::f64::consts::TAU };
        let k = 1 + maps % 3;
        let mut a: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..0.95) * domain).collect();
        let mut b: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..0.95) * domain).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let t = AngularTargets::new(domain, &a.into_iter().zip(b).collect::<Vec<_>>());
        if t.is_identity() || AngularTargets::margin_of(domain, &t.points).unwrap() < 0.02 {
            continue;
        }
        for kind in [MapKind::PiecewiseLinear, MapKind::Logit { alpha_g: 1.0 }] {
            let m = AngularMap::new(t.clone(), kind).unwrap();
            for (x, y) in t.knots() {
                knot_err = knot_err.max((m.eval(x) - y).abs());
            }
            let mut prev = m.eval(0.0);
            for i in 1..=10_000 {
                let v = m.eval(domain * i as f64 / 10_000.0);
                monotone &= v >= prev;
                prev = v;
            }
            for p in &m.params {
                let (g, h) = p.slopes_at_delta();
                slope_err = slope_err.max((g - h).abs());
            }
        }
        maps += 1;
    }
    check(
        knot_err < 1e-12 && monotone && slope_err < 1e-6,
        format!("80 maps; knot error {knot_err:.1e}, monotone {monotone}, slope mismatch {slope_err:.1e}"),
    )
}

fn c5_kernel() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = Normal::new(0.0, 1.0).unwrap();
    let basis = BasisSet::Polynomial2 { dim: 2 };
    let r2 = 2.0_f64.sqrt();
    let w = [1.0, r2, r2, r2, 1.0, 1.0];
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..2).map(|_| g.sample(&mut rng)).collect();
        let y: Vec<f64> = (0..2).map(|_| g.sample(&mut rng)).collect();
        let lhs: f64 = expand(&basis, &w, &x).iter().zip(expand(&basis, &w, &y)).map(|(a, b)| a * b).sum();
        let rhs = (1.0 + x[0] * y[0] + x[1] * y[1]).powi(2);
        worst = worst.max((lhs - rhs).abs());
    }
    check(worst < 1e-9, format!("max error {worst:.1e}"))
}

fn oracle_knn(points: &[Vec<f64>], labels: &[Class], k: usize, x: &[f64]) -> Class {
    let mut all: Vec<(f64, usize)> =
        points.iter().enumerate().map(|(i, p)| (p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum(), i)).collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (mut votes, mut sums) = ([0usize; 4], [0.0f64; 4]);
    for &(d, i) in &all[..k] {
        votes[labels[i].index()] += 1;
        sums[labels[i].index()] += d.sqrt();
    }
    let top = *votes.iter().max().unwrap();
    let mut cands: Vec<usize> = (0..4).filter(|&c| votes[c] == top).collect();
    let best = cands.iter().map(|&c| sums[c]).fold(f64::INFINITY, f64::min);
    cands.retain(|&c| sums[c] == best);
    Class::ALL[cands[0]]
}

fn c6_knn() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let points: Vec<Vec<f64>> = (0..200).map(|_| (0..3).map(|_| rng.random_range(0..5) as f64).collect()).collect();
    let labels: Vec<Class> = (0..200).map(|_| Class::ALL[rng.random_range(0..4)]).collect();
    let mut agree = 0;
    for q in 0..1000 {
        let k = 1 + q % 15;
        let model = GlobalModel::new(points.clone(), labels.clone(), k).unwrap();
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(0..10) as f64 * 0.5).collect();
        agree += usize::from(model.classify(&x) == oracle_knn(&points, &labels, k, &x));
    }
    check(agree == 1000, format!("{agree}/1000 queries agree (k = 1..15, tie-heavy grid)"))
}

fn swarm_fixture() -> Vec<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let centres: [[f64; 8]; 4] = [
        [0.0; 8],
        [3.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.5, 1.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.5, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    ];
    centres
        .iter()
        .zip([0.3, 0.8, 0.4, 0.2])
        .map(|(c, s)| {
            let n = Normal::new(0.0, s).unwrap();
            (0..150).map(|_| c.iter().map(|&m| m + n.sample(&mut rng)).collect()).collect()
        })
        .collect()
}

fn c7_mopso() -> Verdict {
    let clusters = swarm_fixture();
    let refs: Vec<&[Vec<f64>]> = clusters.iter().map(|c| c.as_slice()).collect();
    let cfg = MopsoConfig { seed: 1, ..Default::default() };
    let run = |basis: &BasisSet, seeds: &[Vec<f64>]| {
        let stats = ClusterStats::new(basis, &refs, cfg.max_cluster_points, cfg.seed);
        let mut invariant = true;
        let a = mopso_observed(&stats, basis, &cfg, seeds, &mut |_, a: &ParetoArchive<f64>| {
            invariant &= a.is_mutually_non_dominated()
        })
        .unwrap();
        (a, invariant)
    };
    let csv = |a: &ParetoArchive<f64>| {
        let mut b = vec![];
        write_archive_csv(&mut b, a).unwrap();
        b
    };
    let poly_basis = BasisSet::Polynomial2 { dim: 8 };
    let lin_basis = BasisSet::Linear { dim: 8 };
    let (lin, inv_lin) = run(&lin_basis, &[]);
    let seeds: Vec<Vec<f64>> = lin.entries.iter().map(|e| poly_basis.embed_linear(&e.w).unwrap()).collect();
    let (poly, inv_poly) = run(&poly_basis, &seeds);
    let deterministic = (0..2).all(|_| csv(&run(&poly_basis, &seeds).0) == csv(&poly));

    let covered = |front: &ParetoArchive<f64>, q: &ArchiveEntry<f64>| {
        front.entries.iter().any(|p| p.o1 <= q.o1 * (1.0 + 1e-12) && p.o2 <= q.o2 * (1.0 + 1e-12))
    };
    let missed = lin.entries.iter().filter(|q| !covered(&poly, q)).count();
    let (cold, _) = run(&poly_basis, &[]);
    let cold_missed = lin.entries.iter().filter(|q| !covered(&cold, q)).count();
    check(
        inv_lin && inv_poly && deterministic && missed == 0,
        format!(
            "non-dominated every iteration {}, 3 runs identical {deterministic}, warm-started front misses {missed}/{} linear points (cold start would miss {cold_missed})",
            inv_lin && inv_poly,
            lin.len()
        ),
    )
}

fn blob(rng: &mut ChaCha8Rng, c: [f64; 2], spread: f64, n: usize) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![c[0] + spread * rng.random_range(-1.0..1.0), c[1] + spread * rng.random_range(-1.0..1.0)])
        .collect();
    let m = [pts.iter().map(|p| p[0]).sum::<f64>() / n as f64, pts.iter().map(|p| p[1]).sum::<f64>() / n as f64];
    for p in &mut pts {
        p[0] += c[0] - m[0];
        p[1] += c[1] - m[1];
    }
    pts
}

fn c8_label_flip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cluster = PersonalNormalCluster::new("fig3", 300.0);
    for (i, p) in blob(&mut rng, [0.0, 0.0], 0.05, 40).into_iter().enumerate() {
        cluster.push(i as f64, p).unwrap();
    }
    let v = blob(&mut rng, [1.0, 0.0], 0.8, 200);
    let f = blob(&mut rng, [4.33, 2.5], 0.05, 50);
    let ab = AbnormalClusters::new(vec![(Class::V, v), (Class::F, f)]).unwrap();
    let x = [0.591, 0.104];
    let plain = deviation_analysis(&DeviationSpace::Identity, &cluster, &ab, &x).unwrap();
    let transformed = deviation_analysis(&DeviationSpace::Personal(TransformConfig::default()), &cluster, &ab, &x).unwrap();
    check(plain == Class::F && transformed == Class::V, format!("untransformed {plain}, transformed {transformed}"))
}

fn c9_metric_algebra() -> Verdict {
    let cm = ConfusionMatrix::from_rows([[9255, 21, 72, 1], [657, 1678, 8, 9], [71, 3, 417, 0], [122, 0, 11, 89]]);
    let expect = [(Class::V, [94.38, 98.59, 93.71]), (Class::S, [98.67, 82.09, 99.38]), (Class::F, [98.85, 89.9, 98.92])];
    let mut ok = true;
    let mut parts = vec![];
    for (c, e) in expect {
        let m = binary_metrics(&cm, c);
        let got = [m.acc.unwrap(), m.se.unwrap(), m.sp.unwrap()];
        ok &= got.iter().zip(e).all(|(g, e)| (g - e).abs() <= 0.01);
        parts.push(format!("{c}: {:.2}/{:.2}/{:.2}", got[0], got[1], got[2]));
    }
    check(ok, parts.join(", "))
}

fn c10_prediction_arithmetic() -> Verdict {
    let t = PredictionTable::from_counts([[467, 122, 14], [36, 15, 0], [40, 60, 5]], [543, 197, 19]);
    let post = t.posterior();
    let diag = [0, 1, 2].map(|i| post[i][i].unwrap());
    let prior = t.prior_pct().map(|p| p.unwrap());
    let want_diag = [77.45, 28.41, 4.76];
    let want_prior = [71.54, 25.96, 2.50];
    let ok = diag.iter().zip(want_diag).chain(prior.iter().zip(want_prior)).all(|(g, w)| (g - w).abs() <= 0.01);
    check(
        ok,
        format!(
            "diagonal {:.2}/{:.2}/{:.2} (expected {want_diag:?}), priors {:.2}/{:.2}/{:.2}",
            diag[0], diag[1], diag[2], prior[0], prior[1], prior[2]
        ),
    )
}

/// Approximate segment totals per class (N, V, S, F) over both splits.
const SEGMENT_TOTALS: [u64; 4] = [24354, 4409, 1412, 377];

fn c11_mitdb(dir: Option<PathBuf>) -> Verdict {
    let Some(data) = dir else {
        return Skip("MITDB_DIR not set; needs a local MIT-BIH Arrhythmia Database copy".into());
    };
    let out = tempfile::tempdir().unwrap();
    let mut cfg = PipelineConfig { data_dir: data, out_dir: out.path().to_path_buf(), ..Default::default() };
    cfg.transform.mode = TransformMode::None;
    let run = || -> prealarm::Result<(IngestManifest, prealarm::evaluation::EvaluationReport)> {
        let m = cmd_ingest(&cfg)?;
        cmd_train(&cfg)?;
        cmd_transform_fit(&cfg)?;
        Ok((m, cmd_evaluate(&cfg)?))
    };
    let (m, report) = match run() {
        Ok(v) => v,
        Err(e) => return Fail(format!("pipeline error: {e}")),
    };
    let got = [m.totals.N, m.totals.V, m.totals.S, m.totals.F];
    let within = got.iter().zip(SEGMENT_TOTALS).all(|(&g, w)| (g as f64 - w as f64).abs() <= 0.1 * w as f64);
    let v = binary_metrics(&report.summary.red, Class::V);
    let (se, acc) = (v.se.unwrap_or(0.0), v.acc.unwrap_or(0.0));
    check(
        within && se >= 90.0 && acc >= 90.0,
        format!("segments N/V/S/F {got:?} vs {SEGMENT_TOTALS:?} (+-10%: {within}); global V SE {se:.2} ACC {acc:.2}"),
    )
}

fn uplift_line(report: &prealarm::evaluation::EvaluationReport) -> (Vec<Option<f64>>, String) {
    let p = &report.summary.prediction;
    let up = p.windowed.uplift.to_vec();
    let f = |v: &[Option<f64>; 3]| v.map(|x| x.map_or("n/a".to_string(), |x| format!("{x:+.1}"))).join("/");
    (up, format!("W=10 uplift V/S/F {} (vs predicted red {})", f(&p.windowed.uplift), f(&p.red_windowed.uplift)))
}

fn c12_uplift(dir: Option<PathBuf>) -> Verdict {
    let root = tempfile::tempdir().unwrap();
    let names = |p: &str| (0..12).map(|i| format!("{p}{i:02}")).collect::<Vec<String>>();
    let (ds1, ds2) = (names("t"), names("e"));
    let all: Vec<String> = ds1.iter().chain(&ds2).cloned().collect();
    let data = root.path().join("data");
    write_cohort(&data, &all, 42, &CohortConfig::default()).unwrap();
    let mut cfg = PipelineConfig { data_dir: data, out_dir: root.path().join("out"), ..Default::default() };
    cfg.records.ds1 = ds1;
    cfg.records.ds2 = ds2;
    cfg.evaluation.window = 10;
    let run = |cfg: &PipelineConfig| -> prealarm::Result<prealarm::evaluation::EvaluationReport> {
        cmd_ingest(cfg)?;
        cmd_train(cfg)?;
        cmd_transform_fit(cfg)?;
        cmd_evaluate(cfg)
    };
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => return Fail(format!("synthetic pipeline error: {e}")),
    };
    let (up, line) = uplift_line(&report);
    let synthetic_ok = up.iter().flatten().any(|&u| u >= 5.0);
    let mut detail = format!("synthetic cohort: {line}");

    let real_ok = match dir {
        None => {
            detail.push_str("; MITDB part skipped (MITDB_DIR not set)");
            true
        }
        Some(data) => {
            let out = tempfile::tempdir().unwrap();
            let real = PipelineConfig { data_dir: data, out_dir: out.path().to_path_buf(), ..Default::default() };
            match run(&real) {
                Ok(r) => {
                    let u = r.summary.prediction.unwindowed.uplift[0];
                    detail.push_str(&format!("; MITDB V uplift {u:?}"));
                    u.is_some_and(|u| u > 0.0)
                }
                Err(e) => {
                    detail.push_str(&format!("; MITDB pipeline error: {e}"));
                    false
                }
            }
        }
    };
    check(synthetic_ok && real_ok, detail)
}

#[test]
fn acceptance_criteria() {
    let mitdb = mitdb_dir();
    let fast = Some(Duration::from_secs(1));
    let results: Vec<(u32, &str, Verdict)> = vec![
        (1, "format-212 round trip", timed(fast, c1_format212)),
        (2, "hyper-spherical round trip", timed(fast, c2_spherical)),
        (3, "transform orthogonality", timed(None, c3_orthogonality)),
        (4, "mapping functions", timed(None, c4_mapping)),
        (5, "kernel identity", timed(None, c5_kernel)),
        (6, "kNN oracle equivalence", timed(None, c6_knn)),
        (7, "MOPSO archive", timed(None, c7_mopso)),
        (8, "label-flip fixture", timed(None, c8_label_flip)),
        (9, "metric algebra", timed(fast, c9_metric_algebra)),
        (10, "prediction-table arithmetic", timed(None, c10_prediction_arithmetic)),
        (11, "MITDB end-to-end ballpark", timed(Some(Duration::from_secs(300)), || c11_mitdb(mitdb.clone()))),
        (12, "predictive uplift", timed(None, || c12_uplift(mitdb.clone()))),
    ];
    println!();
    let mut failed = vec![];
    for (n, name, v) in &results {
        let (tag, detail) = match v {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed.push(*n);
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("{tag} {n:>2} {name}: {detail}");
    }
    assert_eq!(failed, KNOWN_FAILURES, "failing criteria differ from the documented set");
}
