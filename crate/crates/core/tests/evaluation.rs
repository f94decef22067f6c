#![allow(clippy::needless_range_loop)]

use approx::assert_abs_diff_eq;
use prealarm::classifier::{AlarmLabel, AlarmValue, Stage};
use prealarm::evaluation::*;
use prealarm::labels::Class;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Final confusion matrix of the cumulated test set; rows predicted N, V, S, F.
const CUMULATED: [[u64; 4]; 4] = [[9255, 21, 72, 1], [657, 1678, 8, 9], [71, 3, 417, 0], [122, 0, 11, 89]];

#[test]
fn cumulated_matrix_metrics() {
    let cm = ConfusionMatrix::from_rows(CUMULATED);
    let expect = [
        (Class::V, 94.38, 98.59, 93.71),
        (Class::S, 98.67, 82.09, 99.38),
        (Class::F, 98.85, 89.9, 98.92),
    ];
    for (c, acc, se, sp) in expect {
        let m = binary_metrics(&cm, c);
        assert_abs_diff_eq!(m.acc.unwrap(), acc, epsilon = 0.01);
        assert_abs_diff_eq!(m.se.unwrap(), se, epsilon = 0.01);
        assert_abs_diff_eq!(m.sp.unwrap(), sp, epsilon = 0.01);
    }
}

#[test]
fn random_matrices_match_direct_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let mut counts = [[0u64; 4]; 4];
        for row in counts.iter_mut() {
            for v in row.iter_mut() {
                *v = if rng.random_bool(0.2) { 0 } else { rng.random_range(0..500) };
            }
        }
        let cm = ConfusionMatrix::from_rows(counts);
        let total: u64 = counts.iter().flatten().sum();
        for c in Class::ALL {
            let i = c.index();
            let tp = counts[i][i];
            let fp: u64 = (0..4).filter(|&j| j != i).map(|j| counts[i][j]).sum();
            let fn_: u64 = (0..4).filter(|&j| j != i).map(|j| counts[j][i]).sum();
            let tn = total - tp - fp - fn_;
            let b = cm.binary(c);
            assert_eq!((b.tp, b.fp, b.fn_, b.tn), (tp, fp, fn_, tn));
            let m = b.metrics();
            let pct = |a: u64, d: u64| if d == 0 { None } else { Some(100.0 * a as f64 / d as f64) };
            assert_eq!(m.se, pct(tp, tp + fn_));
            assert_eq!(m.sp, pct(tn, tn + fp));
            assert_eq!(m.acc, pct(tp + tn, total));
        }
        // merging is element-wise addition
        let mut twice = cm;
        twice.merge(&cm);
        assert_eq!(twice.total(), 2 * total);
    }
}

#[test]
fn per_record_median_and_iqr() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..50 {
        let vals: Vec<Option<f64>> = (0..22).map(|_| rng.random_bool(0.8).then(|| rng.random_range(0.0..100.0))).collect();
        let mut v: Vec<f64> = vals.iter().flatten().copied().collect();
        v.sort_by(f64::total_cmp);
        let s = per_record_stats(&vals);
        assert_eq!(s.n, v.len());
        // independent median
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
        assert_abs_diff_eq!(s.median.unwrap(), median, epsilon = 1e-12);
        let q = |p: f64| {
            let h = (n - 1) as f64 * p;
            let lo = h.floor() as usize;
            v[lo] + (h - lo as f64) * (v[(lo + 1).min(n - 1)] - v[lo])
        };
        assert_abs_diff_eq!(s.iqr.unwrap(), q(0.75) - q(0.25), epsilon = 1e-12);
    }
    assert_eq!(per_record_stats(&[None, None]).median, None);
}

#[test]
fn unwindowed_prediction_counts() {
    let t = PredictionTable::from_counts([[467, 122, 14], [36, 15, 0], [40, 60, 5]], [543, 197, 19]);
    let post = t.posterior();
    let prior = t.prior_pct();
    assert_abs_diff_eq!(post[0][0].unwrap(), 77.45, epsilon = 0.01);
    assert_abs_diff_eq!(post[1][0].unwrap(), 70.59, epsilon = 0.01);
    assert_abs_diff_eq!(post[1][1].unwrap(), 15.0 / 51.0 * 100.0, epsilon = 1e-12);
    assert_abs_diff_eq!(post[2][2].unwrap(), 4.76, epsilon = 0.01);
    for (p, e) in prior.iter().zip([71.54, 25.96, 2.50]) {
        assert_abs_diff_eq!(p.unwrap(), e, epsilon = 0.01);
    }
    let up = t.uplift();
    assert_abs_diff_eq!(up[0].unwrap(), 5.91, epsilon = 0.01);
}

fn random_stream(rng: &mut ChaCha8Rng, patient: &str, n: usize) -> Vec<AlarmLabel> {
    (0..n)
        .map(|i| {
            let truth = [Class::N, Class::N, Class::N, Class::V, Class::S, Class::F][rng.random_range(0..6)];
            let roll = rng.random_range(0..10);
            let value = match roll {
                0 => AlarmValue::yellow(Class::ABNORMAL[rng.random_range(0..3)]),
                1 => AlarmValue::red(Class::ABNORMAL[rng.random_range(0..3)]),
                _ => AlarmValue::N,
            };
            AlarmLabel {
                patient_id: patient.into(),
                time_index: i,
                timestamp_s: 300.0 + i as f64,
                stage: if value.is_red() { Stage::Global } else { Stage::Personal },
                value,
                global: if value.is_red() { value.class() } else { Class::N },
                truth: Some(truth),
            }
        })
        .collect()
}

#[test]
fn windowed_counts_never_exceed_unwindowed() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..30 {
        let mut alarms = random_stream(&mut rng, "a", 300);
        alarms.extend(random_stream(&mut rng, "b", 200));
        for target in [Target::Truth, Target::PredictedRed] {
            let full = predictive_table(&alarms, None, target);
            let mut prev = [[0u64; 3]; 3];
            for w in [1, 3, 10, 50] {
                let t = predictive_table(&alarms, Some(w), target);
                assert_eq!(t.prior, full.prior);
                for i in 0..3 {
                    let row_total: u64 = t.rows[i].counts.iter().sum::<u64>() + t.rows[i].unresolved;
                    let full_total: u64 = full.rows[i].counts.iter().sum::<u64>() + full.rows[i].unresolved;
                    assert_eq!(row_total, full_total, "every yellow alarm is tallied once");
                    let resolved: u64 = t.rows[i].counts.iter().sum();
                    assert!(resolved <= full.rows[i].counts.iter().sum::<u64>());
                    assert!(resolved >= prev[i].iter().sum::<u64>(), "widening the window resolves more");
                    prev[i] = t.rows[i].counts;
                }
            }
        }
    }
}

#[test]
fn streams_do_not_leak_across_patients() {
    let mk = |p: &str, i: usize, value: AlarmValue, truth: Class| AlarmLabel {
        patient_id: p.into(),
        time_index: i,
        timestamp_s: i as f64,
        stage: Stage::Personal,
        value,
        global: Class::N,
        truth: Some(truth),
    };
    let alarms = vec![mk("a", 0, AlarmValue::yellow(Class::V), Class::N), mk("b", 0, AlarmValue::N, Class::V)];
    let t = predictive_table(&alarms, None, Target::Truth);
    assert_eq!(t.rows[0].counts, [0, 0, 0]);
    assert_eq!(t.rows[0].unresolved, 1);
    assert_eq!(t.prior, [1, 0, 0]);
}
