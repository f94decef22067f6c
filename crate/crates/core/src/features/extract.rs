use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::features::{RawFeatureVector, NUM_RAW_FEATURES};
use crate::signal::{CardiacCycle, Segment};

/// Frequencies at which per-cycle spectral power is read.
pub const SPECTRAL_HZ: [f64; 4] = [7.5, 10.0, 12.5, 15.0];

/// Hann-windowed periodogram of `x`, zero-padded to at least 0.5 Hz resolution,
/// read at the nearest bin of each requested frequency.
pub fn periodogram_at(x: &[f64], fs: f64, freqs: &[f64], planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return vec![0.0; freqs.len()];
    }
    let nfft = n.max((2.0 * fs).ceil() as usize);
    let win: Vec<f64> = if n == 1 {
        vec![1.0]
    } else {
        (0..n)
            .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / (n - 1) as f64).cos())
            .collect()
    };
    let wpow: f64 = win.iter().map(|w| w * w).sum();
    let mut buf = vec![Complex::new(0.0, 0.0); nfft];
    for i in 0..n {
        buf[i].re = x[i] * win[i];
    }
    planner.plan_fft_forward(nfft).process(&mut buf);
    let scale = if wpow > 0.0 { 1.0 / (fs * wpow) } else { 0.0 };
    freqs
        .iter()
        .map(|&f| {
            let k = ((f * nfft as f64 / fs).round() as usize).min(nfft / 2);
            buf[k].norm_sqr() * scale
        })
        .collect()
}

/// Largest positive local maximum over the second largest one.
fn peak_ratio(x: &[f64]) -> Option<f64> {
    let mut first = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for i in 1..x.len().saturating_sub(1) {
        let v = x[i];
        if v > 0.0 && v > x[i - 1] && v >= x[i + 1] {
            if v > first {
                second = first;
                first = v;
            } else if v > second {
                second = v;
            }
        }
    }
    (second > 0.0).then(|| first / second)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
    (m, var.sqrt())
}

/// Fills absent per-cycle values with the mean of the present ones.
fn impute(values: &[Option<f64>], what: &str) -> Result<Vec<f64>> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(Error::Feature(format!("{what} unavailable in every cycle of the segment")));
    }
    let fill = present.iter().sum::<f64>() / present.len() as f64;
    Ok(values.iter().map(|v| v.unwrap_or(fill)).collect())
}

fn interval(a: Option<usize>, b: Option<usize>, fs: f64) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) if b >= a => Some((b - a) as f64 / fs),
        _ => None,
    }
}

/// Per-record context needed by the amplitude-drift feature.
#[derive(Debug, Clone, Copy)]
pub struct FeatureContext {
    pub sampling_rate: f64,
    /// Mean R amplitude over the whole record.
    pub record_mean_r: f64,
}

impl FeatureContext {
    pub fn for_record(signal: &[f64], sampling_rate: f64, cycles: &[CardiacCycle]) -> Self {
        let amps: Vec<f64> = cycles.iter().filter_map(|c| signal.get(c.r).copied()).collect();
        let record_mean_r = if amps.is_empty() {
            0.0
        } else {
            amps.iter().sum::<f64>() / amps.len() as f64
        };
        FeatureContext {
            sampling_rate,
            record_mean_r,
        }
    }
}

/// Computes the 22 raw features of one segment from the denoised signal.
pub fn extract_features(segment: &Segment, signal: &[f64], ctx: &FeatureContext) -> Result<RawFeatureVector> {
    let mut planner = FftPlanner::new();
    extract_features_with(segment, signal, ctx, &mut planner)
}

pub fn extract_features_with(
    segment: &Segment,
    signal: &[f64],
    ctx: &FeatureContext,
    planner: &mut FftPlanner<f64>,
) -> Result<RawFeatureVector> {
    let fs = ctx.sampling_rate;
    let cycles = &segment.cycles;
    if cycles.is_empty() {
        return Err(Error::Feature("segment has no cycles".into()));
    }
    if cycles.iter().any(|c| c.end > signal.len() || c.start >= c.end) {
        return Err(Error::Feature("cycle window outside the signal".into()));
    }

    let qrs: Vec<Option<f64>> = cycles.iter().map(|c| interval(c.q, c.s, fs)).collect();
    let qt: Vec<Option<f64>> = cycles.iter().map(|c| interval(c.q, c.t, fs)).collect();
    let pr: Vec<Option<f64>> = cycles.iter().map(|c| interval(c.p, Some(c.r), fs)).collect();
    let ratio: Vec<Option<f64>> = cycles.iter().map(|c| peak_ratio(&signal[c.window()])).collect();
    let spectra: Vec<Vec<f64>> = cycles
        .iter()
        .map(|c| periodogram_at(&signal[c.window()], fs, &SPECTRAL_HZ, planner))
        .collect();

    let mut out = [0.0; NUM_RAW_FEATURES];
    let mut put = |slot: usize, values: &[f64]| {
        let (m, s) = mean_std(values);
        out[2 * slot] = m;
        out[2 * slot + 1] = s;
    };
    put(0, &impute(&qrs, "QRS duration")?);
    put(1, &impute(&qt, "QT duration")?);
    put(2, &impute(&pr, "PR duration")?);
    put(3, &impute(&ratio, "peak ratio")?);
    for (j, _) in SPECTRAL_HZ.iter().enumerate() {
        let col: Vec<f64> = spectra.iter().map(|s| s[j]).collect();
        put(4 + j, &col);
    }

    let mut rs: Vec<usize> = segment.preceding_r.into_iter().collect();
    rs.extend(cycles.iter().map(|c| c.r));
    out[16] = if rs.len() >= 2 {
        rs.windows(2).map(|w| (w[1] - w[0]) as f64).sum::<f64>() / (rs.len() - 1) as f64 / fs
    } else {
        0.0
    };
    out[17] = cycles.iter().map(|c| signal[c.r] - ctx.record_mean_r).sum::<f64>() / cycles.len() as f64;

    let window = &signal[segment.start()..segment.end()];
    let energy = window.iter().map(|v| v * v).sum::<f64>() / window.len() as f64;
    let max = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = window.iter().copied().fold(f64::INFINITY, f64::min);
    out[18] = energy;
    out[19] = max;
    out[20] = min;
    out[21] = if energy > 0.0 { max / energy } else { 0.0 };

    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Feature("non-finite feature value".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::{AamiClass, Class};
    use crate::signal::SegmentLabel;

    fn cycle(r: usize, q: usize, s: usize) -> CardiacCycle {
        CardiacCycle {
            p: Some(r - 50),
            q: Some(q),
            r,
            s: Some(s),
            t: Some(r + 100),
            start: r - 150,
            end: r + 150,
            beat_label: AamiClass::N,
            symbol: 'N',
        }
    }

    fn seg(cycles: Vec<CardiacCycle>) -> Segment {
        Segment {
            cycles,
            label: SegmentLabel::Labeled(Class::N),
            patient_id: "t".into(),
            segment_index: 0,
            preceding_r: None,
        }
    }

    #[test]
    fn qrs_definition_and_zero_std() {
        let x: Vec<f64> = (0..2000).map(|i| ((i % 300) as f64 * 0.07).sin()).collect();
        let s = seg(vec![cycle(400, 385, 415), cycle(700, 685, 715), cycle(1000, 985, 1015)]);
        let ctx = FeatureContext {
            sampling_rate: 360.0,
            record_mean_r: 0.0,
        };
        let f = extract_features(&s, &x, &ctx).unwrap();
        assert!((f[0] - 30.0 / 360.0).abs() < 1e-15);
        for j in 0..8 {
            assert!(f[2 * j + 1].abs() < 1e-12, "std {j} = {}", f[2 * j + 1]);
        }
        assert!((f[16] - 300.0 / 360.0).abs() < 1e-12);
    }

    #[test]
    fn missing_fiducial_imputed_then_error_when_all_absent() {
        let x = vec![0.1; 2000];
        let mut cs = vec![cycle(400, 380, 415), cycle(700, 690, 715), cycle(1000, 985, 1015)];
        cs[0].q = None;
        let ctx = FeatureContext {
            sampling_rate: 360.0,
            record_mean_r: 0.0,
        };
        let f = extract_features(&seg(cs.clone()), &x, &ctx);
        // flat signal has no local maxima, so the peak ratio cannot be imputed
        assert!(matches!(f, Err(Error::Feature(_))));
        let y: Vec<f64> = (0..2000).map(|i| ((i % 300) as f64 * 0.07).sin()).collect();
        let f = extract_features(&seg(cs.clone()), &y, &ctx).unwrap();
        assert!((f[0] - (25.0 + 30.0) / 2.0 / 360.0).abs() < 1e-12);
        for c in &mut cs {
            c.q = None;
        }
        assert!(extract_features(&seg(cs), &y, &ctx).is_err());
    }

    #[test]
    fn spectral_peak_dominates() {
        let fs = 360.0;
        let x: Vec<f64> = (0..2000).map(|i| (std::f64::consts::TAU * 12.5 * i as f64 / fs).sin()).collect();
        let mut planner = FftPlanner::new();
        let p = periodogram_at(&x[100..400], fs, &SPECTRAL_HZ, &mut planner);
        for j in [0, 1, 3] {
            assert!(p[2] >= 10.0 * p[j], "{p:?}");
        }
    }
}
