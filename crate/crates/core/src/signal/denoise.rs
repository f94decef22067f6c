//! Zero-phase wavelet band-pass.
//!
//! An undecimated orthogonal Daubechies decomposition followed by reconstruction
//! from a subset of detail levels is a linear, shift-invariant operator whose
//! frequency response is real. With `L(w) = |H(w)|^2 / 2` for the low-pass and
//! `1 - L(w)` for the high-pass branch, detail level `j` has response
//! `(1 - L(2^(j-1) w)) * prod_{m < j-1} L(2^m w)`. The sum over the kept levels
//! is applied in the frequency domain on a mirrored copy of the signal.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DenoiseConfig {
    /// Daubechies order (number of vanishing moments); `db4` by default.
    pub order: usize,
    /// Lower edge of the kept band in Hz.
    pub low_hz: f64,
    /// Upper edge of the kept band in Hz.
    pub high_hz: f64,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        DenoiseConfig {
            order: 4,
            low_hz: 0.7,
            high_hz: 45.0,
        }
    }
}

/// Detail levels `first..=last` kept for a sampling rate; level `j` spans
/// roughly `fs / 2^(j+1) .. fs / 2^j`.
pub fn detail_levels(sampling_rate: f64, cfg: &DenoiseConfig) -> (usize, usize) {
    let first = (sampling_rate / cfg.high_hz).log2().ceil().max(1.0) as usize;
    let last = ((sampling_rate / cfg.low_hz).log2().floor() as usize).saturating_sub(1).max(first);
    (first, last)
}

/// Minimum signal length for the decomposition depth used at this rate.
pub fn min_length(sampling_rate: f64, cfg: &DenoiseConfig) -> usize {
    let (_, last) = detail_levels(sampling_rate, cfg);
    1 << (last + 1)
}

/// Daubechies product filter `|H(w)|^2 / 2` for order `n`:
/// `cos^(2n)(w/2) * sum_k C(n-1+k, k) sin^(2k)(w/2)`.
pub fn daubechies_lowpass_power(order: usize, omega: f64) -> f64 {
    let c = (omega / 2.0).cos().powi(2);
    let s = 1.0 - c;
    let mut poly = 0.0;
    let mut binom = 1.0;
    let mut sk = 1.0;
    for k in 0..order {
        if k > 0 {
            binom *= (order - 1 + k) as f64 / k as f64;
            sk *= s;
        }
        poly += binom * sk;
    }
    c.powi(order as i32) * poly
}

/// Real frequency response of the kept-detail reconstruction at `omega` (rad/sample).
pub fn band_response(order: usize, first: usize, last: usize, omega: f64) -> f64 {
    let mut low_prod = 1.0;
    let mut total = 0.0;
    for j in 1..=last {
        let w = omega * (1u64 << (j - 1)) as f64;
        let l = daubechies_lowpass_power(order, w);
        if j >= first {
            total += (1.0 - l) * low_prod;
        }
        low_prod *= l;
    }
    total
}

/// Band-passes `signal` with the zero-phase wavelet response; output length equals input length.
pub fn denoise(signal: &[f64], sampling_rate: f64) -> Result<Vec<f64>> {
    denoise_with(signal, sampling_rate, &DenoiseConfig::default())
}

pub fn denoise_with(signal: &[f64], sampling_rate: f64, cfg: &DenoiseConfig) -> Result<Vec<f64>> {
    if !(sampling_rate > 0.0) {
        return Err(Error::InvalidParameter(format!("sampling rate must be positive, got {sampling_rate}")));
    }
    if cfg.order == 0 || !(cfg.low_hz > 0.0 && cfg.high_hz > cfg.low_hz) {
        return Err(Error::InvalidParameter(format!("bad denoise configuration {cfg:?}")));
    }
    let min = min_length(sampling_rate, cfg);
    if signal.len() < min {
        return Err(Error::SignalTooShort { len: signal.len(), min });
    }
    let (first, last) = detail_levels(sampling_rate, cfg);

    // Mirror extension makes the circular convolution behave like a reflecting boundary.
    let n = signal.len();
    let m = 2 * n;
    let mut buf: Vec<Complex<f64>> = signal
        .iter()
        .chain(signal.iter().rev())
        .map(|&v| Complex::new(v, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    buf[0] = Complex::new(0.0, 0.0);
    for (k, bin) in buf.iter_mut().enumerate().skip(1) {
        let kk = k.min(m - k);
        let omega = 2.0 * std::f64::consts::PI * kk as f64 / m as f64;
        *bin *= band_response(cfg.order, first, last, omega);
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let norm = 1.0 / m as f64;
    Ok(buf[..n].iter().map(|c| c.re * norm).collect())
}
