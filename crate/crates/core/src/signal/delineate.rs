use std::io::Write;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::AamiClass;
use crate::wfdb::BeatAnnotation;

/// Search windows around the annotated R peak, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DelineationConfig {
    pub qs_ms: f64,
    pub p_start_ms: f64,
    pub p_end_ms: f64,
    pub t_start_ms: f64,
    pub t_end_ms: f64,
    pub min_rr_ms: f64,
    /// A clipped window shorter than this fraction of its nominal width marks the fiducial absent.
    pub min_window_fraction: f64,
}

impl Default for DelineationConfig {
    fn default() -> Self {
        DelineationConfig {
            qs_ms: 60.0,
            p_start_ms: 200.0,
            p_end_ms: 60.0,
            t_start_ms: 80.0,
            t_end_ms: 400.0,
            min_rr_ms: 120.0,
            min_window_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardiacCycle {
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub r: usize,
    pub s: Option<usize>,
    pub t: Option<usize>,
    /// Half-open sample range `[start, end)` of the cycle.
    pub start: usize,
    pub end: usize,
    pub beat_label: AamiClass,
    pub symbol: char,
}

impl CardiacCycle {
    pub fn window(&self) -> Range<usize> {
        self.start..self.end
    }
}

fn ms(fs: f64, v: f64) -> usize {
    (v * fs / 1000.0).round() as usize
}

fn argext(x: &[f64], range: Range<usize>, better: impl Fn(f64, f64) -> bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for i in range {
        match best {
            Some(b) if !better(x[i], x[b]) => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Finds P, Q, S, T around each annotated R peak. One cycle per beat annotation,
/// except beats following their predecessor by less than `min_rr_ms`, which are skipped.
pub fn delineate(signal: &[f64], sampling_rate: f64, annotations: &[BeatAnnotation]) -> Vec<CardiacCycle> {
    delineate_with(signal, sampling_rate, annotations, &DelineationConfig::default())
}

pub fn delineate_with(
    signal: &[f64],
    sampling_rate: f64,
    annotations: &[BeatAnnotation],
    cfg: &DelineationConfig,
) -> Vec<CardiacCycle> {
    let n = signal.len();
    let fs = sampling_rate;
    let min_rr = ms(fs, cfg.min_rr_ms);

    let mut kept: Vec<&BeatAnnotation> = Vec::with_capacity(annotations.len());
    for a in annotations.iter().filter(|a| a.sample_index < n) {
        if let Some(prev) = kept.last() {
            if a.sample_index - prev.sample_index < min_rr {
                log::warn!(
                    "beat at sample {} is {} samples after the previous one; skipped",
                    a.sample_index,
                    a.sample_index - prev.sample_index
                );
                continue;
            }
        }
        kept.push(a);
    }

    let qs = ms(fs, cfg.qs_ms);
    let (p_lo, p_hi) = (ms(fs, cfg.p_start_ms), ms(fs, cfg.p_end_ms));
    let (t_lo, t_hi) = (ms(fs, cfg.t_start_ms), ms(fs, cfg.t_end_ms));
    let frac = cfg.min_window_fraction;
    let long_enough = |r: &Range<usize>, nominal: usize| !r.is_empty() && (r.len() as f64) >= frac * nominal as f64;

    let mut cycles = Vec::with_capacity(kept.len());
    for (i, a) in kept.iter().enumerate() {
        let r = a.sample_index;
        let prev = i.checked_sub(1).map(|j| kept[j].sample_index);
        let next = kept.get(i + 1).map(|b| b.sample_index);
        // samples strictly between the neighbouring R peaks
        let lo_bound = prev.map_or(0, |p| p + 1);
        let hi_bound = next.unwrap_or(n);

        let q_rng = r.saturating_sub(qs).max(lo_bound)..r;
        let s_rng = (r + 1)..(r + qs + 1).min(hi_bound).min(n);
        let p_rng = r.saturating_sub(p_lo).max(lo_bound)..(r.saturating_sub(p_hi) + 1).min(r);
        let p_rng = if r < p_hi { 0..0 } else { p_rng };
        let t_rng = (r + t_lo).min(n)..(r + t_hi + 1).min(hi_bound).min(n);

        let q = long_enough(&q_rng, qs).then(|| argext(signal, q_rng, |a, b| a < b)).flatten();
        let s = long_enough(&s_rng, qs).then(|| argext(signal, s_rng, |a, b| a < b)).flatten();
        let p = long_enough(&p_rng, p_lo - p_hi + 1)
            .then(|| argext(signal, p_rng, |a, b| a > b))
            .flatten();
        let t = long_enough(&t_rng, t_hi - t_lo + 1)
            .then(|| argext(signal, t_rng, |a, b| a.abs() > b.abs()))
            .flatten();

        let start = match (prev, next) {
            (Some(p), _) => (p + r).div_ceil(2),
            (None, Some(nx)) => r.saturating_sub((nx - r) / 2),
            (None, None) => r.saturating_sub(ms(fs, 400.0)),
        };
        let end = match (next, prev) {
            (Some(nx), _) => (r + nx).div_ceil(2),
            (None, Some(p)) => (r + (r - p) / 2).min(n),
            (None, None) => (r + ms(fs, 400.0)).min(n),
        };

        cycles.push(CardiacCycle {
            p,
            q,
            r,
            s,
            t,
            start,
            end: end.max(r + 1),
            beat_label: a.aami_class,
            symbol: a.symbol,
        });
    }
    cycles
}

/// Debug dump `segment_index,beat,P,Q,R,S,T`; absent fiducials are empty fields.
pub fn write_fiducials_csv<W: Write>(out: W, segments: &[(usize, &[CardiacCycle])]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["segment_index", "beat", "P", "Q", "R", "S", "T"])?;
    let f = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    for (seg, cycles) in segments {
        for (b, c) in cycles.iter().enumerate() {
            w.write_record([
                seg.to_string(),
                b.to_string(),
                f(c.p),
                f(c.q),
                c.r.to_string(),
                f(c.s),
                f(c.t),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<fiducials>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beat(i: usize, sym: char) -> BeatAnnotation {
        BeatAnnotation {
            sample_index: i,
            symbol: sym,
            aami_class: crate::wfdb::map_symbol_to_aami(sym),
        }
    }

    #[test]
    fn one_cycle_per_beat() {
        let x = vec![0.0; 3600];
        let ann: Vec<_> = (0..10).map(|k| beat(200 + 300 * k, 'N')).collect();
        assert_eq!(delineate(&x, 360.0, &ann).len(), 10);
    }

    #[test]
    fn close_beats_skip_the_second() {
        let x = vec![0.0; 2000];
        let ann = vec![beat(500, 'N'), beat(530, 'N'), beat(900, 'N')];
        let c = delineate(&x, 360.0, &ann);
        assert_eq!(c.iter().map(|c| c.r).collect::<Vec<_>>(), vec![500, 900]);
    }

    #[test]
    fn edge_beat_has_no_p() {
        let x = vec![0.0; 2000];
        let c = delineate(&x, 360.0, &[beat(30, 'N'), beat(400, 'N')]);
        assert_eq!(c[0].p, None);
        assert!(c[0].q.is_some());
        assert!(c[1].p.is_some());
    }

    #[test]
    fn fiducials_ordered() {
        let x: Vec<f64> = (0..4000).map(|i| (i as f64 * 0.05).sin()).collect();
        let ann: Vec<_> = (1..12).map(|k| beat(300 * k, 'N')).collect();
        for c in delineate(&x, 360.0, &ann) {
            let seq = [c.p, c.q, Some(c.r), c.s, c.t];
            let present: Vec<usize> = seq.iter().flatten().copied().collect();
            assert!(present.windows(2).all(|w| w[0] <= w[1]), "{c:?}");
            assert!(c.start <= c.r && c.r < c.end);
        }
    }
}
