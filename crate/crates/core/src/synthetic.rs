//! Synthetic ECG cohorts built from Gaussian-wave beat templates.
//!
//! Each patient gets a slightly perturbed morphology and heart rate. After a clean
//! initial stretch, episodes repeat: normal beats, then beats whose morphology drifts
//! toward an abnormal template (still annotated normal), then a run of abnormal beats.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::labels::Class;
use crate::wfdb::{write_wfdb, AnnotationEntry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    /// Peak amplitude in mV.
    pub amp: f64,
    /// Peak offset from R in milliseconds.
    pub offset_ms: f64,
    /// Gaussian standard deviation in milliseconds.
    pub width_ms: f64,
}

impl Wave {
    const fn new(amp: f64, offset_ms: f64, width_ms: f64) -> Self {
        Wave { amp, offset_ms, width_ms }
    }

    fn lerp(&self, o: &Wave, t: f64) -> Wave {
        Wave {
            amp: self.amp + (o.amp - self.amp) * t,
            offset_ms: self.offset_ms + (o.offset_ms - self.offset_ms) * t,
            width_ms: self.width_ms + (o.width_ms - self.width_ms) * t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeatTemplate {
    pub p: Wave,
    pub q: Wave,
    pub r: Wave,
    pub s: Wave,
    pub t: Wave,
    /// RR interval preceding this beat, as a multiple of the patient's base RR.
    pub rr_factor: f64,
}

impl BeatTemplate {
    pub fn for_class(class: Class) -> BeatTemplate {
        match class {
            Class::N => BeatTemplate {
                p: Wave::new(0.15, -160.0, 22.0),
                q: Wave::new(-0.15, -30.0, 7.0),
                r: Wave::new(1.1, 0.0, 9.0),
                s: Wave::new(-0.3, 30.0, 8.0),
                t: Wave::new(0.3, 260.0, 40.0),
                rr_factor: 1.0,
            },
            Class::V => BeatTemplate {
                p: Wave::new(0.0, -160.0, 22.0),
                q: Wave::new(-0.35, -45.0, 12.0),
                r: Wave::new(1.7, 0.0, 22.0),
                s: Wave::new(-0.9, 50.0, 18.0),
                t: Wave::new(-0.5, 300.0, 55.0),
                rr_factor: 0.75,
            },
            Class::S => BeatTemplate {
                p: Wave::new(-0.12, -120.0, 15.0),
                q: Wave::new(-0.12, -28.0, 7.0),
                r: Wave::new(0.95, 0.0, 9.0),
                s: Wave::new(-0.25, 28.0, 8.0),
                t: Wave::new(0.22, 230.0, 35.0),
                rr_factor: 0.6,
            },
            Class::F => BeatTemplate::for_class(Class::N).lerp(&BeatTemplate::for_class(Class::V), 0.5),
        }
    }

    pub fn lerp(&self, o: &BeatTemplate, t: f64) -> BeatTemplate {
        BeatTemplate {
            p: self.p.lerp(&o.p, t),
            q: self.q.lerp(&o.q, t),
            r: self.r.lerp(&o.r, t),
            s: self.s.lerp(&o.s, t),
            t: self.t.lerp(&o.t, t),
            rr_factor: self.rr_factor + (o.rr_factor - self.rr_factor) * t,
        }
    }

    fn waves(&self) -> [Wave; 5] {
        [self.p, self.q, self.r, self.s, self.t]
    }

    fn perturbed(&self, rng: &mut impl Rng, spread: f64) -> BeatTemplate {
        let mut out = *self;
        for w in [&mut out.p, &mut out.q, &mut out.r, &mut out.s, &mut out.t] {
            w.amp *= 1.0 + rng.random_range(-spread..=spread);
            w.width_ms *= 1.0 + rng.random_range(-spread..=spread) * 0.5;
        }
        out
    }

    /// Adds the beat centred on sample `r` into `buf`.
    pub fn render(&self, buf: &mut [f64], r: usize, fs: f64) {
        for w in self.waves() {
            if w.amp == 0.0 {
                continue;
            }
            let centre = r as f64 + w.offset_ms * fs / 1000.0;
            let sd = w.width_ms * fs / 1000.0;
            let lo = (centre - 5.0 * sd).floor().max(0.0) as usize;
            let hi = ((centre + 5.0 * sd).ceil() as usize).min(buf.len().saturating_sub(1));
            for (i, v) in buf.iter_mut().enumerate().take(hi + 1).skip(lo) {
                let z = (i as f64 - centre) / sd;
                *v += w.amp * (-0.5 * z * z).exp();
            }
        }
    }

    /// Sample offsets from R of the P, Q, R, S, T wave centres.
    pub fn fiducial_offsets(&self, fs: f64) -> [i64; 5] {
        self.waves().map(|w| (w.offset_ms * fs / 1000.0).round() as i64)
    }
}

fn symbol_for(class: Class) -> char {
    match class {
        Class::N => 'N',
        Class::V => 'V',
        Class::S => 'A',
        Class::F => 'F',
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortConfig {
    pub sampling_rate: f64,
    pub duration_s: f64,
    /// Clean stretch at the start of each record.
    pub init_s: f64,
    /// Relative per-patient spread of wave amplitudes.
    pub morphology_spread: f64,
    pub noise_mv: f64,
    pub wander_mv: f64,
    /// Normal beats between episodes.
    pub gap_beats: (usize, usize),
    /// Beats of drift before an abnormal run.
    pub drift_beats: (usize, usize),
    /// Drift ramps the morphology from `drift_start` to `drift_end` of the way toward the target.
    pub drift_start: f64,
    pub drift_end: f64,
    pub run_beats: (usize, usize),
    /// Relative frequency of V, S, F episodes.
    pub episode_weights: [f64; 3],
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            sampling_rate: 360.0,
            duration_s: 900.0,
            init_s: 320.0,
            morphology_spread: 0.12,
            noise_mv: 0.01,
            wander_mv: 0.05,
            gap_beats: (30, 60),
            drift_beats: (12, 24),
            drift_start: 0.15,
            drift_end: 0.55,
            run_beats: (3, 9),
            episode_weights: [1.0, 1.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRecord {
    pub name: String,
    pub sampling_rate: f64,
    pub signal: Vec<f64>,
    /// `(sample_index, symbol)` per beat.
    pub beats: Vec<(usize, char)>,
    /// Beats whose morphology was drifting toward an abnormal class (annotated normal).
    pub drift_beats: Vec<(usize, Class)>,
}

impl SyntheticRecord {
    pub fn write_wfdb(&self, dir: &Path) -> Result<()> {
        let ann: Vec<AnnotationEntry> = self
            .beats
            .iter()
            .map(|&(i, s)| AnnotationEntry {
                sample_index: i,
                symbol: s,
                aux: None,
            })
            .collect();
        write_wfdb(dir, &self.name, self.sampling_rate, &[("MLII", &self.signal)], 200.0, &ann)
    }
}

/// Generates one patient record. Same `(name, seed)` gives the same record.
pub fn generate_record(name: &str, seed: u64, cfg: &CohortConfig) -> SyntheticRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = cfg.sampling_rate;
    let n = (cfg.duration_s * fs) as usize;
    let base_rr = rng.random_range(0.7..1.0) * fs;
    let spread = cfg.morphology_spread;
    let normal = BeatTemplate::for_class(Class::N).perturbed(&mut rng, spread);
    let targets: Vec<BeatTemplate> = [Class::V, Class::S, Class::F]
        .iter()
        .map(|&c| BeatTemplate::for_class(c).perturbed(&mut rng, spread * 0.5))
        .collect();
    let total_w: f64 = cfg.episode_weights.iter().sum();

    let mut signal = vec![0.0; n];
    let mut beats = Vec::new();
    let mut drift_beats = Vec::new();
    let margin = (0.6 * fs) as usize;
    let mut pos = (0.5 * fs) as usize;
    let init_end = (cfg.init_s * fs) as usize;

    let mut place = |tpl: &BeatTemplate, class: Class, pos: &mut usize, signal: &mut [f64], rng: &mut ChaCha8Rng| -> bool {
        let jitter = 1.0 + rng.random_range(-0.03..0.03);
        let r = *pos + (base_rr * tpl.rr_factor * jitter) as usize;
        if r + margin >= n {
            return false;
        }
        tpl.render(signal, r, fs);
        beats.push((r, symbol_for(class)));
        *pos = r;
        true
    };

    // clean start
    while pos < init_end {
        if !place(&normal, Class::N, &mut pos, &mut signal, &mut rng) {
            break;
        }
    }
    'episodes: loop {
        for _ in 0..rng.random_range(cfg.gap_beats.0..=cfg.gap_beats.1) {
            if !place(&normal, Class::N, &mut pos, &mut signal, &mut rng) {
                break 'episodes;
            }
        }
        let mut pick = rng.random_range(0.0..total_w);
        let mut which = 0;
        while which < 2 && pick >= cfg.episode_weights[which] {
            pick -= cfg.episode_weights[which];
            which += 1;
        }
        let class = [Class::V, Class::S, Class::F][which];
        let target = &targets[which];
        let drift_len = rng.random_range(cfg.drift_beats.0..=cfg.drift_beats.1);
        for k in 0..drift_len {
            let t = cfg.drift_start + (cfg.drift_end - cfg.drift_start) * k as f64 / drift_len.max(2).saturating_sub(1) as f64;
            let tpl = normal.lerp(target, t);
            if !place(&tpl, Class::N, &mut pos, &mut signal, &mut rng) {
                break 'episodes;
            }
            drift_beats.push((pos, class));
        }
        for _ in 0..rng.random_range(cfg.run_beats.0..=cfg.run_beats.1) {
            if !place(target, class, &mut pos, &mut signal, &mut rng) {
                break 'episodes;
            }
        }
    }

    let noise = Normal::new(0.0, cfg.noise_mv.max(0.0)).expect("finite noise level");
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    for (i, v) in signal.iter_mut().enumerate() {
        let t = i as f64 / fs;
        *v += cfg.wander_mv * (std::f64::consts::TAU * 0.2 * t + phase).sin();
        if cfg.noise_mv > 0.0 {
            *v += noise.sample(&mut rng);
        }
    }

    SyntheticRecord {
        name: name.to_string(),
        sampling_rate: fs,
        signal,
        beats,
        drift_beats,
    }
}

/// Generates and writes a cohort of WFDB records; returns the records.
pub fn write_cohort(dir: &Path, names: &[String], seed: u64, cfg: &CohortConfig) -> Result<Vec<SyntheticRecord>> {
    std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
    names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let rec = generate_record(name, seed.wrapping_mul(1_000_003).wrapping_add(i as u64), cfg);
            rec.write_wfdb(dir)?;
            Ok(rec)
        })
        .collect()
}
