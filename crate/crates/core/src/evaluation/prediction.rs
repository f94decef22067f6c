use serde::{Deserialize, Serialize};

use crate::classifier::AlarmLabel;
use crate::labels::Class;

/// What counts as the abnormality that follows a yellow alarm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// First true abnormal segment.
    Truth,
    /// First red alarm issued by the global stage.
    PredictedRed,
}

/// Row for one yellow-alarm type: counts of the next abnormality by type (V, S, F).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub yellow: Class,
    pub counts: [u64; 3],
    /// Alarms with no abnormality after them (within the window).
    pub unresolved: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionTable {
    pub target: Target,
    /// Maximum look-ahead in segments; `None` searches to the end of the stream.
    pub window: Option<usize>,
    pub rows: [PredictionRow; 3],
    /// Abnormal segments by type over all evaluated streams.
    pub prior: [u64; 3],
}

fn pct(counts: &[u64; 3]) -> [Option<f64>; 3] {
    let total: u64 = counts.iter().sum();
    counts.map(|c| (total > 0).then(|| 100.0 * c as f64 / total as f64))
}

fn abnormal_index(c: Class) -> Option<usize> {
    Class::ABNORMAL.iter().position(|&x| x == c)
}

impl PredictionTable {
    pub fn empty(target: Target, window: Option<usize>) -> Self {
        PredictionTable {
            target,
            window,
            rows: Class::ABNORMAL.map(|c| PredictionRow { yellow: c, counts: [0; 3], unresolved: 0 }),
            prior: [0; 3],
        }
    }

    /// Table from tallies: `rows[i]` follows a yellow alarm of `Class::ABNORMAL[i]`.
    pub fn from_counts(rows: [[u64; 3]; 3], prior: [u64; 3]) -> Self {
        let mut t = Self::empty(Target::Truth, None);
        for (r, c) in t.rows.iter_mut().zip(rows) {
            r.counts = c;
        }
        t.prior = prior;
        t
    }

    /// Row percentages, `posterior[i][j] = P(next = j | yellow = i)`.
    pub fn posterior(&self) -> [[Option<f64>; 3]; 3] {
        self.rows.map(|r| pct(&r.counts))
    }

    pub fn prior_pct(&self) -> [Option<f64>; 3] {
        pct(&self.prior)
    }

    /// Diagonal posterior minus prior, in percentage points.
    pub fn uplift(&self) -> [Option<f64>; 3] {
        let post = self.posterior();
        let prior = self.prior_pct();
        [0, 1, 2].map(|i| post[i][i].zip(prior[i]).map(|(a, b)| a - b))
    }

    pub fn merge(&mut self, other: &PredictionTable) {
        for (a, b) in self.rows.iter_mut().zip(&other.rows) {
            for j in 0..3 {
                a.counts[j] += b.counts[j];
            }
            a.unresolved += b.unresolved;
        }
        for j in 0..3 {
            self.prior[j] += other.prior[j];
        }
    }

    pub fn unresolved(&self) -> u64 {
        self.rows.iter().map(|r| r.unresolved).sum()
    }
}

/// Tallies one patient's time-ordered stream.
pub fn predictive_table_stream(alarms: &[AlarmLabel], window: Option<usize>, target: Target) -> PredictionTable {
    let next_type = |a: &AlarmLabel| match target {
        Target::Truth => a.truth.and_then(abnormal_index),
        Target::PredictedRed => a.value.is_red().then(|| abnormal_index(a.value.class())).flatten(),
    };
    let mut t = PredictionTable::empty(target, window);
    for a in alarms {
        if let Some(j) = next_type(a) {
            t.prior[j] += 1;
        }
    }
    for (k, a) in alarms.iter().enumerate() {
        if !a.value.is_yellow() {
            continue;
        }
        let row = &mut t.rows[abnormal_index(a.value.class()).expect("yellow is abnormal")];
        let end = window.map_or(alarms.len(), |w| (k + 1 + w).min(alarms.len()));
        match alarms[k + 1..end].iter().find_map(next_type) {
            Some(j) => row.counts[j] += 1,
            None => row.unresolved += 1,
        }
    }
    t
}

/// Sums per-patient tables; `alarms` may interleave patients, each patient kept in order.
pub fn predictive_table(alarms: &[AlarmLabel], window: Option<usize>, target: Target) -> PredictionTable {
    let mut ids: Vec<&str> = vec![];
    for a in alarms {
        if !ids.contains(&a.patient_id.as_str()) {
            ids.push(&a.patient_id);
        }
    }
    let mut total = PredictionTable::empty(target, window);
    for id in ids {
        let stream: Vec<AlarmLabel> = alarms.iter().filter(|a| a.patient_id == id).cloned().collect();
        total.merge(&predictive_table_stream(&stream, window, target));
    }
    total
}
