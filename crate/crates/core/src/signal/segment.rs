use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{AamiClass, Class};
use crate::signal::delineate::CardiacCycle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationConfig {
    /// Cycles per segment.
    pub s_w: usize,
    /// Slide step in cycles.
    pub n_s: usize,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig { s_w: 3, n_s: 3 }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.s_w == 0 || self.n_s == 0 || self.n_s > self.s_w {
            return Err(Error::Config(format!(
                "segmentation needs 1 <= n_s <= s_w, got s_w={} n_s={}",
                self.s_w, self.n_s
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentLabel {
    Labeled(Class),
    Discard,
}

impl SegmentLabel {
    pub fn class(self) -> Option<Class> {
        match self {
            SegmentLabel::Labeled(c) => Some(c),
            SegmentLabel::Discard => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub cycles: Vec<CardiacCycle>,
    pub label: SegmentLabel,
    pub patient_id: String,
    pub segment_index: usize,
    /// R peak of the beat just before the segment, if any.
    pub preceding_r: Option<usize>,
}

impl Segment {
    pub fn start(&self) -> usize {
        self.cycles.first().map_or(0, |c| c.start)
    }

    pub fn end(&self) -> usize {
        self.cycles.last().map_or(0, |c| c.end)
    }
}

/// Integrated label: N iff all beats are N; X if every abnormal beat is X;
/// any Q beat or two abnormal types give `Discard`.
pub fn integrate_label(beats: impl IntoIterator<Item = AamiClass>) -> SegmentLabel {
    let mut abnormal: Option<Class> = None;
    for b in beats {
        match b.class() {
            None => return SegmentLabel::Discard,
            Some(Class::N) => {}
            Some(c) => match abnormal {
                Some(prev) if prev != c => return SegmentLabel::Discard,
                _ => abnormal = Some(c),
            },
        }
    }
    SegmentLabel::Labeled(abnormal.unwrap_or(Class::N))
}

/// Groups cycles into windows of `s_w` at offsets `0, n_s, 2 n_s, ...`; a short tail is dropped.
/// Discarded windows are returned with `SegmentLabel::Discard` so ordinals stay aligned.
pub fn segment(cycles: &[CardiacCycle], config: &SegmentationConfig, patient_id: &str) -> Vec<Segment> {
    let SegmentationConfig { s_w, n_s } = *config;
    if s_w == 0 || n_s == 0 || cycles.len() < s_w {
        return Vec::new();
    }
    (0..=(cycles.len() - s_w) / n_s)
        .map(|k| {
            let off = k * n_s;
            let members = &cycles[off..off + s_w];
            Segment {
                cycles: members.to_vec(),
                label: integrate_label(members.iter().map(|c| c.beat_label)),
                patient_id: patient_id.to_string(),
                segment_index: k,
                preceding_r: off.checked_sub(1).map(|j| cycles[j].r),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(s: &str) -> SegmentLabel {
        integrate_label(s.chars().map(|c| AamiClass::from_char(c).unwrap()))
    }

    #[test]
    fn integration_rules() {
        assert_eq!(label("NNN"), SegmentLabel::Labeled(Class::N));
        assert_eq!(label("VNV"), SegmentLabel::Labeled(Class::V));
        assert_eq!(label("SSS"), SegmentLabel::Labeled(Class::S));
        assert_eq!(label("NSV"), SegmentLabel::Discard);
        assert_eq!(label("NQN"), SegmentLabel::Discard);
    }

    fn cyc(r: usize) -> CardiacCycle {
        CardiacCycle {
            p: None,
            q: None,
            r,
            s: None,
            t: None,
            start: r.saturating_sub(10),
            end: r + 10,
            beat_label: AamiClass::N,
            symbol: 'N',
        }
    }

    #[test]
    fn counts_and_offsets() {
        let cycles: Vec<_> = (0..10).map(|i| cyc(100 + 100 * i)).collect();
        let segs = segment(&cycles, &SegmentationConfig::default(), "p");
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[1].cycles[0].r, 400);
        assert_eq!(segs[1].preceding_r, Some(300));
        assert_eq!(segs[0].preceding_r, None);

        let overlapping = segment(&cycles, &SegmentationConfig { s_w: 3, n_s: 1 }, "p");
        assert_eq!(overlapping.len(), (10 - 3) + 1);
    }

    #[test]
    fn config_validation() {
        assert!(SegmentationConfig { s_w: 2, n_s: 3 }.validate().is_err());
        assert!(SegmentationConfig::default().validate().is_ok());
    }
}
