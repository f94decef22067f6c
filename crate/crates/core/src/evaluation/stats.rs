use serde::{Deserialize, Serialize};

/// Median and interquartile range over the defined per-record values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordStats {
    pub median: Option<f64>,
    pub iqr: Option<f64>,
    /// Records with a defined value.
    pub n: usize,
}

/// Quantile with linear interpolation between order statistics (`h = (n-1) p`).
pub fn quantile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Undefined values (records without that class) are left out.
pub fn per_record_stats(values: &[Option<f64>]) -> RecordStats {
    let mut v: Vec<f64> = values.iter().flatten().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    RecordStats {
        median: quantile(&v, 0.5),
        iqr: quantile(&v, 0.75).zip(quantile(&v, 0.25)).map(|(a, b)| a - b),
        n: v.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let s = per_record_stats(&[Some(1.0), Some(2.0), Some(3.0), Some(4.0)]);
        assert_eq!(s.median, Some(2.5));
        assert_eq!(s.iqr, Some(1.5));
        assert_eq!(per_record_stats(&[Some(7.0)]).iqr, Some(0.0));
        assert_eq!(per_record_stats(&[None, Some(7.0)]).n, 1);
        assert_eq!(per_record_stats(&[]).median, None);
    }
}
