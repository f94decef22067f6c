//! WFDB format 212: pairs of 12-bit two's complement samples packed in three bytes.
//!
//! For a sample pair `(s1, s2)`:
//! byte 0 holds the low 8 bits of `s1`, the low nibble of byte 1 the high 4 bits
//! of `s1`, the high nibble of byte 1 the high 4 bits of `s2`, and byte 2 the low
//! 8 bits of `s2`.

use crate::error::{Error, Result};

pub const MIN_SAMPLE: i16 = -2048;
pub const MAX_SAMPLE: i16 = 2047;

/// Number of bytes needed to store `total_samples` samples.
#[inline]
pub fn packed_len(total_samples: usize) -> usize {
    (3 * total_samples).div_ceil(2)
}

#[inline]
fn sign_extend_12(v: u16) -> i16 {
    ((v << 4) as i16) >> 4
}

/// Decodes `total_samples` consecutive samples (all channels interleaved).
pub fn decode_212(bytes: &[u8], total_samples: usize) -> Result<Vec<i16>> {
    let needed = packed_len(total_samples);
    if bytes.len() < needed {
        return Err(Error::Truncated212 {
            offset: bytes.len(),
            needed,
            available: bytes.len(),
        });
    }
    let mut out = Vec::with_capacity(total_samples);
    let mut chunks = bytes[..needed].chunks(3);
    while out.len() < total_samples {
        let c = chunks.next().expect("length checked");
        let s1 = u16::from(c[0]) | (u16::from(c[1] & 0x0F) << 8);
        out.push(sign_extend_12(s1));
        if out.len() < total_samples {
            let s2 = u16::from(c[2]) | (u16::from(c[1] & 0xF0) << 4);
            out.push(sign_extend_12(s2));
        }
    }
    Ok(out)
}

/// Decodes a two-channel interleaved stream into per-channel sequences.
pub fn decode_format212(bytes: &[u8], num_samples_per_channel: usize) -> Result<(Vec<i16>, Vec<i16>)> {
    let all = decode_212(bytes, 2 * num_samples_per_channel)?;
    let mut a = Vec::with_capacity(num_samples_per_channel);
    let mut b = Vec::with_capacity(num_samples_per_channel);
    for pair in all.chunks_exact(2) {
        a.push(pair[0]);
        b.push(pair[1]);
    }
    Ok((a, b))
}

/// Packs samples into format 212. Values are truncated to their low 12 bits.
pub fn encode_212(samples: &[i16]) -> Vec<u8> {
    let mut out = Vec::with_capacity(packed_len(samples.len()));
    for pair in samples.chunks(2) {
        let s1 = pair[0] as u16 & 0x0FFF;
        out.push((s1 & 0xFF) as u8);
        match pair.get(1) {
            Some(&s2) => {
                let s2 = s2 as u16 & 0x0FFF;
                out.push(((s1 >> 8) as u8) | (((s2 >> 8) as u8) << 4));
                out.push((s2 & 0xFF) as u8);
            }
            None => out.push((s1 >> 8) as u8),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_and_all_ones() {
        assert_eq!(decode_format212(&[0, 0, 0], 1).unwrap(), (vec![0], vec![0]));
        assert_eq!(decode_format212(&[0xFF, 0xFF, 0xFF], 1).unwrap(), (vec![-1], vec![-1]));
    }

    #[test]
    fn nibble_placement() {
        // s1 = 0x123, s2 = 0x456
        let bytes = [0x23, 0x41, 0x56];
        assert_eq!(decode_212(&bytes, 2).unwrap(), vec![0x123, 0x456]);
        assert_eq!(encode_212(&[0x123, 0x456]), bytes);
        // extremes
        assert_eq!(decode_212(&encode_212(&[MIN_SAMPLE, MAX_SAMPLE]), 2).unwrap(), vec![MIN_SAMPLE, MAX_SAMPLE]);
    }

    #[test]
    fn odd_sample_count_uses_two_bytes() {
        let enc = encode_212(&[-5, 7, 300]);
        assert_eq!(enc.len(), 5);
        assert_eq!(decode_212(&enc, 3).unwrap(), vec![-5, 7, 300]);
    }

    #[test]
    fn truncated_input_reports_offset() {
        let err = decode_212(&[1, 2, 3, 4], 4).unwrap_err();
        match err {
            Error::Truncated212 { offset, needed, available } => {
                assert_eq!((offset, needed, available), (4, 6, 4));
            }
            other => panic!("unexpected {other}"),
        }
    }

    proptest! {
        #[test]
        fn round_trip(samples in prop::collection::vec(MIN_SAMPLE..=MAX_SAMPLE, 0..200)) {
            let enc = encode_212(&samples);
            prop_assert_eq!(enc.len(), packed_len(samples.len()));
            prop_assert_eq!(decode_212(&enc, samples.len()).unwrap(), samples);
        }
    }
}
