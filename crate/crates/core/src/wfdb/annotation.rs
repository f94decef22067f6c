//! MIT annotation files (`.atr`).
//!
//! Each entry starts with a little-endian 16-bit word: the top 6 bits are the
//! annotation type code, the low 10 bits the sample interval since the previous
//! annotation. Codes 59..=63 are pseudo-annotations (SKIP, NUM, SUB, CHN, AUX).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::AamiClass;
use crate::wfdb::aami::AamiMap;

const SKIP: u16 = 59;
const NUM: u16 = 60;
const SUB: u16 = 61;
const CHN: u16 = 62;
const AUX: u16 = 63;

/// Symbols for annotation codes 0..=41 (`ecgcodes.h`).
const CODE_SYMBOLS: [char; 42] = [
    ' ', 'N', 'L', 'R', 'a', 'V', 'F', 'J', 'A', 'S', 'E', 'j', '/', 'Q', '~', ' ', '|', ' ', 's',
    'T', '*', 'D', '"', '=', 'p', 'B', '^', 't', '+', 'u', '?', '!', '[', ']', 'e', 'n', '@', 'x',
    'f', '(', ')', 'r',
];

/// Codes that denote a QRS complex.
const BEAT_CODES: [u16; 19] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 25, 30, 34, 35, 38, 41];

pub fn symbol_for_code(code: u16) -> Option<char> {
    CODE_SYMBOLS
        .get(code as usize)
        .copied()
        .filter(|c| *c != ' ')
}

pub fn code_for_symbol(symbol: char) -> Option<u16> {
    if symbol == ' ' {
        return None;
    }
    CODE_SYMBOLS.iter().position(|&c| c == symbol).map(|p| p as u16)
}

pub fn is_beat_code(code: u16) -> bool {
    BEAT_CODES.contains(&code)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeatAnnotation {
    pub sample_index: usize,
    pub symbol: char,
    pub aami_class: AamiClass,
}

impl BeatAnnotation {
    pub fn is_discarded(&self) -> bool {
        self.aami_class == AamiClass::Q
    }
}

/// Decoded beats plus bookkeeping about what was dropped on the way.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub beats: Vec<BeatAnnotation>,
    /// Non-beat annotations (rhythm changes, comments, noise markers).
    pub non_beat: usize,
    /// Entries with type codes outside the known table.
    pub unknown_codes: usize,
    /// Beats whose symbol maps to the discarded `Q` class.
    pub discarded_q: usize,
}

fn word_at(bytes: &[u8], pos: usize) -> Option<u16> {
    bytes
        .get(pos..pos + 2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
}

/// Parses an MIT-format annotation stream with the default AAMI table.
pub fn parse_annotations(bytes: &[u8]) -> Result<AnnotationSet> {
    parse_annotations_with(bytes, &AamiMap::default())
}

pub fn parse_annotations_with(bytes: &[u8], map: &AamiMap) -> Result<AnnotationSet> {
    let mut set = AnnotationSet::default();
    let mut time: u64 = 0;
    let mut pos = 0usize;

    while let Some(word) = word_at(bytes, pos) {
        let entry_offset = pos;
        pos += 2;
        let code = word >> 10;
        let interval = u64::from(word & 0x03FF);
        if code == 0 && interval == 0 {
            break;
        }
        match code {
            SKIP => {
                let hi = word_at(bytes, pos);
                let lo = word_at(bytes, pos + 2);
                let (Some(hi), Some(lo)) = (hi, lo) else {
                    return Err(Error::Annotation {
                        offset: entry_offset,
                        reason: "truncated SKIP entry".into(),
                    });
                };
                pos += 4;
                let skip = ((u32::from(hi) << 16) | u32::from(lo)) as i32;
                time = time
                    .checked_add_signed(i64::from(skip))
                    .ok_or_else(|| Error::Annotation {
                        offset: entry_offset,
                        reason: format!("sample offset overflow (time {time}, skip {skip})"),
                    })?;
            }
            NUM | SUB | CHN => {}
            AUX => {
                let len = interval as usize;
                pos += len + (len & 1);
            }
            _ => {
                time = time.checked_add(interval).ok_or_else(|| Error::Annotation {
                    offset: entry_offset,
                    reason: "sample offset overflow".into(),
                })?;
                let sample_index = usize::try_from(time).map_err(|_| Error::Annotation {
                    offset: entry_offset,
                    reason: format!("sample index {time} does not fit in memory"),
                })?;
                match symbol_for_code(code) {
                    Some(symbol) if is_beat_code(code) => {
                        if let Some(prev) = set.beats.last() {
                            if sample_index <= prev.sample_index {
                                return Err(Error::Annotation {
                                    offset: entry_offset,
                                    reason: format!(
                                        "beat at sample {sample_index} does not follow beat at {}",
                                        prev.sample_index
                                    ),
                                });
                            }
                        }
                        let aami_class = map.map_symbol(symbol);
                        if aami_class == AamiClass::Q {
                            set.discarded_q += 1;
                        }
                        set.beats.push(BeatAnnotation {
                            sample_index,
                            symbol,
                            aami_class,
                        });
                    }
                    Some(_) => set.non_beat += 1,
                    None => {
                        set.unknown_codes += 1;
                        log::warn!("skipping annotation with unknown type code {code} at byte {entry_offset}");
                    }
                }
            }
        }
    }
    Ok(set)
}

/// One annotation to be written by [`encode_annotations`].
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationEntry {
    pub sample_index: usize,
    pub symbol: char,
    pub aux: Option<String>,
}

/// Encodes annotations (sorted by sample index) into MIT format, including
/// SKIP entries for gaps wider than the 10-bit interval field.
pub fn encode_annotations(entries: &[AnnotationEntry]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut time = 0usize;
    for e in entries {
        let code = code_for_symbol(e.symbol).ok_or_else(|| Error::Annotation {
            offset: out.len(),
            reason: format!("no annotation code for symbol {:?}", e.symbol),
        })?;
        let delta = e.sample_index.checked_sub(time).ok_or_else(|| Error::Annotation {
            offset: out.len(),
            reason: "entries must be sorted by sample index".into(),
        })?;
        let mut interval = delta;
        if interval > 0x03FF {
            let skip = u32::try_from(delta).map_err(|_| Error::Annotation {
                offset: out.len(),
                reason: "gap too large".into(),
            })?;
            out.extend_from_slice(&(SKIP << 10).to_le_bytes());
            out.extend_from_slice(&((skip >> 16) as u16).to_le_bytes());
            out.extend_from_slice(&((skip & 0xFFFF) as u16).to_le_bytes());
            interval = 0;
        }
        out.extend_from_slice(&((code << 10) | interval as u16).to_le_bytes());
        if let Some(aux) = &e.aux {
            let bytes = aux.as_bytes();
            let len = bytes.len().min(0x03FF);
            out.extend_from_slice(&((AUX << 10) | len as u16).to_le_bytes());
            out.extend_from_slice(&bytes[..len]);
            if len % 2 == 1 {
                out.push(0);
            }
        }
        time = e.sample_index;
    }
    out.extend_from_slice(&[0, 0]);
    Ok(out)
}
