use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_GAIN: f64 = 200.0;
const DEFAULT_SAMPLING_RATE: f64 = 250.0;

/// One signal specification line of a `.hea` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub file_name: String,
    /// Always 212; other codes are rejected while parsing.
    pub format: u16,
    /// Byte offset of the first sample inside the data file.
    pub byte_offset: usize,
    /// ADC units per millivolt.
    pub gain: f64,
    /// ADC value corresponding to 0 mV.
    pub baseline: i32,
    pub units: String,
    pub adc_resolution: u32,
    pub adc_zero: i32,
    pub initial_value: Option<i32>,
    pub checksum: Option<i32>,
    pub block_size: Option<usize>,
    /// Channel name, e.g. `MLII`.
    pub description: String,
}

impl SignalSpec {
    #[inline]
    pub fn adc_to_mv(&self, adc: i16) -> f64 {
        (f64::from(adc) - f64::from(self.baseline)) / self.gain
    }

    #[inline]
    pub fn mv_to_adc(&self, mv: f64) -> i16 {
        (mv * self.gain + f64::from(self.baseline)).round() as i16
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordHeader {
    pub record_name: String,
    pub num_signals: usize,
    pub sampling_rate: f64,
    /// Samples per signal; `None` when the header omits it.
    pub num_samples: Option<usize>,
    pub signals: Vec<SignalSpec>,
}

impl RecordHeader {
    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.signals.iter().position(|s| s.description == name)
    }
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::HeaderParse {
        line,
        reason: reason.into(),
    }
}

/// Parses the text of a WFDB header (`.hea`) file.
pub fn parse_header(bytes: &[u8]) -> Result<RecordHeader> {
    let text = std::str::from_utf8(bytes).map_err(|e| parse_err(0, format!("not UTF-8: {e}")))?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (rec_line_no, rec_line) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing record line"))?;
    let mut fields = rec_line.split_whitespace();

    let name_field = fields.next().ok_or_else(|| parse_err(rec_line_no, "missing record name"))?;
    if name_field.contains('/') {
        return Err(parse_err(rec_line_no, "multi-segment records are not supported"));
    }

    let num_signals: usize = fields
        .next()
        .ok_or_else(|| parse_err(rec_line_no, "missing number of signals"))?
        .parse()
        .map_err(|e| parse_err(rec_line_no, format!("bad number of signals: {e}")))?;
    if num_signals == 0 {
        return Err(parse_err(rec_line_no, "record declares zero signals"));
    }

    let sampling_rate = match fields.next() {
        Some(tok) => {
            let freq = tok.split('/').next().unwrap_or(tok);
            let freq = freq.split('(').next().unwrap_or(freq);
            let fs: f64 = freq
                .parse()
                .map_err(|e| parse_err(rec_line_no, format!("bad sampling frequency {tok:?}: {e}")))?;
            if !(fs > 0.0 && fs.is_finite()) {
                return Err(parse_err(rec_line_no, format!("sampling frequency must be positive, got {fs}")));
            }
            fs
        }
        None => DEFAULT_SAMPLING_RATE,
    };

    let num_samples = match fields.next() {
        Some(tok) => Some(
            tok.parse::<usize>()
                .map_err(|e| parse_err(rec_line_no, format!("bad number of samples {tok:?}: {e}")))?,
        ),
        None => None,
    };

    let mut signals = Vec::with_capacity(num_signals);
    for _ in 0..num_signals {
        let (line_no, line) = lines.next().ok_or_else(|| {
            parse_err(
                rec_line_no,
                format!("expected {num_signals} signal lines, found {}", signals.len()),
            )
        })?;
        signals.push(parse_signal_line(line_no, line)?);
    }

    Ok(RecordHeader {
        record_name: name_field.to_string(),
        num_signals,
        sampling_rate,
        num_samples,
        signals,
    })
}

fn parse_signal_line(line_no: usize, line: &str) -> Result<SignalSpec> {
    // The description is free text running to the end of the line.
    let mut rest = line;
    let mut next_field = || -> Option<&str> {
        let trimmed = rest.trim_start();
        if trimmed.is_empty() {
            return None;
        }
        let end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
        let (tok, tail) = trimmed.split_at(end);
        rest = tail;
        Some(tok)
    };

    let file_name = next_field()
        .ok_or_else(|| parse_err(line_no, "missing file name"))?
        .to_string();
    let format_tok = next_field().ok_or_else(|| parse_err(line_no, "missing format"))?;
    let (format, byte_offset) = parse_format(line_no, format_tok)?;

    let mut gain = DEFAULT_GAIN;
    let mut baseline = None;
    let mut units = String::from("mV");
    if let Some(tok) = next_field() {
        let (gain_part, units_part) = match tok.split_once('/') {
            Some((g, u)) => (g, Some(u)),
            None => (tok, None),
        };
        let (gain_str, base_str) = match gain_part.split_once('(') {
            Some((g, b)) => (g, Some(b.trim_end_matches(')'))),
            None => (gain_part, None),
        };
        let g: f64 = gain_str
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad gain {tok:?}: {e}")))?;
        if g != 0.0 {
            gain = g;
        }
        if let Some(b) = base_str {
            baseline = Some(
                b.parse::<i32>()
                    .map_err(|e| parse_err(line_no, format!("bad baseline {tok:?}: {e}")))?,
            );
        }
        if let Some(u) = units_part {
            units = u.to_string();
        }
    }

    let int_field = |tok: Option<&str>, what: &str| -> Result<Option<i64>> {
        tok.map(|t| {
            t.parse::<i64>()
                .map_err(|e| parse_err(line_no, format!("bad {what} {t:?}: {e}")))
        })
        .transpose()
    };

    let adc_resolution = int_field(next_field(), "ADC resolution")?.unwrap_or(12) as u32;
    let adc_zero = int_field(next_field(), "ADC zero")?.unwrap_or(0) as i32;
    let initial_value = int_field(next_field(), "initial value")?.map(|v| v as i32);
    let checksum = int_field(next_field(), "checksum")?.map(|v| v as i32);
    let block_size = int_field(next_field(), "block size")?.map(|v| v as usize);
    let description = rest.trim().to_string();

    Ok(SignalSpec {
        file_name,
        format,
        byte_offset,
        gain,
        baseline: baseline.unwrap_or(adc_zero),
        units,
        adc_resolution,
        adc_zero,
        initial_value,
        checksum,
        block_size,
        description,
    })
}

/// Parses `212`, `212:skew`, `212+offset`. Frame multiplicity (`x2`) is not supported.
fn parse_format(line_no: usize, tok: &str) -> Result<(u16, usize)> {
    let (code_part, offset) = match tok.split_once('+') {
        Some((c, o)) => (
            c,
            o.parse::<usize>()
                .map_err(|e| parse_err(line_no, format!("bad byte offset in {tok:?}: {e}")))?,
        ),
        None => (tok, 0),
    };
    let code_part = code_part.split(':').next().unwrap_or(code_part);
    if code_part.contains('x') {
        return Err(Error::UnsupportedFormat(tok.to_string()));
    }
    let code: u16 = code_part
        .parse()
        .map_err(|e| parse_err(line_no, format!("bad format code {tok:?}: {e}")))?;
    if code != 212 {
        return Err(Error::UnsupportedFormat(tok.to_string()));
    }
    Ok((code, offset))
}

/// Renders a header in WFDB text form (used by the fixture writer).
pub fn render_header(header: &RecordHeader) -> String {
    let mut out = format!(
        "{} {} {}",
        header.record_name, header.num_signals, header.sampling_rate
    );
    if let Some(n) = header.num_samples {
        out.push_str(&format!(" {n}"));
    }
    out.push('\n');
    for s in &header.signals {
        let offset = if s.byte_offset > 0 {
            format!("+{}", s.byte_offset)
        } else {
            String::new()
        };
        out.push_str(&format!(
            "{} {}{} {}({})/{} {} {} {} {} 0 {}\n",
            s.file_name,
            s.format,
            offset,
            s.gain,
            s.baseline,
            s.units,
            s.adc_resolution,
            s.adc_zero,
            s.initial_value.unwrap_or(0),
            s.checksum.unwrap_or(0),
            s.description
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MITDB_100: &str = "100 2 360 650000\n\
        100.dat 212 200 11 1024 995 -22131 0 MLII\n\
        100.dat 212 200 11 1024 1011 20052 0 V5\n\
        # 69 M 1085 1629 x1\n";

    #[test]
    fn parses_two_channel_record() {
        let h = parse_header(MITDB_100.as_bytes()).unwrap();
        assert_eq!(h.record_name, "100");
        assert_eq!(h.num_signals, 2);
        assert_eq!(h.sampling_rate, 360.0);
        assert_eq!(h.num_samples, Some(650000));
        assert_eq!(h.signals[0].format, 212);
        assert_eq!(h.signals[0].gain, 200.0);
        assert_eq!(h.signals[0].baseline, 1024);
        assert_eq!(h.signals[0].initial_value, Some(995));
        assert_eq!(h.signals[0].description, "MLII");
        assert_eq!(h.signals[1].description, "V5");
        assert_eq!(h.channel_index("V5"), Some(1));
    }

    #[test]
    fn synthetic_single_channel_fixture() {
        let text = "# synthetic\nsyn01 1 250 5000\nsyn01.dat 212+6 400(-12)/mV 12 0 3 77 0 lead II\n";
        let h = parse_header(text.as_bytes()).unwrap();
        assert_eq!(h.record_name, "syn01");
        assert_eq!(h.num_signals, 1);
        assert_eq!(h.sampling_rate, 250.0);
        assert_eq!(h.num_samples, Some(5000));
        let s = &h.signals[0];
        assert_eq!(s.file_name, "syn01.dat");
        assert_eq!(s.byte_offset, 6);
        assert_eq!(s.gain, 400.0);
        assert_eq!(s.baseline, -12);
        assert_eq!(s.units, "mV");
        assert_eq!(s.adc_resolution, 12);
        assert_eq!(s.adc_zero, 0);
        assert_eq!(s.initial_value, Some(3));
        assert_eq!(s.checksum, Some(77));
        assert_eq!(s.description, "lead II");
    }

    #[test]
    fn zero_signals_rejected() {
        let err = parse_header(b"rec 0 360 100\n").unwrap_err();
        assert!(matches!(err, Error::HeaderParse { line: 1, .. }), "{err}");
    }

    #[test]
    fn unsupported_format_rejected() {
        let err = parse_header(b"rec 1 360 100\nrec.dat 16 200 16 0 0 0 0 MLII\n").unwrap_err();
        assert!(matches!(err, Error::UnsupportedFormat(_)), "{err}");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_header(b"# c\nrec 1 360 100\nrec.dat 212 abc 11 0 0 0 0 MLII\n").unwrap_err();
        assert!(matches!(err, Error::HeaderParse { line: 3, .. }), "{err}");
    }

    #[test]
    fn missing_signal_line() {
        assert!(parse_header(b"rec 2 360 100\nrec.dat 212 200 11 0 0 0 0 MLII\n").is_err());
    }

    #[test]
    fn render_round_trips() {
        let h = parse_header(MITDB_100.as_bytes()).unwrap();
        let again = parse_header(render_header(&h).as_bytes()).unwrap();
        assert_eq!(h.signals[0].gain, again.signals[0].gain);
        assert_eq!(h.signals[1].baseline, again.signals[1].baseline);
        assert_eq!(h.num_samples, again.num_samples);
    }

    #[test]
    fn adc_conversion_inverts_within_half_lsb() {
        let h = parse_header(MITDB_100.as_bytes()).unwrap();
        let s = &h.signals[0];
        for adc in [-2048i16, -1, 0, 995, 1024, 2047] {
            let mv = s.adc_to_mv(adc);
            assert_eq!(s.mv_to_adc(mv), adc);
            assert!((mv - (f64::from(adc) - 1024.0) / 200.0).abs() <= 0.5 / s.gain);
        }
    }
}
