use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::AamiClass;
use crate::wfdb::aami::AamiMap;
use crate::wfdb::annotation::{encode_annotations, parse_annotations_with, AnnotationEntry, AnnotationSet, BeatAnnotation};
use crate::wfdb::format212::{decode_212, encode_212, packed_len};
use crate::wfdb::header::{parse_header, render_header, RecordHeader, SignalSpec};

/// One patient recording: calibrated signals plus beat annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub header: RecordHeader,
    /// Per-channel amplitudes in mV.
    pub signals: Vec<Vec<f64>>,
    pub annotations: Vec<BeatAnnotation>,
    pub stats: AnnotationStats,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationStats {
    pub non_beat: usize,
    pub unknown_codes: usize,
    pub discarded_q: usize,
}

impl From<&AnnotationSet> for AnnotationStats {
    fn from(s: &AnnotationSet) -> Self {
        AnnotationStats {
            non_beat: s.non_beat,
            unknown_codes: s.unknown_codes,
            discarded_q: s.discarded_q,
        }
    }
}

impl Record {
    pub fn num_samples(&self) -> usize {
        self.signals.first().map_or(0, Vec::len)
    }

    pub fn sampling_rate(&self) -> f64 {
        self.header.sampling_rate
    }

    /// Index of the preferred channel, falling back to channel 0 with a warning.
    pub fn select_channel(&self, preferred: &str) -> usize {
        match self.header.channel_index(preferred) {
            Some(i) => i,
            None => {
                log::warn!(
                    "record {} has no {preferred} channel, using channel 0 ({})",
                    self.header.record_name,
                    self.header.signals.first().map_or("", |s| s.description.as_str())
                );
                0
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_samples();
        for (i, s) in self.signals.iter().enumerate() {
            if s.len() != n {
                return Err(Error::InvalidRecord(format!(
                    "{}: channel {i} has {} samples, expected {n}",
                    self.header.record_name,
                    s.len()
                )));
            }
        }
        if let Some(bad) = self.annotations.iter().find(|a| a.sample_index >= n) {
            return Err(Error::InvalidRecord(format!(
                "{}: annotation at sample {} beyond record length {n}",
                self.header.record_name, bad.sample_index
            )));
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Loads `<dir>/<name>.hea`, its `.dat` file(s) and `<name>.<annotator>`.
pub fn load_wfdb(dir: &Path, name: &str, annotator: &str, map: &AamiMap) -> Result<Record> {
    let hea_path = dir.join(format!("{name}.hea"));
    if !hea_path.exists() {
        return Err(Error::MissingRecord {
            name: name.to_string(),
            dir: dir.to_path_buf(),
        });
    }
    let header = parse_header(&read(&hea_path)?)?;

    // Signals sharing a data file are interleaved frame by frame.
    let mut files: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in header.signals.iter().enumerate() {
        files.entry(s.file_name.as_str()).or_default().push(i);
    }

    let mut signals: Vec<Vec<f64>> = vec![Vec::new(); header.num_signals];
    for (file, channels) in &files {
        let path = dir.join(file);
        let bytes = read(&path)?;
        let offset = header.signals[channels[0]].byte_offset;
        let body = bytes.get(offset..).unwrap_or(&[]);
        let per_frame = channels.len();
        let num_samples = match header.num_samples {
            Some(n) => n,
            None => body.len() * 2 / 3 / per_frame,
        };
        let raw = decode_212(body, num_samples * per_frame).map_err(|e| match e {
            Error::Truncated212 { offset: o, needed, available } => Error::Truncated212 {
                offset: o + offset,
                needed: needed + offset,
                available: available + offset,
            },
            other => other,
        })?;
        for (slot, &ch) in channels.iter().enumerate() {
            let spec = &header.signals[ch];
            signals[ch] = raw
                .iter()
                .skip(slot)
                .step_by(per_frame)
                .map(|&adc| spec.adc_to_mv(adc))
                .collect();
        }
    }

    let atr_path = dir.join(format!("{name}.{annotator}"));
    let set = parse_annotations_with(&read(&atr_path)?, map)?;
    let mut header = header;
    header.num_samples = Some(signals.first().map_or(0, Vec::len));
    let record = Record {
        header,
        signals,
        stats: AnnotationStats::from(&set),
        annotations: set.beats,
    };
    record.validate()?;
    Ok(record)
}

/// CSV fallback: `<name>.signal.csv` with `sample_index,amplitude_mV` rows and
/// `<name>.ann.csv` with `sample_index,symbol` rows.
pub fn load_csv(dir: &Path, name: &str, sampling_rate: f64, map: &AamiMap) -> Result<Record> {
    let sig_path = csv_signal_path(dir, name);
    if !sig_path.exists() {
        return Err(Error::MissingRecord {
            name: name.to_string(),
            dir: dir.to_path_buf(),
        });
    }
    let mut rdr = csv::Reader::from_path(&sig_path)?;
    let mut samples = Vec::new();
    for (row, rec) in rdr.deserialize::<(usize, f64)>().enumerate() {
        let (idx, mv) = rec?;
        if idx != row {
            return Err(Error::InvalidRecord(format!(
                "{}: expected sample_index {row}, found {idx}",
                sig_path.display()
            )));
        }
        samples.push(mv);
    }

    let ann_path = dir.join(format!("{name}.ann.csv"));
    let mut rdr = csv::Reader::from_path(&ann_path)?;
    let mut annotations: Vec<BeatAnnotation> = Vec::new();
    let mut discarded_q = 0;
    for rec in rdr.deserialize::<(usize, String)>() {
        let (sample_index, sym) = rec?;
        let symbol = sym.chars().next().ok_or_else(|| {
            Error::InvalidRecord(format!("{}: empty symbol at sample {sample_index}", ann_path.display()))
        })?;
        if let Some(prev) = annotations.last() {
            if sample_index <= prev.sample_index {
                return Err(Error::InvalidRecord(format!(
                    "{}: annotation indices must be strictly increasing ({} then {sample_index})",
                    ann_path.display(),
                    prev.sample_index
                )));
            }
        }
        let aami_class = map.map_symbol(symbol);
        if aami_class == AamiClass::Q {
            discarded_q += 1;
        }
        annotations.push(BeatAnnotation {
            sample_index,
            symbol,
            aami_class,
        });
    }

    let header = RecordHeader {
        record_name: name.to_string(),
        num_signals: 1,
        sampling_rate,
        num_samples: Some(samples.len()),
        signals: vec![SignalSpec {
            file_name: sig_path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            format: 212,
            byte_offset: 0,
            gain: 1.0,
            baseline: 0,
            units: "mV".into(),
            adc_resolution: 12,
            adc_zero: 0,
            initial_value: None,
            checksum: None,
            block_size: None,
            description: "MLII".into(),
        }],
    };
    let record = Record {
        header,
        signals: vec![samples],
        annotations,
        stats: AnnotationStats {
            discarded_q,
            ..Default::default()
        },
    };
    record.validate()?;
    Ok(record)
}

fn csv_signal_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.signal.csv"))
}

/// Loads a record, preferring WFDB files and falling back to the CSV layout.
pub fn load_record(dir: &Path, name: &str, csv_sampling_rate: f64, map: &AamiMap) -> Result<Record> {
    if dir.join(format!("{name}.hea")).exists() {
        load_wfdb(dir, name, "atr", map)
    } else if csv_signal_path(dir, name).exists() {
        load_csv(dir, name, csv_sampling_rate, map)
    } else {
        Err(Error::MissingRecord {
            name: name.to_string(),
            dir: dir.to_path_buf(),
        })
    }
}

/// Writes a single-file format-212 record with `.hea`, `.dat` and `.atr` files.
/// Amplitudes are quantized with the given gain (ADC units per mV) and baseline 0.
pub fn write_wfdb(
    dir: &Path,
    name: &str,
    sampling_rate: f64,
    channels: &[(&str, &[f64])],
    gain: f64,
    annotations: &[AnnotationEntry],
) -> Result<()> {
    let n = channels.first().map_or(0, |c| c.1.len());
    let specs: Vec<SignalSpec> = channels
        .iter()
        .map(|(desc, _)| SignalSpec {
            file_name: format!("{name}.dat"),
            format: 212,
            byte_offset: 0,
            gain,
            baseline: 0,
            units: "mV".into(),
            adc_resolution: 12,
            adc_zero: 0,
            initial_value: None,
            checksum: None,
            block_size: None,
            description: desc.to_string(),
        })
        .collect();
    let mut interleaved = Vec::with_capacity(n * channels.len());
    for i in 0..n {
        for (spec, (_, data)) in specs.iter().zip(channels) {
            let adc = spec.mv_to_adc(data[i]).clamp(-2048, 2047);
            interleaved.push(adc);
        }
    }
    let header = RecordHeader {
        record_name: name.to_string(),
        num_signals: channels.len(),
        sampling_rate,
        num_samples: Some(n),
        signals: specs,
    };
    let dat = encode_212(&interleaved);
    debug_assert_eq!(dat.len(), packed_len(interleaved.len()));
    let write = |path: PathBuf, bytes: &[u8]| fs::write(&path, bytes).map_err(|e| Error::io(path, e));
    write(dir.join(format!("{name}.hea")), render_header(&header).as_bytes())?;
    write(dir.join(format!("{name}.dat")), &dat)?;
    write(dir.join(format!("{name}.atr")), &encode_annotations(annotations)?)?;
    Ok(())
}
