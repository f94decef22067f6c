use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::Class;

/// Final per-sample label: normal, yellow (personal stage) or red (global stage).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlarmValue {
    N,
    Vy,
    Sy,
    Fy,
    Vr,
    Sr,
    Fr,
}

impl AlarmValue {
    pub fn red(c: Class) -> AlarmValue {
        match c {
            Class::N => AlarmValue::N,
            Class::V => AlarmValue::Vr,
            Class::S => AlarmValue::Sr,
            Class::F => AlarmValue::Fr,
        }
    }

    pub fn yellow(c: Class) -> AlarmValue {
        match c {
            Class::N => AlarmValue::N,
            Class::V => AlarmValue::Vy,
            Class::S => AlarmValue::Sy,
            Class::F => AlarmValue::Fy,
        }
    }

    /// Class with yellow and red merged.
    pub fn class(self) -> Class {
        match self {
            AlarmValue::N => Class::N,
            AlarmValue::Vy | AlarmValue::Vr => Class::V,
            AlarmValue::Sy | AlarmValue::Sr => Class::S,
            AlarmValue::Fy | AlarmValue::Fr => Class::F,
        }
    }

    pub fn is_yellow(self) -> bool {
        matches!(self, AlarmValue::Vy | AlarmValue::Sy | AlarmValue::Fy)
    }

    pub fn is_red(self) -> bool {
        matches!(self, AlarmValue::Vr | AlarmValue::Sr | AlarmValue::Fr)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AlarmValue::N => "N",
            AlarmValue::Vy => "Vy",
            AlarmValue::Sy => "Sy",
            AlarmValue::Fy => "Fy",
            AlarmValue::Vr => "Vr",
            AlarmValue::Sr => "Sr",
            AlarmValue::Fr => "Fr",
        }
    }
}

impl fmt::Display for AlarmValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Global,
    Personal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlarmLabel {
    pub patient_id: String,
    pub time_index: usize,
    pub timestamp_s: f64,
    pub stage: Stage,
    pub value: AlarmValue,
    /// Label assigned by the global stage alone.
    pub global: Class,
    pub truth: Option<Class>,
}

/// `patient,time_index,stage,label,truth`.
pub fn write_alarms_csv<W: Write>(out: W, alarms: &[AlarmLabel]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["patient", "time_index", "stage", "label", "truth"])?;
    for a in alarms {
        w.write_record([
            a.patient_id.as_str(),
            &a.time_index.to_string(),
            match a.stage {
                Stage::Global => "global",
                Stage::Personal => "personal",
            },
            a.value.as_str(),
            &a.truth.map(|c| c.as_char().to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<alarms>", e))
}

/// One JSON object per line.
pub fn write_alarms_jsonl<W: Write>(mut out: W, alarms: &[AlarmLabel]) -> Result<()> {
    for a in alarms {
        serde_json::to_writer(&mut out, a)?;
        out.write_all(b"\n").map_err(|e| Error::io("<alarms>", e))?;
    }
    Ok(())
}
