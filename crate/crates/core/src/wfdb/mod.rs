//! Reading PhysioNet WFDB records: headers, format-212 signal files and MIT
//! annotation files, plus a CSV fallback for hand-made fixtures.

pub mod aami;
pub mod annotation;
pub mod format212;
pub mod header;
pub mod record;

pub use aami::{map_symbol_to_aami, AamiMap};
pub use annotation::{parse_annotations, parse_annotations_with, AnnotationEntry, AnnotationSet, BeatAnnotation};
pub use format212::{decode_212, decode_format212, encode_212};
pub use header::{parse_header, RecordHeader, SignalSpec};
pub use record::{load_csv, load_record, load_wfdb, write_wfdb, AnnotationStats, Record};
