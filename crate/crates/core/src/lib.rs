//! ECG segment classification with a global kNN stage (red alarms) and a
//! patient-adaptive deviation stage (yellow alarms) that warns ahead of
//! upcoming abnormal beats.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops mirror the formulas in the numeric code
#![allow(clippy::needless_range_loop)]

pub mod classifier;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod fsutil;
pub mod geometry;
pub mod labels;
pub mod linalg;
pub mod pipeline;
pub mod scalar;
pub mod signal;
pub mod swarm;
pub mod synthetic;
pub mod wfdb;

pub use error::{Error, ErrorKind, Result};
pub use labels::{AamiClass, Class};
pub use scalar::Scalar;
