//! Configuration-driven pipeline: ingest, train, transform-fit, classify, evaluate.
//! Each step writes its artifacts atomically together with a manifest of content hashes
//! that the next step checks.

pub mod artifacts;
pub mod config;
pub mod steps;

pub use artifacts::{ClassCounts, IngestManifest, IngestRecord, TrainManifest, TransformArtifact, TransformDiagnostics};
pub use config::{Anchor, BasisName, PipelineConfig, TransformMode, DS1, DS2};
pub use steps::{cmd_classify, cmd_evaluate, cmd_ingest, cmd_train, cmd_transform_fit, load_stream_inputs, load_trained, run_streams};
