//! Confusion matrices, one-vs-rest metrics, per-record statistics, predictive tables and
//! report output.

pub mod confusion;
pub mod prediction;
pub mod report;
pub mod stats;

pub use confusion::{binary_metrics, confusion, confusion_alarms, BinaryCounts, BinaryMetrics, ConfusionMatrix, Variant};
pub use prediction::{predictive_table, predictive_table_stream, PredictionRow, PredictionTable, Target};
pub use report::{
    emit_report, summarize, AlphaPoint, ClassMetrics, EvaluationReport, PerRecordMetrics, PredictionReport,
    PredictionSection, RecordOutcome, RecordResult, ReportSettings, Summary, REPORT_VERSION,
};
pub use stats::{per_record_stats, quantile, RecordStats};
