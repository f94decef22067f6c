use std::path::{Path, PathBuf};

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::AlarmLabel;
use crate::error::{Error, Result};
use crate::evaluation::confusion::{binary_metrics, confusion_alarms, BinaryMetrics, ConfusionMatrix, Variant};
use crate::evaluation::prediction::{predictive_table, PredictionTable, Target};
use crate::evaluation::stats::{per_record_stats, RecordStats};
use crate::fsutil::{write_atomic, write_atomic_with};
use crate::labels::Class;

pub const REPORT_VERSION: u32 = 1;

/// Per-record classification result, or the reason it was not evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum RecordOutcome {
    Evaluated { record: String, alarms: Vec<AlarmLabel> },
    Skipped { record: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordResult {
    pub record: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
    pub segments: u64,
    /// Yellow alarms by type (V, S, F).
    pub yellow: [u64; 3],
    pub red: ConfusionMatrix,
    #[serde(rename = "final")]
    pub final_: ConfusionMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: Class,
    pub red: BinaryMetrics,
    #[serde(rename = "final")]
    pub final_: BinaryMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerRecordMetrics {
    pub class: Class,
    pub acc: RecordStats,
    pub se: RecordStats,
    pub sp: RecordStats,
}

/// A prediction table with its derived percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub table: PredictionTable,
    pub posterior: [[Option<f64>; 3]; 3],
    pub prior: [Option<f64>; 3],
    pub uplift: [Option<f64>; 3],
}

impl From<PredictionTable> for PredictionReport {
    fn from(table: PredictionTable) -> Self {
        PredictionReport { posterior: table.posterior(), prior: table.prior_pct(), uplift: table.uplift(), table }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSection {
    pub unwindowed: PredictionReport,
    pub windowed: PredictionReport,
    /// Same look-ups against predicted red alarms instead of the truth.
    pub red_unwindowed: PredictionReport,
    pub red_windowed: PredictionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub records: Vec<RecordResult>,
    pub red: ConfusionMatrix,
    #[serde(rename = "final")]
    pub final_: ConfusionMatrix,
    pub metrics: Vec<ClassMetrics>,
    pub per_record: Vec<PerRecordMetrics>,
    pub prediction: PredictionSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaPoint {
    pub alpha: f64,
    pub yellow: [u64; 3],
    pub metrics: Vec<ClassMetrics>,
    pub uplift_unwindowed: [Option<f64>; 3],
    pub uplift_windowed: [Option<f64>; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSettings {
    pub transform_mode: String,
    pub alpha: f64,
    pub window: usize,
    pub k: usize,
    pub seed: u64,
    pub excluded_initial_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub version: u32,
    pub settings: ReportSettings,
    pub summary: Summary,
    pub alpha_sweep: Vec<AlphaPoint>,
}

#[derive(Clone, Copy)]
enum StatField {
    Median,
    Iqr,
}

impl StatField {
    fn of(self, r: &RecordStats) -> Option<f64> {
        match self {
            StatField::Median => r.median,
            StatField::Iqr => r.iqr,
        }
    }
}

fn yellow_counts(alarms: &[AlarmLabel]) -> [u64; 3] {
    let mut y = [0; 3];
    for a in alarms.iter().filter(|a| a.value.is_yellow()) {
        y[a.value.class().index() - 1] += 1;
    }
    y
}

fn class_metrics(red: &ConfusionMatrix, fin: &ConfusionMatrix) -> Vec<ClassMetrics> {
    Class::ALL
        .iter()
        .map(|&c| ClassMetrics { class: c, red: binary_metrics(red, c), final_: binary_metrics(fin, c) })
        .collect()
}

/// Aggregates per-record alarm streams into matrices, metrics and prediction tables.
pub fn summarize(outcomes: &[RecordOutcome], window: usize) -> Result<Summary> {
    let mut records = vec![];
    let mut red = ConfusionMatrix::default();
    let mut fin = ConfusionMatrix::default();
    let mut all = vec![];
    for o in outcomes {
        match o {
            RecordOutcome::Evaluated { record, alarms } => {
                let r = confusion_alarms(alarms, Variant::Red)?;
                let f = confusion_alarms(alarms, Variant::Final)?;
                red.merge(&r);
                fin.merge(&f);
                all.extend(alarms.iter().cloned());
                records.push(RecordResult {
                    record: record.clone(),
                    status: "evaluated".into(),
                    reason: None,
                    segments: alarms.len() as u64,
                    yellow: yellow_counts(alarms),
                    red: r,
                    final_: f,
                });
            }
            RecordOutcome::Skipped { record, reason } => records.push(RecordResult {
                record: record.clone(),
                status: "skipped".into(),
                reason: Some(reason.clone()),
                segments: 0,
                yellow: [0; 3],
                red: ConfusionMatrix::default(),
                final_: ConfusionMatrix::default(),
            }),
        }
    }
    let evaluated: Vec<&RecordResult> = records.iter().filter(|r| r.status == "evaluated").collect();
    let per_record = Class::ALL
        .iter()
        .map(|&c| {
            let m: Vec<BinaryMetrics> = evaluated.iter().map(|r| binary_metrics(&r.final_, c)).collect();
            PerRecordMetrics {
                class: c,
                acc: per_record_stats(&m.iter().map(|x| x.acc).collect::<Vec<_>>()),
                se: per_record_stats(&m.iter().map(|x| x.se).collect::<Vec<_>>()),
                sp: per_record_stats(&m.iter().map(|x| x.sp).collect::<Vec<_>>()),
            }
        })
        .collect();
    Ok(Summary {
        metrics: class_metrics(&red, &fin),
        records,
        red,
        final_: fin,
        per_record,
        prediction: PredictionSection {
            unwindowed: predictive_table(&all, None, Target::Truth).into(),
            windowed: predictive_table(&all, Some(window), Target::Truth).into(),
            red_unwindowed: predictive_table(&all, None, Target::PredictedRed).into(),
            red_windowed: predictive_table(&all, Some(window), Target::PredictedRed).into(),
        },
    })
}

impl AlphaPoint {
    pub fn from_summary(alpha: f64, s: &Summary) -> Self {
        let mut yellow = [0; 3];
        for r in &s.records {
            for j in 0..3 {
                yellow[j] += r.yellow[j];
            }
        }
        AlphaPoint {
            alpha,
            yellow,
            metrics: s.metrics.clone(),
            uplift_unwindowed: s.prediction.unwindowed.uplift,
            uplift_windowed: s.prediction.windowed.uplift,
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "undefined".into())
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::io("<csv>", e.into_error()))
}

fn matrix_csv(cm: &ConfusionMatrix) -> Result<Vec<u8>> {
    let rows = Class::ALL
        .iter()
        .map(|&p| {
            let mut r = vec![p.to_string()];
            r.extend(cm.counts[p.index()].iter().map(u64::to_string));
            r
        })
        .collect();
    csv_bytes(&["predicted\\truth", "N", "V", "S", "F"], rows)
}

fn prediction_rows(name: &str, p: &PredictionReport, rows: &mut Vec<Vec<String>>) {
    for (i, r) in p.table.rows.iter().enumerate() {
        let mut row = vec![name.to_string(), format!("{}y", r.yellow)];
        row.extend(r.counts.iter().map(u64::to_string));
        row.extend(p.posterior[i].iter().map(|&v| fmt_opt(v)));
        row.push(r.unresolved.to_string());
        rows.push(row);
    }
    let mut row = vec![name.to_string(), "prior".into()];
    row.extend(p.table.prior.iter().map(u64::to_string));
    row.extend(p.prior.iter().map(|&v| fmt_opt(v)));
    row.push(String::new());
    rows.push(row);
}

/// Writes `report.json`, the CSV tables and the posterior-vs-prior chart into `dir`.
pub fn emit_report(report: &EvaluationReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = vec![];
    let mut put = |name: &str, bytes: Vec<u8>| -> Result<()> {
        let p = dir.join(name);
        write_atomic(&p, &bytes)?;
        written.push(p);
        Ok(())
    };
    let mut json = serde_json::to_vec_pretty(report)?;
    json.push(b'\n');
    put("report.json", json)?;
    let s = &report.summary;
    put("confusion_red.csv", matrix_csv(&s.red)?)?;
    put("confusion_final.csv", matrix_csv(&s.final_)?)?;

    let mut rows = vec![];
    for m in &s.metrics {
        for (stage, b) in [("red", m.red), ("final", m.final_)] {
            rows.push(vec![stage.into(), m.class.to_string(), fmt_opt(b.acc), fmt_opt(b.se), fmt_opt(b.sp)]);
        }
    }
    for m in &s.per_record {
        for (stat, f) in [("median", StatField::Median), ("iqr", StatField::Iqr)] {
            rows.push(vec![stat.into(), m.class.to_string(), fmt_opt(f.of(&m.acc)), fmt_opt(f.of(&m.se)), fmt_opt(f.of(&m.sp))]);
        }
    }
    put("metrics.csv", csv_bytes(&["row", "class", "acc", "se", "sp"], rows)?)?;

    let mut rows = vec![];
    prediction_rows("unwindowed", &s.prediction.unwindowed, &mut rows);
    prediction_rows(&format!("window_{}", report.settings.window), &s.prediction.windowed, &mut rows);
    prediction_rows("red_unwindowed", &s.prediction.red_unwindowed, &mut rows);
    prediction_rows(&format!("red_window_{}", report.settings.window), &s.prediction.red_windowed, &mut rows);
    put(
        "prediction.csv",
        csv_bytes(&["table", "row", "n_V", "n_S", "n_F", "pct_V", "pct_S", "pct_F", "unresolved"], rows)?,
    )?;

    let rows = report
        .alpha_sweep
        .iter()
        .map(|a| {
            let mut r = vec![a.alpha.to_string()];
            r.extend(a.yellow.iter().map(u64::to_string));
            r.extend(a.metrics[1..].iter().flat_map(|m| [fmt_opt(m.final_.se), fmt_opt(m.final_.sp)]));
            r.extend(a.uplift_windowed.iter().map(|&v| fmt_opt(v)));
            r
        })
        .collect();
    put(
        "alpha_sweep.csv",
        csv_bytes(
            &[
                "alpha", "yellow_V", "yellow_S", "yellow_F", "se_V", "sp_V", "se_S", "sp_S", "se_F", "sp_F", "uplift_V",
                "uplift_S", "uplift_F",
            ],
            rows,
        )?,
    )?;

    let svg = dir.join("prediction.svg");
    write_atomic_with(&svg, |tmp| write_prediction_svg(tmp, &s.prediction))?;
    written.push(svg);
    Ok(written)
}

/// Grouped bars: diagonal posterior (unwindowed and windowed) against the prior, per type.
pub fn write_prediction_svg(path: &Path, p: &PredictionSection) -> Result<()> {
    let plot_err = |e: String| Error::io(path, std::io::Error::other(e));
    let series = [
        ("prior", p.unwindowed.prior, RGBColor(150, 150, 150)),
        ("posterior", [0, 1, 2].map(|i| p.unwindowed.posterior[i][i]), RGBColor(230, 160, 0)),
        ("posterior (window)", [0, 1, 2].map(|i| p.windowed.posterior[i][i]), RGBColor(200, 30, 30)),
    ];
    let root = SVGBackend::new(path, (640, 400)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(e.to_string()))?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Next abnormality after a yellow alarm", ("sans-serif", 18))
        .margin(10)
        .x_label_area_size(30)
        .y_label_area_size(45)
        .build_cartesian_2d(0.0..3.0, 0.0..100.0)
        .map_err(|e| plot_err(e.to_string()))?;
    chart
        .configure_mesh()
        .disable_x_mesh()
        .x_labels(3)
        .x_label_formatter(&|x: &f64| ["V", "S", "F"].get(x.floor() as usize).copied().unwrap_or("").to_string())
        .y_desc("%")
        .draw()
        .map_err(|e| plot_err(e.to_string()))?;
    for (s, (name, vals, color)) in series.iter().enumerate() {
        let color = *color;
        let bars = (0..3).map(move |i| {
            let x0 = i as f64 + 0.15 + 0.23 * s as f64;
            let v = vals[i].unwrap_or(0.0);
            Rectangle::new([(x0, 0.0), (x0 + 0.2, v)], color.filled())
        });
        chart
            .draw_series(bars)
            .map_err(|e| plot_err(e.to_string()))?
            .label(*name)
            .legend(move |(x, y)| Rectangle::new([(x, y - 4), (x + 8, y + 4)], color.filled()));
    }
    chart
        .configure_series_labels()
        .border_style(BLACK)
        .background_style(WHITE.mix(0.8))
        .draw()
        .map_err(|e| plot_err(e.to_string()))?;
    root.present().map_err(|e| plot_err(e.to_string()))?;
    Ok(())
}
