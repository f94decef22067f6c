use std::fs::File;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::classifier::{
    process_stream, write_alarms_csv, write_alarms_jsonl, AbnormalClusters, AlarmLabel, DeviationSpace, GlobalModel,
    PersonalConfig, StreamSample,
};
use crate::error::{Error, Result};
use crate::evaluation::{emit_report, summarize, AlphaPoint, EvaluationReport, RecordOutcome, ReportSettings, REPORT_VERSION};
use crate::features::extract::extract_features_with;
use crate::features::{fit_pca_tagged, read_feature_csv, write_feature_csv, FeatureContext, PcaModel, RawSample, Split};
use crate::fsutil::{sha256_file, sha256_hex, write_atomic, write_atomic_with};
use crate::geometry::{orthogonality_report, SpatialTransform};
use crate::labels::Class;
use crate::linalg::mean;
use crate::pipeline::artifacts::*;
use crate::pipeline::config::{Anchor, PipelineConfig, TransformMode};
use crate::signal::delineate::delineate_with;
use crate::signal::{denoise_with, segment, SegmentLabel};
use crate::swarm::{mopso_observed, objective_separability, objective_symmetry, write_archive_csv, write_pareto_svg, BasisSet, ClusterStats, ParetoArchive, PolynomialTransform};
use crate::wfdb::{load_record, AamiMap};

const INGEST_MANIFEST: &str = "manifest.json";

#[derive(Serialize)]
struct IngestSettings<'a> {
    data_dir: &'a Path,
    channel: &'a str,
    csv_sampling_rate: f64,
    denoise: &'a crate::signal::DenoiseConfig,
    delineation: &'a crate::signal::DelineationConfig,
    segmentation: &'a crate::signal::SegmentationConfig,
    aami: &'a AamiMap,
}

fn ingest_settings_hash(cfg: &PipelineConfig) -> Result<String> {
    let map = cfg.aami_map()?;
    let s = IngestSettings {
        data_dir: &cfg.data_dir,
        channel: &cfg.channel,
        csv_sampling_rate: cfg.csv_sampling_rate,
        denoise: &cfg.denoise,
        delineation: &cfg.delineation,
        segmentation: &cfg.segmentation,
        aami: &map,
    };
    Ok(sha256_hex(&serde_json::to_vec(&s)?))
}

/// Labelled segments of one record with their raw features.
pub fn extract_record(cfg: &PipelineConfig, name: &str, split: Split, map: &AamiMap) -> Result<(IngestRecord, Vec<RawSample>)> {
    let rec = load_record(&cfg.data_dir, name, cfg.csv_sampling_rate, map)?;
    let fs = rec.sampling_rate();
    let ch = rec.select_channel(&cfg.channel);
    let den = denoise_with(&rec.signals[ch], fs, &cfg.denoise)?;
    let cycles = delineate_with(&den, fs, &rec.annotations, &cfg.delineation);
    let segs = segment(&cycles, &cfg.segmentation, name);
    let ctx = FeatureContext::for_record(&den, fs, &cycles);
    let mut planner = FftPlanner::new();
    let mut rows = vec![];
    let mut counts = ClassCounts::default();
    let (mut discarded, mut failures) = (0, 0);
    for seg in &segs {
        let SegmentLabel::Labeled(label) = seg.label else {
            discarded += 1;
            continue;
        };
        match extract_features_with(seg, &den, &ctx, &mut planner) {
            Ok(features) => {
                counts.add(label);
                rows.push(RawSample {
                    patient_id: name.to_string(),
                    segment_index: seg.segment_index,
                    timestamp_s: seg.cycles[0].r as f64 / fs,
                    label,
                    features,
                });
            }
            Err(e) => {
                log::warn!("{name} segment {}: {e}; skipped", seg.segment_index);
                failures += 1;
            }
        }
    }
    let info = IngestRecord {
        name: name.to_string(),
        split,
        sampling_rate: fs,
        channel: rec.header.signals.get(ch).map(|s| s.description.clone()).unwrap_or_default(),
        beats: rec.annotations.len(),
        cycles: cycles.len(),
        segments: counts,
        discarded_segments: discarded,
        discarded_q_beats: rec.stats.discarded_q,
        unknown_annotation_codes: rec.stats.unknown_codes,
        feature_failures: failures,
        features_file: format!("features/{name}.csv"),
        features_sha256: String::new(),
    };
    Ok((info, rows))
}

/// Feature caches for every DS1 and DS2 record plus a manifest.
pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<IngestManifest> {
    cfg.validate()?;
    let map = cfg.aami_map()?;
    let dir = cfg.ingest_dir();
    let jobs: Vec<(&String, Split)> = cfg
        .records
        .ds1
        .iter()
        .map(|r| (r, Split::Train))
        .chain(cfg.records.ds2.iter().map(|r| (r, Split::Test)))
        .collect();
    let results: Vec<Result<IngestRecord>> = jobs
        .par_iter()
        .map(|&(name, split)| {
            let (mut info, rows) = extract_record(cfg, name, split, &map)?;
            let mut buf = vec![];
            write_feature_csv(&mut buf, &rows)?;
            write_atomic(&dir.join(&info.features_file), &buf)?;
            info.features_sha256 = sha256_hex(&buf);
            log::info!("{name}: {} labelled segments", rows.len());
            Ok(info)
        })
        .collect();
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut totals = ClassCounts::default();
    records.iter().for_each(|r| totals.merge(&r.segments));
    let manifest = IngestManifest { version: MANIFEST_VERSION, settings_sha256: ingest_settings_hash(cfg)?, records, totals };
    write_json(&dir.join(INGEST_MANIFEST), &manifest)?;
    Ok(manifest)
}

fn load_ingest(cfg: &PipelineConfig) -> Result<(IngestManifest, String)> {
    let path = cfg.ingest_dir().join(INGEST_MANIFEST);
    let manifest: IngestManifest = read_json(&path)?;
    if manifest.settings_sha256 != ingest_settings_hash(cfg)? {
        return Err(Error::StaleCache(format!(
            "{} was built with different data or signal settings; re-run `ingest`",
            path.display()
        )));
    }
    Ok((manifest, sha256_file(&path)?))
}

/// Reads the cached rows of the listed records, checking split tags and hashes.
fn read_split(cfg: &PipelineConfig, manifest: &IngestManifest, names: &[String], split: Split) -> Result<Vec<Vec<RawSample>>> {
    names
        .iter()
        .map(|name| {
            let rec = manifest.records.iter().find(|r| &r.name == name).ok_or_else(|| {
                Error::StaleCache(format!("record {name} is missing from the ingest manifest; re-run `ingest`"))
            })?;
            if rec.split != split {
                return Err(Error::StaleCache(format!(
                    "record {name} is tagged {:?} in the ingest manifest but listed as {split:?}; re-run `ingest`",
                    rec.split
                )));
            }
            let path = cfg.ingest_dir().join(&rec.features_file);
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if sha256_hex(&bytes) != rec.features_sha256 {
                return Err(Error::StaleCache(format!("{} does not match its manifest hash; re-run `ingest`", path.display())));
            }
            read_feature_csv(bytes.as_slice())
        })
        .collect()
}

/// Trained artifacts shared by the later steps.
pub struct TrainedModel {
    pub pca: PcaModel,
    pub model: GlobalModel<f64>,
    pub clusters: AbnormalClusters<f64>,
    pub manifest_sha256: String,
}

impl TrainedModel {
    pub fn normal_points(&self) -> Vec<&[f64]> {
        self.model
            .points
            .iter()
            .zip(&self.model.labels)
            .filter(|(_, &l)| l == Class::N)
            .map(|(p, _)| p.as_slice())
            .collect()
    }

    pub fn normal_centroid(&self) -> Result<Vec<f64>> {
        mean(&self.normal_points()).ok_or_else(|| Error::InvalidRecord("training set has no normal segments".into()))
    }
}

/// PCA, global kNN model and frozen abnormal clusters from DS1 only.
pub fn cmd_train(cfg: &PipelineConfig) -> Result<TrainManifest> {
    cfg.validate()?;
    if cfg.records.ds1.is_empty() {
        return Err(Error::Config("DS1 record list is empty".into()));
    }
    let (ingest, ingest_sha) = load_ingest(cfg)?;
    let rows: Vec<RawSample> = read_split(cfg, &ingest, &cfg.records.ds1, Split::Train)?.into_iter().flatten().collect();
    if rows.is_empty() {
        return Err(Error::InvalidRecord("DS1 has no labelled segments".into()));
    }
    let tagged: Vec<(Split, &[f64])> = rows.iter().map(|r| (Split::Train, r.features.as_slice())).collect();
    let pca = fit_pca_tagged(&tagged, cfg.pca_dim)?;
    let points: Vec<Vec<f64>> = rows.iter().map(|r| pca.apply(&r.features)).collect();
    let labels: Vec<Class> = rows.iter().map(|r| r.label).collect();
    let clusters = AbnormalClusters::from_labelled(&points, &labels)?;
    if clusters.is_empty() {
        return Err(Error::InvalidRecord("DS1 has no abnormal segments".into()));
    }
    let model = GlobalModel::new(points, labels.clone(), cfg.k)?;
    let mut segments = ClassCounts::default();
    labels.iter().for_each(|&l| segments.add(l));

    let dir = cfg.train_dir();
    let mut artifacts = vec![];
    for (file, sha) in [
        ("pca.json", write_json(&dir.join("pca.json"), &pca)?),
        ("global_model.json", write_json(&dir.join("global_model.json"), &model)?),
        ("clusters.json", write_json(&dir.join("clusters.json"), &clusters)?),
    ] {
        artifacts.push(ArtifactHash { file: file.into(), sha256: sha });
    }
    let manifest = TrainManifest {
        version: MANIFEST_VERSION,
        ingest_manifest_sha256: ingest_sha,
        ds1: cfg.records.ds1.clone(),
        k: cfg.k,
        pca_dim: cfg.pca_dim,
        segments,
        artifacts,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

pub fn load_trained(cfg: &PipelineConfig) -> Result<TrainedModel> {
    let (_, ingest_sha) = load_ingest(cfg)?;
    let dir = cfg.train_dir();
    let path = dir.join("manifest.json");
    let m: TrainManifest = read_json(&path)?;
    if m.ingest_manifest_sha256 != ingest_sha || m.ds1 != cfg.records.ds1 || m.k != cfg.k || m.pca_dim != cfg.pca_dim {
        return Err(Error::StaleCache(format!(
            "{} does not match the current ingest cache or settings; re-run `train`",
            path.display()
        )));
    }
    let stale = |e: Error| match e {
        Error::StaleCache(msg) => Error::StaleCache(format!("{msg}; re-run `train`")),
        e => e,
    };
    Ok(TrainedModel {
        pca: read_verified(&dir, &m.artifacts, "pca.json").map_err(stale)?,
        model: read_verified(&dir, &m.artifacts, "global_model.json").map_err(stale)?,
        clusters: read_verified(&dir, &m.artifacts, "clusters.json").map_err(stale)?,
        manifest_sha256: sha256_file(&path)?,
    })
}

/// Points of the N, V, S, F training clusters (absent classes give empty slices).
fn training_clusters(t: &TrainedModel) -> Vec<Vec<&[f64]>> {
    Class::ALL
        .iter()
        .map(|&c| {
            t.model.points.iter().zip(&t.model.labels).filter(|(_, &l)| l == c).map(|(p, _)| p.as_slice()).collect()
        })
        .collect()
}

/// Deterministic subsample of at most `max` points, evenly strided.
fn stride<'a>(pts: &[&'a [f64]], max: usize) -> Vec<&'a [f64]> {
    if pts.len() <= max {
        return pts.to_vec();
    }
    (0..max).map(|i| pts[i * pts.len() / max]).collect()
}

fn objectives_of(clusters: &[Vec<Vec<f64>>]) -> ObjectivePair {
    let centroids: Vec<Vec<f64>> = clusters.iter().filter_map(|c| mean(c)).collect();
    let refs: Vec<&[Vec<f64>]> = clusters.iter().filter(|c| !c.is_empty()).map(|c| c.as_slice()).collect();
    ObjectivePair { o1: objective_symmetry(&centroids[0], &centroids[1..]), o2: objective_separability(&refs) }
}

/// Fits the configured transform on DS1 clusters and writes it with diagnostics.
pub fn cmd_transform_fit(cfg: &PipelineConfig) -> Result<TransformDiagnostics> {
    cfg.validate()?;
    let trained = load_trained(cfg)?;
    let dir = cfg.transform_dir();
    let clusters = training_clusters(&trained);
    if clusters[0].len() < 2 {
        return Err(Error::DegenerateGeometry("training set needs at least two normal segments".into()));
    }
    let max = cfg.mopso.max_cluster_points;
    let sampled: Vec<Vec<&[f64]>> = clusters.iter().map(|c| stride(c, max)).collect();
    let owned = |f: &dyn Fn(&[f64]) -> Result<Vec<f64>>| -> Result<Vec<Vec<Vec<f64>>>> {
        sampled.iter().map(|c| c.iter().map(|p| f(p)).collect()).collect()
    };
    let before = objectives_of(&owned(&|p| Ok(p.to_vec()))?);
    let mode = cfg.transform.mode;
    let mut extra = vec![];
    let (artifact, diagnostics) = match mode {
        TransformMode::None => (TransformArtifact::None, TransformDiagnostics {
            mode,
            before,
            after: before,
            orthogonality: None,
            front_size: None,
            linear_front_size: None,
        }),
        TransformMode::DeterministicLinear | TransformMode::DeterministicLogit => {
            let tc = cfg.transform.deterministic().expect("deterministic mode");
            let centroid = trained.normal_centroid()?;
            let t = SpatialTransform::build(&centroid, &trained.clusters.centroid_pairs(), &tc).map_err(|e| match e {
                Error::DegenerateGeometry(m) => Error::DegenerateGeometry(format!(
                    "{m}; the abnormal centroids are (nearly) collinear around the normal centroid, try another DS1 split or transform mode none"
                )),
                e => e,
            })?;
            let report = orthogonality_report(&t)?;
            let after = objectives_of(&owned(&|p| t.apply(p))?);
            (
                TransformArtifact::Deterministic { anchor: cfg.transform.anchor, config: tc, transform: Box::new(t) },
                TransformDiagnostics { mode, before, after, orthogonality: Some(report), front_size: None, linear_front_size: None },
            )
        }
        TransformMode::Mopso => {
            let dim = cfg.pca_dim;
            let params = cfg.mopso.params(cfg.seed);
            let refs: Vec<&[&[f64]]> = clusters.iter().filter(|c| !c.is_empty()).map(|c| c.as_slice()).collect();
            let run = |basis: &BasisSet, seeds: &[Vec<f64>]| -> Result<ParetoArchive<f64>> {
                let stats = ClusterStats::new(basis, &refs, params.max_cluster_points, params.seed);
                mopso_observed(&stats, basis, &params, seeds, &mut |_, _| {})
            };
            let basis = cfg.mopso.basis_set(dim);
            // the linear front is searched first so it can warm-start the configured basis
            let linear = run(&BasisSet::Linear { dim }, &[])?;
            let seeds: Vec<Vec<f64>> = if cfg.mopso.warm_start {
                linear.entries.iter().filter_map(|e| basis.embed_linear(&e.w)).collect()
            } else {
                vec![]
            };
            let archive = run(&basis, &seeds)?;
            let pick = match cfg.mopso.beta {
                Some(b) => archive.select_beta(b),
                None => archive.knee(),
            }
            .ok_or_else(|| Error::Numeric("empty Pareto archive".into()))?
            .clone();
            let mut csv = vec![];
            write_archive_csv(&mut csv, &archive)?;
            write_atomic(&dir.join("archive.csv"), &csv)?;
            let mut csv = vec![];
            write_archive_csv(&mut csv, &linear)?;
            write_atomic(&dir.join("archive_linear.csv"), &csv)?;
            let front = |a: &ParetoArchive<f64>| a.entries.iter().map(|e| (e.o1, e.o2)).collect::<Vec<_>>();
            write_atomic_with(&dir.join("pareto.svg"), |tmp| {
                write_pareto_svg(tmp, &[("polynomial", front(&archive)), ("linear", front(&linear))])
            })?;
            extra.extend(["archive.csv", "archive_linear.csv", "pareto.svg"]);
            (
                TransformArtifact::Mopso {
                    transform: PolynomialTransform { basis, weights: pick.w.clone() },
                    o1: pick.o1,
                    o2: pick.o2,
                },
                TransformDiagnostics {
                    mode,
                    before,
                    after: ObjectivePair { o1: pick.o1, o2: pick.o2 },
                    orthogonality: None,
                    front_size: Some(archive.entries.len()),
                    linear_front_size: Some(linear.entries.len()),
                },
            )
        }
    };
    let mut artifacts = vec![
        ArtifactHash { file: "transform.json".into(), sha256: write_json(&dir.join("transform.json"), &artifact)? },
        ArtifactHash { file: "diagnostics.json".into(), sha256: write_json(&dir.join("diagnostics.json"), &diagnostics)? },
    ];
    for f in extra {
        artifacts.push(ArtifactHash { file: f.into(), sha256: sha256_file(&dir.join(f))? });
    }
    let manifest = TransformManifest {
        version: MANIFEST_VERSION,
        train_manifest_sha256: trained.manifest_sha256.clone(),
        mode,
        artifacts,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(diagnostics)
}

pub fn load_transform(cfg: &PipelineConfig, trained: &TrainedModel) -> Result<TransformArtifact> {
    let dir = cfg.transform_dir();
    let path = dir.join("manifest.json");
    let m: TransformManifest = read_json(&path)?;
    if m.train_manifest_sha256 != trained.manifest_sha256 {
        return Err(Error::StaleCache(format!("{} predates the current model; re-run `transform-fit`", path.display())));
    }
    if m.mode != cfg.transform.mode {
        return Err(Error::StaleCache(format!(
            "transform was fitted in mode {} but mode {} is configured; re-run `transform-fit`",
            m.mode, cfg.transform.mode
        )));
    }
    read_verified(&dir, &m.artifacts, "transform.json").map_err(|e| match e {
        Error::StaleCache(msg) => Error::StaleCache(format!("{msg}; re-run `transform-fit`")),
        e => e,
    })
}

/// Deviation space for the configured mode and anchor.
pub fn deviation_space(cfg: &PipelineConfig, artifact: TransformArtifact) -> DeviationSpace<f64> {
    match artifact {
        TransformArtifact::None => DeviationSpace::Identity,
        TransformArtifact::Deterministic { config, transform, .. } => match cfg.transform.anchor {
            Anchor::Personal => DeviationSpace::Personal(config),
            Anchor::Global => DeviationSpace::Fixed(*transform),
        },
        TransformArtifact::Mopso { transform, .. } => DeviationSpace::Polynomial(transform),
    }
}

/// Everything needed to run the streams of the test records.
pub struct StreamInputs {
    pub trained: TrainedModel,
    pub space: DeviationSpace<f64>,
    pub streams: Vec<(String, Vec<StreamSample<f64>>)>,
}

pub fn load_stream_inputs(cfg: &PipelineConfig) -> Result<StreamInputs> {
    cfg.validate()?;
    if cfg.records.ds2.is_empty() {
        return Err(Error::Config("DS2 record list is empty".into()));
    }
    let trained = load_trained(cfg)?;
    let space = deviation_space(cfg, load_transform(cfg, &trained)?);
    let (ingest, _) = load_ingest(cfg)?;
    let rows = read_split(cfg, &ingest, &cfg.records.ds2, Split::Test)?;
    let streams = cfg
        .records
        .ds2
        .iter()
        .zip(rows)
        .map(|(name, rows)| {
            let s = rows
                .iter()
                .map(|r| StreamSample {
                    x: trained.pca.apply(&r.features),
                    time_index: r.segment_index,
                    timestamp_s: r.timestamp_s,
                    truth: Some(r.label),
                })
                .collect();
            (name.clone(), s)
        })
        .collect();
    Ok(StreamInputs { trained, space, streams })
}

/// Both classifier stages over every test record, in parallel across records.
pub fn run_streams(inputs: &StreamInputs, personal: &PersonalConfig) -> Result<Vec<RecordOutcome>> {
    inputs
        .streams
        .par_iter()
        .map(|(name, samples)| {
            match process_stream(name, samples, &inputs.trained.model, &inputs.trained.clusters, &inputs.space, personal) {
                Ok(out) => {
                    if out.transform_fallbacks > 0 {
                        log::warn!("{name}: {} untransformed fallback(s)", out.transform_fallbacks);
                    }
                    Ok(RecordOutcome::Evaluated { record: name.clone(), alarms: out.alarms })
                }
                Err(Error::NotInitialized(reason)) => {
                    log::warn!("{name} skipped: {reason}");
                    Ok(RecordOutcome::Skipped { record: name.clone(), reason })
                }
                Err(e) => Err(e),
            }
        })
        .collect()
}

fn write_alarm_files(dir: &Path, outcomes: &[RecordOutcome]) -> Result<Vec<PathBuf>> {
    let alarms: Vec<AlarmLabel> = outcomes
        .iter()
        .flat_map(|o| match o {
            RecordOutcome::Evaluated { alarms, .. } => alarms.clone(),
            RecordOutcome::Skipped { .. } => vec![],
        })
        .collect();
    let csv = dir.join("alarms.csv");
    write_atomic_with(&csv, |tmp| write_alarms_csv(File::create(tmp).map_err(|e| Error::io(tmp, e))?, &alarms))?;
    let jsonl = dir.join("alarms.jsonl");
    let mut buf = vec![];
    write_alarms_jsonl(&mut buf, &alarms)?;
    write_atomic(&jsonl, &buf)?;
    Ok(vec![csv, jsonl])
}

/// Alarm stream for the test records at the configured alpha.
pub fn cmd_classify(cfg: &PipelineConfig) -> Result<Vec<RecordOutcome>> {
    let inputs = load_stream_inputs(cfg)?;
    let outcomes = run_streams(&inputs, &cfg.personal)?;
    write_alarm_files(&cfg.classify_dir(), &outcomes)?;
    Ok(outcomes)
}

/// Full evaluation with the alpha sweep; writes the report files and the alarm stream.
pub fn cmd_evaluate(cfg: &PipelineConfig) -> Result<EvaluationReport> {
    let inputs = load_stream_inputs(cfg)?;
    let window = cfg.evaluation.window;
    let main = run_streams(&inputs, &cfg.personal)?;
    let summary = summarize(&main, window)?;
    let mut alpha_sweep = vec![];
    for &alpha in &cfg.evaluation.alpha_sweep {
        let point = if alpha == cfg.personal.alpha {
            AlphaPoint::from_summary(alpha, &summary)
        } else {
            let p = PersonalConfig { alpha, ..cfg.personal };
            AlphaPoint::from_summary(alpha, &summarize(&run_streams(&inputs, &p)?, window)?)
        };
        alpha_sweep.push(point);
    }
    let report = EvaluationReport {
        version: REPORT_VERSION,
        settings: ReportSettings {
            transform_mode: cfg.transform.mode.to_string(),
            alpha: cfg.personal.alpha,
            window,
            k: cfg.k,
            seed: cfg.seed,
            excluded_initial_s: cfg.personal.init_s,
        },
        summary,
        alpha_sweep,
    };
    let dir = cfg.evaluate_dir();
    emit_report(&report, &dir)?;
    write_alarm_files(&dir, &main)?;
    Ok(report)
}
