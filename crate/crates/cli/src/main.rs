use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use prealarm::pipeline::{cmd_classify, cmd_evaluate, cmd_ingest, cmd_train, cmd_transform_fit, PipelineConfig, TransformMode};
use prealarm::synthetic::{write_cohort, CohortConfig};
use prealarm::{Error, Result};

/// Two-stage ECG abnormality classifier with personal early warnings.
#[derive(Parser, Debug)]
#[command(name = "prealarm", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory with the WFDB (or CSV) records.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Output root for all artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// none, deterministic-linear, deterministic-logit or mopso.
    #[arg(long, global = true)]
    transform_mode: Option<TransformMode>,
    /// Confirmation factor for the personal normal cluster.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Look-ahead of the windowed prediction table, in segments.
    #[arg(long, global = true)]
    window: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read records, extract segment features, write the feature cache.
    Ingest,
    /// Fit PCA and the global kNN model on the training split.
    Train,
    /// Fit the deviation-space transform selected by the transform mode.
    TransformFit,
    /// Stream the test split through both stages and write alarm labels.
    Classify,
    /// Classify, score and write the evaluation report.
    Evaluate,
    /// Write a synthetic WFDB cohort into the data directory, plus a config listing it.
    Synth {
        /// Records per split.
        #[arg(long, default_value_t = 12)]
        records: usize,
        /// Record length in seconds.
        #[arg(long, default_value_t = 900.0)]
        duration: f64,
    },
}

fn load_config(c: &Common) -> Result<PipelineConfig> {
    let mut cfg = match &c.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(d) = &c.data_dir {
        cfg.data_dir = d.clone();
    }
    if let Some(o) = &c.out {
        cfg.out_dir = o.clone();
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(m) = c.transform_mode {
        cfg.transform.mode = m;
    }
    if let Some(a) = c.alpha {
        cfg.personal.alpha = a;
    }
    if let Some(w) = c.window {
        cfg.evaluation.window = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(j) = cli.common.jobs {
        if j == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    }
    let mut cfg = load_config(&cli.common)?;
    match cli.command {
        Command::Ingest => {
            let m = cmd_ingest(&cfg)?;
            let t = &m.totals;
            println!("ingested {} records: N {} V {} S {} F {}", m.records.len(), t.N, t.V, t.S, t.F);
        }
        Command::Train => {
            let m = cmd_train(&cfg)?;
            let s = &m.segments;
            println!("trained on N {} V {} S {} F {} segments (k = {}, {} PCA dims)", s.N, s.V, s.S, s.F, m.k, m.pca_dim);
        }
        Command::TransformFit => {
            let d = cmd_transform_fit(&cfg)?;
            println!(
                "transform {}: o1 {:.4} -> {:.4}, o2 {:.4} -> {:.4}",
                cfg.transform.mode, d.before.o1, d.after.o1, d.before.o2, d.after.o2
            );
            if let Some(o) = d.orthogonality {
                println!("centroid residuals: pair {:.2e}, radius {:.2e}", o.max_pair_residual, o.max_radius_residual);
            }
        }
        Command::Classify => {
            let outcomes = cmd_classify(&cfg)?;
            println!("classified {} records into {}", outcomes.len(), cfg.classify_dir().display());
        }
        Command::Evaluate => {
            let r = cmd_evaluate(&cfg)?;
            for m in &r.summary.metrics {
                let f = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.2}"));
                println!(
                    "{}: final ACC {} SE {} SP {} | red ACC {} SE {} SP {}",
                    m.class,
                    f(m.final_.acc),
                    f(m.final_.se),
                    f(m.final_.sp),
                    f(m.red.acc),
                    f(m.red.se),
                    f(m.red.sp)
                );
            }
            println!("report written to {}", cfg.evaluate_dir().display());
        }
        Command::Synth { records, duration } => {
            let names = |p: &str| (0..records).map(|i| format!("{p}{i:02}")).collect::<Vec<String>>();
            cfg.records.ds1 = names("t");
            cfg.records.ds2 = names("e");
            let all: Vec<String> = cfg.records.ds1.iter().chain(&cfg.records.ds2).cloned().collect();
            let cohort = CohortConfig { duration_s: duration, ..Default::default() };
            write_cohort(&cfg.data_dir, &all, cfg.seed, &cohort)?;
            let path = cfg.data_dir.join("synthetic.toml");
            std::fs::write(&path, cfg.to_toml()).map_err(|e| Error::io(&path, e))?;
            info!("wrote {} records", all.len());
            println!("wrote {} records to {}; matching config in {}", all.len(), cfg.data_dir.display(), path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
