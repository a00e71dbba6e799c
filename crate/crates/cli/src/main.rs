use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use strainpatch::benchmark::{elevation_series, kinematics_fatigue_detect, semg_fatigue_detect, EmgConfig, KinConfig};
use strainpatch::eval::{evaluate_manifests, read_diff_table};
use strainpatch::posthoc::posthoc_detect_normalized;
use strainpatch::{
    detect_stream, generate_full_session, load_session, prepare_strain, summary_stats, write_report, EvalConfig,
    Method, PanTompkinsConfig, RealTimeConfig, ReportFormat, SynthSpec,
};

const AFTER_HELP: &str = "\
Exit status: 0 on success, 1 for usage errors, 2 for data errors.
Set RUST_LOG=info (or debug) for progress messages on stderr.";

#[derive(Parser)]
#[command(name = "strainpatch", version, about = "Fatigue detection for bicep curls from a strain patch", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic session (CSV streams plus manifest.json).
    Synth {
        /// JSON generator spec; omitted fields take their defaults.
        #[arg(long)]
        spec: PathBuf,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one detector on a session and print the result as JSON.
    Detect {
        #[arg(value_enum)]
        detector: Detector,
        /// Session manifest (JSON).
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        params: DetectorArgs,
    },
    /// Run every detector over a set of sessions and write a report.
    Evaluate {
        /// Glob matching manifest files, e.g. 'data/*/manifest.json'.
        #[arg(long)]
        manifests: String,
        /// Report path.
        #[arg(long)]
        out: PathBuf,
        /// Report format; values are rounded to 0.01 s, NA marks a missed detection.
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        params: DetectorArgs,
    },
    /// Aggregate per-subject time differences (subject,t_s,dt_kin,dt_semg,dt_rt,dt_ph).
    Table2 {
        /// CSV of per-subject differences; NA marks a missed detection.
        #[arg(long)]
        rows: PathBuf,
        /// Print JSON instead of a text table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Detector {
    Realtime,
    Posthoc,
    Semg,
    Kinematics,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct DetectorArgs {
    /// Strain samples per real-time batch, about one curl at 25 Hz (published setting)
    #[arg(long, default_value_t = RealTimeConfig::default().batch_size)]
    batch_size: usize,
    /// Amplitude ratio over the running minimum that flags a batch (published threshold)
    #[arg(long, default_value_t = RealTimeConfig::default().tau)]
    tau: f64,
    /// Flagged batches in a row needed to declare fatigue (published setting)
    #[arg(long, default_value_t = RealTimeConfig::default().consecutive_required)]
    consecutive: u32,
    /// Extremum swing floor as a fraction of the detrended batch range (chosen here; scale-free)
    #[arg(long, default_value_t = RealTimeConfig::default().prominence)]
    prominence: f64,
    /// Extremum swing floor in multiples of the batch noise level (chosen here)
    #[arg(long, default_value_t = RealTimeConfig::default().noise_factor)]
    noise_factor: f64,
    /// Envelope peaks kept by the post hoc pass (published setting)
    #[arg(long, default_value_t = PanTompkinsConfig::default().top_k)]
    top_k: usize,
    /// Envelope peaks closer than this many seconds merge (published setting)
    #[arg(long, default_value_t = PanTompkinsConfig::default().min_separation)]
    min_sep: f64,
    /// Peak clusters further apart than this many seconds are dropped (published setting)
    #[arg(long, default_value_t = PanTompkinsConfig::default().max_separation)]
    max_sep: f64,
}

impl DetectorArgs {
    fn realtime(&self) -> RealTimeConfig {
        RealTimeConfig {
            batch_size: self.batch_size,
            tau: self.tau,
            consecutive_required: self.consecutive,
            prominence: self.prominence,
            noise_factor: self.noise_factor,
        }
    }

    fn posthoc(&self) -> PanTompkinsConfig {
        PanTompkinsConfig {
            top_k: self.top_k,
            min_separation: self.min_sep,
            max_separation: self.max_sep,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        self.realtime().validate().map_err(usage)?;
        self.posthoc().validate().map_err(usage)?;
        Ok(())
    }
}

/// Marks an error as the caller's fault (exit status 1).
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(e: impl fmt::Display) -> anyhow::Error {
    UsageError(e.to_string()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    match err.downcast_ref::<strainpatch::Error>() {
        Some(e) if !e.is_data_error() => 1,
        _ => 2,
    }
}

// Error chain joined with ": ", skipping causes a parent already printed.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if out.contains(&msg) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&msg);
    }
    out
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth { spec, out } => synth(&spec, &out),
        Command::Detect {
            detector,
            manifest,
            params,
        } => {
            params.validate()?;
            let result = detect(detector, &manifest, &params)?;
            println!("{}", serde_json::to_string_pretty(&result)?);
            Ok(())
        }
        Command::Evaluate {
            manifests,
            out,
            format,
            params,
        } => {
            params.validate()?;
            evaluate(&manifests, &out, format, &params)
        }
        Command::Table2 { rows, json } => table2(&rows, json),
    }
}

fn synth(spec_path: &Path, out: &Path) -> Result<()> {
    // The generator file is configuration, so any problem with it is a usage error.
    let text = fs::read_to_string(spec_path).map_err(|e| usage(format!("reading {}: {e}", spec_path.display())))?;
    let spec: SynthSpec =
        serde_json::from_str(&text).map_err(|e| usage(format!("parsing {}: {e}", spec_path.display())))?;
    spec.validate().map_err(usage)?;
    let manifest = generate_full_session(&spec, out)?;
    println!("{}", manifest.display());
    Ok(())
}

fn detect(detector: Detector, manifest: &Path, params: &DetectorArgs) -> Result<Value> {
    let session = load_session(manifest)?;
    let m = &session.manifest;
    let value = match detector {
        Detector::Realtime => {
            let norm = prepare_strain(&session.strain, m.static_interval, &Default::default())?;
            let out = detect_stream(&norm, &params.realtime())?;
            json!({
                "detector": "realtime",
                "subject": m.subject_id,
                "t_r": out.t_r,
                "fatigued": out.fatigued,
                "batches": out.reports,
            })
        }
        Detector::Posthoc => {
            let norm = prepare_strain(&session.strain, m.static_interval, &Default::default())?;
            let r = posthoc_detect_normalized(&norm, &params.realtime(), &params.posthoc())?;
            json!({
                "detector": "posthoc",
                "subject": m.subject_id,
                "t1": r.t1,
                "t2": r.t2,
                "t_p": r.t_p,
                "fatigued": r.fatigued,
            })
        }
        Detector::Semg => {
            let emg = session
                .semg
                .as_ref()
                .with_context(|| format!("{}: session has no sEMG stream", manifest.display()))?;
            let t_e = semg_fatigue_detect(emg, &EmgConfig::default(), m.baseline_interval)?;
            json!({
                "detector": "semg",
                "subject": m.subject_id,
                "t_e": t_e,
                "detected": t_e.is_some(),
            })
        }
        Detector::Kinematics => {
            let quats = session
                .shoulder_quats
                .as_ref()
                .with_context(|| format!("{}: session has no shoulder stream", manifest.display()))?;
            let cfg = KinConfig {
                baseline_interval: m.baseline_interval,
                ..Default::default()
            };
            let t_k = kinematics_fatigue_detect(&elevation_series(quats)?, &cfg)?;
            json!({
                "detector": "kinematics",
                "subject": m.subject_id,
                "t_k": t_k,
                "detected": t_k.is_some(),
            })
        }
    };
    Ok(value)
}

fn evaluate(pattern: &str, out: &Path, format: Format, params: &DetectorArgs) -> Result<()> {
    let mut paths: Vec<PathBuf> = glob::glob(pattern)
        .map_err(usage)?
        .collect::<Result<_, _>>()
        .context("expanding manifest glob")?;
    paths.sort();
    if paths.is_empty() {
        anyhow::bail!("no manifests match `{pattern}`");
    }
    log::info!("evaluating {} sessions", paths.len());
    let cfg = EvalConfig {
        realtime: params.realtime(),
        posthoc: params.posthoc(),
        ..Default::default()
    };
    let rows = evaluate_manifests(&paths, &cfg)?;
    let format = match format {
        Format::Csv => ReportFormat::Csv,
        Format::Json => ReportFormat::Json,
    };
    write_report(&rows, out, format)?;
    log::info!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

fn table2(path: &Path, as_json: bool) -> Result<()> {
    let rows = read_diff_table(path)?;
    let stats = summary_stats(&rows)?;
    if as_json {
        println!("{}", serde_json::to_string_pretty(&stats)?);
        return Ok(());
    }
    let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| format!("{v:.2}"));
    println!("subjects: {}", stats.n_subjects);
    println!(
        "{:<11} {:>5} {:>16} {:>16}",
        "method", "n", "avr1 mean (sd)", "avr2 mean (sd)"
    );
    for m in Method::ALL {
        let s = stats.method(m);
        println!(
            "{:<11} {:>5} {:>16} {:>16}",
            m.as_str(),
            s.n_detected,
            format!("{} ({})", fmt(Some(s.avr1_mean)), fmt(s.avr1_std)),
            format!("{} ({})", fmt(s.avr2_mean), fmt(s.avr2_std)),
        );
    }
    Ok(())
}
