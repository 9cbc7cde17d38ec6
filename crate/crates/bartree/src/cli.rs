//! Command-line front end. Everything here is a thin wrapper: flags are
//! parsed, files are read, and the library does the rest.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bar::{parse_rational, BarParams};
use crate::bench::{run_bench, BenchConfig};
use crate::detect::{Action, ChangeReport, CompareMode};
use crate::fetch::HttpFetcher;
use crate::harvest::{fingerprint_page, Harvester};
use crate::lexer::TagClassConfig;
use crate::roi::RoiSpec;
use crate::store::{store_load, AttributeSpec, Registry, TargetConfig};

#[derive(Parser)]
#[command(
    name = "bartree",
    version,
    about = "Fingerprint the layout around a display region and notice when a page's template moves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Register a page: fetch it, fingerprint the region, store the record
    Init(InitArgs),
    /// Refetch a registered page and compare against the stored fingerprint
    Check(CheckArgs),
    /// Pull the labeled attributes out of a registered page
    Extract(ExtractArgs),
    /// Fingerprint a local file without touching any store
    Fingerprint(FingerprintArgs),
    /// Run the synthetic detection and timing benchmark
    Bench(BenchArgs),
}

#[derive(Args)]
struct InitArgs {
    /// Store file to create or extend
    #[arg(long)]
    store: PathBuf,
    /// Complete target configuration as a JSON file (alternative to the
    /// inline flags)
    #[arg(
        long,
        conflicts_with_all = ["target_id", "url", "roi_file", "attr", "occurrence", "mode", "interval", "ratio"]
    )]
    config: Option<PathBuf>,
    /// Identifier for the new target
    #[arg(long, required_unless_present = "config")]
    target_id: Option<String>,
    /// Page URL to fetch and fingerprint
    #[arg(long, required_unless_present = "config")]
    url: Option<String>,
    /// File holding the region-of-interest display text
    #[arg(long, required_unless_present = "config")]
    roi_file: Option<PathBuf>,
    /// Labeled fragment of the region, LABEL=TEXT (repeatable)
    #[arg(long = "attr", value_name = "LABEL=TEXT")]
    attr: Vec<String>,
    /// Which occurrence of the region to lock onto (0-based)
    #[arg(long)]
    occurrence: Option<usize>,
    /// Comparison mode: simple, full or full-delta
    #[arg(long, value_parser = parse_mode)]
    mode: Option<CompareMode>,
    /// Display interval I as a rational, e.g. 1 or 3/2
    #[arg(long)]
    interval: Option<String>,
    /// Per-depth inset r as a rational, e.g. 1/10
    #[arg(long)]
    ratio: Option<String>,
    /// Print the stored record as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    target_id: String,
    /// Override the stored comparison mode for this round
    #[arg(long, value_parser = parse_mode)]
    mode: Option<CompareMode>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    target_id: String,
    /// Extract from a local file instead of refetching the URL
    #[arg(long)]
    html: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct FingerprintArgs {
    /// Page to fingerprint
    #[arg(long)]
    html: PathBuf,
    /// File holding the region-of-interest display text
    #[arg(long)]
    roi_file: PathBuf,
    /// Which occurrence of the region to lock onto (0-based)
    #[arg(long)]
    occurrence: Option<usize>,
    /// Display interval I as a rational, e.g. 1 or 3/2
    #[arg(long)]
    interval: Option<String>,
    /// Per-depth inset r as a rational, e.g. 1/10
    #[arg(long)]
    ratio: Option<String>,
    /// Timestamp to embed (defaults to now); fixing it makes output
    /// byte-reproducible
    #[arg(long)]
    captured_at: Option<String>,
}

#[derive(Args)]
struct BenchArgs {
    /// Depth classes, comma separated
    #[arg(long, value_delimiter = ',', default_value = "5,10,15,20,25")]
    depths: Vec<usize>,
    /// Pages generated per class
    #[arg(long, default_value_t = 8)]
    pages: usize,
    /// Fraction of pages that receive one structural mutation
    #[arg(long, default_value_t = 0.5)]
    mutation_rate: f64,
    /// Comparison modes to exercise, comma separated
    #[arg(long, value_delimiter = ',', default_value = "simple,full,full-delta", value_parser = parse_mode)]
    modes: Vec<CompareMode>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Use the deliberate equal-total collision corpus
    #[arg(long)]
    collisions: bool,
    /// Timed repetitions per page (the median is kept)
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Emit the report as JSON instead of a table
    #[arg(long)]
    json: bool,
}

/// Parses and runs one invocation; returns the process exit code.
/// 0 = success, 1 = operational failure, 2 = usage error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let _ = env_logger::Builder::from_default_env().format_timestamp(None).try_init();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<(), String> {
    match command {
        Command::Init(a) => cmd_init(a),
        Command::Check(a) => cmd_check(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Fingerprint(a) => cmd_fingerprint(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn parse_mode(s: &str) -> Result<CompareMode, String> {
    s.parse()
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("read {}: {e}", path.display()))
}

fn load_or_new(path: &Path) -> Result<Registry, String> {
    if path.exists() {
        store_load(path).map_err(|e| e.to_string())
    } else {
        Ok(Registry::default())
    }
}

fn parse_attrs(raw: &[String]) -> Result<Vec<AttributeSpec>, String> {
    raw.iter()
        .map(|item| {
            let (label, text) = item
                .split_once('=')
                .ok_or_else(|| format!("attribute {item:?} is not LABEL=TEXT"))?;
            if label.is_empty() {
                return Err(format!("attribute {item:?} has an empty label"));
            }
            Ok(AttributeSpec { label: label.to_string(), text: text.to_string() })
        })
        .collect()
}

/// Both flags become fixed bar parameters; a bare `--ratio` assumes the
/// unit interval. The reverse is refused because the sensible default
/// ratio depends on a depth that has not been measured yet.
fn parse_params(interval: Option<&str>, ratio: Option<&str>) -> Result<Option<BarParams>, String> {
    match (interval, ratio) {
        (None, None) => Ok(None),
        (interval, Some(ratio)) => {
            let i = parse_rational(interval.unwrap_or("1")).map_err(|e| e.to_string())?;
            let r = parse_rational(ratio).map_err(|e| e.to_string())?;
            Ok(Some(BarParams::new(i, r).map_err(|e| e.to_string())?))
        }
        (Some(_), None) => {
            Err("--ratio is required when --interval is given; the default ratio depends on the page depth".into())
        }
    }
}

/// Serde's external name for a unit enum variant ("re_extract_pattern"
/// and friends); used for the human-readable output lines.
fn serde_name<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => "?".to_string(),
    }
}

fn cmd_init(args: InitArgs) -> Result<(), String> {
    let mut config = match &args.config {
        Some(path) => serde_json::from_str::<TargetConfig>(&read(path)?)
            .map_err(|e| format!("parse {}: {e}", path.display()))?,
        None => {
            let mut c = TargetConfig::new(
                args.target_id.as_deref().expect("required unless --config"),
                args.url.as_deref().expect("required unless --config"),
                "",
            );
            c.roi_file = args.roi_file.clone();
            c.attributes = parse_attrs(&args.attr)?;
            c.occurrence = args.occurrence;
            if let Some(mode) = args.mode {
                c.mode = mode;
            }
            c.params = parse_params(args.interval.as_deref(), args.ratio.as_deref())?;
            c
        }
    };
    config.load_roi_text().map_err(|e| format!("read region text: {e}"))?;

    let registry = load_or_new(&args.store)?;
    let mut harvester =
        Harvester::new(registry, HttpFetcher::from_env()).with_store_path(args.store.clone());
    let record = harvester.register_target(config).map_err(|e| e.to_string())?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(record).map_err(|e| e.to_string())?);
    } else {
        let fp = &record.fingerprint;
        println!(
            "registered {}: d_max={} A_total={} sigma=({}, {}) delta={}",
            record.config.target_id, fp.d_max, fp.a_total, fp.sigma_upper, fp.sigma_lower, fp.delta
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    report: &'a ChangeReport,
    action: Action,
}

fn cmd_check(args: CheckArgs) -> Result<(), String> {
    let registry = store_load(&args.store).map_err(|e| e.to_string())?;
    let mut harvester =
        Harvester::new(registry, HttpFetcher::from_env()).with_store_path(args.store.clone());
    let (report, action) =
        harvester.check_target(&args.target_id, args.mode).map_err(|e| e.to_string())?;
    if args.json {
        let out = CheckOutput { report: &report, action };
        println!("{}", serde_json::to_string_pretty(&out).map_err(|e| e.to_string())?);
    } else {
        if !report.evaluated {
            println!("not evaluated: the page could not be measured this round");
        } else if report.changed {
            let moved: Vec<&str> = report.differing.iter().map(|s| s.as_str()).collect();
            println!("change detected in: {}", moved.join(", "));
            if report.mode == CompareMode::FullWithDelta {
                println!("delta case: {}", serde_name(&report.delta_case));
            }
        } else {
            println!("no change");
        }
        println!("action: {}", serde_name(&action));
    }
    Ok(())
}

fn cmd_extract(args: ExtractArgs) -> Result<(), String> {
    let registry = store_load(&args.store).map_err(|e| e.to_string())?;
    let harvester = Harvester::new(registry, HttpFetcher::from_env());
    let body = match &args.html {
        Some(path) => Some(read(path)?),
        None => None,
    };
    let record =
        harvester.extract_record(&args.target_id, body.as_deref()).map_err(|e| e.to_string())?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&record).map_err(|e| e.to_string())?);
    } else {
        for (label, text) in &record.fields {
            println!("{label}: {text}");
        }
        for warning in &record.warnings {
            eprintln!("warning: {warning}");
        }
    }
    Ok(())
}

fn cmd_fingerprint(args: FingerprintArgs) -> Result<(), String> {
    let html = read(&args.html)?;
    let roi = read(&args.roi_file)?;
    let spec = RoiSpec::new(roi, Vec::new(), args.occurrence).map_err(|e| e.to_string())?;
    let params = parse_params(args.interval.as_deref(), args.ratio.as_deref())?;
    let captured_at = args
        .captured_at
        .clone()
        .unwrap_or_else(|| Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true));
    let fp = fingerprint_page(&html, &spec, &TagClassConfig::default(), params.as_ref(), &captured_at)
        .map_err(|e| e.to_string())?;
    println!("{}", serde_json::to_string_pretty(&fp).map_err(|e| e.to_string())?);
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), String> {
    let config = BenchConfig {
        depth_classes: args.depths,
        pages_per_class: args.pages,
        mutation_rate: args.mutation_rate,
        modes: args.modes,
        seed: args.seed,
        collisions: args.collisions,
        timing_reps: args.reps,
    };
    let report = run_bench(&config).map_err(|e| e.to_string())?;
    if args.json {
        println!("{}", serde_json::to_string(&report).map_err(|e| e.to_string())?);
    } else {
        print!("{}", report.to_table());
    }
    Ok(())
}
