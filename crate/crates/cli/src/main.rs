//! `lppl`: fit, scan, forecast, synthesize and evaluate LPPL models from
//! the command line. Every file-producing run writes a manifest recording
//! the resolved configuration and input checksums, so outputs can be
//! reproduced bit-exactly.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use lppl::fitting::{fit, FitConfig, FitResultDoc};
use lppl::forecast::crash_window;
use lppl::model::{evaluate, residuals, ParamsDoc, SCHEMA_VERSION};
use lppl::series::{log_transform, parse_csv, serialize_csv, slice_window, PriceColumn, PriceSeries, Scale};
use lppl::synth::{generate, SynthSpec};
use lppl::timebase::{date_to_decimal_year, CalendarDate, TimePoint};
use lppl::windows::{scan_windows, DEFAULT_STABILITY_THRESHOLD_YEARS};

const EXIT_INPUT: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUN: u8 = 3;

#[derive(Parser)]
#[command(name = "lppl", version, about = "Log-periodic power-law fitting toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit the model to a price CSV and emit a result document plus plot data.
    Fit(FitArgs),
    /// Refit over several window starts and report tc stability.
    Scan(ScanArgs),
    /// Turn a fit document into a calendar crash-window forecast.
    Forecast(ForecastArgs),
    /// Generate a synthetic series from a spec file.
    Synth(SynthArgs),
    /// Evaluate a parameter document on a dense time grid.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ColumnArg {
    Close,
    Adjclose,
}

impl From<ColumnArg> for PriceColumn {
    fn from(c: ColumnArg) -> Self {
        match c {
            ColumnArg::Close => PriceColumn::Close,
            ColumnArg::Adjclose => PriceColumn::AdjustedClose,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Raw,
    Log,
}

#[derive(Args)]
struct CommonIo {
    /// Input file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output file; stdout when omitted (and no side files are written).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitFlags {
    /// JSON fit configuration; omitted fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// First date of the fitted window (ISO), default: first observation.
    #[arg(long)]
    window_start: Option<String>,
    /// Last date of the fitted window (ISO), default: last observation.
    #[arg(long)]
    window_end: Option<String>,
    /// Which price column to read.
    #[arg(long, value_enum, default_value = "close")]
    column: ColumnArg,
    /// Fit raw prices or their natural log.
    #[arg(long, value_enum)]
    scale: Option<ScaleArg>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    io: CommonIo,
    #[command(flatten)]
    flags: FitFlags,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    io: CommonIo,
    #[command(flatten)]
    flags: FitFlags,
    /// Window start dates (ISO), repeatable.
    #[arg(long = "start", required = true)]
    starts: Vec<String>,
    /// Common window end date (ISO).
    #[arg(long)]
    end: String,
    /// tc interquartile range (years) below which the scan counts as stable.
    #[arg(long, default_value_t = DEFAULT_STABILITY_THRESHOLD_YEARS)]
    stability_threshold: f64,
}

#[derive(Args)]
struct ForecastArgs {
    #[command(flatten)]
    io: CommonIo,
}

#[derive(Args)]
struct SynthArgs {
    /// JSON synthesis spec.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Override the spec's random seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    /// Fit result or parameter document (JSON).
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// First evaluation date (ISO).
    #[arg(long)]
    from: String,
    /// Last evaluation date (ISO); must precede the critical time.
    #[arg(long)]
    to: String,
    /// Number of grid points.
    #[arg(long, default_value_t = 500)]
    points: usize,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    msg: String,
}

type CmdResult<T> = Result<T, Failure>;

fn from_core(e: lppl::Error) -> Failure {
    use lppl::Error as E;
    let code = match e {
        E::Config(_) => EXIT_CONFIG,
        E::FitFailed(_)
        | E::ScanFailed(_)
        | E::RefinementFailed(_)
        | E::NotConverged(_)
        | E::IndeterminateRegime(_)
        | E::Generation(_) => EXIT_RUN,
        _ => EXIT_INPUT,
    };
    Failure { code, msg: e.to_string() }
}

fn input_err(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, msg: msg.into() }
}

fn config_err(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_CONFIG, msg: msg.into() }
}

// ---------------------------------------------------------------------------
// manifest + atomic output plumbing

#[derive(Serialize)]
struct InputRecord {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    schema_version: u32,
    tool: &'static str,
    tool_version: &'static str,
    command: Vec<String>,
    resolved_config: serde_json::Value,
    inputs: Vec<InputRecord>,
    outputs: Vec<String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects output files and finishes with the run manifest; every file is
/// written atomically (temp file in the target directory, then rename).
struct OutputSet {
    manifest: RunManifest,
}

impl OutputSet {
    fn new(config: serde_json::Value) -> Self {
        OutputSet {
            manifest: RunManifest {
                schema_version: SCHEMA_VERSION,
                tool: "lppl",
                tool_version: env!("CARGO_PKG_VERSION"),
                command: std::env::args().collect(),
                resolved_config: config,
                inputs: Vec::new(),
                outputs: Vec::new(),
            },
        }
    }

    fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        self.manifest.inputs.push(InputRecord {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
    }

    fn write(&mut self, path: &Path, contents: &str) -> CmdResult<()> {
        atomic_write(path, contents)?;
        self.manifest.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Write `<stem>.manifest.json` next to the primary output.
    fn finish(self, primary: &Path) -> CmdResult<()> {
        let path = sibling(primary, "manifest.json");
        let json = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| input_err(format!("cannot serialize manifest: {e}")))?;
        atomic_write(&path, &json)
    }
}

fn atomic_write(path: &Path, contents: &str) -> CmdResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| input_err(format!("cannot create temp file in {}: {e}", dir.display())))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| input_err(format!("cannot write {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| input_err(format!("cannot rename into {}: {e}", path.display())))?;
    Ok(())
}

/// `out.json` -> `out.<suffix>` next to it.
fn sibling(primary: &Path, suffix: &str) -> PathBuf {
    primary.with_extension(suffix)
}

// ---------------------------------------------------------------------------
// shared input helpers

fn read_bytes(path: &Path) -> CmdResult<Vec<u8>> {
    fs::read(path).map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))
}

fn load_config(path: Option<&Path>) -> CmdResult<FitConfig> {
    match path {
        None => Ok(FitConfig::default()),
        Some(p) => {
            let bytes = read_bytes(p)?;
            serde_json::from_slice(&bytes)
                .map_err(|e| config_err(format!("invalid config {}: {e}", p.display())))
        }
    }
}

fn parse_date(text: &str) -> CmdResult<TimePoint> {
    let d = CalendarDate::parse_iso(text).map_err(from_core)?;
    date_to_decimal_year(d).map_err(from_core)
}

/// Parse the input CSV, slice the requested window and apply the scale.
fn prepare_series(
    input: &Path,
    flags: &FitFlags,
    cfg: &mut FitConfig,
    raw_bytes: &[u8],
) -> CmdResult<PriceSeries> {
    if let Some(scale) = flags.scale {
        cfg.scale = match scale {
            ScaleArg::Raw => Scale::Raw,
            ScaleArg::Log => Scale::Log,
        };
    }
    let series = parse_csv(raw_bytes, PriceColumn::from(flags.column))
        .map_err(|e| input_err(format!("{}: {e}", input.display())))?;
    let start = match &flags.window_start {
        Some(d) => parse_date(d)?,
        None => series.first_time(),
    };
    let end = match &flags.window_end {
        Some(d) => parse_date(d)?,
        None => series.last_time(),
    };
    let window = slice_window(&series, start, end, cfg.min_points).map_err(from_core)?;
    match cfg.scale {
        Scale::Raw => Ok(window),
        Scale::Log => log_transform(&window).map_err(from_core),
    }
}

// ---------------------------------------------------------------------------
// commands

fn residual_csv(doc: &FitResultDoc, s: &PriceSeries) -> CmdResult<String> {
    let res = residuals(&doc.params.linearized, s).map_err(from_core)?;
    let mut out = String::from("t,price,model,residual\n");
    for (&(t, p), r) in s.points().iter().zip(&res) {
        out.push_str(&format!("{},{},{},{}\n", t, p, p - r, r));
    }
    Ok(out)
}

/// Dense model curve over the window for replotting the fitted line.
fn curve_csv(doc: &FitResultDoc, n: usize) -> CmdResult<String> {
    let (a, b) = (doc.window_start.value(), doc.window_end.value());
    let mut out = String::from("t,model\n");
    for k in 0..n {
        let t = TimePoint::new(a + (b - a) * k as f64 / (n - 1) as f64).map_err(from_core)?;
        let m = evaluate(&doc.params.linearized, t).map_err(from_core)?;
        out.push_str(&format!("{t},{m}\n"));
    }
    Ok(out)
}

fn cmd_fit(args: &FitArgs) -> CmdResult<()> {
    let mut cfg = load_config(args.flags.config.as_deref())?;
    let input_bytes = read_bytes(&args.io.input)?;
    let config_bytes = args.flags.config.as_deref().map(read_bytes).transpose()?;
    let series = prepare_series(&args.io.input, &args.flags, &mut cfg, &input_bytes)?;

    let result = fit(&series, &cfg).map_err(from_core)?;
    let doc = result.to_doc();
    let json = serde_json::to_string_pretty(&doc)
        .map_err(|e| input_err(format!("cannot serialize result: {e}")))?;

    match &args.io.out {
        None => println!("{json}"),
        Some(out) => {
            let cfg_value = serde_json::to_value(&cfg)
                .map_err(|e| config_err(format!("cannot serialize config: {e}")))?;
            let mut set = OutputSet::new(cfg_value);
            set.record_input(&args.io.input, &input_bytes);
            if let (Some(p), Some(b)) = (args.flags.config.as_deref(), &config_bytes) {
                set.record_input(p, b);
            }
            set.write(out, &json)?;
            set.write(&sibling(out, "residuals.csv"), &residual_csv(&doc, &series)?)?;
            let n = series.len().max(500);
            set.write(&sibling(out, "curve.csv"), &curve_csv(&doc, n)?)?;
            set.finish(out)?;
        }
    }
    Ok(())
}

fn cmd_scan(args: &ScanArgs) -> CmdResult<()> {
    let mut cfg = load_config(args.flags.config.as_deref())?;
    let input_bytes = read_bytes(&args.io.input)?;
    let config_bytes = args.flags.config.as_deref().map(read_bytes).transpose()?;

    if let Some(scale) = args.flags.scale {
        cfg.scale = match scale {
            ScaleArg::Raw => Scale::Raw,
            ScaleArg::Log => Scale::Log,
        };
    }
    let series = parse_csv(input_bytes.as_slice(), PriceColumn::from(args.flags.column))
        .map_err(|e| input_err(format!("{}: {e}", args.io.input.display())))?;
    let series = match cfg.scale {
        Scale::Raw => series,
        Scale::Log => log_transform(&series).map_err(from_core)?,
    };
    let starts = args
        .starts
        .iter()
        .map(|d| parse_date(d))
        .collect::<CmdResult<Vec<_>>>()?;
    let end = parse_date(&args.end)?;

    let scan = scan_windows(&series, &starts, end, &cfg, args.stability_threshold)
        .map_err(from_core)?;
    let doc = scan.to_doc();
    let json = serde_json::to_string_pretty(&doc)
        .map_err(|e| input_err(format!("cannot serialize result: {e}")))?;

    match &args.io.out {
        None => println!("{json}"),
        Some(out) => {
            let cfg_value = serde_json::to_value(&cfg)
                .map_err(|e| config_err(format!("cannot serialize config: {e}")))?;
            let mut set = OutputSet::new(cfg_value);
            set.record_input(&args.io.input, &input_bytes);
            if let (Some(p), Some(b)) = (args.flags.config.as_deref(), &config_bytes) {
                set.record_input(p, b);
            }
            set.write(out, &json)?;
            set.write(&sibling(out, "windows.csv"), &scan.to_csv())?;
            set.finish(out)?;
        }
    }
    Ok(())
}

fn cmd_forecast(args: &ForecastArgs) -> CmdResult<()> {
    let input_bytes = read_bytes(&args.io.input)?;
    let doc: FitResultDoc = serde_json::from_slice(&input_bytes)
        .map_err(|e| input_err(format!("invalid fit document {}: {e}", args.io.input.display())))?;
    let forecast = crash_window(&doc.to_fit_result()).map_err(from_core)?;
    let json = serde_json::to_string_pretty(&forecast.to_doc())
        .map_err(|e| input_err(format!("cannot serialize forecast: {e}")))?;

    match &args.io.out {
        None => {
            // keep stdout pure JSON; the prose summary goes to stderr
            println!("{json}");
            eprintln!("{}", forecast.summary());
        }
        Some(out) => {
            let mut set = OutputSet::new(serde_json::Value::Null);
            set.record_input(&args.io.input, &input_bytes);
            set.write(out, &json)?;
            set.finish(out)?;
            println!("{}", forecast.summary());
        }
    }
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> CmdResult<()> {
    let spec_bytes = read_bytes(&args.spec)?;
    let mut spec: SynthSpec = serde_json::from_slice(&spec_bytes)
        .map_err(|e| config_err(format!("invalid spec {}: {e}", args.spec.display())))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let series = generate(&spec).map_err(from_core)?;
    let csv = serialize_csv(&series).map_err(from_core)?;

    let spec_value = serde_json::to_value(&spec)
        .map_err(|e| config_err(format!("cannot serialize spec: {e}")))?;
    let mut set = OutputSet::new(spec_value);
    set.record_input(&args.spec, &spec_bytes);
    set.write(&args.out, &csv)?;
    set.finish(&args.out)
}

fn cmd_eval(args: &EvalArgs) -> CmdResult<()> {
    if args.points < 2 {
        return Err(config_err("--points must be at least 2"));
    }
    let input_bytes = read_bytes(&args.input)?;
    // accept either a full fit document or a bare parameter document
    let params = serde_json::from_slice::<FitResultDoc>(&input_bytes)
        .map(|d| d.params.linearized)
        .or_else(|_| serde_json::from_slice::<ParamsDoc>(&input_bytes).map(|d| d.linearized))
        .map_err(|e| input_err(format!("invalid parameter document {}: {e}", args.input.display())))?;
    let (a, b) = (parse_date(&args.from)?.value(), parse_date(&args.to)?.value());
    if a >= b {
        return Err(config_err("--from must precede --to"));
    }

    let mut out = String::from("t,model\n");
    for k in 0..args.points {
        let t = TimePoint::new(a + (b - a) * k as f64 / (args.points - 1) as f64)
            .map_err(from_core)?;
        let m = evaluate(&params, t).map_err(from_core)?;
        out.push_str(&format!("{t},{m}\n"));
    }

    match &args.out {
        None => print!("{out}"),
        Some(path) => {
            let mut set = OutputSet::new(serde_json::Value::Null);
            set.record_input(&args.input, &input_bytes);
            set.write(path, &out)?;
            set.finish(path)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Fit(args) => cmd_fit(args),
        Cmd::Scan(args) => cmd_scan(args),
        Cmd::Forecast(args) => cmd_forecast(args),
        Cmd::Synth(args) => cmd_synth(args),
        Cmd::Eval(args) => cmd_eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
