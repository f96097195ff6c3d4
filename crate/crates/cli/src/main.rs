//! `mtc`: generate MTC traffic traces, ingest campus exports and fit and
//! rank inter-arrival models.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mtc_core::config::{GeneratorConfig, GeneratorKind, PipelineConfig};
use mtc_core::generators::{gen_3gpp, gen_event_driven, gen_quasi_periodic};
use mtc_core::gof::{rank_models, sorted, DEFAULT_TAIL_FRACTION};
use mtc_core::ingest::{
    group_streams, parse_csv_file, parse_values, readings_to_trace, Classifier, TrafficClass, DEFAULT_SLOT_MS,
};
use mtc_core::pipeline::run_pipeline_file;
use mtc_core::report::{render_table, render_tsv, to_json, ReportDocument, TailErrorDocument};
use mtc_core::traffic::inter_arrival_times;
use mtc_core::{distributions::fit_mle, Error, Family, Trace};

#[derive(Parser)]
#[command(name = "mtc", version, about = "MTC traffic synthesis and inter-arrival model ranking")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; results go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize traces from a generator config.
    Generate,
    /// Parse a campus CSV export into per-stream traces.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// Slot length in milliseconds (default: config value or 900000).
        #[arg(long)]
        slot_ms: Option<u64>,
    },
    /// Maximum-likelihood fits of a value list.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Families to fit (default: all).
        #[arg(long, value_delimiter = ',')]
        family: Vec<Family>,
    },
    /// Fit and rank candidate families on a value list.
    Gof {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        candidates: Vec<Family>,
    },
    /// Render a report JSON document.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
    /// Run ingest, classification, ranking and artifact emission.
    Pipeline,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let c = &cli.common;
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure { code: 1, message: e.to_string() })?;
    }
    match &cli.command {
        Command::Generate => generate(c),
        Command::Ingest { input, slot_ms } => ingest(c, input, *slot_ms),
        Command::Fit { input, family } => fit(c, input, family),
        Command::Gof { input, candidates } => gof(c, input, candidates),
        Command::Report { input } => report(c, input),
        Command::Pipeline => pipeline(c),
    }
}

fn format_or(c: &Common, default: Format, allowed: &[Format], command: &str) -> CliResult<Format> {
    let f = c.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        let names: Vec<_> = allowed
            .iter()
            .map(|f| f.to_possible_value().expect("no skipped variants").get_name().to_string())
            .collect();
        Err(usage(format!("`{command}` supports --format {}", names.join("|"))))
    }
}

/// Writes `content` to `out/name`, or to stdout without `--out`.
fn emit(c: &Common, name: &str, content: &str) -> CliResult<()> {
    match &c.out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
            let path = dir.join(name);
            std::fs::write(&path, content).map_err(|e| io_failure(&path, e))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Error::Io {
        path: path.display().to_string(),
        source: e,
    }
    .into()
}

fn read_values(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    Ok(parse_values(&text)?)
}

fn traces_tsv(traces: &[Trace]) -> String {
    let mut out = String::from("device_id\tstart\tduration\n");
    for t in traces {
        for tx in t.transmissions() {
            let _ = writeln!(out, "{}\t{}\t{}", t.device_id(), tx.start.index(), tx.duration);
        }
    }
    out
}

fn generate(c: &Common) -> CliResult<()> {
    let path = c.config.as_ref().ok_or_else(|| usage("`generate` needs --config"))?;
    let cfg = GeneratorConfig::from_file(path)?;
    let seed = c.seed.unwrap_or(cfg.seed);
    let format = format_or(c, Format::Json, &[Format::Json, Format::Tsv], "generate")?;
    let generated = match cfg.kind {
        GeneratorKind::EventDriven(g) => gen_event_driven(&g, seed)?,
        GeneratorKind::QuasiPeriodic(g) => gen_quasi_periodic(&g, seed)?,
        GeneratorKind::ThreeGpp(g) => {
            let arrivals = gen_3gpp(&g, seed)?;
            return match format {
                Format::Json => emit(c, "arrivals.json", &to_json(&arrivals)),
                _ => emit(c, "arrivals.tsv", &arrivals.iter().map(|a| format!("{a}\n")).collect::<String>()),
            };
        }
    };
    eprintln!(
        "{} traces, {} transmissions",
        generated.traces.len(),
        generated.traces.iter().map(Trace::len).sum::<usize>()
    );
    match format {
        Format::Json => emit(c, "traces.json", &to_json(&generated)),
        _ => {
            emit(c, "traces.tsv", &traces_tsv(&generated.traces))?;
            if c.out.is_some() {
                emit(c, "diagnostics.json", &to_json(&generated.diagnostics))?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct StreamTrace {
    device_id: String,
    measurement: String,
    class: TrafficClass,
    trace: Trace,
}

fn ingest(c: &Common, input: &Path, slot_ms: Option<u64>) -> CliResult<()> {
    let format = format_or(c, Format::Json, &[Format::Json, Format::Tsv], "ingest")?;
    let mut classifier = Classifier::new();
    let mut slot = DEFAULT_SLOT_MS;
    if let Some(path) = &c.config {
        let cfg = PipelineConfig::from_file(path)?;
        slot = cfg.slot_ms;
        for (m, class) in &cfg.class_overrides {
            classifier = classifier.with_override(m, *class)?;
        }
    }
    let slot = slot_ms.unwrap_or(slot);
    let parsed = parse_csv_file(input)?;
    for e in &parsed.errors {
        eprintln!("warning: {}: {e}", input.display());
    }
    let mut streams = Vec::new();
    for ((device_id, measurement), rs) in group_streams(&parsed.readings) {
        let class = classifier.classify(&measurement)?;
        let trace = readings_to_trace(&device_id, &rs, slot)?;
        streams.push(StreamTrace {
            device_id,
            measurement,
            class,
            trace,
        });
    }
    eprintln!(
        "{} readings in {} streams, {} rejected rows",
        parsed.readings.len(),
        streams.len(),
        parsed.errors.len()
    );
    match format {
        Format::Json => emit(c, "streams.json", &to_json(&streams)),
        _ => {
            let mut out = String::from("class\tdevice_id\tmeasurement\tgap\n");
            for s in &streams {
                for g in inter_arrival_times(&s.trace) {
                    let _ = writeln!(out, "{}\t{}\t{}\t{g}", s.class, s.device_id, s.measurement);
                }
            }
            emit(c, "gaps.tsv", &out)
        }
    }
}

fn families(list: &[Family]) -> Vec<Family> {
    if list.is_empty() {
        Family::ALL.to_vec()
    } else {
        list.to_vec()
    }
}

fn fit(c: &Common, input: &Path, family: &[Family]) -> CliResult<()> {
    let format = format_or(c, Format::Json, &[Format::Json, Format::Tsv, Format::Table], "fit")?;
    let values = read_values(input)?;
    let fits = families(family)
        .into_iter()
        .map(|f| fit_mle(f, &values))
        .collect::<Result<Vec<_>, _>>()?;
    let content = match format {
        Format::Json => to_json(&fits),
        _ => {
            let sep = if format == Format::Tsv { "\t" } else { "  " };
            let mut out = String::new();
            if format == Format::Tsv {
                out.push_str("family\tlog_likelihood\tconverged\tparams\n");
            }
            for r in &fits {
                let params: Vec<String> = r.spec.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
                let family = if format == Format::Table {
                    format!("{:<17}", r.spec.family().tag())
                } else {
                    r.spec.family().tag().to_string()
                };
                let _ = writeln!(
                    out,
                    "{family}{sep}{}{sep}{}{sep}{}",
                    r.log_likelihood,
                    r.converged,
                    params.join(",")
                );
            }
            out
        }
    };
    emit(c, &format!("fits.{}", extension(format)), &content)
}

fn extension(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Tsv => "tsv",
        Format::Table => "txt",
    }
}

fn render(c: &Common, doc: &ReportDocument) -> CliResult<()> {
    let format = c.format.unwrap_or(Format::Table);
    let content = match format {
        Format::Json => doc.to_json(),
        Format::Tsv => render_tsv(&doc.report()),
        Format::Table => render_table(&doc.report()),
    };
    emit(c, &format!("report.{}", extension(format)), &content)
}

fn gof(c: &Common, input: &Path, candidates: &[Family]) -> CliResult<()> {
    let values = read_values(input)?;
    let report = rank_models(&values, &families(candidates))?;
    let tails = TailErrorDocument::compute(&report, &sorted(&values), DEFAULT_TAIL_FRACTION)?;
    render(c, &ReportDocument::new(report, tails))
}

fn report(c: &Common, input: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(input).map_err(|e| io_failure(input, e))?;
    let doc: ReportDocument = serde_json::from_str(&text).map_err(Error::from)?;
    render(c, &doc)
}

fn pipeline(c: &Common) -> CliResult<()> {
    let config = c.config.as_ref().ok_or_else(|| usage("`pipeline` needs --config"))?;
    if c.format.is_some() {
        return Err(usage("`pipeline` writes fixed artifact formats; drop --format"));
    }
    let out = c.out.clone().unwrap_or_else(|| PathBuf::from("mtc-out"));
    let outcome = run_pipeline_file(config, c.seed, &out).map_err(|e| Failure {
        code: e.exit_code() as u8,
        message: e.to_string(),
    })?;
    for e in &outcome.row_errors {
        eprintln!("warning: {e}");
    }
    for s in &outcome.classes {
        println!(
            "{}: {} streams, {} gaps, best by K-S: {}",
            s.class, s.streams, s.sample_size, s.best_model
        );
    }
    for a in &outcome.artifacts {
        println!("{}", a.display());
    }
    Ok(())
}
