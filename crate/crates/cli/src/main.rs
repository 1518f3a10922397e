use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use chrono::NaiveDate;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use epinorm::containers::{read_canonical, write_canonical, CanonicalDocument, ContainerKind};
use epinorm::epicalendar::{week_interval, week_of, WeekSystem};
use epinorm::lint::Linter;
use epinorm::manifest::DatasetManifest;
use epinorm::pipeline::{merge_documents, normalize};
use epinorm::series::{MergePolicy, RevisionChange, SeriesContext, Value};
use epinorm::store::{write_atomic, RevisionStore};
use epinorm::temporal::parse_iso8601;
use epinorm::Interval;

const EXIT_WARNINGS: u8 = 1;
const EXIT_ERRORS: u8 = 2;

#[derive(Parser)]
#[command(
    name = "epinorm",
    version,
    about = "Normalize and lint epidemiological case-count data"
)]
struct Cli {
    /// Dataset manifest describing the input's conventions.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Write results here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, short, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    PreferNewer,
    ErrorOnConflict,
}

#[derive(Clone, Copy, ValueEnum)]
enum System {
    Mmwr,
    MondayStart,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a source file to canonical CSV or JSON.
    Normalize {
        /// Input file, or `-` for standard input.
        input: PathBuf,
    },
    /// Check a file against publishing best practices.
    Lint { input: PathBuf },
    /// Print the snapshot in effect on a publication date.
    Asof { store: PathBuf, date: String },
    /// Print the epi week containing a date.
    Epiweek {
        date: String,
        #[arg(long, value_enum, default_value = "mmwr")]
        system: System,
    },
    /// Merge two canonical files; the second is treated as newer.
    Merge {
        older: PathBuf,
        newer: PathBuf,
        #[arg(long, value_enum, default_value = "error-on-conflict")]
        policy: Policy,
    },
    /// List values that changed between two publication dates.
    Diff {
        store: PathBuf,
        from: String,
        to: String,
    },
    /// Record a canonical file in a revision store.
    Publish {
        store: PathBuf,
        date: String,
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(EXIT_ERRORS)
        }
    }
}

/// Joins the error chain, skipping causes the outer message already quotes.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Normalize { input } => cmd_normalize(cli, input),
        Command::Lint { input } => cmd_lint(cli, input),
        Command::Asof { store, date } => {
            let date = parse_day(date)?;
            let store = RevisionStore::open(store)?;
            let (published, doc) = store.as_of(date)?;
            eprintln!("snapshot published {published}");
            emit_document(cli, &doc, ContainerKind::Json)?;
            Ok(0)
        }
        Command::Epiweek { date, system } => {
            let system = match system {
                System::Mmwr => WeekSystem::Mmwr,
                System::MondayStart => WeekSystem::MondayStart,
            };
            let week = week_of(parse_day(date)?, system)?;
            let text = match cli.format {
                Some(Format::Json) => {
                    let iv = week_interval(&week)?;
                    let mut s = serde_json::to_string_pretty(&json!({
                        "system": system.to_string(),
                        "year": week.year,
                        "week": week.week,
                        "label": week.label(),
                        "interval_start": iv.start().to_string(),
                        "interval_end": iv.end().to_string(),
                    }))?;
                    s.push('\n');
                    s
                }
                _ => format!("{}\n", week.label()),
            };
            emit(cli, text.as_bytes())?;
            Ok(0)
        }
        Command::Merge {
            older,
            newer,
            policy,
        } => {
            let a = read_document(cli, older)?;
            let b = read_document(cli, newer)?;
            let policy = match policy {
                Policy::PreferNewer => MergePolicy::PreferNewer,
                Policy::ErrorOnConflict => MergePolicy::ErrorOnConflict,
            };
            let merged = merge_documents(&a, &b, policy)?;
            emit_document(cli, &merged, kind_for_output(cli))?;
            Ok(0)
        }
        Command::Diff { store, from, to } => {
            let (from, to) = (parse_day(from)?, parse_day(to)?);
            let series = RevisionStore::open(store)?.load()?;
            let changes = series.revision_diff(from, to)?;
            let text = match cli.format {
                Some(Format::Json) => diff_json(&changes)?,
                _ => diff_text(&changes),
            };
            emit(cli, text.as_bytes())?;
            Ok(0)
        }
        Command::Publish { store, date, input } => {
            let date = parse_day(date)?;
            let doc = read_document(cli, input)?;
            RevisionStore::open_or_create(store)?.publish(date, &doc)?;
            eprintln!(
                "published {} observation(s) as of {date}",
                doc.observations.len()
            );
            Ok(0)
        }
    }
}

fn cmd_normalize(cli: &Cli, input: &Path) -> Result<u8> {
    let manifest = load_manifest(cli)?;
    let gazetteer = manifest.load_gazetteer()?;
    let bytes = read_input(input)?;
    let out = normalize(&bytes, &source_name(input), &manifest, &gazetteer)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    emit_document(cli, &out.document, kind_for_output(cli))?;
    let series = out.document.by_context().len();
    eprintln!(
        "{} observation(s) in {series} series",
        out.document.observations.len()
    );
    Ok(0)
}

fn cmd_lint(cli: &Cli, input: &Path) -> Result<u8> {
    let manifest = load_manifest(cli)?;
    let gazetteer = manifest.load_gazetteer()?;
    let bytes = read_input(input)?;
    let report = Linter::new(&manifest, &gazetteer)?.lint(&bytes, &source_name(input));
    let text = match cli.format {
        Some(Format::Json) => report.to_json(),
        _ => report.to_text(),
    };
    emit(cli, text.as_bytes())?;
    Ok(match report.exit_code() {
        0 => 0,
        1 => EXIT_WARNINGS,
        _ => EXIT_ERRORS,
    })
}

fn load_manifest(cli: &Cli) -> Result<DatasetManifest> {
    let path = cli
        .manifest
        .as_deref()
        .context("--manifest is required for this command")?;
    Ok(DatasetManifest::load(path)?)
}

fn parse_day(text: &str) -> Result<NaiveDate> {
    let ts = parse_iso8601(text).with_context(|| format!("invalid date {text:?}"))?;
    Ok(ts.date())
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf)?;
        return Ok(buf);
    }
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn source_name(path: &Path) -> String {
    if path == Path::new("-") {
        return "<stdin>".into();
    }
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn kind_of_path(path: &Path) -> Option<ContainerKind> {
    match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
        "json" => Some(ContainerKind::Json),
        "csv" => Some(ContainerKind::Csv),
        _ => None,
    }
}

/// Reads a canonical file, taking its container from the manifest or the
/// file extension.
fn read_document(cli: &Cli, path: &Path) -> Result<CanonicalDocument> {
    let kind = match &cli.manifest {
        Some(_) => load_manifest(cli)?.container,
        None => kind_of_path(path).unwrap_or(ContainerKind::Csv),
    };
    let text = String::from_utf8(read_input(path)?)
        .with_context(|| format!("{} is not UTF-8", path.display()))?;
    read_canonical(&text, kind).with_context(|| format!("cannot read {}", path.display()))
}

fn kind_for_output(cli: &Cli) -> ContainerKind {
    match cli.format {
        Some(Format::Json) => ContainerKind::Json,
        Some(_) => ContainerKind::Csv,
        None => cli
            .output
            .as_deref()
            .and_then(kind_of_path)
            .unwrap_or(ContainerKind::Csv),
    }
}

fn emit_document(cli: &Cli, doc: &CanonicalDocument, default: ContainerKind) -> Result<()> {
    let kind = match cli.format {
        Some(Format::Csv) => ContainerKind::Csv,
        Some(Format::Json) => ContainerKind::Json,
        _ => default,
    };
    emit(cli, write_canonical(doc, kind)?.as_bytes())
}

/// Sends data to `--output` atomically, or to standard output.
fn emit(cli: &Cli, bytes: &[u8]) -> Result<()> {
    match &cli.output {
        Some(path) => {
            write_atomic(path, bytes).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

type Change = RevisionChange<(SeriesContext, Interval)>;

fn value_text(v: Option<Value>) -> String {
    v.map_or_else(|| "absent".to_string(), |v| v.to_string())
}

fn diff_text(changes: &[Change]) -> String {
    if changes.is_empty() {
        return "no changes\n".into();
    }
    changes
        .iter()
        .map(|c| {
            let (ctx, iv) = &c.key;
            format!(
                "{ctx} {iv}: {} -> {}\n",
                value_text(c.old),
                value_text(c.new)
            )
        })
        .collect()
}

fn diff_json(changes: &[Change]) -> Result<String> {
    let rows: Vec<_> = changes
        .iter()
        .map(|c| {
            let (ctx, iv) = &c.key;
            let mut row = json!({
                "change": match (c.old, c.new) {
                    (None, _) => "appeared",
                    (_, None) => "retracted",
                    _ => "changed",
                },
                "location_code": ctx.location,
                "demographic": ctx.demographic,
                "case_type": ctx.case_type.to_string(),
                "interval_start": iv.start().to_string(),
                "interval_end": iv.end().to_string(),
            });
            if let Some(old) = c.old {
                row["old"] = serde_json::to_value(old).expect("value serializes");
            }
            if let Some(new) = c.new {
                row["new"] = serde_json::to_value(new).expect("value serializes");
            }
            row
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&rows)?;
    s.push('\n');
    Ok(s)
}
