//! The `signcol` command line.
//!
//! Exit codes: 0 on success, 1 when a command fails (including a session
//! folder that does not validate), 2 on a usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use signcol_core::naming::parse_folder_name;
use signcol_core::{FrameSource, SignCategory};

use crate::capture::{record_scripted, rerecord, resolve_output_root, resolve_rate, CaptureParams, SourceConfig};
use crate::catalog::{Catalog, DB_FILE_NAME};
use crate::layout::validate_session;
use crate::recording::SessionLabels;
use crate::replay::open_replay;
use crate::service::{shutdown_signal, Service, ServiceConfig, DEFAULT_PORT};

#[derive(Debug, Parser)]
#[command(name = "signcol", version, about = "Multi-modal sign language capture and catalog")]
pub struct Cli {
    /// Directory holding the catalog and, by default, the session folders.
    #[arg(long, global = true, env = "SIGNCOL_DATA_DIR", default_value = "signcol-data")]
    pub data_dir: PathBuf,
    /// Catalog database file [default: <data-dir>/signcol.db].
    #[arg(long, global = true, env = "SIGNCOL_DB")]
    pub db: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Serve the HTTP API and preview stream.
    Serve(ServeArgs),
    /// Add a language, item or performer to the catalog.
    #[command(subcommand)]
    Define(Define),
    /// List catalog rows.
    List(ListArgs),
    /// Items and recordings per category.
    Stats {
        #[arg(long)]
        json: bool,
    },
    /// Run a complete synthetic capture session and register it.
    Record(RecordArgs),
    /// Check a session folder and print its violations.
    Validate { folder: PathBuf },
    /// Read a session back, optionally re-recording it into a new folder.
    Replay {
        folder: PathBuf,
        /// Write the replayed frames as a new session under this root.
        #[arg(long)]
        into: Option<PathBuf>,
        /// Seed for the new folder's suffix.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long)]
    pub output_root: Option<PathBuf>,
    /// `synthetic` or `replay:<session folder>`.
    #[arg(long, default_value = "synthetic")]
    pub source: SourceConfig,
    #[arg(long)]
    pub rate: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Define {
    Language {
        name: String,
    },
    Item {
        name: String,
        /// cat1..cat8 or 1..8.
        #[arg(long)]
        category: SignCategory,
        /// Language id.
        #[arg(long)]
        language: i64,
    },
    Performer {
        name: String,
        #[arg(long)]
        age: u32,
        #[arg(long, default_value = "")]
        phone: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ListKind {
    Languages,
    Items,
    Performers,
    Recordings,
}

#[derive(Debug, Args)]
pub struct ListArgs {
    pub kind: ListKind,
    #[arg(long)]
    pub json: bool,
    /// Items only.
    #[arg(long)]
    pub category: Option<SignCategory>,
    /// Items only; case-insensitive substring of the name.
    #[arg(long)]
    pub search: Option<String>,
}

#[derive(Debug, Args)]
pub struct RecordArgs {
    #[arg(long)]
    pub item: i64,
    #[arg(long)]
    pub performer: i64,
    #[arg(long, default_value_t = 100)]
    pub frames: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// arc, straight-line, circle or static [default: from the category].
    #[arg(long)]
    pub motion: Option<String>,
    #[arg(long)]
    pub bodies: Option<u8>,
    /// Gesture duration in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub output_root: Option<PathBuf>,
    #[arg(long)]
    pub rate: Option<f64>,
}

/// A failed command, already described for the user.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => 0,
        Err(Failure(msg)) => {
            if !msg.is_empty() {
                let _ = writeln!(err, "error: {msg}");
            }
            1
        }
    }
}

fn open_catalog(cli: &Cli) -> Result<Catalog, Failure> {
    let path = cli.db.clone().unwrap_or_else(|| cli.data_dir.join(DB_FILE_NAME));
    Catalog::open(&path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match &cli.command {
        Command::Serve(args) => serve(&cli, args, err),
        Command::Define(d) => define(&mut open_catalog(&cli)?, d, out),
        Command::List(args) => list(&open_catalog(&cli)?, args, out),
        Command::Stats { json } => stats(&open_catalog(&cli)?, *json, out),
        Command::Record(args) => record(&cli, args, out),
        Command::Validate { folder } => validate(folder, out, err),
        Command::Replay { folder, into, seed } => replay(folder, into.as_deref(), *seed, out),
    }
}

fn serve(cli: &Cli, args: &ServeArgs, err: &mut dyn Write) -> CmdResult {
    let config = ServiceConfig {
        host: args.host.clone(),
        port: args.port,
        data_dir: cli.data_dir.clone(),
        db: cli.db.clone(),
        output_root: args.output_root.clone(),
        source: args.source.clone(),
        rate: args.rate,
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let service = Service::bind(config).await?;
        writeln!(err, "listening on http://{}", service.local_addr()?)?;
        service.serve(shutdown_signal()).await?;
        Ok(())
    })
}

fn emit_json(out: &mut dyn Write, value: &impl Serialize) -> CmdResult {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn define(catalog: &mut Catalog, what: &Define, out: &mut dyn Write) -> CmdResult {
    let id = match what {
        Define::Language { name } => catalog.define_language(name)?.id,
        Define::Item { name, category, language } => catalog.define_item(name, *category, *language)?.id,
        Define::Performer { name, age, phone } => catalog.define_performer(name, *age, phone)?.id,
    };
    writeln!(out, "{id}")?;
    Ok(())
}

fn list(catalog: &Catalog, args: &ListArgs, out: &mut dyn Write) -> CmdResult {
    match args.kind {
        ListKind::Languages => {
            let rows = catalog.languages()?;
            if args.json {
                return emit_json(out, &rows);
            }
            writeln!(out, "{:>5}  name", "id")?;
            for l in rows {
                writeln!(out, "{:>5}  {}", l.id, l.name)?;
            }
        }
        ListKind::Items => {
            let rows = catalog.list_items(args.category, args.search.as_deref())?;
            if args.json {
                return emit_json(out, &rows);
            }
            writeln!(out, "{:>5}  {:<8}{:>9}  {:>10}  name", "id", "category", "language", "recordings")?;
            for r in rows {
                let i = &r.item;
                writeln!(out, "{:>5}  {:<8}{:>9}  {:>10}  {}", i.id, i.category.code(), i.language_id, r.recording_count, i.name)?;
            }
        }
        ListKind::Performers => {
            let rows = catalog.performers()?;
            if args.json {
                return emit_json(out, &rows);
            }
            writeln!(out, "{:>5}  {:>3}  {:<16}  name", "id", "age", "phone")?;
            for p in rows {
                writeln!(out, "{:>5}  {:>3}  {:<16}  {}", p.id, p.age, p.phone, p.name)?;
            }
        }
        ListKind::Recordings => {
            let rows = catalog.recordings()?;
            if args.json {
                return emit_json(out, &rows);
            }
            writeln!(out, "{:>5}  {:>5}  {:>9}  {:>6}  folder", "id", "item", "performer", "frames")?;
            for r in rows {
                writeln!(out, "{:>5}  {:>5}  {:>9}  {:>6}  {}", r.id, r.item_id, r.performer_id, r.frame_count, r.folder_path)?;
            }
        }
    }
    Ok(())
}

fn stats(catalog: &Catalog, json: bool, out: &mut dyn Write) -> CmdResult {
    let stats = catalog.category_stats()?;
    if json {
        return emit_json(out, &stats);
    }
    writeln!(out, "{:<8}  {:<20}  {:>5}  {:>10}", "category", "description", "items", "recordings")?;
    for c in &stats.categories {
        writeln!(
            out,
            "{:<8}  {:<20}  {:>5}  {:>10}",
            c.category.code(),
            c.description,
            c.defined_item_count,
            c.recording_count
        )?;
    }
    Ok(())
}

fn record(cli: &Cli, args: &RecordArgs, out: &mut dyn Write) -> CmdResult {
    let mut catalog = open_catalog(cli)?;
    let output_root = resolve_output_root(&catalog, &cli.data_dir, args.output_root.clone())?;
    let rate = resolve_rate(&catalog, args.rate)?;
    let params = CaptureParams {
        motion: args.motion.clone(),
        bodies: args.bodies,
        duration: args.duration,
        seed: Some(args.seed),
    };
    let (session, _entry) =
        record_scripted(&mut catalog, &output_root, args.item, args.performer, args.frames, &params, rate)?;
    writeln!(out, "{}", session.folder().display())?;
    Ok(())
}

fn validate(folder: &Path, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let report = validate_session(folder);
    if report.is_valid() {
        writeln!(out, "{}: ok", folder.display())?;
        return Ok(());
    }
    writeln!(err, "{}: {} violation(s)", folder.display(), report.violations.len())?;
    for v in &report.violations {
        writeln!(err, "  {v}")?;
    }
    Err(Failure(String::new()))
}

fn replay(folder: &Path, into: Option<&Path>, seed: u64, out: &mut dyn Write) -> CmdResult {
    let Some(root) = into else {
        let mut source = open_replay(folder)?;
        let rate = source.nominal_rate();
        let mut frames = 0u64;
        while let Some(bundle) = source.next_bundle()? {
            writeln!(out, "frame {} t={}ms bodies={}", bundle.frame_index, bundle.timestamp_ms, bundle.skeletons.len())?;
            frames += 1;
        }
        writeln!(out, "{frames} frames at {rate:.2} fps")?;
        return Ok(());
    };
    let name = folder
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Failure(format!("{}: not a session folder", folder.display())))?;
    let parsed = parse_folder_name(name).ok_or_else(|| Failure(format!("{name}: not a session folder name")))?;
    // A re-recorded copy is not registered, so it carries no catalog ids.
    let labels = SessionLabels {
        language: parsed.language.into(),
        category: parsed.category,
        item: parsed.item.into(),
        performer: parsed.performer.into(),
        item_id: 0,
        performer_id: 0,
    };
    let session = rerecord(folder, root, labels, seed)?;
    writeln!(out, "{}", session.folder().display())?;
    Ok(())
}
