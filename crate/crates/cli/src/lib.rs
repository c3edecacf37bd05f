//! The `sdflab` command line: argument parsing, dispatch, exit codes and the result cache.
//!
//! Exit codes: 0 success, 1 a checked inequality or search failed, 2 usage or input error,
//! 3 a precondition or hypothesis of the requested operation does not hold.

pub mod cache;
mod commands;
pub mod schemas;

use cache::{Cache, CacheEntry, RunManifest};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sdflab::Error;
use serde::Serialize;
use serde_json::{json, Value};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

pub const CACHE_ENV: &str = "SDFLAB_CACHE_DIR";

const AFTER_HELP: &str = "Exit codes: 0 success, 1 verified failure, 2 usage error, 3 precondition violated.\n\
Every JSON output validates against the schema printed by `sdflab schema <name>`; \
`sdflab schema --list` names them.";

#[derive(Debug, Parser)]
#[command(name = "sdflab", version, about = "Verifiers for square-difference-free sets", after_help = AFTER_HELP)]
pub struct Cli {
    /// Output format; each command has a natural default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Neither read nor write the result cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Result cache directory; caching is off when unset.
    #[arg(long, global = true, env = CACHE_ENV)]
    pub cache_dir: Option<PathBuf>,
    /// Report `elapsed_ms` as null so that repeated runs are byte-identical.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Square-difference-free sets.
    #[command(subcommand)]
    Sets(SetsCmd),
    /// Fourier analysis on products of cyclic groups.
    #[command(subcommand)]
    Fourier(FourierCmd),
    /// Exponential sums over squares.
    #[command(subcommand)]
    Circle(CircleCmd),
    /// Density increments for square-difference-free sets.
    #[command(subcommand)]
    Increment(IncrementCmd),
    /// The periodic lower-bound construction.
    #[command(subcommand)]
    Lowerbound(LowerboundCmd),
    /// Print the JSON schema of a command's output.
    Schema(SchemaArgs),
}

#[derive(Debug, Subcommand)]
pub enum SetsCmd {
    /// The greedy square-difference-free sequence up to a limit.
    Greedy(commands::GreedyArgs),
    /// A maximum square-difference-free subset of [1, X].
    Exact(commands::ExactArgs),
    /// Check a set file for square differences.
    Check(commands::CheckArgs),
}

#[derive(Debug, Subcommand)]
pub enum FourierCmd {
    /// Level-d Fourier energy of a function on [1, X].
    Energy(commands::EnergyArgs),
    /// The level-d energy dichotomy on random or given bounded functions.
    Dichotomy(commands::DichotomyArgs),
    /// Hypercontractivity for global functions on random inputs.
    Hyper(commands::HyperArgs),
}

#[derive(Debug, Subcommand)]
pub enum CircleCmd {
    /// Spectrum of the smoothed square weight on a grid of frequencies.
    Spectrum(commands::SpectrumArgs),
    /// Quadratic Weyl sum, with optional localization near a rational.
    Weyl(commands::WeylArgs),
    /// Quadratic Gauss sum.
    Gauss(commands::GaussArgs),
    /// Supremum of the spectrum over the minor arcs.
    Minor(commands::MinorArgs),
    /// Spectrum near a rational against the major-arc envelope.
    Major(commands::MajorArgs),
    /// Fourier transform of the bump function and its decay rate.
    Bump(commands::BumpArgs),
}

#[derive(Debug, Subcommand)]
pub enum IncrementCmd {
    /// Search for a density increment of a set file.
    Run(commands::IncrementRunArgs),
    /// The bound curve X exp(-c0 F(X)).
    Bound(commands::BoundArgs),
}

#[derive(Debug, Subcommand)]
pub enum LowerboundCmd {
    /// Build the periodic weight function.
    Build(commands::LbArgs),
    /// Build and verify its three properties.
    Verify(commands::LbVerifyArgs),
}

#[derive(Debug, Args)]
pub struct SchemaArgs {
    /// Schema name, e.g. `sets-greedy`.
    pub name: Option<String>,
    /// List schema names.
    #[arg(long)]
    pub list: bool,
}

/// Result of one command before rendering.
pub(crate) enum Body {
    Json(Value),
    Csv(String),
}

pub(crate) struct Outcome {
    pub exit: i32,
    pub body: Body,
}

impl Outcome {
    pub fn json(exit: i32, v: Value) -> Self {
        Outcome { exit, body: Body::Json(v) }
    }
    pub fn csv(exit: i32, s: String) -> Self {
        Outcome { exit, body: Body::Csv(s) }
    }
}

/// Failure before or during a command.
pub(crate) enum Failure {
    Usage(String),
    Core(Error),
    /// A core error with extra context for the JSON report.
    CoreWith(Error, Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

pub(crate) fn exit_code(e: &Error) -> i32 {
    if e.is_precondition() {
        EXIT_PRECONDITION
    } else if e.is_verified_failure() {
        EXIT_FAILED
    } else {
        EXIT_USAGE
    }
}

/// Variant name of a core error, e.g. `NotSquareDifferenceFree`.
pub fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
}

pub(crate) struct Ctx {
    pub format: Option<Format>,
    pub seed: u64,
    pub inputs: Vec<Vec<u8>>,
}

impl Ctx {
    /// Whether to emit CSV, given the command's default and whether it has a tabular form.
    pub fn csv(&self, default_csv: bool, tabular: bool) -> Result<bool, Failure> {
        match self.format {
            None => Ok(default_csv),
            Some(Format::Csv) if !tabular => {
                Err(Failure::Usage("this command has no CSV form; use --format json".into()))
            }
            Some(f) => Ok(f == Format::Csv),
        }
    }
}

fn render(out: &Outcome, elapsed_ms: Option<u64>) -> String {
    match &out.body {
        Body::Json(v) => {
            let mut v = v.clone();
            if let Value::Object(m) = &mut v {
                m.insert("elapsed_ms".into(), elapsed_ms.map_or(Value::Null, Value::from));
            }
            let mut s = serde_json::to_string_pretty(&v).expect("serializable");
            s.push('\n');
            s
        }
        Body::Csv(s) => s.clone(),
    }
}

fn render_failure(f: &Failure) -> (i32, String, String) {
    let (exit, report, message) = match f {
        Failure::Usage(m) => (EXIT_USAGE, json!({ "error": "Usage", "message": m }), m.clone()),
        Failure::Core(e) => (exit_code(e), json!({ "error": error_kind(e), "message": e.to_string() }), e.to_string()),
        Failure::CoreWith(e, extra) => {
            let mut r = json!({ "error": error_kind(e), "message": e.to_string() });
            if let (Value::Object(m), Value::Object(x)) = (&mut r, extra) {
                m.extend(x.clone());
            }
            (exit_code(e), r, e.to_string())
        }
    };
    let mut s = serde_json::to_string_pretty(&report).expect("serializable");
    s.push('\n');
    (exit, s, message)
}

/// Parses `argv`, runs the command and writes its report. Returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{}", e.render());
            let _ = writeln!(err, "output schemas: {}", schemas::NAMES.join(", "));
            let _ = writeln!(err, "print one with `sdflab schema <name>`");
            return code;
        }
    };
    if let Command::Schema(a) = &cli.command {
        return schema_command(a, out, err);
    }

    let (name, params, paths) = commands::describe(&cli.command);
    let mut inputs = Vec::with_capacity(paths.len());
    for p in &paths {
        match std::fs::read(p) {
            Ok(b) => inputs.push(b),
            Err(e) => {
                let (code, report, msg) = render_failure(&Failure::Usage(format!("cannot read {}: {e}", p.display())));
                let _ = write!(out, "{report}");
                let _ = writeln!(err, "error: {msg}");
                return code;
            }
        }
    }
    let params = json!({
        "args": params,
        "format": cli.format,
        "seed": cli.seed,
        "timing": !cli.no_timing,
    });
    let manifest = RunManifest::new(&name, params, &inputs);

    let cache = match (&cli.cache_dir, cli.no_cache) {
        (Some(dir), false) => match Cache::open(dir) {
            Ok(c) => Some(c),
            Err(e) => {
                let _ = writeln!(err, "warning: cache disabled, cannot open {}: {e}", dir.display());
                None
            }
        },
        _ => None,
    };
    let key = manifest.key();
    if let Some(cache) = &cache {
        let mut warn = |w: String| {
            let _ = writeln!(err, "warning: {w}");
        };
        match cache.lookup(&key, &mut warn) {
            Ok(Some(hit)) => {
                let _ = write!(out, "{}", hit.output);
                let _ = writeln!(err, "cache hit {}", &key[..16]);
                return hit.exit;
            }
            Ok(None) => {}
            Err(e) => {
                let _ = writeln!(err, "warning: cache lookup failed: {e}");
            }
        }
    }

    let ctx = Ctx { format: cli.format, seed: cli.seed, inputs };
    let start = Instant::now();
    let result = commands::dispatch(&cli.command, &ctx);
    let elapsed = start.elapsed().as_millis() as u64;
    match result {
        Ok(outcome) => {
            let text = render(&outcome, (!cli.no_timing).then_some(elapsed));
            let _ = write!(out, "{text}");
            if matches!(outcome.body, Body::Csv(_)) && !cli.no_timing {
                let _ = writeln!(err, "elapsed_ms={elapsed}");
            }
            if let Some(cache) = &cache {
                if let Err(e) = cache.store(CacheEntry::new(manifest, outcome.exit, text, elapsed)) {
                    let _ = writeln!(err, "warning: cache store failed: {e}");
                }
            }
            outcome.exit
        }
        Err(f) => {
            let (code, report, msg) = render_failure(&f);
            let _ = write!(out, "{report}");
            let _ = writeln!(err, "error: {msg}");
            if code == EXIT_USAGE {
                let _ = writeln!(err, "output schema: `sdflab schema {}`", schemas::name_of(&name));
            }
            code
        }
    }
}

fn schema_command(a: &SchemaArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if a.list {
        for n in schemas::NAMES {
            let _ = writeln!(out, "{n}");
        }
        return EXIT_OK;
    }
    match a.name.as_deref().and_then(schemas::get) {
        Some(s) => {
            let _ = write!(out, "{s}");
            EXIT_OK
        }
        None => {
            let _ = writeln!(err, "error: unknown schema; available: {}", schemas::NAMES.join(", "));
            EXIT_USAGE
        }
    }
}
