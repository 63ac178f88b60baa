//! The `memharvest` command line: single fetches and extractions, batch
//! pipelines over URI lists, and outcome reports.
//!
//! [`run_cli`] is the whole program; `main` only wires it to the process.

pub mod args;
mod pipeline;
mod report;
mod uri_list;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Parser;
use memharvest_core::{
    extract_with, key_for_uri, ExtractError, ExtractOptions, FetchError, FetchOutcome, Fetcher,
    Manifest, RulesError, Store, StoreError, StoreKey,
};

pub use args::{Cli, Command, PolicyArgs};
pub use pipeline::{process_uri, run_pipeline, PipelineSummary, Processed, RunConfig};
pub use report::{json_sibling, Report};
pub use uri_list::{parse_uri_list, read_uri_list, UriListError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("rules file {path}: {source}")]
    Rules {
        path: PathBuf,
        #[source]
        source: RulesError,
    },
    #[error(transparent)]
    UriList(#[from] UriListError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error("no stored entry for key {0}")]
    MissingEntry(StoreKey),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Fetch(FetchError::InvalidPolicy(_)) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

/// Parses `argv` (program name first) and runs the subcommand, writing
/// results to `out` and messages to `err`. Returns the exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return e.exit_code();
        }
    };
    match run(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn io_err(path: PathBuf) -> impl FnOnce(std::io::Error) -> CliError {
    move |source| CliError::Io { path, source }
}

fn run(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let stdout = |e| io_err(PathBuf::from("<stdout>"))(e);
    match command {
        Command::Fetch { uri, policy } => {
            let fetcher = Fetcher::new(policy.policy()?, Arc::new(policy.rules()?))?;
            let outcome = fetcher.resolve(&uri)?;
            print_chain(&outcome, out).map_err(stdout)?;
        }
        Command::Extract {
            target,
            store,
            strict_decode,
            policy,
        } => {
            let rules = policy.rules()?;
            let outcome = extract_source(&target, store, &policy)?;
            let result = extract_with(&outcome, &rules, ExtractOptions { strict_decode })?;
            writeln!(out, "{}", result.text).map_err(stdout)?;
            for d in &result.diagnostics {
                let count = d.count.map(|n| format!(" ({n})")).unwrap_or_default();
                let _ = writeln!(err, "diagnostic {}{count}: {}", d.code, d.detail);
            }
        }
        Command::Pipeline {
            input,
            store,
            workers,
            strict_decode,
            report,
            policy,
        } => {
            let config = RunConfig {
                input,
                store,
                policy: policy.policy()?,
                workers: workers.into(),
                strict_decode,
                report,
            };
            let summary = run_pipeline(&config, policy.rules()?)?;
            let _ = writeln!(
                err,
                "{} URIs: {} attempted, {} already done",
                summary.total, summary.attempted, summary.skipped
            );
            emit_report(&config.store, config.report.as_ref(), out)?;
        }
        Command::Report { store, report } => {
            if !store.is_dir() {
                return Err(CliError::Io {
                    path: store,
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such store"),
                });
            }
            emit_report(&store, report.as_ref(), out)?;
        }
    }
    Ok(())
}

fn print_chain(outcome: &FetchOutcome, out: &mut dyn Write) -> std::io::Result<()> {
    for step in &outcome.chain {
        let status = step.status.map_or("-".to_string(), |s| s.to_string());
        writeln!(
            out,
            "{}\t{status}\t{}\t{}",
            step.kind, step.from_uri, step.to_uri
        )?;
    }
    writeln!(out, "final\t{}\t{}", outcome.status, outcome.final_uri)
}

fn extract_source(
    target: &str,
    store: Option<PathBuf>,
    policy: &PolicyArgs,
) -> Result<FetchOutcome, CliError> {
    let store = store.map(Store::open).transpose()?;
    if let Some(key) = StoreKey::parse(target) {
        let store =
            store.ok_or_else(|| CliError::Usage("extracting by key needs --store".into()))?;
        return store
            .get(&key)?
            .map(|e| e.to_outcome())
            .ok_or(CliError::MissingEntry(key));
    }
    if let Some(store) = &store {
        if let Some(entry) = store.get(&key_for_uri(target))? {
            return Ok(entry.to_outcome());
        }
    }
    let fetcher = Fetcher::new(policy.policy()?, Arc::new(policy.rules()?))?;
    Ok(fetcher.resolve(target)?)
}

fn emit_report(
    store_root: &std::path::Path,
    path: Option<&PathBuf>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let store = Store::open(store_root)?;
    let report = Report::from_manifest(&Manifest::load(&store)?);
    write!(out, "{}", report.render()).map_err(io_err(PathBuf::from("<stdout>")))?;
    if let Some(path) = path {
        report.write(path).map_err(io_err(path.clone()))?;
    }
    Ok(())
}
