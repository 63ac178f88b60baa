use std::collections::HashSet;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use memharvest_core::{
    extract_with, key_for_uri, Diagnostic, DiagnosticCode, ExtractError, ExtractOptions,
    FetchError, FetchPolicy, Fetcher, Manifest, ManifestRecord, ManifestWriter, OutcomeClass,
    RuleSet, Store, StoreEntry,
};

use crate::uri_list::read_uri_list;
use crate::CliError;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub store: PathBuf,
    pub policy: FetchPolicy,
    pub workers: usize,
    pub strict_decode: bool,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PipelineSummary {
    /// Distinct URIs in the input.
    pub total: usize,
    /// URIs skipped because the store already holds an `ok` entry.
    pub skipped: usize,
    pub attempted: usize,
}

/// What one URI turned into: a manifest record, and the entry to store if
/// anything was received.
#[derive(Debug)]
pub struct Processed {
    pub record: ManifestRecord,
    pub entry: Option<StoreEntry>,
}

/// Resolves and extracts one URI and classifies the result.
pub fn process_uri(uri: &str, fetcher: &Fetcher, options: ExtractOptions) -> Processed {
    let outcome = match fetcher.resolve(uri) {
        Ok(outcome) => outcome,
        Err(err) => {
            let class = match err {
                FetchError::RedirectLimit { .. } | FetchError::RedirectLoop { .. } => {
                    OutcomeClass::RedirectLimit
                }
                _ => OutcomeClass::NetworkError,
            };
            return Processed {
                record: ManifestRecord::new(uri, 0, class),
                entry: None,
            };
        }
    };
    let rule_id = fetcher
        .rules()
        .match_uri(&outcome.final_uri)
        .map(|r| r.archive_id.clone())
        .unwrap_or_else(|_| fetcher.rules().fallback().archive_id.clone());

    let (class, text, archive_id, diagnostics) =
        match extract_with(&outcome, fetcher.rules(), options) {
            Ok(result) => {
                let class = if result.has(DiagnosticCode::UnsupportedMediaType) {
                    OutcomeClass::UnsupportedMediaType
                } else {
                    OutcomeClass::Ok
                };
                (
                    class,
                    Some(result.text),
                    result.archive_id,
                    result.diagnostics,
                )
            }
            // A final 4xx/5xx: the archive answered, but not with the memento.
            Err(ExtractError::NonSuccessStatus { .. }) => {
                (OutcomeClass::NetworkError, None, rule_id, Vec::new())
            }
            Err(err) => {
                let (class, code) = match &err {
                    ExtractError::NoscriptCorruption { .. } => (
                        OutcomeClass::NoscriptCorruption,
                        DiagnosticCode::NoscriptCorruption,
                    ),
                    _ => (
                        OutcomeClass::Undecodable,
                        DiagnosticCode::CharsetUndecodable,
                    ),
                };
                let diagnostic = Diagnostic {
                    code,
                    detail: err.to_string(),
                    count: None,
                };
                (class, None, rule_id, vec![diagnostic])
            }
        };
    Processed {
        record: ManifestRecord::new(uri, outcome.status, class),
        entry: Some(StoreEntry::from_outcome(
            &outcome,
            &archive_id,
            text,
            diagnostics,
        )),
    }
}

/// Runs fetch+extract over the input list with `config.workers` threads
/// sharing one fetcher. URIs whose latest manifest record is `ok` and whose
/// entry exists are skipped, so an interrupted run can simply be restarted.
pub fn run_pipeline(config: &RunConfig, rules: RuleSet) -> Result<PipelineSummary, CliError> {
    let uris = read_uri_list(&config.input)?;
    let store = Store::open(&config.store)?;
    let manifest = Manifest::load(&store)?;
    let fetcher = Fetcher::new(config.policy.clone(), Arc::new(rules))?;

    let mut seen = HashSet::new();
    let mut summary = PipelineSummary::default();
    let mut todo = Vec::new();
    for uri in uris {
        if !seen.insert(uri.clone()) {
            continue;
        }
        summary.total += 1;
        let key = key_for_uri(&uri);
        if manifest.latest_class(&key) == Some(OutcomeClass::Ok) && store.contains(&key) {
            summary.skipped += 1;
        } else {
            todo.push(uri);
        }
    }
    summary.attempted = todo.len();
    if todo.is_empty() {
        return Ok(summary);
    }

    let writer = ManifestWriter::open(&store)?;
    let options = ExtractOptions {
        strict_decode: config.strict_decode,
    };
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let failure: Mutex<Option<CliError>> = Mutex::new(None);

    thread::scope(|scope| {
        for _ in 0..config.workers.clamp(1, todo.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= todo.len() || abort.load(Ordering::SeqCst) {
                    break;
                }
                let processed = process_uri(&todo[i], &fetcher, options);
                let saved = match &processed.entry {
                    Some(entry) => store.put(entry),
                    None => Ok(()),
                }
                .and_then(|()| writer.append(&processed.record));
                if let Err(e) = saved {
                    abort.store(true, Ordering::SeqCst);
                    failure
                        .lock()
                        .unwrap_or_else(|p| p.into_inner())
                        .get_or_insert(e.into());
                    break;
                }
            });
        }
    });

    match failure.into_inner().unwrap_or_else(|p| p.into_inner()) {
        Some(err) => Err(err),
        None => Ok(summary),
    }
}
