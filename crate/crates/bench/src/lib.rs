//! Inputs for the benchmarks, built from the fixture corpus.

use chrono::Utc;
use memharvest_core::FetchOutcome;
use memharvest_testkit::corpus::{base_documents, wrapped, Wrapper};

/// Every base document under every wrapper, as already-fetched outcomes.
pub fn corpus_outcomes() -> Vec<FetchOutcome> {
    base_documents()
        .iter()
        .flat_map(|base| {
            Wrapper::ALL.into_iter().map(move |wrapper| FetchOutcome {
                request_uri: wrapper.memento_uri(base.name),
                final_uri: wrapper.memento_uri(base.name),
                chain: Vec::new(),
                status: 200,
                headers: vec![("Content-Type".into(), "text/html; charset=utf-8".into())],
                body: wrapped(base.name, wrapper).to_vec(),
                fetched_at: Utc::now(),
                attempts: 1,
            })
        })
        .collect()
}

/// The base documents concatenated `copies` times, as one large text.
pub fn large_text(copies: usize) -> String {
    let one: String = base_documents().iter().map(|b| b.html).collect();
    one.repeat(copies)
}
