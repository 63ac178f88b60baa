//! Deterministic stand-ins for web archives.
//!
//! [`serve`] runs a scripted HTTP server on localhost: each route replays a
//! fixed sequence of responses, optionally gated on a cookie, and the
//! server can answer with 429/503 above a request rate. Every request is
//! logged. [`corpus`] holds the committed HTML fixtures and their golden
//! texts; [`scenarios`] wires fixtures into the redirect pathologies.

pub mod charset_matrix;
pub mod corpus;
mod scenario;
pub mod scenarios;
mod server;

pub use corpus::{build_corpus, BaseDocument, CorpusEntry, CorpusManifest, Wrapper};
pub use scenario::{RateTrip, Route, Scenario, ScenarioError, ScriptedResponse};
pub use server::{serve, LogEntry, ReplayServer, ServeError, BASE_PLACEHOLDER};
