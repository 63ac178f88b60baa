//! Content-addressed persistence of fetch outcomes and extraction results.
//!
//! Layout under the store root:
//!
//! ```text
//! <root>/manifest.tsv
//! <root>/<first 2 hex of key>/<key>/raw.bin
//!                                  /meta.json
//!                                  /text.txt          (only when text was extracted)
//!                                  /diagnostics.json
//! ```
//!
//! The key is the SHA-256 of the request URI exactly as given.

use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::acquisition::{FetchOutcome, RedirectStep};
use crate::textify::Diagnostic;

pub const MANIFEST_FILE: &str = "manifest.tsv";
const RAW_FILE: &str = "raw.bin";
const META_FILE: &str = "meta.json";
const TEXT_FILE: &str = "text.txt";
const DIAGNOSTICS_FILE: &str = "diagnostics.json";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corrupt entry {key}: {reason}")]
    CorruptEntry { key: String, reason: String },
    #[error("{path} line {line}: {reason}")]
    Manifest {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("cannot record `{0}` in the manifest: it contains a tab or line break")]
    UnrecordableUri(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Lowercase hex SHA-256 of a request URI.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StoreKey(String);

impl StoreKey {
    /// Accepts exactly 64 lowercase hex characters.
    pub fn parse(s: &str) -> Option<Self> {
        (s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')))
            .then(|| Self(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn shard(&self) -> &str {
        &self.0[..2]
    }
}

impl fmt::Display for StoreKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn key_for_uri(uri: &str) -> StoreKey {
    StoreKey(hex::encode(Sha256::digest(uri.as_bytes())))
}

mod timestamp {
    use chrono::{DateTime, NaiveDateTime, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    const FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

    pub fn serialize<S: Serializer>(at: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&at.format(FORMAT).to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        NaiveDateTime::parse_from_str(&s, FORMAT)
            .map(|naive| naive.and_utc())
            .map_err(serde::de::Error::custom)
    }
}

/// Contents of `meta.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryMeta {
    pub request_uri: String,
    pub final_uri: String,
    pub status: u16,
    /// Second precision.
    #[serde(with = "timestamp")]
    pub fetched_at: DateTime<Utc>,
    pub chain: Vec<RedirectStep>,
    pub headers: Vec<(String, String)>,
    pub archive_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreEntry {
    pub key: StoreKey,
    pub meta: EntryMeta,
    pub raw: Vec<u8>,
    pub text: Option<String>,
    pub diagnostics: Vec<Diagnostic>,
}

impl StoreEntry {
    pub fn from_outcome(
        outcome: &FetchOutcome,
        archive_id: &str,
        text: Option<String>,
        diagnostics: Vec<Diagnostic>,
    ) -> Self {
        Self {
            key: key_for_uri(&outcome.request_uri),
            meta: EntryMeta {
                request_uri: outcome.request_uri.clone(),
                final_uri: outcome.final_uri.clone(),
                status: outcome.status,
                fetched_at: outcome.fetched_at,
                chain: outcome.chain.clone(),
                headers: outcome.headers.clone(),
                archive_id: archive_id.to_string(),
            },
            raw: outcome.body.clone(),
            text,
            diagnostics,
        }
    }

    /// Rebuilds the fetch outcome. Attempt counts are not stored, so
    /// `attempts` is 0.
    pub fn to_outcome(&self) -> FetchOutcome {
        FetchOutcome {
            request_uri: self.meta.request_uri.clone(),
            final_uri: self.meta.final_uri.clone(),
            chain: self.meta.chain.clone(),
            status: self.meta.status,
            headers: self.meta.headers.clone(),
            body: self.raw.clone(),
            fetched_at: self.meta.fetched_at,
            attempts: 0,
        }
    }
}

/// A store rooted at one directory.
#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

static STAGING_COUNTER: AtomicU64 = AtomicU64::new(0);

impl Store {
    /// Opens (creating if needed) a store at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join(MANIFEST_FILE)
    }

    fn entry_dir(&self, key: &StoreKey) -> PathBuf {
        self.root.join(key.shard()).join(key.as_str())
    }

    pub fn contains(&self, key: &StoreKey) -> bool {
        self.entry_dir(key).join(META_FILE).is_file()
    }

    /// Writes an entry atomically: readers see the old entry or the new
    /// one, never a mix. Concurrent writers of one key: the last rename wins.
    pub fn put(&self, entry: &StoreEntry) -> Result<(), StoreError> {
        let key = &entry.key;
        let shard = self.root.join(key.shard());
        fs::create_dir_all(&shard).map_err(io_err(&shard))?;

        let unique = || {
            format!(
                "{}-{}",
                std::process::id(),
                STAGING_COUNTER.fetch_add(1, Ordering::Relaxed)
            )
        };
        let staging = shard.join(format!(".tmp-{key}-{}", unique()));
        fs::create_dir(&staging).map_err(io_err(&staging))?;
        let written = write_entry_files(&staging, entry);
        if let Err(e) = written {
            let _ = fs::remove_dir_all(&staging);
            return Err(e);
        }

        let target = self.entry_dir(key);
        let mut last_err = None;
        for _ in 0..8 {
            let retired = shard.join(format!(".old-{key}-{}", unique()));
            let had_old = match fs::rename(&target, &retired) {
                Ok(()) => true,
                Err(e) if e.kind() == io::ErrorKind::NotFound => false,
                Err(e) => {
                    let _ = fs::remove_dir_all(&staging);
                    return Err(io_err(&target)(e));
                }
            };
            match fs::rename(&staging, &target) {
                Ok(()) => {
                    if had_old {
                        let _ = fs::remove_dir_all(&retired);
                    }
                    return Ok(());
                }
                // Another writer slipped in between the two renames.
                Err(e) => {
                    if had_old {
                        let _ = fs::remove_dir_all(&retired);
                    }
                    last_err = Some(e);
                }
            }
        }
        let _ = fs::remove_dir_all(&staging);
        Err(io_err(&target)(last_err.expect("loop ran")))
    }

    pub fn get(&self, key: &StoreKey) -> Result<Option<StoreEntry>, StoreError> {
        let dir = self.entry_dir(key);
        if !dir.is_dir() {
            return Ok(None);
        }
        let corrupt = |reason: String| StoreError::CorruptEntry {
            key: key.to_string(),
            reason,
        };
        let meta = read_meta(&dir, key)?;

        let raw_path = dir.join(RAW_FILE);
        let raw = fs::read(&raw_path).map_err(|e| corrupt(format!("{RAW_FILE}: {e}")))?;

        let text_path = dir.join(TEXT_FILE);
        let text = match fs::read(&text_path) {
            Ok(bytes) => {
                Some(String::from_utf8(bytes).map_err(|e| corrupt(format!("{TEXT_FILE}: {e}")))?)
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => None,
            Err(e) => return Err(io_err(&text_path)(e)),
        };

        let diag_path = dir.join(DIAGNOSTICS_FILE);
        let diag_bytes =
            fs::read(&diag_path).map_err(|e| corrupt(format!("{DIAGNOSTICS_FILE}: {e}")))?;
        let diagnostics = serde_json::from_slice(&diag_bytes)
            .map_err(|e| corrupt(format!("{DIAGNOSTICS_FILE}: {e}")))?;

        Ok(Some(StoreEntry {
            key: key.clone(),
            meta,
            raw,
            text,
            diagnostics,
        }))
    }

    /// Every stored entry's metadata, read lazily; bodies are not loaded.
    pub fn list(
        &self,
    ) -> Result<impl Iterator<Item = Result<(StoreKey, EntryMeta), StoreError>>, StoreError> {
        let mut dirs = Vec::new();
        for shard in read_dir_sorted(&self.root)? {
            if !is_shard_name(&shard) || !shard.is_dir() {
                continue;
            }
            for entry in read_dir_sorted(&shard)? {
                let name = entry
                    .file_name()
                    .and_then(|n| n.to_str())
                    .unwrap_or_default();
                if let Some(key) = StoreKey::parse(name) {
                    dirs.push((key, entry));
                }
            }
        }
        Ok(dirs
            .into_iter()
            .map(|(key, dir)| read_meta(&dir, &key).map(|meta| (key, meta))))
    }
}

fn is_shard_name(path: &Path) -> bool {
    path.file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.len() == 2 && n.bytes().all(|b| b.is_ascii_hexdigit()))
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<PathBuf>, StoreError> {
    let mut paths = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(io_err(dir))?;
    paths.sort();
    Ok(paths)
}

fn read_meta(dir: &Path, key: &StoreKey) -> Result<EntryMeta, StoreError> {
    let corrupt = |reason: String| StoreError::CorruptEntry {
        key: key.to_string(),
        reason,
    };
    let bytes = fs::read(dir.join(META_FILE)).map_err(|e| corrupt(format!("{META_FILE}: {e}")))?;
    let meta: EntryMeta =
        serde_json::from_slice(&bytes).map_err(|e| corrupt(format!("{META_FILE}: {e}")))?;
    if key_for_uri(&meta.request_uri) != *key {
        return Err(corrupt(format!(
            "request_uri {} does not hash to the entry key",
            meta.request_uri
        )));
    }
    Ok(meta)
}

fn write_entry_files(dir: &Path, entry: &StoreEntry) -> Result<(), StoreError> {
    let write = |name: &str, bytes: &[u8]| {
        let path = dir.join(name);
        let mut file = File::create(&path).map_err(io_err(&path))?;
        file.write_all(bytes).map_err(io_err(&path))?;
        file.sync_all().map_err(io_err(&path))
    };
    write(RAW_FILE, &entry.raw)?;
    let meta = serde_json::to_vec_pretty(&entry.meta).expect("meta serializes");
    write(META_FILE, &meta)?;
    if let Some(text) = &entry.text {
        write(TEXT_FILE, text.as_bytes())?;
    }
    let diagnostics = serde_json::to_vec_pretty(&entry.diagnostics).expect("diagnostics serialize");
    write(DIAGNOSTICS_FILE, &diagnostics)
}

/// How one attempted URI ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeClass {
    Ok,
    RedirectLimit,
    NetworkError,
    NoscriptCorruption,
    Undecodable,
    UnsupportedMediaType,
}

impl OutcomeClass {
    pub const ALL: [OutcomeClass; 6] = [
        OutcomeClass::Ok,
        OutcomeClass::RedirectLimit,
        OutcomeClass::NetworkError,
        OutcomeClass::NoscriptCorruption,
        OutcomeClass::Undecodable,
        OutcomeClass::UnsupportedMediaType,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeClass::Ok => "ok",
            OutcomeClass::RedirectLimit => "redirect-limit",
            OutcomeClass::NetworkError => "network-error",
            OutcomeClass::NoscriptCorruption => "noscript-corruption",
            OutcomeClass::Undecodable => "undecodable",
            OutcomeClass::UnsupportedMediaType => "unsupported-media-type",
        }
    }
}

impl fmt::Display for OutcomeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OutcomeClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown outcome class `{s}`"))
    }
}

/// One `manifest.tsv` line. `status` is 0 when no response was received.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub key: StoreKey,
    pub request_uri: String,
    pub status: u16,
    pub class: OutcomeClass,
}

impl ManifestRecord {
    pub fn new(request_uri: &str, status: u16, class: OutcomeClass) -> Self {
        Self {
            key: key_for_uri(request_uri),
            request_uri: request_uri.to_string(),
            status,
            class,
        }
    }

    fn to_line(&self) -> Result<String, StoreError> {
        if self.request_uri.contains(['\t', '\n', '\r']) {
            return Err(StoreError::UnrecordableUri(self.request_uri.clone()));
        }
        Ok(format!(
            "{}\t{}\t{}\t{}\n",
            self.key, self.request_uri, self.status, self.class
        ))
    }

    fn from_line(line: &str) -> Result<Self, String> {
        let fields: Vec<&str> = line.split('\t').collect();
        let [key, uri, status, class] = fields[..] else {
            return Err(format!(
                "expected 4 tab-separated fields, found {}",
                fields.len()
            ));
        };
        Ok(Self {
            key: StoreKey::parse(key).ok_or_else(|| format!("bad key `{key}`"))?,
            request_uri: uri.to_string(),
            status: status
                .parse()
                .map_err(|_| format!("bad status `{status}`"))?,
            class: class.parse()?,
        })
    }
}

/// Appends manifest records; safe to share between worker threads.
#[derive(Debug)]
pub struct ManifestWriter {
    path: PathBuf,
    file: Mutex<File>,
}

impl ManifestWriter {
    pub fn open(store: &Store) -> Result<Self, StoreError> {
        let path = store.manifest_path();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn append(&self, record: &ManifestRecord) -> Result<(), StoreError> {
        let line = record.to_line()?;
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        file.write_all(line.as_bytes())
            .and_then(|()| file.flush())
            .map_err(io_err(&self.path))
    }
}

/// All manifest records in file order. Records for a key accumulate across
/// runs; [`Manifest::latest`] gives the current state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    records: Vec<ManifestRecord>,
}

impl Manifest {
    /// Reads `manifest.tsv`; a missing file is an empty manifest.
    pub fn load(store: &Store) -> Result<Self, StoreError> {
        let path = store.manifest_path();
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Self::default()),
            Err(e) => return Err(io_err(&path)(e)),
        };
        let mut records = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err(&path))?;
            if line.is_empty() {
                continue;
            }
            let record =
                ManifestRecord::from_line(&line).map_err(|reason| StoreError::Manifest {
                    path: path.clone(),
                    line: n + 1,
                    reason,
                })?;
            records.push(record);
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[ManifestRecord] {
        &self.records
    }

    /// Last record per key, ordered by each key's first appearance.
    pub fn latest(&self) -> Vec<&ManifestRecord> {
        let mut order: Vec<&StoreKey> = Vec::new();
        let mut last: std::collections::HashMap<&StoreKey, &ManifestRecord> =
            std::collections::HashMap::new();
        for record in &self.records {
            if last.insert(&record.key, record).is_none() {
                order.push(&record.key);
            }
        }
        order.into_iter().map(|k| last[k]).collect()
    }

    pub fn latest_class(&self, key: &StoreKey) -> Option<OutcomeClass> {
        self.records
            .iter()
            .rev()
            .find(|r| &r.key == key)
            .map(|r| r.class)
    }
}
