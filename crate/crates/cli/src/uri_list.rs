use std::fs;
use std::path::{Path, PathBuf};

use url::Url;

#[derive(Debug, thiserror::Error)]
pub enum UriListError {
    #[error("cannot read URI list {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: invalid URI `{uri}`: {reason}")]
    InvalidUri {
        line: usize,
        uri: String,
        reason: String,
    },
}

/// Reads one URI per line. Blank lines and lines starting with `#` are
/// skipped, surrounding whitespace is trimmed, order and duplicates are kept.
pub fn read_uri_list(path: &Path) -> Result<Vec<String>, UriListError> {
    let text = fs::read_to_string(path).map_err(|source| UriListError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_uri_list(&text)
}

pub fn parse_uri_list(text: &str) -> Result<Vec<String>, UriListError> {
    let mut uris = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let invalid = |reason: String| UriListError::InvalidUri {
            line: i + 1,
            uri: line.to_string(),
            reason,
        };
        if line.contains(char::is_whitespace) {
            return Err(invalid("contains whitespace".into()));
        }
        let url = Url::parse(line).map_err(|e| invalid(e.to_string()))?;
        if !matches!(url.scheme(), "http" | "https") {
            return Err(invalid(format!("unsupported scheme `{}`", url.scheme())));
        }
        uris.push(line.to_string());
    }
    Ok(uris)
}
