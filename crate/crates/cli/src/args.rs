use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use memharvest_core::{builtin_rules, FetchPolicy, RuleSet};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "memharvest",
    version,
    about = "Fetch mementos and extract comparable text"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resolve one URI and print its redirect chain and final status.
    Fetch {
        uri: String,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Print the normalized text of a URI, or of a stored entry by key.
    Extract {
        /// A URI, or a 64-hex store key (needs --store).
        target: String,
        /// Read from this store instead of fetching when the entry exists.
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long)]
        strict_decode: bool,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Fetch and extract every URI of a list into a store. Resumable.
    Pipeline {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        workers: u16,
        #[arg(long)]
        strict_decode: bool,
        /// Also write the report table here, and JSON to PATH.json.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Print outcome-class counts for a store.
    Report {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct PolicyArgs {
    /// Extra archive rules, merged over the built-in ones.
    #[arg(long, env = "MEMHARVEST_RULES", value_name = "PATH")]
    pub rules: Option<PathBuf>,
    /// Requests per second per host.
    #[arg(long, value_name = "FLOAT")]
    pub rate: Option<f64>,
    #[arg(long, value_name = "INT")]
    pub retries: Option<u32>,
    #[arg(long, value_name = "INT")]
    pub max_redirects: Option<u32>,
    #[arg(long, value_name = "SECONDS")]
    pub timeout: Option<f64>,
    #[arg(long, value_name = "STRING")]
    pub user_agent: Option<String>,
}

impl PolicyArgs {
    pub fn policy(&self) -> Result<FetchPolicy, CliError> {
        let mut policy = FetchPolicy::default();
        if let Some(rate) = self.rate {
            if !(rate.is_finite() && rate > 0.0) {
                return Err(CliError::Usage(format!(
                    "--rate must be a positive number, got {rate}"
                )));
            }
            policy.per_host_rate = rate;
        }
        if let Some(retries) = self.retries {
            policy.retry_attempts = retries;
        }
        if let Some(max) = self.max_redirects {
            policy.max_redirects = max;
        }
        if let Some(secs) = self.timeout {
            policy.request_timeout = Duration::try_from_secs_f64(secs)
                .ok()
                .filter(|d| !d.is_zero())
                .ok_or_else(|| {
                    CliError::Usage(format!("--timeout must be a positive number, got {secs}"))
                })?;
        }
        if let Some(ua) = &self.user_agent {
            policy.user_agent = ua.clone();
        }
        policy
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(policy)
    }

    pub fn rules(&self) -> Result<RuleSet, CliError> {
        let Some(path) = &self.rules else {
            return Ok(builtin_rules());
        };
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        builtin_rules()
            .merged_with(&text)
            .map_err(|source| CliError::Rules {
                path: path.clone(),
                source,
            })
    }
}
