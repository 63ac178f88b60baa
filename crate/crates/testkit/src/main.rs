use std::io::BufRead;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use memharvest_testkit::{build_corpus, serve, Scenario};

/// Replay server and fixture corpus for memharvest.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve a scenario file until stdin closes.
    Serve { scenario: PathBuf },
    /// Write the fixture corpus and its manifest.json to a directory.
    Corpus { output: PathBuf },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Serve { scenario } => {
            let server = serve(Scenario::load(&scenario)?)?;
            println!("{}", server.base_url());
            for _ in std::io::stdin().lock().lines() {}
            for entry in server.shutdown() {
                eprintln!("{} {} {}", entry.status, entry.method, entry.url);
            }
        }
        Command::Corpus { output } => {
            let manifest = build_corpus(&output)?;
            println!(
                "{} fixtures written to {}",
                manifest.entries.len(),
                output.display()
            );
        }
    }
    Ok(())
}
