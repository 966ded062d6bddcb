//! Command implementations behind the `recind` binary.
//!
//! Each subcommand is a library function so tests can drive it without a
//! subprocess; `main.rs` only parses arguments and maps errors to exit codes.

pub mod bench;
pub mod config;
pub mod decompose;
pub mod error;
pub mod exact;
pub mod indicators;
pub mod input;
pub mod output;
pub mod simulate;

use std::fmt;
use std::str::FromStr;

use recind_core::SemanticsMode;

pub use error::{CliError, CliResult};

/// Environment variable bounding worker threads. Results never depend on it.
pub const THREADS_ENV: &str = "RECIND_THREADS";

/// Value of the `--mode` flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeSelection {
    Chain,
    Dominance,
    Both,
}

impl ModeSelection {
    pub fn modes(self) -> Vec<SemanticsMode> {
        match self {
            ModeSelection::Chain => vec![SemanticsMode::Chain],
            ModeSelection::Dominance => vec![SemanticsMode::Dominance],
            ModeSelection::Both => SemanticsMode::ALL.to_vec(),
        }
    }
}

impl fmt::Display for ModeSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeSelection::Chain => "chain",
            ModeSelection::Dominance => "dominance",
            ModeSelection::Both => "both",
        })
    }
}

impl FromStr for ModeSelection {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chain" => Ok(ModeSelection::Chain),
            "dominance" => Ok(ModeSelection::Dominance),
            "both" => Ok(ModeSelection::Both),
            other => Err(CliError::input(format!("unknown mode '{other}' (chain, dominance, both)"))),
        }
    }
}

/// Thread pool sized by `RECIND_THREADS`, or `None` to use the default pool.
pub fn thread_pool_from_env() -> CliResult<Option<rayon::ThreadPool>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t >= 1)
        .ok_or_else(|| CliError::input(format!("{THREADS_ENV} must be an integer >= 1, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Some)
        .map_err(|e| CliError::input(format!("cannot build thread pool: {e}")))
}
