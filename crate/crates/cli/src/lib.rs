//! Command-line front end: configuration, file formats and subcommands.

pub mod commands;
pub mod config;
pub mod io;

use std::path::PathBuf;

/// A malformed invocation, config or input file (exit code 2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Whether a subcommand's checks passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
}

impl Outcome {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Success
        } else {
            Outcome::Failure
        }
    }

    pub fn code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Failure => 1,
        }
    }
}

/// Exit code for an error: 2 for usage and parse problems, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some()
        || err.downcast_ref::<toml::de::Error>().is_some()
        || matches!(
            err.downcast_ref::<adrkit::Error>(),
            Some(adrkit::Error::Usage(_))
        )
    {
        2
    } else {
        1
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub quiet: bool,
    pub jobs: Option<usize>,
}

impl Options {
    pub fn new(config: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            config: config.into(),
            out: out.into(),
            seed: None,
            quiet: true,
            jobs: None,
        }
    }
}
