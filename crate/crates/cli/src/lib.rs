//! Command-line front end: scenario parsing, result emission (CSV/JSON/SVG)
//! and the `run` / `sweep` / `coverage` / `validate` subcommands.

pub mod commands;
pub mod output;
pub mod scenario;
pub mod svg;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("{path}: missing required keys:\n  {}", keys.join("\n  "))]
    MissingKeys { path: String, keys: Vec<String> },

    #[error("invalid scenario:\n  {}", problems.join("\n  "))]
    Invalid { problems: Vec<String> },

    #[error(transparent)]
    Core(#[from] seawatch_core::Error),

    #[error("{0}")]
    Output(String),
}
