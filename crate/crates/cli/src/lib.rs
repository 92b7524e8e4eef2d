//! Library side of the `rg2lab` command-line tool: configuration, command runners
//! and the table formats they write.

pub mod commands;
pub mod config;
pub mod formats;

pub use commands::{execute, run, Outcome};
pub use config::{Command, ConfigError, ExperimentConfig, RawConfig};

/// Process exit statuses.
pub mod exit {
    /// Success; for `parabolicity`, a parabolic verdict.
    pub const OK: u8 = 0;
    /// Invalid configuration or a failed computation.
    pub const ERROR: u8 = 1;
    /// Command-line usage error (reported by the argument parser).
    pub const USAGE: u8 = 2;
    pub const BACKWARD_PARABOLIC: u8 = 3;
    pub const DEGENERATE: u8 = 4;
    pub const INDEFINITE: u8 = 5;
    /// `verify` found a failing cross-check.
    pub const VERIFY_FAILED: u8 = 6;
    /// `flow` stopped early on positivity or parabolicity loss; the partial trace is written.
    pub const FLOW_STOPPED: u8 = 7;
}
