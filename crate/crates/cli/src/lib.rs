//! File formats and orchestration behind the `hyperflock` command: JSON
//! configs and presets, single runs with CSV diagnostics and a manifest,
//! parameter sweeps and the verification suites.

pub mod config;
pub mod output;
pub mod run;
pub mod sweep;
pub mod verify;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// A run ended early, a check failed or an artifact could not be written.
    pub const FAILED: u8 = 1;
    /// Bad arguments or a malformed configuration.
    pub const USAGE: u8 = 2;
}
