//! Library side of the `nsdi` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod units;

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "NSDI_THREADS";
