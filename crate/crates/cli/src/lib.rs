//! Library surface of the `quakecast` CLI: configuration, artifact schemas,
//! and the subcommand implementations, exposed for integration tests.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;
