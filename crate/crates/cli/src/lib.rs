//! Command implementations behind the `pipeflow` binary.

pub mod commands;
pub mod config;
pub mod error;
