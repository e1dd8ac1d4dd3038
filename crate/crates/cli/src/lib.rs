//! Library half of the `kappa` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
