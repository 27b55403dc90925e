//! File formats, run configuration and subcommands around `anqs-core`.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod fcidump;
pub mod pauli_json;
pub mod problem;
