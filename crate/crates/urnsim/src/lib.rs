//! Command-line companion to `urn-core`: file formats, config handling,
//! thread-pool executors and the `urnsim` commands.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;
pub mod provenance;
pub mod verify;
