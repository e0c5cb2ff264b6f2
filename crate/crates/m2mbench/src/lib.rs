//! Attribute-level benchmark construction and disentanglement metrics
//! for guided many-to-many image translation.
//!
//! The pipeline: declare an attribute schema and a role partition,
//! filter a labeled corpus into two domains, generate or ingest
//! translation triplets (input, guidance, output attribute vectors), and
//! score them with translation-quality, content-preservation,
//! style-transfer and bias metrics. Reference oracles with known
//! closed-form scores back a self-check mode.

pub mod cli;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod metrics;
pub mod oracles;
pub mod report;
pub mod rng;
pub mod schema;
pub mod selfcheck;
pub mod splitter;

pub use error::{Error, Result};

/// Entry point for the `m2mbench` binary; returns the exit code.
pub fn cli_main() -> i32 {
    cli::main()
}
