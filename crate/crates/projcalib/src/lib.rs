//! File formats, command-line front end and parallel Monte-Carlo runs on
//! top of [`projcalib_core`].
//!
//! All artifacts are JSON except sweep tables, which are CSV. Every artifact
//! records the generator version, the seed and the configuration it was
//! produced with, and is byte-identical across runs with the same inputs.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod runner;

pub use config::RunConfig;
pub use error::CliError;

/// Name and version stamped into every artifact.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Generator {
    pub name: String,
    pub version: String,
}

impl Default for Generator {
    fn default() -> Self {
        Self { name: env!("CARGO_PKG_NAME").to_owned(), version: env!("CARGO_PKG_VERSION").to_owned() }
    }
}
