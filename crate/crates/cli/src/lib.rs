//! File-level front end for `lvseg-core`: PGM/PPM I/O, key-value configs,
//! run modes and the metrics CSV.

pub mod config;
pub mod error;
pub mod pnm;
pub mod report;
pub mod run;

pub use error::{CliError, ImageError, Result};
pub use run::{run, Mode, PhantomSpec, RunManifest, RunSummary};
