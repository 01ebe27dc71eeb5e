//! Command-line front end, file formats and thread-parallel Monte Carlo on
//! top of `hyperbar-core`.

pub mod cli;
pub mod error;
pub mod model_file;
pub mod output;
pub mod parallel;
pub mod quotes;

pub use error::CliError;
