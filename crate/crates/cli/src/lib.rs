pub mod check;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod experiments;
pub mod run;
pub mod setup;

pub use config::{parse_config, Config, Manifest};
pub use error::{CliError, Result};
