//! Configuration, file formats, run manifests and the stage pipeline behind
//! the `khps` command-line tool.

pub mod config;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod pipeline;
pub mod recipes;
pub mod settings;

pub use config::Config;
pub use error::{Failure, InModule, Result};
