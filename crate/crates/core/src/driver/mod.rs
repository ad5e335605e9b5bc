//! Run configuration, file formats and the packaged experiments behind the
//! command-line tool.

pub mod config;
pub mod experiments;
pub mod io;

pub use config::RunConfig;
