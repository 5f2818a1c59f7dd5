//! The `seedseg` command-line tool and HTTP service.

pub mod cli;
pub mod pipeline;
pub mod server;

pub use cli::run_cli;
