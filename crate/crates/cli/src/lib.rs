//! The `libdex` command-line tool and HTTP API.

pub mod api;
mod cli;
pub mod engine;

pub use cli::{run, EXIT_INVALID, EXIT_USAGE};
