//! The `ais` command-line orchestrator.

pub mod commands;
pub mod exit;
pub mod server;
pub mod settings;

pub use commands::{run, Cli};
pub use exit::Exit;
