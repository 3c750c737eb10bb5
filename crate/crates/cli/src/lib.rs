//! Support library of the `cod` command-line tool: number formatting,
//! coefficient expressions, config files, CSV/JSON IO and the acceptance
//! suite.

pub mod app;
pub mod config;
pub mod expr;
pub mod format;
pub mod io;
pub mod verify;
