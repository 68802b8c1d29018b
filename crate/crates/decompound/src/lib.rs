//! Std companion to `decompound-core`: file formats, parallel experiment
//! runners, and the `decompound` command-line front end.

pub mod cli;
pub mod io;
pub mod parallel;

pub use cli::run;
