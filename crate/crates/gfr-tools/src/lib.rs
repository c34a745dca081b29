//! Std companion to `gfr-core`: on-disk formats, run configuration, and the
//! batch extraction pipeline behind the `gfr` command-line tool.

pub mod config;
pub mod formats;
pub mod pipeline;
