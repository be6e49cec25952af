//! Library half of the `fnbound` experiment runner.
//!
//! The binary is a thin argument parser; everything it does lives here so
//! integration tests can drive commands directly. The split is:
//!
//! * [`config`] — the JSON experiment schema and `--set` overrides.
//! * [`pipeline`] — dataset assembly and the seeded single-run primitive
//!   that every command builds on.
//! * [`report`] — CSV, PGM, and SVG emission with stable formats.
//! * [`commands`] — one function per subcommand.

pub mod commands;
pub mod config;
pub mod pipeline;
pub mod report;
