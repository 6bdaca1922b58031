//! Drivers around `dgquot-core`: instance description files, deterministic
//! report generation, the CDGA file format, and the axiom/stabilization
//! experiment suites.
//!
//! All output formats are structured UTF-8 text with stable key ordering, so
//! repeated runs with a fixed configuration and seed are byte-identical.

pub mod commands;
pub mod config;
pub mod formats;
pub mod report;
pub mod verify;
