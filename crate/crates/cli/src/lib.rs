//! Config parsing, command dispatch and verification suites for the
//! `quasilab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod run;
pub mod verify;

pub use config::{parse_config, parse_config_for, Command, RunConfig};
pub use error::CliError;
