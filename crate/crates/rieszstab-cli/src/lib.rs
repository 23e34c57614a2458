//! File formats and subcommands of the `rieszstab` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod format;

pub use commands::{cmd_ball, cmd_multipliers, cmd_reduce, cmd_scan, cmd_verify, Output, ScanConfig, VerifyConfig};
pub use error::{CliError, Result};
pub use format::{rayset_from_json, rayset_to_json, report_from_json, report_to_json, Format};
