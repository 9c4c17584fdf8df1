//! File formats, JSON reports and subcommands for the `ibl` binary.

pub mod commands;
pub mod error;
pub mod parse;
pub mod report;

pub use commands::{box_cauchy_tuple, cmd_cdp, cmd_classify, cmd_domain, cmd_geometric, cmd_solve, cmd_verify, load, VerifyOptions};
pub use error::{CliError, Result};
pub use parse::{parse_cdp, parse_problem, serialize_problem, CdpFile, Convention, Mode};
