//! JSON front end: problem files, example builders, command dispatch and
//! machine-readable reports.

pub mod commands;
pub mod error;
pub mod report;
pub mod spec;

pub use commands::{parse_parameter, run_command, Command, Flags};
pub use error::{CliError, Result};
pub use report::{CheckEntry, Report};
pub use spec::{build_example, parse_spec, parse_spec_str, ExampleParams, ProblemSpec};
