//! Library half of the `attrisk` command-line tool: count-file ingestion,
//! command implementations and report rendering.

pub mod commands;
pub mod dataset;
pub mod error;
pub mod report;

pub use commands::{
    cmd_estimate, cmd_exact_bias, cmd_min_controls, cmd_simulate, cmd_table1, BandCheck,
    ExactBiasReport, MinControlsReport, SimulateReport, Table1Report,
};
pub use dataset::{parse_dataset, StratifiedDataset, Stratum};
pub use error::{CliError, Result};
pub use report::{render_estimates, OutputFormat, ReportRow};
