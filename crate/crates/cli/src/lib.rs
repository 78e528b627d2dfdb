//! Command-line driver for the private-state toolkit: verification suites,
//! bound tables, optimizer runs and state dumps.

pub mod bounds;
pub mod config;
pub mod construct;
pub mod error;
pub mod optimize;
pub mod report;
pub mod suites;

pub use config::{Format, RunConfig, Suite};
pub use error::CliError;
pub use report::{Check, Metadata, Status, Value, VerificationReport};

pub fn metadata(cfg: &RunConfig) -> Metadata {
    Metadata { version: env!("CARGO_PKG_VERSION").to_string(), seed: cfg.seed, config_digest: cfg.digest() }
}

/// Renders a report in the configured format.
pub fn render(report: &VerificationReport, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(report.to_json()),
        Format::Csv => report.to_csv(),
    }
}
