//! Named numerical verifications built on `varharm-core`, with JSON configs and reports.

pub mod checks;
pub mod config;
pub mod report;

pub use checks::{find, run, run_settings, settings_for, targets};
pub use config::{ExperimentConfig, Settings};
pub use report::VerificationReport;
