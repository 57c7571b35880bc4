//! File formats, instance generators, run reports and the command-line
//! driver around `udgfl-core`.

pub mod config;
pub mod format;
pub mod generate;
pub mod report;

pub use config::RunConfig;
pub use format::{load_instance, parse_instance, Role, SiteRecord};
pub use generate::{generate, Family, GeneratorParams};
pub use report::{run, AuditSummary, RunReport, Timings};
