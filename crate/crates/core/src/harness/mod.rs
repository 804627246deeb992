//! Instance generation, JSON I/O and the seeded verification suites.

pub mod checks;
pub mod generate;
pub mod io;
pub mod laws;
pub mod suites;

pub use generate::{generate, Instance, InstanceSpec, OracleKind};
pub use suites::{replay_trial, run_suite, Fault, Failure, Suite, SuiteConfig, SuiteReport};
