//! Driver for the `ruusc` verifiers: parses JSON problem specs, runs them and
//! writes JSON/CSV reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod runner;
pub mod spec;
pub mod statements;

pub use runner::{run_spec, run_suite, SpecResult, SuiteResult};
pub use spec::{Expect, ProblemSpec, RunSettings, SpecError};
pub use statements::{Outcome, Params, STATEMENTS};
