//! Experiment runner for `kcomp-core`: config files, seeded trials, CSV and
//! JSON artifacts.

pub mod config;
pub mod experiment;
pub mod format;
pub mod generate;
pub mod output;
pub mod seed;

use kcomp_core::instance::{induce_threshold_class, HypothesisClass, TabularInstance};
use kcomp_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] Error),
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const CAPACITY: i32 = 3;
    pub const NON_CONVERGENCE: i32 = 4;
    pub const RATE_UNDEFINED: i32 = 5;
    pub const INFEASIBLE: i32 = 6;
    pub const IO: i32 = 7;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io(_) => exit::IO,
            CliError::Core(e) => match e {
                Error::Capacity { .. } => exit::CAPACITY,
                Error::NonConvergence { .. } => exit::NON_CONVERGENCE,
                Error::RateUndefined(_) => exit::RATE_UNDEFINED,
                Error::InfeasiblePolytope | Error::Unbounded => exit::INFEASIBLE,
                _ => exit::OTHER,
            },
        }
    }
}

/// Exit code for an error chain; errors not raised by this crate map to 1.
pub fn exit_code(error: &anyhow::Error) -> i32 {
    if let Some(e) = error.downcast_ref::<CliError>() {
        return e.exit_code();
    }
    if let Some(e) = error.downcast_ref::<Error>() {
        return CliError::Core(e.clone()).exit_code();
    }
    exit::OTHER
}

/// Threshold class when every point has a coordinate, otherwise all
/// dichotomies of the support.
pub fn default_class(instance: &TabularInstance) -> Result<HypothesisClass, CliError> {
    if instance.points().iter().all(|p| p.coord.is_some()) {
        Ok(induce_threshold_class(instance.points())?)
    } else {
        Ok(HypothesisClass::all_dichotomies(instance.len())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let errors = [
            CliError::Config("x".into()),
            CliError::Io("x".into()),
            CliError::Core(Error::Capacity { required: 2, cap: 1 }),
            CliError::Core(Error::NonConvergence { iterations: 3 }),
            CliError::Core(Error::RateUndefined("x")),
            CliError::Core(Error::InfeasiblePolytope),
            CliError::Core(Error::EmptyClass),
        ];
        let mut codes: Vec<i32> = errors.iter().map(CliError::exit_code).collect();
        assert_eq!(codes, vec![2, 7, 3, 4, 5, 6, 1]);
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), errors.len());
        assert!(!codes.contains(&exit::OK));
    }

    #[test]
    fn anyhow_chains_keep_their_code() {
        let e = anyhow::Error::new(CliError::Core(Error::Capacity { required: 2, cap: 1 })).context("running");
        assert_eq!(exit_code(&e), exit::CAPACITY);
        let e = anyhow::Error::new(Error::NonConvergence { iterations: 1 });
        assert_eq!(exit_code(&e), exit::NON_CONVERGENCE);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), exit::OTHER);
    }
}
