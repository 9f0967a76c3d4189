//! Configuration, sweep orchestration and result files for `nsklim`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod config;
pub mod experiment;
pub mod initial;
pub mod output;
pub mod plot;

pub use config::{ConfigError, Experiment, RunConfig};
pub use experiment::{run_experiment, SweepRecord};
pub use output::emit_outputs;

/// Environment variable bounding the worker thread count.
pub const THREADS_VAR: &str = "NSKLIM_THREADS";

/// Parses a thread bound; `None` and empty strings mean "no bound".
pub fn parse_threads(value: Option<&str>) -> Result<Option<usize>, ConfigError> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError::Invalid(format!("{THREADS_VAR} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Applies `NSKLIM_THREADS` to the global worker pool and returns the
/// resulting thread count.
pub fn configure_threads() -> Result<usize, ConfigError> {
    let bound = parse_threads(std::env::var(THREADS_VAR).ok().as_deref())?;
    #[cfg(feature = "parallel")]
    if let Some(n) = bound {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("worker pool already initialised: {e}");
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = bound;
    Ok(nsklim_core::exec::threads())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_bound_parsing() {
        assert_eq!(parse_threads(None).unwrap(), None);
        assert_eq!(parse_threads(Some(" 4 ")).unwrap(), Some(4));
        assert!(parse_threads(Some("0")).is_err());
        assert!(parse_threads(Some("many")).is_err());
    }
}
