//! Statistical suites binding simulations to distributional identities.

mod report;
pub mod stats;
pub mod suites;

use std::time::Instant;

pub use report::{Bound, StatReport};
pub use stats::{ks_one_sample, ks_two_sample, mean_ci, mean_se, poisson_fit, uniform_categories_p};
pub use suites::{default_reps, SUITES};

use crate::error::{usage, Result};

/// Runs a registered suite. `reps` below the common minimum is a usage error.
pub fn run_suite(name: &str, seed: u64, reps: usize) -> Result<StatReport> {
    if default_reps(name).is_none() {
        return usage(format!("unknown suite {name:?}; known: {}", SUITES.join(", ")));
    }
    if reps < stats::MIN_SAMPLES {
        return usage(format!("suite {name} needs at least {} replicas", stats::MIN_SAMPLES));
    }
    let start = Instant::now();
    let mut r = suites::dispatch(name, seed, reps)?;
    r.runtime = start.elapsed().as_secs_f64();
    Ok(r)
}
