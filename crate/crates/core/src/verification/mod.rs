//! Deterministic probes and Monte Carlo estimators for the Galerkin system.
//!
//! Every estimator is a pure function of its configuration and master seed:
//! trajectories run in parallel but are merged in index order.

pub mod aldous;
pub mod convergence;
pub mod defect;
pub mod energy;
pub mod martingale;
pub mod probes;
pub mod qv;
pub mod report;
pub mod sphere;
pub mod stats;
pub mod strong;

use crate::error::{Result, ShsimError};
use crate::integrator::SimConfig;

pub use report::{EstimateReport, Record, ReportEntry, Verdict};

/// Absolute tolerance used when a statistic has zero standard error
/// (deterministic inputs), where a `k * SE` band would demand exact zero.
pub const DETERMINISTIC_FLOOR: f64 = 1e-10;

/// Galerkin sizes must be strictly increasing and fit the basis.
pub(crate) fn check_n_list(config: &SimConfig, n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() {
        return Err(ShsimError::config("suite.n_list", "must not be empty"));
    }
    for &n in n_list {
        crate::integrator::check_n(config, n)?;
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ShsimError::config("suite.n_list", "must be strictly increasing"));
    }
    Ok(())
}

/// Grid index of time `t` on the step grid of `config`.
pub(crate) fn step_index(config: &SimConfig, t: f64, key: &str) -> Result<usize> {
    let (n_steps, _) = config.step_count();
    let x = t / config.dt;
    let i = x.round();
    if t < 0.0 || t > config.t_final * (1.0 + 1e-12) {
        return Err(ShsimError::config(key, format!("{t} lies outside [0, T]")));
    }
    if (x - i).abs() > 1e-6 && (t - config.t_final).abs() > 1e-12 {
        return Err(ShsimError::config(key, format!("{t} is not on the step grid dt = {}", config.dt)));
    }
    Ok((i as usize).min(n_steps))
}
