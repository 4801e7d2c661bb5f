//! Modulus-of-continuity statistics as a tightness proxy.
//!
//! For each `n` and window `delta` the estimator reports
//! `P( m(u_n, delta) > eps )` with
//! `m(u, delta) = sup_{|t1 - t2| <= delta} |u(t1) - u(t2)|_{L2}` over the
//! recorded grid, then takes the sup over `n` for each `delta`.

use crate::error::{Result, ShsimError};
use crate::integrator::{run_ensemble, simulate, SimConfig};
use crate::verification::report::{EstimateReport, ReportEntry, Verdict};
use crate::verification::stats::MeanSe;
use crate::verification::check_n_list;

/// `m(u, delta)` for every `delta` in `deltas`, from recorded times and states.
pub fn modulus_of_continuity(times: &[f64], states: &[crate::field::SpectralField], deltas: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0f64; deltas.len()];
    let widest = deltas.iter().cloned().fold(0.0, f64::max);
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            let gap = times[j] - times[i];
            if gap > widest * (1.0 + 1e-12) {
                break;
            }
            let d = states[j].sub(&states[i]).l2_norm();
            for (mk, &delta) in m.iter_mut().zip(deltas) {
                if gap <= delta * (1.0 + 1e-12) && d > *mk {
                    *mk = d;
                }
            }
        }
    }
    m
}

fn check_deltas(config: &SimConfig, deltas: &[f64]) -> Result<()> {
    let resolution = config.dt * config.record_every as f64;
    if deltas.is_empty() {
        return Err(ShsimError::config("suite.delta_list", "must not be empty"));
    }
    if deltas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ShsimError::config("suite.delta_list", "must be strictly increasing"));
    }
    if deltas[0] < resolution * (1.0 - 1e-12) {
        return Err(ShsimError::config(
            "suite.delta_list",
            format!("delta {} is below the recorded grid resolution {resolution}", deltas[0]),
        ));
    }
    if *deltas.last().expect("non-empty") > config.t_final * (1.0 + 1e-12) {
        return Err(ShsimError::config("suite.delta_list", "every delta must be at most T"));
    }
    Ok(())
}

/// Key `aldous`. Entries labelled `delta=..` carry the per-`n` estimates;
/// entries labelled `sup delta=..` the sup over `n`.
pub fn aldous_statistic(
    config: &SimConfig,
    n_list: &[usize],
    deltas: &[f64],
    eps: f64,
    ensemble: usize,
) -> Result<EstimateReport> {
    check_n_list(config, n_list)?;
    check_deltas(config, deltas)?;
    if ensemble < 2 {
        return Err(ShsimError::Precondition("ensemble must be at least 2".into()));
    }
    if !(eps > 0.0) {
        return Err(ShsimError::config("suite.epsilon", "must be positive"));
    }
    let configs: Vec<SimConfig> = n_list.iter().map(|&n| config.with_n(n)).collect();
    // exceed[traj][n][delta]
    let exceed = run_ensemble(ensemble, |traj| {
        configs
            .iter()
            .map(|c| {
                let tr = simulate(c, traj)?;
                Ok(modulus_of_continuity(&tr.times, &tr.states, deltas)
                    .into_iter()
                    .map(|m| m > eps)
                    .collect::<Vec<bool>>())
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut entries = Vec::new();
    let mut sups = Vec::with_capacity(deltas.len());
    for (d, &delta) in deltas.iter().enumerate() {
        let mut best: Option<MeanSe> = None;
        for (i, &n) in n_list.iter().enumerate() {
            let hits = exceed.iter().filter(|t| t[i][d]).count();
            let p = MeanSe::proportion(hits, ensemble);
            entries.push(ReportEntry::new(Some(n), Some(format!("delta={delta}")), p.mean, p.se, ensemble));
            if best.is_none_or(|b| p.mean > b.mean) {
                best = Some(p);
            }
        }
        let b = best.expect("n_list is non-empty");
        entries.push(ReportEntry::new(None, Some(format!("sup delta={delta}")), b.mean, b.se, ensemble));
        sups.push(b);
    }
    // Shrinking delta must not raise the sup beyond two standard errors.
    let monotone = sups
        .windows(2)
        .all(|w| w[0].mean <= w[1].mean + 2.0 * (w[0].se.powi(2) + w[1].se.powi(2)).sqrt());
    Ok(EstimateReport::new(
        "aldous",
        entries,
        Verdict::from_pass(monotone),
        config.master_seed,
    ))
}
