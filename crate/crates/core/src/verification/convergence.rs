//! Coupled Galerkin refinement: runs for consecutive sizes `n < n'` share one
//! Brownian path, and the estimator reports `E[ sup_t |u_{n'}(t) - u_n(t)|_{L2} ]`.

use crate::error::Result;
use crate::field::SpectralField;
use crate::integrator::{initial_condition, run_ensemble, run_with_path, SimConfig};
use crate::verification::check_n_list;
use crate::verification::report::{EstimateReport, ReportEntry, Verdict};
use crate::verification::stats::MeanSe;

/// Round-off allowance for comparing consecutive differences.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

fn states_on_path(config: &SimConfig, path: &crate::brownian::BrownianPath) -> Result<Vec<SpectralField>> {
    let mut states = vec![initial_condition(&config.u0, config.n_galerkin)?];
    run_with_path(config, path, |s| states.push(s.after.clone()))?;
    Ok(states)
}

fn sup_distance(a: &[SpectralField], b: &[SpectralField]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.sub(y).l2_norm()).fold(0.0, f64::max)
}

/// Key `galerkin-cauchy`; entry `n` holds the difference between `n` and the
/// next size in the list, labelled `n->n'`.
pub fn galerkin_convergence(config: &SimConfig, n_list: &[usize], ensemble: usize) -> Result<EstimateReport> {
    check_n_list(config, n_list)?;
    if n_list.len() < 2 {
        return Ok(EstimateReport::new(
            "galerkin-cauchy",
            Vec::new(),
            Verdict::ReportOnly,
            config.master_seed,
        ));
    }
    let configs: Vec<SimConfig> = n_list.iter().map(|&n| config.with_n(n)).collect();
    let diffs = run_ensemble(ensemble, |traj| {
        let path = config.brownian_path(traj)?;
        let runs = configs
            .iter()
            .map(|c| states_on_path(c, &path))
            .collect::<Result<Vec<_>>>()?;
        Ok(runs.windows(2).map(|w| sup_distance(&w[0], &w[1])).collect::<Vec<f64>>())
    })?;
    let mut entries = Vec::new();
    let mut stats = Vec::new();
    for (i, w) in n_list.windows(2).enumerate() {
        let xs: Vec<f64> = diffs.iter().map(|d| d[i]).collect();
        let m = MeanSe::from_samples(&xs)?;
        entries.push(ReportEntry::new(Some(w[0]), Some(format!("{}->{}", w[0], w[1])), m.mean, m.se, ensemble));
        stats.push(m);
    }
    let monotone = stats.windows(2).all(|w| {
        w[1].mean <= w[0].mean + 2.0 * (w[0].se.powi(2) + w[1].se.powi(2)).sqrt() + ROUNDOFF_FLOOR
    });
    Ok(EstimateReport::new(
        "galerkin-cauchy",
        entries,
        Verdict::from_pass(monotone),
        config.master_seed,
    ))
}
