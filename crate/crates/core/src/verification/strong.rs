//! Pathwise comparisons under `dt` refinement on coupled Brownian paths.

use crate::error::Result;
use crate::field::SpectralField;
use crate::integrator::{initial_condition, run_ensemble, run_with_path, Scheme, SimConfig};
use crate::verification::report::{EstimateReport, ReportEntry, Verdict};
use crate::verification::sphere::refined;
use crate::verification::stats::{observed_order, MeanSe};

pub const MIN_STRONG_ORDER: f64 = 0.4;

fn states(config: &SimConfig, path: &crate::brownian::BrownianPath) -> Result<Vec<SpectralField>> {
    let mut out = vec![initial_condition(&config.u0, config.n_galerkin)?];
    run_with_path(config, path, |s| out.push(s.after.clone()))?;
    Ok(out)
}

fn order_report(key: &str, config: &SimConfig, dts: &[f64], stats: Vec<MeanSe>, ensemble: usize) -> EstimateReport {
    let means: Vec<f64> = stats.iter().map(|m| m.mean).collect();
    let order = observed_order(dts, &means);
    let mut entries: Vec<ReportEntry> = dts
        .iter()
        .zip(&stats)
        .map(|(dt, m)| ReportEntry::new(Some(config.n_galerkin), Some(format!("dt={dt}")), m.mean, m.se, ensemble))
        .collect();
    entries.push(ReportEntry::new(Some(config.n_galerkin), Some("order".into()), order, 0.0, ensemble));
    let ok = order.is_finite() && order >= MIN_STRONG_ORDER;
    EstimateReport::new(key, entries, Verdict::from_pass(ok), config.master_seed)
}

/// Key `ito-strat-gap`: `E[ sup_t |u_euler_ito(t) - u_heun_strat(t)| ]` with
/// both schemes driven by the same increments, for each step size.
pub fn ito_stratonovich_gap(config: &SimConfig, dts: &[f64], ensemble: usize) -> Result<EstimateReport> {
    let configs = refined(config, dts)?;
    let mut stats = Vec::new();
    for c in &configs {
        let ito = c.with_scheme(Scheme::EulerIto);
        let heun = c.with_scheme(Scheme::HeunStrat);
        let gaps = run_ensemble(ensemble, |traj| {
            let path = c.brownian_path(traj)?;
            let a = states(&ito, &path)?;
            let b = states(&heun, &path)?;
            Ok(a.iter().zip(&b).map(|(x, y)| x.sub(y).l2_norm()).fold(0.0, f64::max))
        })?;
        stats.push(MeanSe::from_samples(&gaps)?);
    }
    Ok(order_report("ito-strat-gap", config, dts, stats, ensemble))
}

/// Key `strong-order`: `E[ sup_t |u_dt(t) - u_ref(t)| ]` over the coarse grid,
/// against a reference run at `min(dts) / 8` on the refined Brownian path.
pub fn strong_self_convergence(config: &SimConfig, dts: &[f64], ensemble: usize) -> Result<EstimateReport> {
    let finest = *dts.last().unwrap_or(&config.dt);
    let mut all = dts.to_vec();
    all.push(finest / 8.0);
    let configs = refined(config, &all)?;
    let (reference, runs) = configs.split_last().expect("at least two configs");
    let errs = run_ensemble(ensemble, |traj| {
        let ref_states = states(reference, &reference.brownian_path(traj)?)?;
        runs.iter()
            .map(|c| {
                let s = states(c, &c.brownian_path(traj)?)?;
                let stride = ((c.dt / reference.dt).round() as usize).max(1);
                Ok(s.iter()
                    .enumerate()
                    .map(|(i, u)| u.sub(&ref_states[(i * stride).min(ref_states.len() - 1)]).l2_norm())
                    .fold(0.0, f64::max))
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let stats = (0..runs.len())
        .map(|i| MeanSe::from_samples(&errs.iter().map(|e| e[i]).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    Ok(order_report("strong-order", config, dts, stats, ensemble))
}
