//! Sphere invariance of the discrete schemes.

use crate::error::{Result, ShsimError};
use crate::integrator::{run_ensemble, run_with, Scheme, SimConfig};
use crate::verification::report::{EstimateReport, ReportEntry, Verdict};
use crate::verification::stats::{observed_order, MeanSe};

pub const RENORMALIZED_TOL: f64 = 1e-12;
pub const MIN_DRIFT_ORDER: f64 = 0.8;

/// Configs on a shared Brownian tree rooted at the coarsest step.
pub(crate) fn refined(config: &SimConfig, dts: &[f64]) -> Result<Vec<SimConfig>> {
    if dts.len() < 2 {
        return Err(ShsimError::config("suite.dt_list", "needs at least two step sizes"));
    }
    if dts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ShsimError::config("suite.dt_list", "must be strictly decreasing"));
    }
    let root = dts[0];
    let out: Vec<SimConfig> = dts
        .iter()
        .map(|&dt| {
            let mut c = config.with_dt(dt);
            c.noise_root_dt = Some(root);
            c
        })
        .collect();
    for c in &out {
        c.validate()?;
    }
    Ok(out)
}

/// Key `sphere-drift`: `E| |u(T)|^2 - 1 |` of the raw (not renormalized)
/// scheme for each step size, and the observed order in `dt`. A trajectory
/// that trips the blow-up guard counts as an unbounded defect; the mean over
/// the remaining ones is reported under `survivors dt=..`.
pub fn sphere_drift(config: &SimConfig, dts: &[f64], ensemble: usize) -> Result<EstimateReport> {
    let mut raw = config.clone();
    raw.renormalize = false;
    let configs = refined(&raw, dts)?;
    let mut entries = Vec::new();
    let mut means = Vec::new();
    let mut any_diverged = false;
    for (c, &dt) in configs.iter().zip(dts) {
        let samples = run_ensemble(ensemble, |traj| match run_with(c, traj, |_| {}) {
            Ok((_, u, _)) => Ok(Some((u.l2_norm_sq() - 1.0).abs())),
            Err(ShsimError::Integration { .. }) => Ok(None),
            Err(e) => Err(e),
        })?;
        let ok: Vec<f64> = samples.iter().flatten().copied().collect();
        let diverged = ensemble - ok.len();
        let m = if diverged == 0 {
            MeanSe::from_samples(&ok)?
        } else {
            any_diverged = true;
            if ok.len() >= 2 {
                let s = MeanSe::from_samples(&ok)?;
                entries.push(ReportEntry::new(
                    Some(c.n_galerkin),
                    Some(format!("survivors dt={dt}")),
                    s.mean,
                    s.se,
                    ok.len(),
                ));
            }
            MeanSe {
                mean: f64::INFINITY,
                se: f64::INFINITY,
                count: ensemble,
            }
        };
        means.push(m.mean);
        entries.push(ReportEntry::new(Some(c.n_galerkin), Some(format!("dt={dt}")), m.mean, m.se, ensemble));
        entries.push(ReportEntry::new(
            Some(c.n_galerkin),
            Some(format!("diverged dt={dt}")),
            diverged as f64,
            0.0,
            ensemble,
        ));
    }
    let order = if any_diverged { f64::NAN } else { observed_order(dts, &means) };
    entries.push(ReportEntry::new(Some(config.n_galerkin), Some("order".into()), order, 0.0, ensemble));
    let ok = !any_diverged && order >= MIN_DRIFT_ORDER;
    Ok(EstimateReport::new("sphere-drift", entries, Verdict::from_pass(ok), config.master_seed))
}

/// Key `sphere-renormalized`: pathwise `max_t | |u(t)|^2 - 1 |` over every
/// step and trajectory, for each scheme with renormalization on.
pub fn renormalized_invariance(config: &SimConfig, ensemble: usize) -> Result<EstimateReport> {
    let mut entries = Vec::new();
    let mut ok = true;
    for scheme in [Scheme::EulerIto, Scheme::HeunStrat, Scheme::ExpEulerIto] {
        let mut c = config.with_scheme(scheme);
        c.renormalize = true;
        let worst = run_ensemble(ensemble, |traj| {
            let mut w = 0.0f64;
            let (u0, _, _) = run_with(&c, traj, |s| {
                w = w.max((s.after.l2_norm_sq() - 1.0).abs());
            })?;
            Ok(w.max((u0.l2_norm_sq() - 1.0).abs()))
        })?
        .into_iter()
        .fold(0.0, f64::max);
        ok &= worst <= RENORMALIZED_TOL;
        entries.push(ReportEntry::new(Some(c.n_galerkin), Some(scheme.name().to_string()), worst, 0.0, ensemble));
    }
    Ok(EstimateReport::new("sphere-renormalized", entries, Verdict::from_pass(ok), config.master_seed))
}
