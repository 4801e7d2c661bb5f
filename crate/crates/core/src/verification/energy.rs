//! Monte Carlo estimates of the a-priori energy bounds
//!
//! ```text
//! K1 ~ E[ sup_t ||u_n||^2_V ]
//! K2 ~ E[ sup_t ||u_n||^{2n}_{L^{2n}} ]
//! K3 ~ E[ int_0^T ||u_n||^2_{D(A)} dt ]
//! ```
//!
//! estimated for several Galerkin sizes on shared Brownian paths, with a
//! check that none of them grows with `n`.

use crate::error::{Result, ShsimError};
use crate::integrator::{run_with_path, Diagnostics, SimConfig};
use crate::verification::report::{EstimateReport, ReportEntry, Verdict};
use crate::verification::stats::{weighted_trend, MeanSe};
use crate::verification::{check_n_list, DETERMINISTIC_FLOOR};

pub const MIN_ENSEMBLE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub sup_v_sq: f64,
    pub sup_l2n: f64,
    pub int_da_sq: f64,
}

/// Sup statistics over every step of one trajectory and the left-rule integral.
pub fn energy_sample(config: &SimConfig, trajectory: u64) -> Result<EnergySample> {
    let path = config.brownian_path(trajectory)?;
    sample_on_path(config, &path)
}

fn sample_on_path(config: &SimConfig, path: &crate::brownian::BrownianPath) -> Result<EnergySample> {
    let n_exp = config.params.n_exp;
    let mut acc: Option<EnergySample> = None;
    run_with_path(config, path, |s| {
        let a = acc.get_or_insert_with(|| {
            let d = Diagnostics::of(s.before, n_exp);
            EnergySample {
                sup_v_sq: d.v_norm_sq,
                sup_l2n: d.l2n_norm,
                int_da_sq: 0.0,
            }
        });
        a.int_da_sq += s.before.norms().da_sq * (s.t1 - s.t0);
        let d = Diagnostics::of(s.after, n_exp);
        a.sup_v_sq = a.sup_v_sq.max(d.v_norm_sq);
        a.sup_l2n = a.sup_l2n.max(d.l2n_norm);
    })?;
    acc.ok_or_else(|| ShsimError::Precondition("trajectory has no steps".into()))
}

/// Outcome of the growth test for one estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthTrend {
    /// Slope of the means against `ln n`.
    pub slope: f64,
    pub se: f64,
    pub within_se: bool,
    pub within_factor_two: bool,
}

impl GrowthTrend {
    pub fn passed(&self) -> bool {
        self.within_se || self.within_factor_two
    }
}

pub fn growth_trend(ns: &[usize], means: &[f64], ses: &[f64]) -> GrowthTrend {
    let (slope, se) = if ns.len() < 2 {
        (0.0, 0.0)
    } else {
        let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        weighted_trend(&x, means, ses)
    };
    let scale = means.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let within_se = slope.abs() <= 2.0 * se + DETERMINISTIC_FLOOR * scale.max(1.0);
    let mut sorted = means.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.is_empty() {
        0.0
    } else if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    let within_factor_two = means
        .iter()
        .all(|&m| m.abs() <= 2.0 * median.abs() && median.abs() <= 2.0 * m.abs());
    GrowthTrend {
        slope,
        se,
        within_se,
        within_factor_two,
    }
}

/// `[K1, K2, K3]` reports, keys `energy-K1`, `energy-K2`, `energy-K3`.
pub fn energy_estimates(config: &SimConfig, n_list: &[usize], ensemble: usize) -> Result<[EstimateReport; 3]> {
    if ensemble < MIN_ENSEMBLE {
        return Err(ShsimError::Precondition(format!(
            "energy estimates need an ensemble of at least {MIN_ENSEMBLE}, got {ensemble}"
        )));
    }
    check_n_list(config, n_list)?;
    let configs: Vec<SimConfig> = n_list.iter().map(|&n| config.with_n(n)).collect();
    let samples = crate::integrator::run_ensemble(ensemble, |traj| {
        let path = config.brownian_path(traj)?;
        configs.iter().map(|c| sample_on_path(c, &path)).collect::<Result<Vec<_>>>()
    })?;

    let pick: [fn(&EnergySample) -> f64; 3] = [|s| s.sup_v_sq, |s| s.sup_l2n, |s| s.int_da_sq];
    let keys = ["energy-K1", "energy-K2", "energy-K3"];
    let mut out = Vec::with_capacity(3);
    for (key, f) in keys.iter().zip(pick) {
        let mut entries = Vec::new();
        let (mut means, mut ses) = (Vec::new(), Vec::new());
        for (i, &n) in n_list.iter().enumerate() {
            let xs: Vec<f64> = samples.iter().map(|per_n| f(&per_n[i])).collect();
            let m = MeanSe::from_samples(&xs)?;
            means.push(m.mean);
            ses.push(m.se);
            entries.push(ReportEntry::new(Some(n), None, m.mean, m.se, ensemble));
        }
        let trend = growth_trend(n_list, &means, &ses);
        entries.push(ReportEntry::new(
            None,
            Some("trend_slope".to_string()),
            trend.slope,
            trend.se,
            ensemble,
        ));
        out.push(EstimateReport::new(
            *key,
            entries,
            Verdict::from_pass(trend.passed()),
            config.master_seed,
        ));
    }
    let [a, b, c]: [EstimateReport; 3] = out.try_into().expect("three reports");
    Ok([a, b, c])
}
