//! Realized quadratic variation of the Galerkin martingale part.
//!
//! With `M_n(t) = u_n(t) - u_n(0) - int_0^t drift_ito(u_n) dp` (left-endpoint
//! rule on the step grid), compares
//!
//! ```text
//! realized   sum_i |M_n(t_{i+1}) - M_n(t_i)|^2
//! predicted  sum_k int_0^T |B_k(u_n)|^2 dp
//! ```

use crate::error::{Result, ShsimError};
use crate::field::SpectralField;
use crate::integrator::{initial_condition, run_ensemble, run_with, SimConfig, Stepper};
use crate::verification::report::{EstimateReport, ReportEntry, Verdict};
use crate::verification::stats::MeanSe;
use crate::verification::DETERMINISTIC_FLOOR;

pub const MIN_STEPS: usize = 100;
pub const REL_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QvSample {
    pub realized: f64,
    pub predicted: f64,
}

/// Martingale increment of one step: `after - before - drift_ito(before) * h`.
pub(crate) fn martingale_increment(
    stepper: &Stepper<'_>,
    before: &SpectralField,
    after: &SpectralField,
    h: f64,
) -> SpectralField {
    let mut dm = after.sub(before);
    dm.axpy(-h, &stepper.drift_ito(before));
    dm
}

pub fn qv_sample(config: &SimConfig, trajectory: u64) -> Result<QvSample> {
    let stepper = Stepper::new(config)?;
    let mut s = QvSample {
        realized: 0.0,
        predicted: 0.0,
    };
    run_with(config, trajectory, |st| {
        let h = st.t1 - st.t0;
        s.realized += martingale_increment(&stepper, st.before, st.after, h).l2_norm_sq();
        s.predicted += h * stepper
            .noise_fields(st.before)
            .iter()
            .map(|b| b.l2_norm_sq())
            .sum::<f64>();
    })?;
    Ok(s)
}

/// Ensemble means and the relative error `|E R - E P| / E P`, with a standard
/// error from the per-trajectory differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QvEstimate {
    pub realized: MeanSe,
    pub predicted: MeanSe,
    pub rel_error: f64,
    pub rel_error_se: f64,
}

pub fn qv_estimate(config: &SimConfig, ensemble: usize) -> Result<QvEstimate> {
    let (n_steps, _) = config.step_count();
    if n_steps < MIN_STEPS {
        return Err(ShsimError::Precondition(format!(
            "quadratic variation check needs at least {MIN_STEPS} steps; fewer than 100 steps in T/dt = {n_steps}"
        )));
    }
    let samples = run_ensemble(ensemble, |traj| qv_sample(config, traj))?;
    let r: Vec<f64> = samples.iter().map(|s| s.realized).collect();
    let p: Vec<f64> = samples.iter().map(|s| s.predicted).collect();
    let d: Vec<f64> = samples.iter().map(|s| s.realized - s.predicted).collect();
    let realized = MeanSe::from_samples(&r)?;
    let predicted = MeanSe::from_samples(&p)?;
    let diff = MeanSe::from_samples(&d)?;
    let (rel_error, rel_error_se) = if predicted.mean > 0.0 {
        (diff.mean.abs() / predicted.mean, diff.se / predicted.mean)
    } else {
        (realized.mean.abs(), diff.se)
    };
    Ok(QvEstimate {
        realized,
        predicted,
        rel_error,
        rel_error_se,
    })
}

fn push(entries: &mut Vec<ReportEntry>, n: usize, tag: &str, est: &QvEstimate, ensemble: usize) {
    entries.push(ReportEntry::new(Some(n), Some(format!("realized {tag}")), est.realized.mean, est.realized.se, ensemble));
    entries.push(ReportEntry::new(Some(n), Some(format!("predicted {tag}")), est.predicted.mean, est.predicted.se, ensemble));
    entries.push(ReportEntry::new(Some(n), Some(format!("rel_error {tag}")), est.rel_error, est.rel_error_se, ensemble));
}

/// Key `qv`: runs at `dt` and `dt/2` on the same Brownian tree. Passes when the
/// relative error at `dt` is within 10% and halving `dt` does not make it
/// worse beyond two standard errors. With zero noise both sides must vanish.
pub fn qv_check(config: &SimConfig, ensemble: usize) -> Result<EstimateReport> {
    let coarse = qv_estimate(config, ensemble)?;
    let mut fine_cfg = config.with_dt(config.dt / 2.0);
    fine_cfg.noise_root_dt = Some(config.root_dt());
    let fine = qv_estimate(&fine_cfg, ensemble)?;
    let n = config.n_galerkin;
    let mut entries = Vec::new();
    push(&mut entries, n, "dt", &coarse, ensemble);
    push(&mut entries, n, "dt/2", &fine, ensemble);
    let ok = if coarse.predicted.mean == 0.0 {
        coarse.realized.mean <= DETERMINISTIC_FLOOR && fine.realized.mean <= DETERMINISTIC_FLOOR
    } else {
        let band = 2.0 * (coarse.rel_error_se.powi(2) + fine.rel_error_se.powi(2)).sqrt();
        coarse.rel_error <= REL_TOLERANCE && fine.rel_error <= coarse.rel_error + band
    };
    Ok(EstimateReport::new("qv", entries, Verdict::from_pass(ok), config.master_seed))
}

/// Harness self-test with the dynamics switched off: `B_k` frozen at
/// `B_k(u(0))`, so `M(t) = sum_k B_k(u0) W_k(t)` and the predicted QV is
/// `t * sum_k |B_k(u0)|^2`. Key `qv-frozen`.
pub fn qv_frozen_selftest(config: &SimConfig, ensemble: usize) -> Result<EstimateReport> {
    let (n_steps, _) = config.step_count();
    if n_steps < MIN_STEPS {
        return Err(ShsimError::Precondition(format!(
            "quadratic variation check needs at least {MIN_STEPS} steps; fewer than 100 steps in T/dt = {n_steps}"
        )));
    }
    let stepper = Stepper::new(config)?;
    let u0 = initial_condition(&config.u0, config.n_galerkin)?;
    let frozen = stepper.noise_fields(&u0);
    let predicted: f64 = config.t_final * frozen.iter().map(|b| b.l2_norm_sq()).sum::<f64>();
    let realized = run_ensemble(ensemble, |traj| {
        let path = config.brownian_path(traj)?;
        let mut qv = 0.0;
        for s in 0..path.n_steps() {
            let mut dm = SpectralField::zeros(&config.basis);
            for (b, w) in frozen.iter().zip(path.step(s)) {
                dm.axpy(*w, b);
            }
            qv += dm.l2_norm_sq();
        }
        Ok(qv)
    })?;
    let r = MeanSe::from_samples(&realized)?;
    let ok = if predicted == 0.0 {
        r.mean <= DETERMINISTIC_FLOOR
    } else {
        (r.mean - predicted).abs() <= 3.0 * r.se.max(DETERMINISTIC_FLOOR)
    };
    Ok(EstimateReport::new(
        "qv-frozen",
        vec![
            ReportEntry::new(Some(config.n_galerkin), Some("realized".into()), r.mean, r.se, ensemble),
            ReportEntry::new(Some(config.n_galerkin), Some("predicted".into()), predicted, 0.0, ensemble),
        ],
        Verdict::from_pass(ok),
        config.master_seed,
    ))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::basis::{build_basis, Domain};
    use crate::geometry::NoiseModel;
    use crate::integrator::Scheme;

    fn config(t: f64, dt: f64) -> SimConfig {
        let b = Arc::new(build_basis(Domain::unit_interval_pi(), 4, 16).unwrap());
        let mut c = SimConfig::new(b.clone(), t, dt).unwrap();
        c.noise = NoiseModel::new(vec![SpectralField::basis_function(&b, 2).unwrap().scaled(0.25)]).unwrap();
        c.scheme = Scheme::EulerIto;
        c
    }

    #[test]
    fn too_few_steps() {
        let err = qv_check(&config(0.1, 0.01), 4).unwrap_err();
        assert!(err.to_string().contains("fewer than 100 steps"));
    }

    #[test]
    fn zero_noise_both_sides_vanish() {
        let mut c = config(0.2, 1e-3);
        c.noise = NoiseModel::zero(&c.basis, 1).unwrap();
        c.renormalize = false;
        let r = qv_check(&c, 4).unwrap();
        assert_eq!(r.entry("predicted dt").unwrap().value, 0.0);
        assert!(r.entry("realized dt").unwrap().value <= DETERMINISTIC_FLOOR);
        assert!(r.passed());
    }

    #[test]
    fn raw_euler_increments_are_the_noise_sum() {
        let mut c = config(0.2, 1e-3);
        c.renormalize = false;
        let stepper = Stepper::new(&c).unwrap();
        let mut worst = 0.0f64;
        run_with(&c, 0, |s| {
            let dm = martingale_increment(&stepper, s.before, s.after, s.t1 - s.t0);
            let mut expect = SpectralField::zeros(&c.basis);
            for (b, w) in stepper.noise_fields(s.before).iter().zip(s.dw) {
                expect.axpy(*w, b);
            }
            worst = worst.max(dm.sub(&expect).l2_norm());
        })
        .unwrap();
        assert!(worst < 1e-14);
    }

    #[test]
    fn frozen_coefficients_give_linear_qv() {
        let mut c = config(1.0, 1e-2);
        c.u0 = SpectralField::basis_function(&c.basis, 1).unwrap();
        c.noise = NoiseModel::new(vec![SpectralField::basis_function(&c.basis, 2).unwrap()]).unwrap();
        let r = qv_frozen_selftest(&c, 400).unwrap();
        assert_eq!(r.entry("predicted").unwrap().value, 1.0);
        assert!(r.passed(), "{r:?}");
    }
}
