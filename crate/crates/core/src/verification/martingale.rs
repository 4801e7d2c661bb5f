//! Weak martingale identities for the Galerkin martingale part `M_n`.
//!
//! For `t2 <= t1`, test vectors `eta1, eta2` and a bounded functional `h` of
//! the path up to `t2`:
//!
//! ```text
//! E[ <M(t1) - M(t2), eta1> h ] = 0
//! E[ ( <M(t1),eta1><M(t1),eta2> - <M(t2),eta1><M(t2),eta2>
//!      - sum_k int_{t2}^{t1} <B_k(u),eta1><B_k(u),eta2> dt ) h ] = 0
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShsimError};
use crate::field::SpectralField;
use crate::integrator::{initial_condition, run_ensemble, run_with, SimConfig, Stepper};
use crate::verification::qv::martingale_increment;
use crate::verification::report::{EstimateReport, ReportEntry, Verdict};
use crate::verification::stats::MeanSe;
use crate::verification::{step_index, DETERMINISTIC_FLOOR};

/// Bounded path functionals evaluated at `t2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HFunctional {
    /// `h = 1`
    One,
    /// `h = |u(t2)|^2`
    NormSq,
    /// `h = clamp(<u(t2), e_1>, -1, 1)`
    ClippedE1,
}

impl HFunctional {
    pub const ALL: [HFunctional; 3] = [HFunctional::One, HFunctional::NormSq, HFunctional::ClippedE1];

    pub fn eval(&self, u: &SpectralField) -> f64 {
        match self {
            HFunctional::One => 1.0,
            HFunctional::NormSq => u.l2_norm_sq(),
            HFunctional::ClippedE1 => u.coeffs()[0].clamp(-1.0, 1.0),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            HFunctional::One => "one",
            HFunctional::NormSq => "norm_sq",
            HFunctional::ClippedE1 => "clipped_e1",
        }
    }
}

/// `M_n` on the step grid of one trajectory; `m[0]` is exactly zero.
#[derive(Debug, Clone)]
pub struct MartingaleSample {
    pub times: Vec<f64>,
    pub m: Vec<SpectralField>,
}

pub fn martingale_path(config: &SimConfig, trajectory: u64) -> Result<MartingaleSample> {
    let stepper = Stepper::new(config)?;
    let mut times = vec![0.0];
    let mut m = vec![SpectralField::zeros(&config.basis)];
    run_with(config, trajectory, |s| {
        let mut next = m.last().expect("seeded").clone();
        next.axpy(1.0, &martingale_increment(&stepper, s.before, s.after, s.t1 - s.t0));
        times.push(s.t1);
        m.push(next);
    })?;
    Ok(MartingaleSample { times, m })
}

/// One combination of test vectors and functional.
#[derive(Debug, Clone)]
pub struct MartingaleCase {
    pub label: String,
    pub eta1: SpectralField,
    pub eta2: SpectralField,
    pub h: HFunctional,
}

/// Per-trajectory values of both statistics for every case.
fn trajectory_statistics(
    config: &SimConfig,
    stepper: &Stepper<'_>,
    i1: usize,
    i2: usize,
    cases: &[MartingaleCase],
    trajectory: u64,
) -> Result<Vec<(f64, f64)>> {
    let mut m = SpectralField::zeros(&config.basis);
    let mut at_t2: Option<(SpectralField, SpectralField)> = None;
    let mut m1: Option<SpectralField> = None;
    let mut integral = vec![0.0; cases.len()];
    if i2 == 0 {
        at_t2 = Some((m.clone(), initial_condition(&config.u0, config.n_galerkin)?));
    }
    if i1 == 0 {
        m1 = Some(m.clone());
    }
    run_with(config, trajectory, |s| {
        let h = s.t1 - s.t0;
        if s.index >= i2 && s.index < i1 {
            let bs = stepper.noise_fields(s.before);
            for (acc, c) in integral.iter_mut().zip(cases) {
                *acc += h * bs.iter().map(|b| b.inner(&c.eta1) * b.inner(&c.eta2)).sum::<f64>();
            }
        }
        m.axpy(1.0, &martingale_increment(stepper, s.before, s.after, h));
        if s.index + 1 == i2 {
            at_t2 = Some((m.clone(), s.after.clone()));
        }
        if s.index + 1 == i1 {
            m1 = Some(m.clone());
        }
    })?;
    let (m2, u2) = at_t2.expect("t2 lies on the grid");
    let m1 = m1.expect("t1 lies on the grid");
    Ok(cases
        .iter()
        .zip(&integral)
        .map(|(c, int)| {
            let h = c.h.eval(&u2);
            let inc = (m1.inner(&c.eta1) - m2.inner(&c.eta1)) * h;
            let cov = (m1.inner(&c.eta1) * m1.inner(&c.eta2) - m2.inner(&c.eta1) * m2.inner(&c.eta2) - int) * h;
            (inc, cov)
        })
        .collect())
}

fn within_band(m: &MeanSe) -> bool {
    m.mean.abs() <= 3.0 * m.se + DETERMINISTIC_FLOOR
}

/// Keys `martingale-increment` and `martingale-covariance`; one entry per case.
pub fn weak_martingale_cases(
    config: &SimConfig,
    t1: f64,
    t2: f64,
    cases: &[MartingaleCase],
    ensemble: usize,
) -> Result<[EstimateReport; 2]> {
    if !(t2 <= t1) {
        return Err(ShsimError::config("suite.t2", format!("requires t2 <= t1, got t2 = {t2}, t1 = {t1}")));
    }
    if t1 > config.t_final * (1.0 + 1e-12) {
        return Err(ShsimError::config("suite.t1", "must not exceed T"));
    }
    if ensemble < 2 {
        return Err(ShsimError::Precondition("ensemble must be at least 2".into()));
    }
    for c in cases {
        config.basis.same_layout(c.eta1.basis()).then_some(()).ok_or_else(|| {
            ShsimError::config("suite.eta", "test vector uses a different basis")
        })?;
    }
    let i1 = step_index(config, t1, "suite.t1")?;
    let i2 = step_index(config, t2, "suite.t2")?;
    let stepper = Stepper::new(config)?;
    let per_traj = run_ensemble(ensemble, |traj| {
        trajectory_statistics(config, &stepper, i1, i2, cases, traj)
    })?;

    let mut inc_entries = Vec::new();
    let mut cov_entries = Vec::new();
    let (mut inc_ok, mut cov_ok) = (true, true);
    let n = Some(config.n_galerkin);
    for (ci, c) in cases.iter().enumerate() {
        let xs: Vec<f64> = per_traj.iter().map(|v| v[ci].0).collect();
        let ys: Vec<f64> = per_traj.iter().map(|v| v[ci].1).collect();
        let inc = MeanSe::from_samples(&xs)?;
        let cov = MeanSe::from_samples(&ys)?;
        inc_ok &= within_band(&inc);
        cov_ok &= within_band(&cov);
        inc_entries.push(ReportEntry::new(n, Some(c.label.clone()), inc.mean, inc.se, ensemble));
        cov_entries.push(ReportEntry::new(n, Some(c.label.clone()), cov.mean, cov.se, ensemble));
    }
    Ok([
        EstimateReport::new("martingale-increment", inc_entries, Verdict::from_pass(inc_ok), config.master_seed),
        EstimateReport::new("martingale-covariance", cov_entries, Verdict::from_pass(cov_ok), config.master_seed),
    ])
}

/// Single `(eta1, eta2, h)` combination.
pub fn weak_martingale_test(
    config: &SimConfig,
    t1: f64,
    t2: f64,
    eta1: &SpectralField,
    eta2: &SpectralField,
    h: HFunctional,
    ensemble: usize,
) -> Result<[EstimateReport; 2]> {
    let case = MartingaleCase {
        label: format!("h={}", h.name()),
        eta1: eta1.clone(),
        eta2: eta2.clone(),
        h,
    };
    weak_martingale_cases(config, t1, t2, &[case], ensemble)
}

/// Every `h` in the menu with `eta1 = eta2 = e_1`, `eta1 = eta2 = e_2`, and the
/// mixed pair `(e_1, e_2)` for the covariance identity.
pub fn standard_cases(config: &SimConfig) -> Result<Vec<MartingaleCase>> {
    let e1 = SpectralField::basis_function(&config.basis, 1)?;
    let e2 = if config.basis.dim() >= 2 {
        SpectralField::basis_function(&config.basis, 2)?
    } else {
        e1.clone()
    };
    let pairs = [("e1", &e1, &e1), ("e2", &e2, &e2), ("e1,e2", &e1, &e2)];
    let mut cases = Vec::new();
    for h in HFunctional::ALL {
        for (tag, a, b) in pairs {
            cases.push(MartingaleCase {
                label: format!("h={} eta={tag}", h.name()),
                eta1: (*a).clone(),
                eta2: (*b).clone(),
                h,
            });
        }
    }
    Ok(cases)
}

pub fn martingale_suite(config: &SimConfig, t1: f64, t2: f64, ensemble: usize) -> Result<[EstimateReport; 2]> {
    weak_martingale_cases(config, t1, t2, &standard_cases(config)?, ensemble)
}
