//! Time stepping for the `n`-mode Galerkin system
//!
//! ```text
//! du = [-Au + Z_n F(u)] dt + sum_k B_k(u) o dW_k            (Stratonovich)
//!    = [-Au + Z_n F(u) + 1/2 sum_k m_k(u)] dt + sum_k B_k(u) dW_k   (Itô)
//! ```
//!
//! The noise directions are projected to `H_n` before use, so `B_k` and `m_k`
//! are the exact vector field and Itô correction of the truncated system.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::brownian::{refinement_level, BrownianPath, PathKey};
use crate::dynamics::{nonlinearity_truncated, ModelParams};
use crate::error::{Result, ShsimError};
use crate::field::{check_galerkin_n, SpectralField};
use crate::geometry::{ito_correction_unchecked, tangent_unchecked, NoiseModel};

/// States with `|u|_{L2}` above this are treated as a blow-up.
pub const BLOW_UP_NORM: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Euler-Maruyama on the Itô form.
    EulerIto,
    /// Stochastic Heun on the Stratonovich form.
    HeunStrat,
    /// Exponential Euler on the Itô form: exact semigroup, phi_1-weighted drift.
    ExpEulerIto,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::EulerIto => "euler_ito",
            Scheme::HeunStrat => "heun_strat",
            Scheme::ExpEulerIto => "exp_euler_ito",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub basis: Arc<BasisSpec>,
    pub n_galerkin: usize,
    pub params: ModelParams,
    pub noise: NoiseModel,
    /// Raw initial datum; normalized as `Z_n u0 / |Z_n u0|`.
    pub u0: SpectralField,
    pub t_final: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub renormalize: bool,
    pub master_seed: u64,
    pub record_every: usize,
    /// Coarsest step of the Brownian refinement tree; `None` means `dt`.
    pub noise_root_dt: Option<f64>,
}

impl SimConfig {
    /// Defaults around a basis: `n = dim`, `f_k = e_k / k^2` (N = 2), `u0 = e_1`.
    pub fn new(basis: Arc<BasisSpec>, t_final: f64, dt: f64) -> Result<Self> {
        let noise = NoiseModel::decaying(&basis, 2.min(basis.dim()))?;
        let u0 = SpectralField::basis_function(&basis, 1)?;
        Ok(SimConfig {
            n_galerkin: basis.dim(),
            basis,
            params: ModelParams::default(),
            noise,
            u0,
            t_final,
            dt,
            scheme: Scheme::ExpEulerIto,
            renormalize: true,
            master_seed: 0,
            record_every: 1,
            noise_root_dt: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(ShsimError::config("integrator.T", "must be positive"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ShsimError::config("integrator.dt", "must be positive"));
        }
        if self.dt > self.t_final {
            return Err(ShsimError::config("integrator.dt", "must not exceed T"));
        }
        if self.record_every == 0 {
            return Err(ShsimError::config("integrator.record_every", "must be at least 1"));
        }
        if self.n_galerkin == 0 || self.n_galerkin > self.basis.dim() {
            return Err(ShsimError::config(
                "integrator.n_galerkin",
                format!("must lie in 1..={}", self.basis.dim()),
            ));
        }
        self.params.validate()?;
        self.basis.check_dealiasing(self.params.n_exp)?;
        if let Some(f) = self.noise.directions().first() {
            if !self.basis.same_layout(f.basis()) {
                return Err(ShsimError::config("noise", "directions use a different basis"));
            }
        }
        if !self.basis.same_layout(self.u0.basis()) {
            return Err(ShsimError::config("integrator.u0", "uses a different basis"));
        }
        refinement_level(self.root_dt(), self.dt)?;
        Ok(())
    }

    pub fn root_dt(&self) -> f64 {
        self.noise_root_dt.unwrap_or(self.dt)
    }

    /// Number of steps and the length of the final step.
    pub fn step_count(&self) -> (usize, f64) {
        let ratio = self.t_final / self.dt;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) && rounded >= 1.0 {
            (rounded as usize, self.dt)
        } else {
            let n = ratio.ceil() as usize;
            (n, self.t_final - (n - 1) as f64 * self.dt)
        }
    }

    /// Time of grid point `i`.
    pub fn time_at(&self, i: usize) -> f64 {
        let (n, _) = self.step_count();
        if i >= n {
            self.t_final
        } else {
            i as f64 * self.dt
        }
    }

    pub fn with_n(&self, n: usize) -> SimConfig {
        SimConfig {
            n_galerkin: n,
            ..self.clone()
        }
    }

    pub fn with_dt(&self, dt: f64) -> SimConfig {
        SimConfig { dt, ..self.clone() }
    }

    pub fn with_scheme(&self, scheme: Scheme) -> SimConfig {
        SimConfig {
            scheme,
            ..self.clone()
        }
    }

    pub fn brownian_path(&self, trajectory: u64) -> Result<BrownianPath> {
        let level = refinement_level(self.root_dt(), self.dt)?;
        let (n, last) = self.step_count();
        Ok(BrownianPath::sample(
            PathKey {
                master_seed: self.master_seed,
                trajectory,
            },
            self.noise.len(),
            self.root_dt(),
            level,
            n,
            Some(last),
        ))
    }
}

/// `Z_n u0 / |Z_n u0|`.
pub fn initial_condition(u0_raw: &SpectralField, n: usize) -> Result<SpectralField> {
    let mut u = u0_raw.project(n)?;
    let norm = u.l2_norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(ShsimError::DegenerateInitialCondition { n });
    }
    u.scale(1.0 / norm);
    Ok(u)
}

pub fn sample_brownian(config: &SimConfig, trajectory: u64) -> Result<BrownianPath> {
    config.brownian_path(trajectory)
}

/// Per-record diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `|u|^2 - 1`
    pub sphere_defect: f64,
    /// `||u||^2_V`
    pub v_norm_sq: f64,
    /// `||u||^{2n}_{L^{2n}}`
    pub l2n_norm: f64,
    /// `||u||^2_{D(A)}`
    pub da_norm_sq: f64,
}

impl Diagnostics {
    pub fn of(u: &SpectralField, n_exp: u32) -> Diagnostics {
        let n = u.norms();
        let l2n_norm = if n_exp == 1 {
            n.l2_sq
        } else {
            u.lp_norm_pow(2.0 * f64::from(n_exp))
                .expect("exponent 2n >= 2 is a valid L^p index")
        };
        Diagnostics {
            sphere_defect: n.l2_sq - 1.0,
            v_norm_sq: n.v_sq,
            l2n_norm,
            da_norm_sq: n.da_sq,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    pub diagnostics: Vec<Diagnostics>,
    pub brownian: BrownianPath,
}

/// One completed step, handed to observers.
pub struct StepInfo<'a> {
    pub index: usize,
    pub t0: f64,
    pub t1: f64,
    pub before: &'a SpectralField,
    pub after: &'a SpectralField,
    pub dw: &'a [f64],
}

/// Stepper for a fixed configuration; caches the projected noise and the
/// exponential factors for the nominal step.
pub struct Stepper<'a> {
    config: &'a SimConfig,
    noise: NoiseModel,
    n: usize,
    nominal: ExpFactors,
}

struct ExpFactors {
    dt: f64,
    decay: Vec<f64>,
    phi1: Vec<f64>,
}

impl ExpFactors {
    fn new(mu: &[f64], dt: f64) -> Self {
        let decay = mu.iter().map(|m| (-dt * m).exp()).collect();
        let phi1 = mu
            .iter()
            .map(|m| {
                let x = dt * m;
                if x == 0.0 {
                    1.0
                } else {
                    -(-x).exp_m1() / x
                }
            })
            .collect();
        ExpFactors { dt, decay, phi1 }
    }
}

impl<'a> Stepper<'a> {
    pub fn new(config: &'a SimConfig) -> Result<Self> {
        config.validate()?;
        let n = config.n_galerkin;
        Ok(Stepper {
            noise: config.noise.projected(n)?,
            n,
            nominal: ExpFactors::new(config.basis.mu(), config.dt),
            config,
        })
    }

    /// Noise directions as seen by the Galerkin system.
    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// `-Au + Z_n F(u)`
    pub fn drift_strat(&self, u: &SpectralField) -> SpectralField {
        let mut d = nonlinearity_truncated(u, self.config.params.n_exp, self.n);
        d.axpy(-1.0, &u.apply_a());
        d
    }

    /// `-Au + Z_n F(u) + 1/2 sum_k m_k(u)`
    pub fn drift_ito(&self, u: &SpectralField) -> SpectralField {
        let mut d = self.drift_strat(u);
        for f in self.noise.directions() {
            d.axpy(0.5, &ito_correction_unchecked(u, f));
        }
        d
    }

    /// `B_k(u)` for every k.
    pub fn noise_fields(&self, u: &SpectralField) -> Vec<SpectralField> {
        self.noise
            .directions()
            .iter()
            .map(|f| tangent_unchecked(u, f))
            .collect()
    }

    fn noise_sum(&self, fields: &[SpectralField], dw: &[f64]) -> SpectralField {
        let mut s = SpectralField::zeros(&self.config.basis);
        for (b, w) in fields.iter().zip(dw) {
            s.axpy(*w, b);
        }
        s
    }

    /// Advance by `dt` with increments `dw`, without the finiteness guard.
    pub fn advance(&self, u: &SpectralField, dt: f64, dw: &[f64]) -> SpectralField {
        let mut next = match self.config.scheme {
            Scheme::EulerIto => {
                let mut v = u.clone();
                v.axpy(dt, &self.drift_ito(u));
                v.axpy(1.0, &self.noise_sum(&self.noise_fields(u), dw));
                v
            }
            Scheme::HeunStrat => {
                let d0 = self.drift_strat(u);
                let b0 = self.noise_sum(&self.noise_fields(u), dw);
                let mut pred = u.clone();
                pred.axpy(dt, &d0);
                pred.axpy(1.0, &b0);
                let d1 = self.drift_strat(&pred);
                let b1 = self.noise_sum(&self.noise_fields(&pred), dw);
                let mut v = u.clone();
                v.axpy(0.5 * dt, &d0);
                v.axpy(0.5 * dt, &d1);
                v.axpy(0.5, &b0);
                v.axpy(0.5, &b1);
                v
            }
            Scheme::ExpEulerIto => {
                let owned;
                let fac = if dt == self.nominal.dt {
                    &self.nominal
                } else {
                    owned = ExpFactors::new(self.config.basis.mu(), dt);
                    &owned
                };
                let mut nonlin = nonlinearity_truncated(u, self.config.params.n_exp, self.n);
                for f in self.noise.directions() {
                    nonlin.axpy(0.5, &ito_correction_unchecked(u, f));
                }
                let stoch = self.noise_sum(&self.noise_fields(u), dw);
                let coeffs = u
                    .coeffs()
                    .iter()
                    .zip(nonlin.coeffs())
                    .zip(stoch.coeffs())
                    .zip(fac.decay.iter().zip(&fac.phi1))
                    .map(|(((c, nl), s), (e, p))| e * (c + s) + dt * p * nl)
                    .collect();
                SpectralField::from_raw(&self.config.basis, coeffs)
            }
        };
        if self.config.renormalize {
            let norm = next.l2_norm();
            if norm > 0.0 {
                next.scale(1.0 / norm);
            }
        }
        next
    }

    /// One guarded step; `index` and `t` label a failure.
    pub fn step_checked(
        &self,
        u: &SpectralField,
        dt: f64,
        dw: &[f64],
        index: usize,
        t: f64,
    ) -> Result<SpectralField> {
        let next = self.advance(u, dt, dw);
        if !next.is_finite() {
            return Err(ShsimError::Integration {
                step: index,
                time: t,
                reason: "non-finite state".into(),
            });
        }
        let norm = next.l2_norm();
        if norm > BLOW_UP_NORM {
            return Err(ShsimError::Integration {
                step: index,
                time: t,
                reason: format!("L2 norm {norm:.3e} exceeds {BLOW_UP_NORM:e}"),
            });
        }
        Ok(next)
    }
}

/// Single step of the configured scheme.
pub fn step(u: &SpectralField, dt: f64, dw: &[f64], config: &SimConfig) -> Result<SpectralField> {
    if dw.len() != config.noise.len() {
        return Err(ShsimError::DimensionMismatch {
            expected: config.noise.len(),
            actual: dw.len(),
        });
    }
    Stepper::new(config)?.step_checked(u, dt, dw, 0, 0.0)
}

/// Run a trajectory, calling `on_step` after every step. Returns the initial
/// state, the final state and the Brownian path used.
pub fn run_with<F>(
    config: &SimConfig,
    trajectory: u64,
    mut on_step: F,
) -> Result<(SpectralField, SpectralField, BrownianPath)>
where
    F: FnMut(&StepInfo<'_>),
{
    let stepper = Stepper::new(config)?;
    let path = config.brownian_path(trajectory)?;
    run_stepper(&stepper, config, &path, &mut on_step)
        .map(|(u0, u)| (u0, u, path))
}

/// Run with an explicit Brownian path (e.g. one shared by several configs).
pub fn run_with_path<F>(
    config: &SimConfig,
    path: &BrownianPath,
    mut on_step: F,
) -> Result<(SpectralField, SpectralField)>
where
    F: FnMut(&StepInfo<'_>),
{
    let stepper = Stepper::new(config)?;
    run_stepper(&stepper, config, path, &mut on_step)
}

fn run_stepper<F>(
    stepper: &Stepper<'_>,
    config: &SimConfig,
    path: &BrownianPath,
    on_step: &mut F,
) -> Result<(SpectralField, SpectralField)>
where
    F: FnMut(&StepInfo<'_>),
{
    let (n_steps, last_dt) = config.step_count();
    if path.n_steps() < n_steps || path.n_noise() != config.noise.len() {
        return Err(ShsimError::Precondition(
            "Brownian path does not cover the time grid".into(),
        ));
    }
    let u0 = initial_condition(&config.u0, config.n_galerkin)?;
    let mut u = u0.clone();
    for i in 0..n_steps {
        let t0 = i as f64 * config.dt;
        let h = if i + 1 == n_steps { last_dt } else { config.dt };
        let t1 = if i + 1 == n_steps { config.t_final } else { t0 + h };
        let next = stepper.step_checked(&u, h, path.step(i), i, t0)?;
        on_step(&StepInfo {
            index: i,
            t0,
            t1,
            before: &u,
            after: &next,
            dw: path.step(i),
        });
        u = next;
    }
    Ok((u0, u))
}

pub fn simulate(config: &SimConfig, trajectory: u64) -> Result<Trajectory> {
    let (n_steps, _) = config.step_count();
    let n_exp = config.params.n_exp;
    let every = config.record_every;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let (u0, _, brownian) = run_with(config, trajectory, |s| {
        if (s.index + 1) % every == 0 || s.index + 1 == n_steps {
            times.push(s.t1);
            states.push(s.after.clone());
        }
    })?;
    times.insert(0, 0.0);
    states.insert(0, u0);
    let diagnostics = states.iter().map(|u| Diagnostics::of(u, n_exp)).collect();
    Ok(Trajectory {
        times,
        states,
        diagnostics,
        brownian,
    })
}

/// Map over trajectory indices `0..ensemble` in parallel, keeping index order.
pub fn run_ensemble<T, F>(ensemble: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..ensemble as u64).into_par_iter().map(f).collect()
}

pub(crate) fn check_n(config: &SimConfig, n: usize) -> Result<()> {
    check_galerkin_n(n, config.basis.dim())
}
