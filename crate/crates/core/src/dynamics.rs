//! Drift of the constrained modified Swift-Hohenberg equation.
//!
//! On the sphere the projected drift `pi_u(-Au - a u - u^(2n-1))` equals
//! `-Au + F(u)` with
//!
//! ```text
//! F(u) = ||u||^2_{H2_0} u + 2 ||u||^2_{H1_0} u + ||u||^{2n}_{L^{2n}} u - u^{2n-1}
//! ```
//!
//! The power `u^(2n-1)` is evaluated pointwise on the oversampled grid.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShsimError};
use crate::field::{check_galerkin_n, SpectralField};
use crate::geometry::{self, NoiseModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Exponent `n` in `u^(2n-1)`; integer, at least 1.
    pub n_exp: u32,
    /// Linear coefficient `a`; cancels on the sphere.
    pub a: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { n_exp: 1, a: 1.0 }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_exp < 1 {
            return Err(ShsimError::config("model.n_exp", "must be an integer >= 1"));
        }
        if !self.a.is_finite() {
            return Err(ShsimError::config("model.a", "must be finite"));
        }
        Ok(())
    }
}

/// `u^(2n-1)` projected onto the first `keep` modes, and `||u||^{2n}_{L^{2n}}`.
pub(crate) fn power_terms(u: &SpectralField, n_exp: u32, keep: usize) -> (SpectralField, f64) {
    if n_exp == 1 {
        // u^1 = u stays in the span; no grid round trip.
        let mut p = u.clone();
        p.truncate_in_place(keep.min(u.dim()));
        return (p, u.l2_norm_sq());
    }
    let g = u.to_grid();
    let odd = 2 * n_exp as i32 - 1;
    let pow = g.powi(odd);
    let w = u.basis().cell_weight();
    let lnorm: f64 = w * pow
        .values()
        .iter()
        .zip(g.values())
        .map(|(p, v)| p * v)
        .sum::<f64>();
    (pow.to_spectral_truncated(keep), lnorm)
}

fn check_params(u: &SpectralField, params: &ModelParams) -> Result<()> {
    params.validate()?;
    u.basis().check_dealiasing(params.n_exp)
}

/// Assemble `F` from its scalar norms and the (possibly truncated) power.
fn assemble_f(u: &SpectralField, power: &SpectralField, lnorm: f64, keep: usize) -> SpectralField {
    let n = u.norms();
    let mut f = u.scaled(n.h2_sq + 2.0 * n.h1_sq + lnorm);
    f.truncate_in_place(keep);
    f.axpy(-1.0, power);
    f
}

pub fn nonlinearity_f(u: &SpectralField, params: &ModelParams) -> Result<SpectralField> {
    check_params(u, params)?;
    let dim = u.dim();
    let (power, lnorm) = power_terms(u, params.n_exp, dim);
    Ok(assemble_f(u, &power, lnorm, dim))
}

/// `Z_n F(u)`, computing only the retained coefficients of the power.
pub(crate) fn nonlinearity_truncated(u: &SpectralField, n_exp: u32, keep: usize) -> SpectralField {
    let (power, lnorm) = power_terms(u, n_exp, keep);
    assemble_f(u, &power, lnorm, keep)
}

/// `pi_u(-Au - a u - u^(2n-1))`, evaluated directly through the tangent projection.
pub fn constrained_rhs(u: &SpectralField, params: &ModelParams) -> Result<SpectralField> {
    check_params(u, params)?;
    let (power, _) = power_terms(u, params.n_exp, u.dim());
    let mut h = u.apply_a().scaled(-1.0);
    h.axpy(-params.a, u);
    h.axpy(-1.0, &power);
    geometry::project_tangent(u, &h)
}

/// Stratonovich drift `-Au + F(u)`.
pub fn drift_strat(u: &SpectralField, params: &ModelParams) -> Result<SpectralField> {
    let mut d = nonlinearity_f(u, params)?;
    d.axpy(-1.0, &u.apply_a());
    Ok(d)
}

/// Itô drift `-Au + F(u) + 1/2 sum_k m_k(u)`.
pub fn drift_ito(u: &SpectralField, params: &ModelParams, noise: &NoiseModel) -> Result<SpectralField> {
    if let Some(f) = noise.directions().first() {
        u.check_compatible(f)?;
    }
    let mut d = drift_strat(u, params)?;
    d.axpy(0.5, &geometry::ito_correction_sum(u, noise));
    Ok(d)
}

/// `Z_n(drift_ito(u_n))` for `u_n` in the first `n` modes.
pub fn galerkin_rhs(
    u_n: &SpectralField,
    params: &ModelParams,
    noise: &NoiseModel,
    n: usize,
) -> Result<SpectralField> {
    check_galerkin_n(n, u_n.dim())?;
    if u_n.active_len() > n {
        return Err(ShsimError::Precondition(format!(
            "state has modes beyond the Galerkin space H_{n}"
        )));
    }
    drift_ito(u_n, params, noise)?.project(n)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::basis::{build_basis, BasisSpec, Domain};
    use crate::rng::CounterRng;
    use crate::sampling::random_unit_field;

    fn basis(n: usize, n_exp: u32) -> Arc<BasisSpec> {
        Arc::new(build_basis(Domain::unit_interval_pi(), n, 4 * n * n_exp as usize).unwrap())
    }

    fn e(b: &Arc<BasisSpec>, j: usize) -> SpectralField {
        SpectralField::basis_function(b, j).unwrap()
    }

    /// Independent oracle for `F(e_1)` coefficients: midpoint-rule projection
    /// on a fine grid, sharing nothing with the collocation transform.
    fn f_e1_oracle(n_exp: u32, modes: usize) -> Vec<f64> {
        let k = 200_000;
        let h = PI / k as f64;
        let amp = (2.0 / PI).sqrt();
        let mut lnorm = 0.0;
        let mut proj = vec![0.0; modes];
        for i in 0..k {
            let x = (i as f64 + 0.5) * h;
            let u = amp * x.sin();
            lnorm += u.powi(2 * n_exp as i32) * h;
            for (j, p) in proj.iter_mut().enumerate() {
                *p += u.powi(2 * n_exp as i32 - 1) * amp * ((j + 1) as f64 * x).sin() * h;
            }
        }
        // ||e_1||_{H2}^2 = ||e_1||_{H1}^2 = 1
        let mut out: Vec<f64> = proj.iter().map(|p| -p).collect();
        out[0] += 1.0 + 2.0 + lnorm;
        out
    }

    #[test]
    fn f_of_e1_linear_power() {
        let b = basis(4, 1);
        let f = nonlinearity_f(&e(&b, 1), &ModelParams { n_exp: 1, a: 1.0 }).unwrap();
        let oracle = f_e1_oracle(1, 4);
        assert!((oracle[0] - 3.0).abs() < 1e-9);
        for (g, o) in f.coeffs().iter().zip(&oracle) {
            assert!((g - o).abs() < 1e-9);
        }
        assert_eq!(f.coeffs(), &[3.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn f_of_e1_cubic_power() {
        let b = basis(4, 2);
        let f = nonlinearity_f(&e(&b, 1), &ModelParams { n_exp: 2, a: 1.0 }).unwrap();
        let oracle = f_e1_oracle(2, 4);
        assert!((oracle[0] - 3.0).abs() < 1e-9);
        assert!((oracle[2] - 1.0 / (2.0 * PI)).abs() < 1e-9);
        for (g, o) in f.coeffs().iter().zip(&oracle) {
            assert!((g - o).abs() < 1e-9, "{g} vs {o}");
        }
        assert!((f.coeffs()[0] - 3.0).abs() < 1e-13);
        assert!((f.coeffs()[2] - 0.159_154_943_091_895_35).abs() < 1e-13);
    }

    #[test]
    fn f_of_zero_and_dealiasing_guard() {
        let b = basis(4, 1);
        let z = SpectralField::zeros(&b);
        let p = ModelParams { n_exp: 1, a: 1.0 };
        assert_eq!(nonlinearity_f(&z, &p).unwrap().l2_norm(), 0.0);
        let err = nonlinearity_f(&z, &ModelParams { n_exp: 3, a: 1.0 }).unwrap_err();
        assert!(matches!(err, ShsimError::Config { .. }));
        assert!(ModelParams { n_exp: 0, a: 1.0 }.validate().is_err());
    }

    #[test]
    fn constrained_rhs_at_ground_state_vanishes() {
        let b = basis(4, 1);
        let p = ModelParams { n_exp: 1, a: 1.0 };
        let e1 = e(&b, 1);
        let direct = constrained_rhs(&e1, &p).unwrap();
        let closed = drift_strat(&e1, &p).unwrap();
        assert!(direct.l2_norm() < 1e-14);
        assert!(closed.l2_norm() < 1e-14);
    }

    #[test]
    fn projection_identity_and_a_cancellation() {
        for n_exp in [1, 2, 3] {
            let b = basis(16, n_exp);
            let mut rng = CounterRng::new(u64::from(n_exp));
            for _ in 0..100 {
                let u = random_unit_field(&b, &mut rng, 2.0);
                let base = ModelParams { n_exp, a: 0.0 };
                let closed = drift_strat(&u, &base).unwrap();
                for a in [0.0, 1.0, 7.3] {
                    let direct = constrained_rhs(&u, &ModelParams { n_exp, a }).unwrap();
                    assert!(direct.sub(&closed).l2_norm() <= 1e-10);
                }
                assert!(closed.inner(&u).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn drift_examples() {
        let b = basis(4, 1);
        let p = ModelParams { n_exp: 1, a: 1.0 };
        let e1 = e(&b, 1);
        let noise = NoiseModel::new(vec![e(&b, 2)]).unwrap();
        let d = drift_ito(&e1, &p, &noise).unwrap();
        assert!(d.max_abs_diff(&e1.scaled(-0.5)) < 1e-15);
        let silent = NoiseModel::zero(&b, 2).unwrap();
        let di = drift_ito(&e1, &p, &silent).unwrap();
        let ds = drift_strat(&e1, &p).unwrap();
        assert_eq!(di.coeffs(), ds.coeffs());
    }

    #[test]
    fn galerkin_rhs_truncates_only_the_power() {
        let b = basis(8, 2);
        let p = ModelParams { n_exp: 2, a: 1.0 };
        let e1 = e(&b, 1);
        let noise = NoiseModel::new(vec![e(&b, 2).scaled(0.5)]).unwrap();
        let g = galerkin_rhs(&e1, &p, &noise, 2).unwrap();
        let full = drift_ito(&e1, &p, &noise).unwrap();
        let defect = full.sub(&g);
        assert!((defect.l2_norm() - 1.0 / (2.0 * PI)).abs() < 1e-12);
        // noise part is already in H_2
        let bk = geometry::noise_field(&e1, &noise, 1).unwrap();
        assert_eq!(bk.project(2).unwrap().coeffs(), bk.coeffs());
        assert!(galerkin_rhs(&e(&b, 3), &p, &noise, 2).is_err());
        assert!(galerkin_rhs(&e1, &p, &noise, 9).is_err());
    }

    #[test]
    fn f_is_odd() {
        let b = basis(12, 2);
        let p = ModelParams { n_exp: 2, a: 1.0 };
        let mut rng = CounterRng::new(4);
        for _ in 0..50 {
            let u = random_unit_field(&b, &mut rng, 2.0);
            let fp = nonlinearity_f(&u, &p).unwrap();
            let fm = nonlinearity_f(&u.scaled(-1.0), &p).unwrap();
            assert!(fp.add(&fm).l2_norm() <= 1e-12);
        }
    }
}
