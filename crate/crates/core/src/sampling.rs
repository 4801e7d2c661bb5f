//! Random test fields for the deterministic probe suites.

use std::sync::Arc;

use crate::basis::BasisSpec;
use crate::field::SpectralField;
use crate::rng::CounterRng;

/// Gaussian coefficients with spectral decay `c_j ~ N(0,1) (lambda_1/lambda_j)^(decay/2)`.
///
/// In 1-D `lambda_j ∝ j^2`, so `decay` is the power-law exponent in `j`.
pub fn random_field(basis: &Arc<BasisSpec>, rng: &mut CounterRng, decay: f64) -> SpectralField {
    let l1 = basis.lambda()[0];
    let coeffs = basis
        .lambda()
        .iter()
        .map(|l| rng.normal() * (l1 / l).powf(decay / 2.0))
        .collect();
    SpectralField::from_raw(basis, coeffs)
}

/// Random field normalized to `|u|_{L2} = 1`.
pub fn random_unit_field(basis: &Arc<BasisSpec>, rng: &mut CounterRng, decay: f64) -> SpectralField {
    loop {
        let mut u = random_field(basis, rng, decay);
        let n = u.l2_norm();
        if n > 1e-8 {
            u.scale(1.0 / n);
            return u;
        }
    }
}

/// Random field with `||u||_V` uniform in `(0, radius]`.
pub fn random_v_ball_field(
    basis: &Arc<BasisSpec>,
    rng: &mut CounterRng,
    decay: f64,
    radius: f64,
) -> SpectralField {
    loop {
        let mut u = random_field(basis, rng, decay);
        let v = u.norms().v();
        if v > 1e-8 {
            let r = radius * (1.0 - rng.uniform());
            u.scale(r / v);
            return u;
        }
    }
}
