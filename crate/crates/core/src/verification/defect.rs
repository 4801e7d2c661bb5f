//! Size of the part of `F(u_n)` that leaves the Galerkin space.

use std::sync::Arc;

use crate::basis::{build_basis, default_quad_points, Domain};
use crate::dynamics::{nonlinearity_f, ModelParams};
use crate::error::{Result, ShsimError};
use crate::field::{check_galerkin_n, SpectralField};
use crate::integrator::initial_condition;
use crate::verification::report::{EstimateReport, ReportEntry, Verdict};

/// `|(I - Z_n) F(u_n)|_{L2}` for `u_n` in `H_n`.
///
/// Exact only when the basis holds every mode of `u_n^(2n-1)`, i.e. has at
/// least `(2 n_exp - 1) n` modes in 1-D.
pub fn commutation_defect(u_n: &SpectralField, n: usize, params: &ModelParams) -> Result<f64> {
    check_galerkin_n(n, u_n.dim())?;
    if u_n.active_len() > n {
        return Err(ShsimError::Precondition(format!("state has modes beyond H_{n}")));
    }
    let f = nonlinearity_f(u_n, params)?;
    Ok(f.coeffs()[n..].iter().fold(0.0, |s, c| s + c * c).sqrt())
}

/// Defect of `u_n = Z_n u / |Z_n u|` for the smooth profile `c_j = exp(-j)`,
/// on a basis large enough that no part of `F(u_n)` is lost. Key
/// `commutation-defect-decay`, report-only.
pub fn defect_decay(domain: Domain, params: &ModelParams, n_list: &[usize]) -> Result<EstimateReport> {
    params.validate()?;
    let n_max = n_list.iter().copied().max().ok_or_else(|| {
        ShsimError::config("suite.n_list", "must not be empty")
    })?;
    let modes = (2 * params.n_exp as usize - 1) * n_max;
    let per_axis = match domain {
        Domain::Interval { .. } => modes,
        Domain::Rectangle { .. } => modes.max(2),
    };
    let basis = Arc::new(build_basis(domain, per_axis, default_quad_points(per_axis, params.n_exp))?);
    let coeffs = (1..=basis.dim()).map(|j| (-(j as f64)).exp()).collect();
    let profile = SpectralField::from_coeffs(&basis, coeffs)?;
    let mut entries = Vec::new();
    for &n in n_list {
        let u_n = initial_condition(&profile, n)?;
        let d = commutation_defect(&u_n, n, params)?;
        entries.push(ReportEntry::new(Some(n), None, d, 0.0, 1));
    }
    Ok(EstimateReport::new("commutation-defect-decay", entries, Verdict::ReportOnly, 0))
}
