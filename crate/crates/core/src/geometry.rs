//! Geometry of the unit sphere `M = { u : |u|_{L2} = 1 }`: the tangent
//! projection, the noise vector fields `B_k` and their Itô corrections `m_k`.
//!
//! All maps are defined by the same formulas off the sphere; the distance to
//! the sphere is reported as a diagnostic rather than rejected.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::error::{Result, ShsimError};
use crate::field::SpectralField;

/// Sphere deviation above which tangent-space inputs are logged.
pub const SPHERE_WARN_TOL: f64 = 1e-8;

/// Fixed noise directions `f_1, ..., f_N`.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    directions: Vec<SpectralField>,
}

/// One term `amplitude * e_mode` of a noise direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeTerm {
    pub mode: usize,
    pub amplitude: f64,
}

/// Config-level description of a single direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum DirectionSpec {
    Modes { modes: Vec<ModeTerm> },
    Coefficients { coefficients: Vec<f64> },
}

impl NoiseModel {
    pub fn new(directions: Vec<SpectralField>) -> Result<Self> {
        if directions.is_empty() {
            return Err(ShsimError::config("noise", "at least one noise direction is required"));
        }
        for (k, f) in directions.iter().enumerate() {
            directions[0].check_compatible(f)?;
            if !f.is_finite() {
                return Err(ShsimError::config(
                    format!("noise.directions[{k}]"),
                    "non-finite coefficients",
                ));
            }
        }
        Ok(NoiseModel { directions })
    }

    /// `f_k = e_k / k^2`, `k = 1..count`.
    pub fn decaying(basis: &Arc<BasisSpec>, count: usize) -> Result<Self> {
        let dirs = (1..=count)
            .map(|k| SpectralField::from_modes(basis, &[(k, 1.0 / (k * k) as f64)]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dirs)
    }

    /// `count` identically zero directions.
    pub fn zero(basis: &Arc<BasisSpec>, count: usize) -> Result<Self> {
        Self::new(vec![SpectralField::zeros(basis); count.max(1)])
    }

    pub fn from_specs(basis: &Arc<BasisSpec>, specs: &[DirectionSpec]) -> Result<Self> {
        let dirs = specs
            .iter()
            .enumerate()
            .map(|(k, s)| match s {
                DirectionSpec::Modes { modes } => {
                    let terms: Vec<_> = modes.iter().map(|t| (t.mode, t.amplitude)).collect();
                    SpectralField::from_modes(basis, &terms).map_err(|e| {
                        ShsimError::config(format!("noise.directions[{k}].modes"), e.to_string())
                    })
                }
                DirectionSpec::Coefficients { coefficients } => {
                    let mut c = coefficients.clone();
                    if c.len() > basis.dim() {
                        return Err(ShsimError::config(
                            format!("noise.directions[{k}].coefficients"),
                            format!("{} entries exceed basis dimension {}", c.len(), basis.dim()),
                        ));
                    }
                    c.resize(basis.dim(), 0.0);
                    SpectralField::from_coeffs(basis, c).map_err(|e| {
                        ShsimError::config(format!("noise.directions[{k}].coefficients"), e.to_string())
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dirs)
    }

    /// Sparse mode list for each direction.
    pub fn to_specs(&self) -> Vec<DirectionSpec> {
        self.directions
            .iter()
            .map(|f| DirectionSpec::Modes {
                modes: f
                    .coeffs()
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(j, c)| ModeTerm {
                        mode: j + 1,
                        amplitude: *c,
                    })
                    .collect(),
            })
            .collect()
    }

    /// Noise restricted to the Galerkin space: `f_k -> Z_n f_k`.
    pub fn projected(&self, n: usize) -> Result<Self> {
        let dirs = self
            .directions
            .iter()
            .map(|f| f.project(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(NoiseModel { directions: dirs })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[SpectralField] {
        &self.directions
    }

    /// `f_k`, one-based.
    pub fn direction(&self, k: usize) -> Result<&SpectralField> {
        if k == 0 || k > self.directions.len() {
            return Err(ShsimError::OutOfRange {
                what: "noise index k",
                value: k as i64,
                min: 1,
                max: self.directions.len() as i64,
            });
        }
        Ok(&self.directions[k - 1])
    }

    pub fn is_zero(&self) -> bool {
        self.directions
            .iter()
            .all(|f| f.coeffs().iter().all(|c| *c == 0.0))
    }
}

fn warn_off_sphere(u: &SpectralField, what: &str) {
    let dev = (u.l2_norm_sq() - 1.0).abs();
    if dev > SPHERE_WARN_TOL {
        log::warn!("{what}: base point is {dev:.3e} off the unit sphere");
    }
}

/// `pi_u(h) = h - <h, u> u`.
pub fn project_tangent(u: &SpectralField, h: &SpectralField) -> Result<SpectralField> {
    u.check_compatible(h)?;
    warn_off_sphere(u, "project_tangent");
    Ok(tangent_unchecked(u, h))
}

pub(crate) fn tangent_unchecked(u: &SpectralField, h: &SpectralField) -> SpectralField {
    let mut out = h.clone();
    out.axpy(-h.inner(u), u);
    out
}

/// `B_k(u) = f_k - <f_k, u> u`.
pub fn noise_field(u: &SpectralField, noise: &NoiseModel, k: usize) -> Result<SpectralField> {
    let f = noise.direction(k)?;
    u.check_compatible(f)?;
    Ok(tangent_unchecked(u, f))
}

/// `m_k(u) = d_u B_k (B_k(u)) = -<f_k, B_k(u)> u - <f_k, u> B_k(u)`.
pub fn ito_correction(u: &SpectralField, noise: &NoiseModel, k: usize) -> Result<SpectralField> {
    let f = noise.direction(k)?;
    u.check_compatible(f)?;
    Ok(ito_correction_unchecked(u, f))
}

pub(crate) fn ito_correction_unchecked(u: &SpectralField, f: &SpectralField) -> SpectralField {
    let fu = f.inner(u);
    let b = tangent_unchecked(u, f);
    let fb = f.inner(&b);
    let mut out = u.scaled(-fb);
    out.axpy(-fu, &b);
    out
}

/// `sum_k m_k(u)`.
pub(crate) fn ito_correction_sum(u: &SpectralField, noise: &NoiseModel) -> SpectralField {
    let mut out = SpectralField::zeros(u.basis());
    for f in noise.directions() {
        out.axpy(1.0, &ito_correction_unchecked(u, f));
    }
    out
}

/// `| |u|^2 - 1 |` together with whether it exceeds `tol`.
pub fn assert_on_sphere(u: &SpectralField, tol: f64) -> (f64, bool) {
    let dev = (u.l2_norm_sq() - 1.0).abs();
    (dev, dev > tol)
}
