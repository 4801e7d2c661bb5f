//! Fields in coefficient space and on the collocation grid.

use std::sync::Arc;

use crate::basis::BasisSpec;
use crate::error::{Result, ShsimError};

/// A function expanded in the orthonormal sine basis: `u = sum_j c_j e_j`.
#[derive(Debug, Clone)]
pub struct SpectralField {
    coeffs: Vec<f64>,
    basis: Arc<BasisSpec>,
}

/// Samples of a function at the collocation nodes (row-major `x`, then `y`).
#[derive(Debug, Clone)]
pub struct GridField {
    values: Vec<f64>,
    basis: Arc<BasisSpec>,
}

/// Squared spectral norms of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    /// `|u|^2_{L2} = sum c_j^2`
    pub l2_sq: f64,
    /// `||u||^2_{H1_0} = sum lambda_j c_j^2`
    pub h1_sq: f64,
    /// `||u||^2_{H2_0} = sum lambda_j^2 c_j^2`
    pub h2_sq: f64,
    /// `||u||^2_V = |u|^2 + ||Δu||^2`
    pub v_sq: f64,
    /// `||u||^2_{D(A)} = ||u||^2_V + ||Au||^2_V`
    pub da_sq: f64,
}

impl Norms {
    pub fn of(u: &SpectralField) -> Norms {
        let b = u.basis();
        let mut n = Norms {
            l2_sq: 0.0,
            h1_sq: 0.0,
            h2_sq: 0.0,
            v_sq: 0.0,
            da_sq: 0.0,
        };
        let mut au_v_sq = 0.0;
        for ((c, l), m) in u.coeffs.iter().zip(b.lambda()).zip(b.mu()) {
            let c2 = c * c;
            n.l2_sq += c2;
            n.h1_sq += l * c2;
            n.h2_sq += l * l * c2;
            au_v_sq += m * m * (1.0 + l * l) * c2;
        }
        n.v_sq = n.l2_sq + n.h2_sq;
        n.da_sq = n.v_sq + au_v_sq;
        n
    }

    pub fn l2(&self) -> f64 {
        self.l2_sq.sqrt()
    }
    pub fn h1(&self) -> f64 {
        self.h1_sq.sqrt()
    }
    pub fn h2(&self) -> f64 {
        self.h2_sq.sqrt()
    }
    pub fn v(&self) -> f64 {
        self.v_sq.sqrt()
    }
    pub fn da(&self) -> f64 {
        self.da_sq.sqrt()
    }
}

impl SpectralField {
    pub fn zeros(basis: &Arc<BasisSpec>) -> Self {
        SpectralField {
            coeffs: vec![0.0; basis.dim()],
            basis: Arc::clone(basis),
        }
    }

    pub fn from_coeffs(basis: &Arc<BasisSpec>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(ShsimError::DimensionMismatch {
                expected: basis.dim(),
                actual: coeffs.len(),
            });
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(ShsimError::Domain(format!("coefficient {i} is not finite")));
        }
        Ok(SpectralField {
            coeffs,
            basis: Arc::clone(basis),
        })
    }

    /// The basis function `e_j` (one-based `j`, sorted order).
    pub fn basis_function(basis: &Arc<BasisSpec>, j: usize) -> Result<Self> {
        if j == 0 || j > basis.dim() {
            return Err(ShsimError::OutOfRange {
                what: "mode index",
                value: j as i64,
                min: 1,
                max: basis.dim() as i64,
            });
        }
        let mut u = Self::zeros(basis);
        u.coeffs[j - 1] = 1.0;
        Ok(u)
    }

    /// Sum of `amplitude * e_mode` terms.
    pub fn from_modes(basis: &Arc<BasisSpec>, terms: &[(usize, f64)]) -> Result<Self> {
        let mut u = Self::zeros(basis);
        for &(j, a) in terms {
            let e = Self::basis_function(basis, j)?;
            u.axpy(a, &e);
        }
        Ok(u)
    }

    pub(crate) fn from_raw(basis: &Arc<BasisSpec>, coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), basis.dim());
        SpectralField {
            coeffs,
            basis: Arc::clone(basis),
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn basis(&self) -> &Arc<BasisSpec> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Error unless `other` lives on a basis with the same layout.
    pub fn check_compatible(&self, other: &SpectralField) -> Result<()> {
        if Arc::ptr_eq(&self.basis, &other.basis) || self.basis.same_layout(&other.basis) {
            Ok(())
        } else {
            Err(ShsimError::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            })
        }
    }

    /// L2 inner product.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        assert_eq!(self.dim(), other.dim(), "inner product of incompatible fields");
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn norms(&self) -> Norms {
        Norms::of(self)
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        assert_eq!(self.dim(), x.dim(), "axpy on incompatible fields");
        for (s, xi) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *s += a * xi;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    /// Number of leading coefficients up to and including the last nonzero one.
    pub fn active_len(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != 0.0).map_or(0, |i| i + 1)
    }

    /// Galerkin projector `Z_n`: keep the first `n` coefficients.
    pub fn project(&self, n: usize) -> Result<SpectralField> {
        check_galerkin_n(n, self.dim())?;
        let mut out = self.clone();
        out.truncate_in_place(n);
        Ok(out)
    }

    pub(crate) fn truncate_in_place(&mut self, n: usize) {
        for c in &mut self.coeffs[n..] {
            *c = 0.0;
        }
    }

    /// `(Au)_j = mu_j c_j`
    pub fn apply_a(&self) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.basis.mu())
            .map(|(c, m)| c * m)
            .collect();
        SpectralField::from_raw(&self.basis, coeffs)
    }

    /// `(e^{-tA} u)_j = exp(-t mu_j) c_j`
    pub fn apply_semigroup(&self, t: f64) -> Result<SpectralField> {
        if !(t >= 0.0) {
            return Err(ShsimError::Domain(format!(
                "semigroup time must be non-negative, got {t}"
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.basis.mu())
            .map(|(c, m)| c * (-t * m).exp())
            .collect();
        Ok(SpectralField::from_raw(&self.basis, coeffs))
    }

    /// Evaluate the field at the collocation nodes.
    pub fn to_grid(&self) -> GridField {
        let b = &*self.basis;
        let mq = b.quad_points();
        let active = self.active_len();
        let values = if b.domain().dimension() == 1 {
            let axis = &b.axes[0];
            let mut g = vec![0.0; mq];
            for (j, &c) in self.coeffs[..active].iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                for (gm, s) in g.iter_mut().zip(axis.row(j, mq)) {
                    *gm += c * s;
                }
            }
            g
        } else {
            let n = b.n_modes();
            let mut cmat = vec![0.0; n * n];
            for (s, &c) in self.coeffs[..active].iter().enumerate() {
                let (p, q) = b.modes()[s];
                cmat[p * n + q] = c;
            }
            let (ax, ay) = (&b.axes[0], &b.axes[1]);
            // t[p][my] = sum_q C[p][q] Sy[q][my]
            let mut t = vec![0.0; n * mq];
            for p in 0..n {
                let trow = &mut t[p * mq..(p + 1) * mq];
                for q in 0..n {
                    let c = cmat[p * n + q];
                    if c == 0.0 {
                        continue;
                    }
                    for (tv, s) in trow.iter_mut().zip(ay.row(q, mq)) {
                        *tv += c * s;
                    }
                }
            }
            let mut g = vec![0.0; mq * mq];
            for p in 0..n {
                let trow = &t[p * mq..(p + 1) * mq];
                if trow.iter().all(|v| *v == 0.0) {
                    continue;
                }
                for (mx, sx) in ax.row(p, mq).iter().enumerate() {
                    let grow = &mut g[mx * mq..(mx + 1) * mq];
                    for (gv, tv) in grow.iter_mut().zip(trow) {
                        *gv += sx * tv;
                    }
                }
            }
            g
        };
        GridField {
            values,
            basis: Arc::clone(&self.basis),
        }
    }

    /// `||u||^p_{L^p}` by quadrature on the collocation grid.
    pub fn lp_norm_pow(&self, p: f64) -> Result<f64> {
        self.to_grid().lp_norm_pow(p)
    }

    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn check_galerkin_n(n: usize, dim: usize) -> Result<()> {
    if n == 0 || n > dim {
        return Err(ShsimError::OutOfRange {
            what: "Galerkin dimension n",
            value: n as i64,
            min: 1,
            max: dim as i64,
        });
    }
    Ok(())
}

impl GridField {
    pub fn from_values(basis: &Arc<BasisSpec>, values: Vec<f64>) -> Result<Self> {
        if values.len() != basis.grid_len() {
            return Err(ShsimError::DimensionMismatch {
                expected: basis.grid_len(),
                actual: values.len(),
            });
        }
        Ok(GridField {
            values,
            basis: Arc::clone(basis),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn basis(&self) -> &Arc<BasisSpec> {
        &self.basis
    }

    /// Pointwise integer power.
    pub fn powi(&self, k: i32) -> GridField {
        GridField {
            values: self.values.iter().map(|v| v.powi(k)).collect(),
            basis: Arc::clone(&self.basis),
        }
    }

    pub fn lp_norm_pow(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(ShsimError::Domain(format!("L^p norm needs p >= 1, got {p}")));
        }
        let w = self.basis.cell_weight();
        let sum: f64 = if p.fract() == 0.0 && p <= i32::MAX as f64 {
            let k = p as i32;
            if k % 2 == 0 {
                self.values.iter().map(|v| v.powi(k)).sum()
            } else {
                self.values.iter().map(|v| v.abs().powi(k)).sum()
            }
        } else {
            self.values.iter().map(|v| v.abs().powf(p)).sum()
        };
        Ok(w * sum)
    }

    /// Discrete sine transform back to all basis coefficients.
    pub fn to_spectral(&self) -> SpectralField {
        self.to_spectral_truncated(self.basis.dim())
    }

    /// Coefficients of the first `n` basis functions; the rest are zero.
    pub fn to_spectral_truncated(&self, n: usize) -> SpectralField {
        let b = &*self.basis;
        let n = n.min(b.dim());
        let mq = b.quad_points();
        let mut coeffs = vec![0.0; b.dim()];
        if b.domain().dimension() == 1 {
            let axis = &b.axes[0];
            for (j, c) in coeffs[..n].iter_mut().enumerate() {
                let dot: f64 = axis
                    .row(j, mq)
                    .iter()
                    .zip(&self.values)
                    .map(|(s, g)| s * g)
                    .sum();
                *c = axis.weight * dot;
            }
        } else {
            let nm = b.n_modes();
            let (ax, ay) = (&b.axes[0], &b.axes[1]);
            // t[p][my] = wx sum_mx Sx[p][mx] G[mx][my]
            let mut t = vec![0.0; nm * mq];
            for p in 0..nm {
                let trow = &mut t[p * mq..(p + 1) * mq];
                for (mx, sx) in ax.row(p, mq).iter().enumerate() {
                    let grow = &self.values[mx * mq..(mx + 1) * mq];
                    for (tv, gv) in trow.iter_mut().zip(grow) {
                        *tv += sx * gv;
                    }
                }
            }
            for (s, c) in coeffs[..n].iter_mut().enumerate() {
                let (p, q) = b.modes()[s];
                let dot: f64 = ay
                    .row(q, mq)
                    .iter()
                    .zip(&t[p * mq..(p + 1) * mq])
                    .map(|(a, b)| a * b)
                    .sum();
                *c = ax.weight * ay.weight * dot;
            }
        }
        SpectralField::from_raw(&self.basis, coeffs)
    }
}

/// `from_grid` with a layout check.
pub fn from_grid(g: &GridField) -> Result<SpectralField> {
    if g.values.len() != g.basis.grid_len() {
        return Err(ShsimError::DimensionMismatch {
            expected: g.basis.grid_len(),
            actual: g.values.len(),
        });
    }
    Ok(g.to_spectral())
}
