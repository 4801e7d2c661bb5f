//! Dirichlet-Laplacian eigenbasis on an interval or a rectangle.
//!
//! On `(0, L)` the basis functions are `e_j(x) = sqrt(2/L) sin(j pi x / L)` with
//! Laplacian eigenvalues `lambda_j = (j pi / L)^2`. The fourth-order operator
//! `A = Δ² − 2Δ` is diagonal in the same basis with `mu_j = lambda_j^2 + 2 lambda_j`.
//! Rectangles use tensor products, sorted by `lambda` with a lexicographic
//! tie-break on the mode pair.
//!
//! Collocation uses `M` uniform interior nodes per axis, `x_m = m L / (M + 1)`,
//! with weight `L / (M + 1)`. This is the discrete sine transform (type I),
//! which is exact for sine series up to order `M`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShsimError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Interval { length: f64 },
    Rectangle { lx: f64, ly: f64 },
}

impl Domain {
    pub fn unit_interval_pi() -> Self {
        Domain::Interval { length: PI }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Rectangle { .. } => 2,
        }
    }

    /// Side lengths, with the unused second entry set to zero in 1-D.
    pub fn lengths(&self) -> [f64; 2] {
        match *self {
            Domain::Interval { length } => [length, 0.0],
            Domain::Rectangle { lx, ly } => [lx, ly],
        }
    }
}

/// One collocation axis: node positions, weight and the sampled sine table.
#[derive(Debug, Clone)]
pub(crate) struct Axis {
    pub weight: f64,
    pub nodes: Vec<f64>,
    /// Row-major `n_modes x M`: `table[p * M + m] = sqrt(2/L) sin((p+1) pi x_m / L)`.
    pub table: Vec<f64>,
}

impl Axis {
    fn new(length: f64, n_modes: usize, quad_points: usize) -> Self {
        let h = length / (quad_points as f64 + 1.0);
        let nodes: Vec<f64> = (1..=quad_points).map(|m| m as f64 * h).collect();
        let amp = (2.0 / length).sqrt();
        let denom = quad_points as f64 + 1.0;
        let mut table = Vec::with_capacity(n_modes * quad_points);
        for p in 1..=n_modes {
            for m in 1..=quad_points {
                // Reduce the phase index modulo 2(M+1) so large products stay accurate.
                let phase = (p * m) % (2 * (quad_points + 1));
                table.push(amp * (PI * phase as f64 / denom).sin());
            }
        }
        Axis {
            weight: h,
            nodes,
            table,
        }
    }

    #[inline]
    pub fn row(&self, p: usize, quad_points: usize) -> &[f64] {
        &self.table[p * quad_points..(p + 1) * quad_points]
    }
}

#[derive(Debug, Clone)]
pub struct BasisSpec {
    domain: Domain,
    n_modes: usize,
    quad_points: usize,
    /// Zero-based `(p, q)` mode indices; `q` is always 0 in 1-D.
    modes: Vec<(usize, usize)>,
    lambda: Vec<f64>,
    mu: Vec<f64>,
    pub(crate) axes: Vec<Axis>,
    /// Position of mode `(p, q)` in the sorted ordering (2-D only).
    pub(crate) slot: Vec<usize>,
}

/// Smallest admissible collocation count for the power `u^(2 n_exp - 1)`.
pub fn dealiasing_bound(n_modes: usize, n_exp: u32) -> usize {
    (2 * n_exp as usize + 1) * n_modes
}

/// Default collocation count: `4 * n_modes * n_exp`.
pub fn default_quad_points(n_modes: usize, n_exp: u32) -> usize {
    4 * n_modes * n_exp as usize
}

pub fn build_basis(domain: Domain, n_modes: usize, quad_points: usize) -> Result<BasisSpec> {
    if n_modes == 0 {
        return Err(ShsimError::config("n_modes", "must be at least 1"));
    }
    for (i, l) in domain.lengths().iter().take(domain.dimension()).enumerate() {
        if !(l.is_finite() && *l > 0.0) {
            let key = if domain.dimension() == 1 {
                "length".to_string()
            } else {
                format!("lengths[{i}]")
            };
            return Err(ShsimError::config(key, format!("domain length must be positive, got {l}")));
        }
    }
    // The weakest bound (n_exp = 1); stronger exponents are checked where the power is taken.
    let min_points = dealiasing_bound(n_modes, 1);
    if quad_points < min_points {
        return Err(ShsimError::config(
            "quad_points",
            format!("{quad_points} is below the de-aliasing bound {min_points} for {n_modes} modes"),
        ));
    }

    let eig = |j: usize, len: f64| {
        let k = (j + 1) as f64 * PI / len;
        k * k
    };

    let (modes, lambda, axes, slot) = match domain {
        Domain::Interval { length } => {
            let modes: Vec<_> = (0..n_modes).map(|p| (p, 0)).collect();
            let lambda: Vec<_> = (0..n_modes).map(|p| eig(p, length)).collect();
            let axes = vec![Axis::new(length, n_modes, quad_points)];
            (modes, lambda, axes, Vec::new())
        }
        Domain::Rectangle { lx, ly } => {
            let mut pairs: Vec<(f64, (usize, usize))> = Vec::with_capacity(n_modes * n_modes);
            for p in 0..n_modes {
                for q in 0..n_modes {
                    pairs.push((eig(p, lx) + eig(q, ly), (p, q)));
                }
            }
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut slot = vec![0usize; n_modes * n_modes];
            for (s, (_, (p, q))) in pairs.iter().enumerate() {
                slot[p * n_modes + q] = s;
            }
            let modes = pairs.iter().map(|(_, m)| *m).collect();
            let lambda = pairs.iter().map(|(l, _)| *l).collect();
            let axes = vec![
                Axis::new(lx, n_modes, quad_points),
                Axis::new(ly, n_modes, quad_points),
            ];
            (modes, lambda, axes, slot)
        }
    };
    let mu = lambda.iter().map(|l| l * l + 2.0 * l).collect();

    Ok(BasisSpec {
        domain,
        n_modes,
        quad_points,
        modes,
        lambda,
        mu,
        axes,
        slot,
    })
}

impl BasisSpec {
    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Modes per axis.
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn quad_points(&self) -> usize {
        self.quad_points
    }

    /// Number of basis functions (`n_modes` in 1-D, `n_modes^2` in 2-D).
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// Number of grid samples (`M` or `M^2`).
    pub fn grid_len(&self) -> usize {
        self.quad_points.pow(self.domain.dimension() as u32)
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// One-based mode indices of the `j`-th basis function (second entry 0 in 1-D).
    pub fn mode_indices(&self, j: usize) -> (usize, usize) {
        let (p, q) = self.modes[j];
        match self.domain {
            Domain::Interval { .. } => (p + 1, 0),
            Domain::Rectangle { .. } => (p + 1, q + 1),
        }
    }

    /// Inverse of [`mode_indices`](Self::mode_indices).
    pub fn index_of(&self, p: usize, q: usize) -> Option<usize> {
        let n = self.n_modes;
        match self.domain {
            Domain::Interval { .. } => (q == 0 && (1..=n).contains(&p)).then(|| p - 1),
            Domain::Rectangle { .. } => {
                ((1..=n).contains(&p) && (1..=n).contains(&q)).then(|| self.slot[(p - 1) * n + q - 1])
            }
        }
    }

    pub(crate) fn modes(&self) -> &[(usize, usize)] {
        &self.modes
    }

    /// Collocation nodes along each axis.
    pub fn nodes(&self, axis: usize) -> &[f64] {
        &self.axes[axis].nodes
    }

    /// Quadrature weight of a single grid cell.
    pub fn cell_weight(&self) -> f64 {
        self.axes.iter().map(|a| a.weight).product()
    }

    pub fn check_dealiasing(&self, n_exp: u32) -> Result<()> {
        let bound = dealiasing_bound(self.n_modes, n_exp);
        if self.quad_points < bound {
            return Err(ShsimError::config(
                "quad_points",
                format!(
                    "{} is below the de-aliasing bound {} for n_exp = {}",
                    self.quad_points, bound, n_exp
                ),
            ));
        }
        Ok(())
    }

    /// Structural equality: same domain, mode count and grid.
    pub fn same_layout(&self, other: &BasisSpec) -> bool {
        self.domain == other.domain
            && self.n_modes == other.n_modes
            && self.quad_points == other.quad_points
    }
}
