//! Reproducible, refinement-consistent Brownian increments.
//!
//! Increments live on a dyadic tree. Level 0 has step `root_dt` and its
//! increments are drawn directly; every level-`l` increment `X` over a step
//! `h` splits into two children
//!
//! ```text
//! left  = X / 2 + sqrt(h) / 2 * Z
//! right = X - left
//! ```
//!
//! with `Z` keyed by `(seed, trajectory, k, l + 1, parent index)`. Paths at
//! `dt = root_dt / 2^l` for different `l` are therefore the same Brownian
//! motion sampled at different resolutions.

use crate::error::{Result, ShsimError};
use crate::rng::{mix_key, normal_from_key};

/// Increments `dW_k` for every step, stored step-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    dt: f64,
    n_noise: usize,
    n_steps: usize,
    increments: Vec<f64>,
}

/// Key for the refinement-tree draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathKey {
    pub master_seed: u64,
    pub trajectory: u64,
}

/// Refinement level `l` with `root_dt / 2^l == dt`, if one exists.
pub fn refinement_level(root_dt: f64, dt: f64) -> Result<u32> {
    if !(root_dt > 0.0 && dt > 0.0) || dt > root_dt * (1.0 + 1e-12) {
        return Err(ShsimError::config(
            "integrator.noise_root_dt",
            format!("root step {root_dt} must be a dyadic multiple of dt = {dt}"),
        ));
    }
    let level = (root_dt / dt).log2().round();
    let rebuilt = root_dt / 2f64.powf(level);
    if (rebuilt - dt).abs() > 1e-9 * dt || level > 40.0 {
        return Err(ShsimError::config(
            "integrator.noise_root_dt",
            format!("root step {root_dt} is not dt * 2^l for dt = {dt}"),
        ));
    }
    Ok(level as u32)
}

impl BrownianPath {
    /// Sample `n_steps` increments per noise direction at `dt = root_dt / 2^level`.
    /// When `last_dt < dt`, the final increment is rescaled to that shorter step.
    pub fn sample(
        key: PathKey,
        n_noise: usize,
        root_dt: f64,
        level: u32,
        n_steps: usize,
        last_dt: Option<f64>,
    ) -> BrownianPath {
        let per_root = 1usize << level;
        let n_root = n_steps.div_ceil(per_root).max(1);
        let dt = root_dt / per_root as f64;
        let mut increments = vec![0.0; n_steps * n_noise];
        for k in 0..n_noise {
            let coords = |lvl: u64, idx: u64| [key.trajectory, k as u64, lvl, idx];
            let mut cur: Vec<f64> = (0..n_root)
                .map(|i| normal_from_key(mix_key(key.master_seed, &coords(0, i as u64))) * root_dt.sqrt())
                .collect();
            let mut h = root_dt;
            for lvl in 0..level {
                let mut next = Vec::with_capacity(cur.len() * 2);
                let half_sd = 0.5 * h.sqrt();
                for (i, x) in cur.iter().enumerate() {
                    let z = normal_from_key(mix_key(key.master_seed, &coords(u64::from(lvl) + 1, i as u64)));
                    let left = 0.5 * x + half_sd * z;
                    next.push(left);
                    next.push(x - left);
                }
                cur = next;
                h *= 0.5;
            }
            for (s, w) in cur.into_iter().take(n_steps).enumerate() {
                increments[s * n_noise + k] = w;
            }
        }
        if let (Some(last), true) = (last_dt, n_steps > 0) {
            if last < dt {
                let r = (last / dt).sqrt();
                for w in &mut increments[(n_steps - 1) * n_noise..] {
                    *w *= r;
                }
            }
        }
        BrownianPath {
            dt,
            n_noise,
            n_steps,
            increments,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_noise(&self) -> usize {
        self.n_noise
    }

    /// `dW_1..dW_N` over step `s`.
    pub fn step(&self, s: usize) -> &[f64] {
        &self.increments[s * self.n_noise..(s + 1) * self.n_noise]
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEY: PathKey = PathKey {
        master_seed: 12345,
        trajectory: 7,
    };

    #[test]
    fn deterministic_per_seed_and_index() {
        let a = BrownianPath::sample(KEY, 2, 0.01, 0, 100, None);
        let b = BrownianPath::sample(KEY, 2, 0.01, 0, 100, None);
        assert!(a
            .increments()
            .iter()
            .zip(b.increments())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
        let other = BrownianPath::sample(PathKey { trajectory: 8, ..KEY }, 2, 0.01, 0, 100, None);
        assert_ne!(a, other);
    }

    #[test]
    fn halving_dt_splits_each_increment() {
        let coarse = BrownianPath::sample(KEY, 3, 0.1, 2, 40, None);
        let fine = BrownianPath::sample(KEY, 3, 0.1, 3, 80, None);
        assert!((coarse.dt() - 0.025).abs() < 1e-15);
        for s in 0..40 {
            for k in 0..3 {
                let sum = fine.step(2 * s)[k] + fine.step(2 * s + 1)[k];
                let c = coarse.step(s)[k];
                assert!((sum - c).abs() <= 4.0 * f64::EPSILON * c.abs().max(1e-300) + 1e-300);
            }
        }
    }

    #[test]
    fn increment_statistics() {
        let dt = 1e-3;
        let n = 100_000;
        let p = BrownianPath::sample(KEY, 1, dt, 0, n, None);
        let mean = p.increments().iter().sum::<f64>() / n as f64;
        let var = p.increments().iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() <= 4.0 * dt.sqrt() / (n as f64).sqrt());
        assert!((var / dt - 1.0).abs() < 0.05);

        // Refined levels keep the per-step variance.
        let p = BrownianPath::sample(KEY, 1, 8.0 * dt, 3, n, None);
        let var = p.increments().iter().map(|w| w * w).sum::<f64>() / n as f64;
        assert!((var / dt - 1.0).abs() < 0.05);
    }

    #[test]
    fn refinement_level_detection() {
        assert_eq!(refinement_level(0.01, 0.01).unwrap(), 0);
        assert_eq!(refinement_level(0.01, 0.0025).unwrap(), 2);
        assert!(refinement_level(0.01, 0.003).is_err());
        assert!(refinement_level(0.01, 0.02).is_err());
    }

    #[test]
    fn short_final_step_is_rescaled() {
        let full = BrownianPath::sample(KEY, 1, 0.1, 0, 3, None);
        let short = BrownianPath::sample(KEY, 1, 0.1, 0, 3, Some(0.025));
        assert_eq!(full.step(1), short.step(1));
        assert!((short.step(2)[0] - 0.5 * full.step(2)[0]).abs() < 1e-15);
    }
}
