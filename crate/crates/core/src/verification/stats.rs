//! Small statistics helpers used by the Monte Carlo reports.

use crate::error::{Result, ShsimError};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub count: usize,
}

impl MeanSe {
    pub fn from_samples(xs: &[f64]) -> Result<MeanSe> {
        if xs.len() < 2 {
            return Err(ShsimError::Precondition(format!(
                "standard error needs at least 2 samples, got {}",
                xs.len()
            )));
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Ok(MeanSe {
            mean,
            se: (var / n).sqrt(),
            count: xs.len(),
        })
    }

    /// Bernoulli proportion with the plug-in standard error.
    pub fn proportion(hits: usize, count: usize) -> MeanSe {
        let p = hits as f64 / count as f64;
        MeanSe {
            mean: p,
            se: (p * (1.0 - p) / count as f64).sqrt(),
            count,
        }
    }
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    sxy / sxx
}

/// Slope of `means` against `x` and its standard error propagated from the
/// per-point standard errors (points treated as independent).
pub fn weighted_trend(x: &[f64], means: &[f64], ses: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    let w: Vec<f64> = x.iter().map(|a| (a - xm) / sxx).collect();
    let slope = w.iter().zip(means).map(|(wi, y)| wi * y).sum();
    let se = w
        .iter()
        .zip(ses)
        .map(|(wi, s)| (wi * s).powi(2))
        .sum::<f64>()
        .sqrt();
    (slope, se)
}

/// Observed convergence order: slope of `ln err` against `ln h`.
pub fn observed_order(h: &[f64], err: &[f64]) -> f64 {
    let lx: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    ls_slope(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_se() {
        let m = MeanSe::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.mean, 2.5);
        assert!((m.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(MeanSe::from_samples(&[1.0]).is_err());
    }

    #[test]
    fn slopes() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        assert!((ls_slope(&x, &y) - 2.0).abs() < 1e-14);
        let (s, se) = weighted_trend(&x, &y, &[0.1; 4]);
        assert!((s - 2.0).abs() < 1e-14);
        assert!((se - 0.1 / 5f64.sqrt()).abs() < 1e-14);
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|v| 3.0 * v * v).collect();
        assert!((observed_order(&h, &e) - 2.0).abs() < 1e-12);
    }
}
