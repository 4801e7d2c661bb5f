//! Counter-based Gaussian generator.
//!
//! Every draw is a pure function of a 64-bit key built from integer coordinates
//! (master seed, trajectory, noise index, refinement level, step). There is no
//! hidden state, so any increment can be regenerated independently and
//! trajectories can run on any number of threads with identical results.
//!
//! Algorithm (version 1, frozen):
//!
//! ```text
//! key   = sm(sm(sm(sm(sm(seed) ^ a) ^ b) ^ c) ^ d)        sm = SplitMix64 finalizer
//! u1    = ((sm(key ^ C1) >> 11) + 1) * 2^-53              in (0, 1]
//! u2    =  (sm(key ^ C2) >> 11)      * 2^-53              in [0, 1)
//! z     = sqrt(-2 ln u1) * cos(2 pi u2)                   Box-Muller, cosine branch
//! ```
//!
//! Any change to the above must bump [`RNG_VERSION`].

use std::f64::consts::PI;

pub const RNG_VERSION: u32 = 1;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const LANE_1: u64 = 0x6A09_E667_F3BC_C909;
const LANE_2: u64 = 0xBB67_AE85_84CA_A73B;
const TWO_POW_M53: f64 = 1.0 / 9_007_199_254_740_992.0;

#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold a seed and a list of coordinates into a single key.
#[inline]
pub fn mix_key(seed: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(splitmix64(seed), |h, &c| splitmix64(h ^ c))
}

#[inline]
pub fn uniform_from_key(key: u64) -> f64 {
    (splitmix64(key ^ LANE_2) >> 11) as f64 * TWO_POW_M53
}

#[inline]
pub fn normal_from_key(key: u64) -> f64 {
    let u1 = ((splitmix64(key ^ LANE_1) >> 11) + 1) as f64 * TWO_POW_M53;
    let u2 = uniform_from_key(key);
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Sequential stream over the counter generator, for sampling test data.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng {
            key: splitmix64(seed),
            counter: 0,
        }
    }

    /// Independent stream derived from a seed and coordinates.
    pub fn with_coords(seed: u64, coords: &[u64]) -> Self {
        CounterRng {
            key: mix_key(seed, coords),
            counter: 0,
        }
    }

    fn next_key(&mut self) -> u64 {
        let k = mix_key(self.key, &[self.counter]);
        self.counter += 1;
        k
    }

    pub fn normal(&mut self) -> f64 {
        let k = self.next_key();
        normal_from_key(k)
    }

    pub fn uniform(&mut self) -> f64 {
        let k = self.next_key();
        uniform_from_key(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_pure_functions_of_the_key() {
        let k = mix_key(42, &[3, 1, 0, 17]);
        assert_eq!(normal_from_key(k).to_bits(), normal_from_key(k).to_bits());
        assert_ne!(k, mix_key(42, &[3, 1, 0, 18]));
        assert_ne!(k, mix_key(43, &[3, 1, 0, 17]));
    }

    #[test]
    fn frozen_values() {
        // Pinned outputs of version 1; a change here breaks reproducibility.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        let z = normal_from_key(mix_key(0, &[0, 0, 0, 0]));
        assert!(z.is_finite());
        assert_eq!(RNG_VERSION, 1);
    }

    #[test]
    fn standard_normal_moments() {
        let n = 200_000;
        let mut s = 0.0;
        let mut s2 = 0.0;
        let mut s4 = 0.0;
        for i in 0..n {
            let z = normal_from_key(mix_key(9, &[i]));
            s += z;
            s2 += z * z;
            s4 += z.powi(4);
        }
        let nf = n as f64;
        let mean = s / nf;
        let var = s2 / nf - mean * mean;
        assert!(mean.abs() < 4.0 / nf.sqrt());
        assert!((var - 1.0).abs() < 0.02);
        assert!((s4 / nf - 3.0).abs() < 0.1);
    }

    #[test]
    fn uniform_range() {
        let mut r = CounterRng::new(5);
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
