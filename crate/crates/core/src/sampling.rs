//! Seeded sampling helpers.
//!
//! Every randomized check draws from a `ChaCha8Rng` seeded from a `u64`, so the
//! same seed reproduces the same sample list bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream seed for a sub-check.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Additive recurrence low-discrepancy sequence in `[0,1)^d`
/// (Roberts' R_d generalization of the golden ratio sequence), with a
/// seed-dependent random shift.
#[derive(Clone, Debug)]
pub struct QuasiUniform {
    alpha: Vec<f64>,
    state: Vec<f64>,
}

impl QuasiUniform {
    pub fn new(dimension: usize, seed: u64) -> Self {
        let g = generalized_golden_ratio(dimension);
        let alpha: Vec<f64> = (1..=dimension)
            .map(|j| (1.0 / g.powi(j as i32)).fract())
            .collect();
        let mut rng = seeded_rng(seed);
        let state = (0..dimension).map(|_| rng.gen::<f64>()).collect();
        QuasiUniform { alpha, state }
    }

    pub fn dimension(&self) -> usize {
        self.alpha.len()
    }

    /// Next point of the sequence, each coordinate in `[0, 1)`.
    pub fn next_point(&mut self) -> Vec<f64> {
        let out = self.state.clone();
        for (s, a) in self.state.iter_mut().zip(&self.alpha) {
            *s = (*s + a).fract();
        }
        out
    }
}

/// Positive root of `x^(d+1) = x + 1`.
fn generalized_golden_ratio(d: usize) -> f64 {
    let e = (d + 1) as f64;
    let mut x = 2.0f64;
    for _ in 0..64 {
        let f = x.powf(e) - x - 1.0;
        let df = e * x.powf(e - 1.0) - 1.0;
        let next = x - f / df;
        if (next - x).abs() < 1e-15 {
            return next;
        }
        x = next;
    }
    x
}
