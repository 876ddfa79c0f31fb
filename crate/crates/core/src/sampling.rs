//! Seeded sampling of spectral parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rational::Rat;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Numerator in `[-9, 9]`, denominator in `[1, 9]`.
    pub fn rat(&mut self) -> Rat {
        let n = self.rng.gen_range(-9i64..=9);
        let d = self.rng.gen_range(1i64..=9);
        Rat::new(n, d)
    }

    /// `n` parameters that are distinct, avoid `0` and `±1`, and whose pairwise
    /// differences avoid `±1`, so no R-matrix between them or against a
    /// trivial site hits a pole.
    pub fn params(&mut self, n: usize) -> Vec<Rat> {
        let one = Rat::one();
        let bad = |d: &Rat| d.is_zero() || d.abs() == one;
        let mut out: Vec<Rat> = Vec::with_capacity(n);
        while out.len() < n {
            let x = self.rat();
            if bad(&x) || out.iter().any(|y| bad(&(&x - y))) {
                continue;
            }
            out.push(x);
        }
        out
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}
