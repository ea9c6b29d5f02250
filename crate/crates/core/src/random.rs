//! Seeded sampling. Every random object is derived from a single 64-bit seed
//! through a counted stream of ChaCha generators, so corpora are reproducible
//! and independent draws never share state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::linalg::{orthonormalize_columns, CMatrix, C64};

/// Counted splittable generator: `next_seed` hands out child seeds derived
/// from (seed, counter) with a splitmix64 finalizer.
#[derive(Clone, Debug)]
pub struct SeedStream {
    seed: u64,
    counter: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream { seed, counter: 0 }
    }

    pub fn next_seed(&mut self) -> u64 {
        self.counter += 1;
        splitmix64(self.seed ^ splitmix64(self.counter))
    }

    pub fn next_rng(&mut self) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.next_seed())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Complex Ginibre matrix with standard normal real and imaginary parts.
pub fn ginibre<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Haar-random unitary.
pub fn haar_unitary<R: Rng>(d: usize, rng: &mut R) -> CMatrix {
    orthonormalize_columns(&ginibre(d, d, rng))
}

/// Haar-random isometry C^cols → C^rows.
pub fn random_isometry<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    orthonormalize_columns(&ginibre(rows, cols, rng))
}

/// Haar-random pure state vector.
pub fn random_pure<R: Rng>(d: usize, rng: &mut R) -> CMatrix {
    random_isometry(d, 1, rng)
}

/// Random density matrix of the given rank (induced measure).
pub fn random_density<R: Rng>(d: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, rank.max(1), rng);
    let m = g.matmul(&g.adjoint());
    let t = m.trace().re;
    m.scale(1.0 / t)
}

/// Random probability vector (flat Dirichlet).
pub fn random_probabilities<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}
