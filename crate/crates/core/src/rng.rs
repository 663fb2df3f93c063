//! Seeded random streams. Trial `j` under seed `s` reads ChaCha stream `j`
//! of the generator keyed by `s`, so its draws depend only on `(s, j)` and
//! the position within the trial.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::variant::Variant;

/// Generator for trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Fills `out` with uniform ±1 values, one bit per entry.
pub fn fill_signs(rng: &mut impl RngCore, out: &mut [f64]) {
    for chunk in out.chunks_mut(64) {
        let mut bits = rng.next_u64();
        for v in chunk {
            *v = if bits & 1 == 1 { 1.0 } else { -1.0 };
            bits >>= 1;
        }
    }
}

pub fn fill_normals(rng: &mut impl RngCore, out: &mut [f64]) {
    for v in out {
        *v = StandardNormal.sample(rng);
    }
}

pub fn fill_noise(variant: Variant, rng: &mut impl RngCore, out: &mut [f64]) {
    match variant {
        Variant::Rademacher => fill_signs(rng, out),
        Variant::Gaussian => fill_normals(rng, out),
    }
}

/// `count` Rademacher signs from stream 0 of `seed`.
pub fn sample_signs(count: usize, seed: u64) -> Vec<f64> {
    let mut out = vec![0.0; count];
    fill_signs(&mut trial_rng(seed, 0), &mut out);
    out
}

/// `count` standard normals from stream 0 of `seed`.
pub fn sample_normals(count: usize, seed: u64) -> Vec<f64> {
    let mut out = vec![0.0; count];
    fill_normals(&mut trial_rng(seed, 0), &mut out);
    out
}
