//! Deterministic sampling helpers: seeded RNG construction, Halton
//! low-discrepancy sequences, and unit directions in `C^n`.
//!
//! Every randomized routine in the crate threads an explicit `u64` seed
//! through these helpers, so identical inputs produce identical outputs
//! regardless of call order or worker count.

use crate::C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream from a base seed and a stream label.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 step over the pair
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const HALTON_PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Radical-inverse of `index` in the given base.
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut inv = 0.0;
    let mut frac = 1.0 / base as f64;
    while index > 0 {
        inv += (index % base) as f64 * frac;
        index /= base;
        frac /= base as f64;
    }
    inv
}

/// `i`-th point of a seed-offset Halton sequence in `[0,1)^dim` (dim <= 8).
pub fn halton_point(seed: u64, i: u64, dim: usize) -> Vec<f64> {
    assert!(dim <= HALTON_PRIMES.len(), "halton dimension too large");
    let offset = seed % 65_521; // fixed prime modulus keeps offsets bounded
    (0..dim)
        .map(|k| radical_inverse(i + 1 + offset, HALTON_PRIMES[k]))
        .collect()
}

/// Uniform random unit direction in `C^n` (2n real Gaussians, normalized).
pub fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(gaussian(rng), gaussian(rng)))
            .collect();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; consumes two uniforms per call for determinism.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Simple least-squares line fit `y = slope * x + intercept` with Pearson r.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r = if syy == 0.0 { 1.0 } else { sxy / (sxx * syy).sqrt() };
    Some((slope, intercept, r))
}
