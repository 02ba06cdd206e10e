//! Seeded, counter-keyed random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the master seed and selected
//! by a `(family, index)` pair, so results never depend on scheduling order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64, family: u32, index: u32) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((family as u64) << 32) | index as u64);
    rng
}

/// Standard normal deviate by the polar Box–Muller method.
pub fn normal(rng: &mut Stream) -> f64 {
    loop {
        let u: f64 = rng.gen_range(-1.0..1.0);
        let v: f64 = rng.gen_range(-1.0..1.0);
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Uniform point on the unit sphere in `R^n`.
pub fn unit_vector(rng: &mut Stream, n: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
        let len = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-8 {
            return g.into_iter().map(|x| x / len).collect();
        }
    }
}

/// Stable 64-bit hash of a string (FNV-1a), used for instance identifiers.
pub fn fnv1a(text: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| stream(9, 1, 2).gen()).collect();
        let b: Vec<u64> = (0..4).map(|_| stream(9, 1, 2).gen()).collect();
        assert_eq!(a, b);
        let x: u64 = stream(9, 1, 2).gen();
        let y: u64 = stream(9, 1, 3).gen();
        assert_ne!(x, y);
    }
}
