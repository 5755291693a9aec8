//! Deterministic randomness with exact discrete distributions.
//!
//! All sampling decisions in this crate reduce to `uniform_below`, which is
//! exactly uniform by fixed-width chunk rejection. No floating point is used
//! anywhere on a sampling path.

use crate::error::MathError;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand_core::{RngCore, SeedableRng};

/// Source of raw 64-bit words. Implemented by `RandomStream` and by test
/// stubs that enumerate chunk values.
pub trait DrawSource {
    fn next_u64(&mut self) -> u64;
}

/// The crate's named PRNG: ChaCha12, seeded from a 64-bit seed, with an
/// optional stream id for derived per-sample streams. (seed, stream,
/// position) fully determines all future draws.
pub struct RandomStream {
    rng: rand_chacha::ChaCha12Rng,
    seed: u64,
    stream: u64,
    position: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            rng: rand_chacha::ChaCha12Rng::seed_from_u64(seed),
            seed,
            stream: 0,
            position: 0,
        }
    }

    /// Derived stream for sample index `stream`; independent of and
    /// deterministic alongside all other streams of the same seed.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RandomStream {
            rng,
            seed,
            stream,
            position: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of 64-bit words drawn so far.
    pub fn position(&self) -> u64 {
        self.position
    }
}

impl DrawSource for RandomStream {
    fn next_u64(&mut self) -> u64 {
        self.position += 1;
        self.rng.next_u64()
    }
}

/// Exactly uniform over {0, ..., n-1}: draw ceil(bits/64) words, mask to
/// bit-length, reject and redraw if >= n.
pub fn uniform_below(n: &BigUint, rng: &mut dyn DrawSource) -> Result<BigUint, MathError> {
    if n.is_zero() {
        return Err(MathError::ZeroRange);
    }
    if n.is_one() {
        return Ok(BigUint::zero());
    }
    let bits = n.bits();
    let words = bits.div_ceil(64) as usize;
    let top_mask: u64 = if bits % 64 == 0 {
        u64::MAX
    } else {
        (1u64 << (bits % 64)) - 1
    };
    loop {
        let mut digits = Vec::with_capacity(words);
        for w in 0..words {
            let mut d = rng.next_u64();
            if w == words - 1 {
                d &= top_mask;
            }
            digits.push(d);
        }
        let candidate = biguint_from_u64_digits(&digits);
        if &candidate < n {
            return Ok(candidate);
        }
    }
}

fn biguint_from_u64_digits(digits: &[u64]) -> BigUint {
    let mut u32s = Vec::with_capacity(digits.len() * 2);
    for &d in digits {
        u32s.push(d as u32);
        u32s.push((d >> 32) as u32);
    }
    BigUint::new(u32s)
}

/// Index i with probability weights[i] / sum(weights), exactly.
pub fn weighted_choice(weights: &[BigUint], rng: &mut dyn DrawSource) -> Result<usize, MathError> {
    let total: BigUint = weights.iter().sum();
    if total.is_zero() {
        return Err(MathError::AllZeroWeights);
    }
    let r = uniform_below(&total, rng)?;
    let mut acc = BigUint::zero();
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if r < acc {
            return Ok(i);
        }
    }
    unreachable!("r < total");
}

/// u64 convenience wrapper around `uniform_below`.
pub fn uniform_usize(n: usize, rng: &mut dyn DrawSource) -> usize {
    use num_traits::ToPrimitive;
    uniform_below(&BigUint::from(n), rng)
        .expect("n >= 1")
        .to_usize()
        .unwrap()
}

/// Uniform r-subset of `items` by a Fisher-Yates prefix; returned sorted.
pub fn uniform_subset(items: &[u32], r: usize, rng: &mut dyn DrawSource) -> Vec<u32> {
    assert!(r <= items.len());
    let mut pool = items.to_vec();
    for i in 0..r {
        let j = i + uniform_usize(pool.len() - i, rng);
        pool.swap(i, j);
    }
    let mut out = pool[..r].to_vec();
    out.sort_unstable();
    out
}

/// Uniform permutation of `items` in place (Fisher-Yates).
pub fn shuffle(items: &mut [u32], rng: &mut dyn DrawSource) {
    for i in (1..items.len()).rev() {
        let j = uniform_usize(i + 1, rng);
        items.swap(i, j);
    }
}
