//! Exact combinatorial primitives on arbitrary-precision integers.

use crate::error::MathError;
use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};

/// C(a, b), with the convention that out-of-range arguments give 0.
pub fn binomial(a: i64, b: i64) -> BigUint {
    if b < 0 || a < 0 || b > a {
        return BigUint::zero();
    }
    let b = b.min(a - b) as u64;
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..b {
        num *= BigUint::from((a as u64) - i);
        den *= BigUint::from(i + 1);
    }
    num / den
}

/// Derangement numbers by the integer recurrence !m = (m-1)(!(m-1) + !(m-2)).
pub fn derangements(m: u64) -> BigUint {
    let mut prev2 = BigUint::one(); // !0
    if m == 0 {
        return prev2;
    }
    let mut prev1 = BigUint::zero(); // !1
    for i in 2..=m {
        let next = BigUint::from(i - 1) * (&prev1 + &prev2);
        prev2 = prev1;
        prev1 = next;
    }
    prev1
}

pub fn factorial(m: u64) -> BigUint {
    (2..=m).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// |R_mu|: permutations of [n] with exactly mu moved points. |R_0| = 1 and
/// |R_mu| = !mu * C(n, mu) for mu >= 2; mu = 1 is impossible.
pub fn count_r(n: u64, mu: u64) -> Result<BigUint, MathError> {
    if mu == 0 {
        return Ok(BigUint::one());
    }
    if mu == 1 {
        return Err(MathError::MuOne);
    }
    Ok(derangements(mu) * binomial(n as i64, mu as i64))
}

/// 2^ceil(q) for a nonnegative rational exponent q.
pub fn pow2_ceil(q: Ratio<i64>) -> Result<BigUint, MathError> {
    if q < Ratio::zero() {
        return Err(MathError::NegativeExponent);
    }
    let e = q.ceil().to_integer() as u64;
    Ok(BigUint::one() << e)
}

/// ceil(a / b) for big naturals, b > 0.
pub fn div_ceil_big(a: &BigUint, b: &BigUint) -> BigUint {
    assert!(!b.is_zero());
    (a + b - BigUint::one()) / b
}

/// n^e as a big natural.
pub fn big_pow(n: u64, e: u64) -> BigUint {
    BigUint::from(n).pow(e as u32)
}
