//! Constant-composition distribution matching.
//!
//! The matcher is an arithmetic coder run with exact integers: the interval
//! attached to a prefix has as many points as there are completions of that
//! prefix with the remaining composition, so the code is the lexicographic
//! rank among all sequences of the composition.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Number of distinct sequences with the given composition.
pub fn multinomial(composition: &[usize]) -> BigUint {
    let mut result = BigUint::one();
    let mut n = 0u64;
    for &c in composition {
        for i in 1..=c as u64 {
            n += 1;
            // running product stays an integer: C(n, i) prefix form
            result = result * BigUint::from(n) / BigUint::from(i);
        }
    }
    result
}

/// Bits carried by one block: `floor(log2(multinomial))`.
pub fn ccdm_info_bits(composition: &[usize]) -> usize {
    let m = multinomial(composition);
    (m.bits() as usize).saturating_sub(1)
}

fn bits_to_int(bits: &[u8]) -> BigUint {
    let mut v = BigUint::zero();
    for &b in bits {
        v <<= 1u32;
        if b != 0 {
            v += 1u32;
        }
    }
    v
}

fn int_to_bits(mut v: BigUint, k: usize) -> Vec<u8> {
    let mut out = vec![0u8; k];
    for slot in out.iter_mut().rev() {
        *slot = (&v & BigUint::one()).to_u8().unwrap_or(0);
        v >>= 1u32;
    }
    out
}

/// Maps exactly `ccdm_info_bits(composition)` bits to a sequence of
/// amplitude indices with that composition.
pub fn ccdm_match(info_bits: &[u8], composition: &[usize]) -> Result<Vec<usize>> {
    let k = ccdm_info_bits(composition);
    if info_bits.len() != k {
        return Err(Error::param(format!("CCDM block takes {k} bits, got {}", info_bits.len())));
    }
    let mut index = bits_to_int(info_bits);
    let mut remaining = composition.to_vec();
    let mut n: usize = remaining.iter().sum();
    let mut count = multinomial(composition);
    let mut out = Vec::with_capacity(n);
    while n > 0 {
        let mut chosen = None;
        for (a, &c) in remaining.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sub = &count * BigUint::from(c) / BigUint::from(n);
            if index < sub {
                chosen = Some((a, sub));
                break;
            }
            index -= sub;
        }
        let (a, sub) = chosen.expect("index below multinomial always lands in a subinterval");
        out.push(a);
        remaining[a] -= 1;
        count = sub;
        n -= 1;
    }
    Ok(out)
}

/// Inverse of [`ccdm_match`].
///
/// Fails when the sequence does not have the composition or its rank is
/// beyond the `2^k` codewords in use; both point at uncorrected errors
/// upstream.
pub fn ccdm_dematch(indices: &[usize], composition: &[usize]) -> Result<Vec<u8>> {
    let mut seen = vec![0usize; composition.len()];
    for &a in indices {
        if a >= composition.len() {
            return Err(Error::Decode(format!("amplitude index {a} outside alphabet")));
        }
        seen[a] += 1;
    }
    if seen != composition {
        return Err(Error::Decode(format!("composition {seen:?} does not match {composition:?}")));
    }
    let k = ccdm_info_bits(composition);
    let mut remaining = composition.to_vec();
    let mut n = indices.len();
    let mut count = multinomial(composition);
    let mut index = BigUint::zero();
    for &a in indices {
        for b in 0..a {
            let c = remaining[b];
            if c > 0 {
                index += &count * BigUint::from(c) / BigUint::from(n);
            }
        }
        count = &count * BigUint::from(remaining[a]) / BigUint::from(n);
        remaining[a] -= 1;
        n -= 1;
    }
    if index.bits() as usize > k {
        return Err(Error::Decode("sequence rank outside the codebook".into()));
    }
    Ok(int_to_bits(index, k))
}
