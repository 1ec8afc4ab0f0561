//! Bijective encodings of countable sets into `ℕ = u64`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

fn overflow(what: &str) -> Error {
    Error::Encoding(format!("{what} does not fit in a 64-bit point"))
}

/// `0, -1, 1, -2, 2, … ↦ 0, 1, 2, 3, 4, …`
pub fn zigzag(z: i64) -> u64 {
    ((z << 1) ^ (z >> 63)) as u64
}

pub fn unzigzag(x: u64) -> i64 {
    ((x >> 1) as i64) ^ -((x & 1) as i64)
}

/// Zigzag of an arbitrary integer, refusing values outside `u64`.
pub fn zigzag_big(z: &BigInt) -> Result<u64> {
    let doubled: BigInt = z.abs() * 2u32;
    let code = if z.is_negative() { doubled - 1u32 } else { doubled };
    code.to_u64().ok_or_else(|| overflow(&z.to_string()))
}

pub fn unzigzag_big(x: u64) -> BigInt {
    let half = BigInt::from(x >> 1);
    if x & 1 == 1 {
        -half - 1u32
    } else {
        half
    }
}

/// Number of `a/nᵏ` (`k` minimal) with height `max(|a|, nᵏ) ≤ h`.
fn count_le(n: u128, h: u128) -> u128 {
    let mut total = 0;
    let mut nk: u128 = 1;
    let mut k = 0;
    while nk <= h {
        total += if k == 0 { 2 * h + 1 } else { 2 * h - 2 * (h / n) };
        k += 1;
        nk = match nk.checked_mul(n) {
            Some(v) => v,
            None => break,
        };
    }
    total
}

fn valid(n: i128, k: u32, a: i128) -> bool {
    k == 0 || a.rem_euclid(n) != 0
}

/// Valid numerators in `[lo, hi)` for level `k ≥ 1`.
fn valid_between(n: i128, lo: i128, hi: i128) -> i128 {
    (hi - lo) - ((hi - 1).div_euclid(n) - (lo - 1).div_euclid(n))
}

/// Size of the block of height exactly `h` at level `k` (`nᵏ ≤ h`).
fn block_size(n: i128, k: u32, nk: i128, h: i128) -> i128 {
    if nk < h {
        if valid(n, k, h) {
            2
        } else {
            0
        }
    } else if k == 0 {
        2 * h + 1
    } else {
        valid_between(n, -h, h + 1)
    }
}

fn rank_in_block(n: i128, k: u32, nk: i128, h: i128, a: i128) -> i128 {
    if nk < h {
        i128::from(a > 0)
    } else if k == 0 {
        // h = 1: 0, -1, 1
        zigzag(a as i64) as i128
    } else {
        valid_between(n, -h, a)
    }
}

/// `ℤ[1/n] → ℕ`, ordered by height `max(|a|, nᵏ)` of `a/nᵏ` with `k` minimal,
/// then by level `k`, then by numerator. Heights grow at most linearly under
/// the generators `x ↦ x ± 1`, `x ↦ x/n`, `x ↦ nx`, so codes stay small.
pub fn encode_n_adic(n: u32, r: &BigRational) -> Result<u64> {
    let nb = BigInt::from(n);
    // least k with denom | nᵏ; for composite n the denominator need not be a
    // power of n (1/2 = 2/4 in Z[1/4])
    let mut k = 0u32;
    let mut nk_big = BigInt::one();
    while !(&nk_big % r.denom()).is_zero() {
        if r.denom().gcd(&nb).is_one() || nk_big.bits() > 128 {
            return Err(Error::domain(format!("{r} is not in Z[1/{n}]")));
        }
        nk_big *= &nb;
        k += 1;
    }
    let too_big = || overflow(&r.to_string());
    let scaled = r.numer() * (&nk_big / r.denom());
    let a = scaled.to_i128().filter(|a| a.unsigned_abs() < 1 << 64).ok_or_else(too_big)?;
    let nk = nk_big.to_i128().filter(|d| *d < 1 << 64).ok_or_else(too_big)?;
    let n = n as i128;
    let h = a.abs().max(nk);
    let mut code = count_le(n as u128, (h - 1) as u128) as i128;
    let mut nj: i128 = 1;
    for j in 0..k {
        code += block_size(n, j, nj, h);
        nj *= n;
    }
    code += rank_in_block(n, k, nk, h, a);
    u64::try_from(code).map_err(|_| too_big())
}

pub fn decode_n_adic(n: u32, code: u64) -> BigRational {
    let nu = n as u128;
    let c = code as u128;
    // least h with count_le(h) > code
    let (mut lo, mut hi) = (1u128, c + 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if count_le(nu, mid) > c {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let h = lo as i128;
    let n = n as i128;
    let mut rest = (c - count_le(nu, lo - 1)) as i128;
    let mut k = 0u32;
    let mut nk: i128 = 1;
    loop {
        let size = block_size(n, k, nk, h);
        if rest < size {
            break;
        }
        rest -= size;
        k += 1;
        nk *= n;
    }
    let a = if nk < h {
        if rest == 0 {
            -h
        } else {
            h
        }
    } else if k == 0 {
        unzigzag(rest as u64) as i128
    } else {
        // largest a in [-h, h] with rank_in_block(a) <= rest, then valid
        let (mut lo, mut hi) = (-h, h);
        while lo < hi {
            let mid = lo + (hi - lo + 1).div_euclid(2);
            if valid_between(n, -h, mid) <= rest {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    };
    BigRational::new(BigInt::from(a), BigInt::from(nk))
}
