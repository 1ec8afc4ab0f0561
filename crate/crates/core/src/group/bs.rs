//! Baumslag–Solitar groups `BS(1,n) = ⟨s, t | t⁻¹ s t = sⁿ⟩`.
//!
//! Elements are kept in the normal form `t^p · s^m · t^-q` with `p, q ≥ 0`
//! and `n ∤ m` whenever both `p` and `q` are positive. Letter words are
//! brought to normal form by the rewriting rules `s t → t sⁿ` and
//! `t⁻¹ s → sⁿ t⁻¹`; products and inverses go through the faithful affine
//! model `x ↦ n^(q-p)·x + m/n^p` on `ℤ[1/n]` instead, so the two code paths
//! check each other.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::free::Letter;

pub const S: u32 = 1;
pub const T: u32 = 2;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BsWord {
    n: u32,
    p: u32,
    m: BigInt,
    q: u32,
}

/// `x ↦ n^exp · x + shift`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub exp: i64,
    pub shift: BigRational,
}

pub(crate) fn pow_n(n: u32, k: u32) -> BigInt {
    Pow::pow(BigInt::from(n), k)
}

pub(crate) fn pow_n_signed(n: u32, k: i64) -> BigRational {
    let base = pow_n(n, k.unsigned_abs() as u32);
    if k >= 0 {
        BigRational::from_integer(base)
    } else {
        BigRational::new(BigInt::one(), base)
    }
}

impl BsWord {
    pub fn identity(n: u32) -> Self {
        BsWord {
            n,
            p: 0,
            m: BigInt::zero(),
            q: 0,
        }
    }

    /// Validates a triple `(p, m, q)`.
    pub fn from_triple(n: u32, p: u32, m: BigInt, q: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("BS(1,{n}) needs n >= 2")));
        }
        if p > 0 && q > 0 && (&m % BigInt::from(n)).is_zero() {
            return Err(Error::domain(format!(
                "({p},{m},{q}) is not a normal form: n divides m while p, q > 0"
            )));
        }
        Ok(BsWord { n, p, m, q })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn triple(&self) -> (u32, &BigInt, u32) {
        (self.p, &self.m, self.q)
    }

    pub fn is_identity(&self) -> bool {
        self.p == 0 && self.q == 0 && self.m.is_zero()
    }

    /// Normal form of a letter word (letters `s` = 1, `t` = 2) by left-to-right rewriting.
    pub fn normal_form(n: u32, letters: &[Letter]) -> Result<Self> {
        let mut w = BsWord::identity(n);
        for &l in letters {
            w.push_letter(l)?;
        }
        Ok(w)
    }

    /// Right-multiplies by one letter, rewriting back to normal form.
    fn push_letter(&mut self, l: Letter) -> Result<()> {
        let n = self.n;
        match (l.index(), l.is_inverse()) {
            // t^-q s = s^(n^q) t^-q
            (S, inv) => {
                let step = pow_n(n, self.q);
                if inv {
                    self.m -= step;
                } else {
                    self.m += step;
                }
            }
            (T, false) => {
                if self.q > 0 {
                    self.q -= 1;
                } else {
                    // s^m t = t s^(mn)
                    self.p += 1;
                    self.m *= BigInt::from(n);
                }
            }
            (T, true) => self.q += 1,
            (i, _) => {
                return Err(Error::domain(format!(
                    "BS(1,{n}) has generators s (1) and t (2), got index {i}"
                )))
            }
        }
        self.normalize();
        Ok(())
    }

    fn normalize(&mut self) {
        let n = BigInt::from(self.n);
        while self.p > 0 && self.q > 0 && self.m.is_multiple_of(&n) {
            self.p -= 1;
            self.q -= 1;
            self.m /= &n;
        }
    }

    pub fn affine(&self) -> AffineMap {
        AffineMap {
            exp: self.q as i64 - self.p as i64,
            shift: BigRational::new(self.m.clone(), pow_n(self.n, self.p)),
        }
    }

    pub fn from_affine(n: u32, map: &AffineMap) -> Result<Self> {
        let nb = BigInt::from(n);
        let mut p0: u32 = 0;
        let mut scaled = map.shift.clone();
        while !scaled.is_integer() {
            let den = scaled.denom();
            if nb.gcd(den).is_one() {
                return Err(Error::domain(format!(
                    "shift {} is not in Z[1/{n}]",
                    map.shift
                )));
            }
            scaled *= BigRational::from_integer(nb.clone());
            p0 += 1;
        }
        let p = if map.exp < 0 {
            p0.max(map.exp.unsigned_abs() as u32)
        } else {
            p0
        };
        let q = (map.exp + p as i64) as u32;
        let m = (map.shift.clone() * BigRational::from_integer(pow_n(n, p))).to_integer();
        Ok(BsWord { n, p, m, q })
    }

    pub fn mul(&self, other: &BsWord) -> Result<BsWord> {
        if self.n != other.n {
            return Err(Error::domain("multiplying elements of different BS groups"));
        }
        let (f, g) = (self.affine(), other.affine());
        let composed = AffineMap {
            exp: f.exp + g.exp,
            shift: pow_n_signed(self.n, f.exp) * g.shift + f.shift,
        };
        BsWord::from_affine(self.n, &composed)
    }

    pub fn inverse(&self) -> BsWord {
        let f = self.affine();
        let inv = AffineMap {
            exp: -f.exp,
            shift: -(pow_n_signed(self.n, -f.exp) * f.shift),
        };
        BsWord::from_affine(self.n, &inv).expect("inverse of a normal form is representable")
    }

    /// `(generator, exponent)` runs spelling `t^p s^m t^-q`, identity runs omitted.
    pub fn runs(&self) -> Vec<(u32, BigInt)> {
        let mut out = Vec::new();
        if self.p > 0 {
            out.push((T, BigInt::from(self.p)));
        }
        if !self.m.is_zero() {
            out.push((S, self.m.clone()));
        }
        if self.q > 0 {
            out.push((T, -BigInt::from(self.q)));
        }
        out
    }

    /// Length of the spelled normal form; an upper bound for word length.
    pub fn spelled_len(&self) -> BigInt {
        BigInt::from(self.p) + self.m.abs() + BigInt::from(self.q)
    }
}

impl fmt::Display for BsWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.p, self.m, self.q)
    }
}

impl fmt::Debug for BsWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t^{} s^{} t^-{}", self.p, self.m, self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s() -> Letter {
        Letter::gen(S)
    }
    fn t() -> Letter {
        Letter::gen(T)
    }

    #[test]
    fn conjugation_relation() {
        let w = BsWord::normal_form(2, &[t().inverse(), s(), t()]).unwrap();
        assert_eq!(w.triple(), (0, &BigInt::from(2), 0));
        let w = BsWord::normal_form(2, &[t().inverse(), s(), s(), t()]).unwrap();
        assert_eq!(w.triple(), (0, &BigInt::from(4), 0));
        assert!(BsWord::normal_form(3, &[]).unwrap().is_identity());
    }

    #[test]
    fn t_s_is_a_root() {
        // t s t^-1 has no shorter spelling
        let w = BsWord::normal_form(2, &[t(), s(), t().inverse()]).unwrap();
        assert_eq!(w.triple(), (1, &BigInt::from(1), 1));
        assert!(BsWord::from_triple(2, 1, BigInt::from(2), 1).is_err());
    }

    #[test]
    fn multiply_matches_rewriting() {
        let st = BsWord::normal_form(2, &[s(), t()]).unwrap();
        let prod = BsWord::normal_form(2, &[s()])
            .unwrap()
            .mul(&BsWord::normal_form(2, &[t()]).unwrap())
            .unwrap();
        assert_eq!(st, prod);
        // s t = t s^2
        assert_eq!(st.triple(), (1, &BigInt::from(2), 0));
    }

    #[test]
    fn inverse_cancels() {
        let w = BsWord::normal_form(3, &[t(), s(), t().inverse(), s().inverse(), t()]).unwrap();
        assert!(w.mul(&w.inverse()).unwrap().is_identity());
        assert!(w.inverse().mul(&w).unwrap().is_identity());
    }
}
