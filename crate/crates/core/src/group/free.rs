use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A signed marked generator: `index` is 1-based, the sign selects the inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Letter(i32);

impl Letter {
    pub fn new(index: u32, inverse: bool) -> Letter {
        assert!(index >= 1 && index <= i32::MAX as u32, "generator index out of range");
        let v = index as i32;
        Letter(if inverse { -v } else { v })
    }

    pub fn gen(index: u32) -> Letter {
        Letter::new(index, false)
    }

    pub fn index(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    pub fn raw(self) -> i32 {
        self.0
    }

    /// `a < A < b < B < …`
    fn key(self) -> (u32, bool) {
        (self.index(), self.is_inverse())
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", free_letter_name(*self))
    }
}

/// `a`…`z` for indices 1..=26 (upper case for inverses), `x27`/`X27` beyond.
pub fn free_letter_name(l: Letter) -> String {
    let i = l.index();
    if i <= 26 {
        let c = (b'a' + (i - 1) as u8) as char;
        if l.is_inverse() {
            c.to_ascii_uppercase().to_string()
        } else {
            c.to_string()
        }
    } else if l.is_inverse() {
        format!("X{i}")
    } else {
        format!("x{i}")
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FreeWord(Vec<Letter>);

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord(Vec::new())
    }

    /// Free reduction by a single left-to-right stack pass.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        FreeWord(out)
    }

    /// A uniformly random reduced word of exactly `len` letters over
    /// `a_1, …, a_rank`.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, rank: u32, len: usize) -> Self {
        assert!(rank > 0, "random words need at least one generator");
        let mut out: Vec<Letter> = Vec::with_capacity(len);
        while out.len() < len {
            let l = Letter::new(rng.gen_range(1..=rank), rng.gen_bool(0.5));
            if out.last() != Some(&l.inverse()) {
                out.push(l);
            }
        }
        FreeWord(out)
    }

    pub fn letter(l: Letter) -> Self {
        FreeWord(vec![l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        let mut k = 0;
        let (a, b) = (&self.0, &other.0);
        while k < a.len() && k < b.len() && a[a.len() - 1 - k] == b[k].inverse() {
            k += 1;
        }
        let mut out = Vec::with_capacity(a.len() + b.len() - 2 * k);
        out.extend_from_slice(&a[..a.len() - k]);
        out.extend_from_slice(&b[k..]);
        FreeWord(out)
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn max_index(&self) -> u32 {
        self.0.iter().map(|l| l.index()).max().unwrap_or(0)
    }
}

impl Ord for FreeWord {
    /// Shortlex: length first, then lexicographic in `a < A < b < B`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for FreeWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let names: Vec<String> = self.0.iter().map(|&l| free_letter_name(l)).collect();
        write!(f, "{}", names.join(" "))
    }
}
