//! The Schreier graph of `F_n / H` as a bijection with `ℕ`.
//!
//! A right coset is a pair `(v, u)`: a vertex `v` of the Stallings graph and a
//! reduced word `u` hanging off `v`, i.e. `u` is empty or its first letter has
//! no edge at `v`. Codes list the vertices first, then hanging words by
//! length, by vertex, and by letters in generator order.

use crate::error::{Error, Result};
use crate::group::Letter;
use crate::stallings::SubgroupGraph;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coset {
    pub vertex: usize,
    pub hanging: Vec<Letter>,
}

fn all_letters(rank: u32) -> Vec<Letter> {
    (1..=rank)
        .flat_map(|i| [Letter::new(i, false), Letter::new(i, true)])
        .collect()
}

fn missing(h: &SubgroupGraph, v: usize) -> Vec<Letter> {
    all_letters(h.rank())
        .into_iter()
        .filter(|&l| h.step(v, l).is_none())
        .collect()
}

/// Letters that may follow `prev` in a reduced word, in generator order.
fn successors(rank: u32, prev: Letter) -> Vec<Letter> {
    all_letters(rank)
        .into_iter()
        .filter(|&l| l != prev.inverse())
        .collect()
}

fn overflow() -> Error {
    Error::Encoding("coset code does not fit in a 64-bit point".into())
}

/// Hanging words of length `k ≥ 1` per missing first letter: `(2n-1)^(k-1)`.
fn layer_block(rank: u32, k: usize) -> Option<u128> {
    let q = 2 * rank as u128 - 1;
    let mut b: u128 = 1;
    for _ in 1..k {
        b = b.checked_mul(q)?;
    }
    Some(b)
}

pub fn total_missing(h: &SubgroupGraph) -> u128 {
    (0..h.vertex_count()).map(|v| missing(h, v).len() as u128).sum()
}

pub fn decode(h: &SubgroupGraph, code: u64) -> Option<Coset> {
    let v_count = h.vertex_count() as u64;
    if code < v_count {
        return Some(Coset {
            vertex: code as usize,
            hanging: Vec::new(),
        });
    }
    let c = total_missing(h);
    if c == 0 {
        return None;
    }
    let mut rest = (code - v_count) as u128;
    let mut k = 1;
    if h.rank() == 1 {
        // every layer has exactly `c` words
        k += (rest / c) as usize;
        rest %= c;
    }
    loop {
        let block = layer_block(h.rank(), k).expect("u64 codes bound the layer");
        let size = c * block;
        if rest < size {
            for v in 0..h.vertex_count() {
                let miss = missing(h, v);
                let span = miss.len() as u128 * block;
                if rest < span {
                    let first = miss[(rest / block) as usize];
                    let mut digits = rest % block;
                    let q = 2 * h.rank() as u128 - 1;
                    let mut place = block / q.max(1);
                    let mut hanging = vec![first];
                    for _ in 1..k {
                        let d = digits / place;
                        digits %= place;
                        place /= q;
                        let next = successors(h.rank(), *hanging.last().expect("nonempty"))[d as usize];
                        hanging.push(next);
                    }
                    return Some(Coset { vertex: v, hanging });
                }
                rest -= span;
            }
            unreachable!("layer size is the sum of spans");
        }
        rest -= size;
        k += 1;
    }
}

pub fn encode(h: &SubgroupGraph, coset: &Coset) -> Result<u64> {
    let k = coset.hanging.len();
    if k == 0 {
        return Ok(coset.vertex as u64);
    }
    let c = total_missing(h);
    let mut code: u128 = h.vertex_count() as u128;
    for j in 1..k {
        let block = layer_block(h.rank(), j).ok_or_else(overflow)?;
        code = code.checked_add(c.checked_mul(block).ok_or_else(overflow)?).ok_or_else(overflow)?;
    }
    let block = layer_block(h.rank(), k).ok_or_else(overflow)?;
    for v in 0..coset.vertex {
        code += missing(h, v).len() as u128 * block;
    }
    let miss = missing(h, coset.vertex);
    let first = miss
        .iter()
        .position(|&l| l == coset.hanging[0])
        .ok_or_else(|| Error::domain("hanging word starts on an existing edge"))?;
    let q = 2 * h.rank() as u128 - 1;
    let mut within = first as u128;
    for w in coset.hanging.windows(2) {
        let d = successors(h.rank(), w[0])
            .iter()
            .position(|&l| l == w[1])
            .ok_or_else(|| Error::domain("hanging word is not reduced"))?;
        within = within * q + d as u128;
    }
    let code = code
        .checked_add(within)
        .ok_or_else(overflow)?;
    u64::try_from(code).map_err(|_| overflow())
}

/// Right multiplication of a coset by one letter.
pub fn right_step(h: &SubgroupGraph, coset: &Coset, l: Letter) -> Coset {
    let mut next = coset.clone();
    match next.hanging.last() {
        None => match h.step(next.vertex, l) {
            Some(w) => next.vertex = w,
            None => next.hanging.push(l),
        },
        Some(&last) if last == l.inverse() => {
            next.hanging.pop();
        }
        Some(_) => next.hanging.push(l),
    }
    next
}
