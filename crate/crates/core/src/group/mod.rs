//! Marked groups with solvable word problem and their elements.
//!
//! The supported algebra is closed: free groups of finite rank, the free
//! group of countable rank, Baumslag–Solitar groups `BS(1,n)`, and free
//! products of supported groups. Each element is stored in a normal form,
//! so equality of elements is equality of values.

mod bs;
mod free;
mod notation;
mod product;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

pub use bs::{AffineMap, BsWord};
pub(crate) use bs::pow_n_signed;
pub use free::{free_letter_name, FreeWord, Letter};
pub use product::{FreeProductWord, Side, Syllable};

use crate::error::{Error, Result};

/// The groups the toolkit can compute in.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarkedGroup {
    /// `F_rank` on generators `a, b, c, …`.
    Free { rank: u32 },
    /// `F_∞` on generators `x_1, x_2, …`.
    #[serde(rename = "free_inf")]
    FreeInfinite,
    /// `BS(1,n) = ⟨s, t | t⁻¹ s t = sⁿ⟩`.
    #[serde(rename = "bs")]
    BaumslagSolitar { n: u32 },
    /// `left ∗ right`; generators of `left` come first in the global numbering.
    FreeProduct {
        left: Box<MarkedGroup>,
        right: Box<MarkedGroup>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Free(FreeWord),
    Bs(BsWord),
    Product(FreeProductWord),
}

impl Element {
    pub fn is_identity(&self) -> bool {
        match self {
            Element::Free(w) => w.is_identity(),
            Element::Bs(w) => w.is_identity(),
            Element::Product(w) => w.is_identity(),
        }
    }

    pub fn as_free(&self) -> Option<&FreeWord> {
        match self {
            Element::Free(w) => Some(w),
            _ => None,
        }
    }

    pub fn as_bs(&self) -> Option<&BsWord> {
        match self {
            Element::Bs(w) => Some(w),
            _ => None,
        }
    }

    pub fn as_product(&self) -> Option<&FreeProductWord> {
        match self {
            Element::Product(w) => Some(w),
            _ => None,
        }
    }

    /// Length of the stored normal form (letters for free words, syllables
    /// for free products, spelled length for BS normal forms).
    pub fn normal_form_len(&self) -> usize {
        match self {
            Element::Free(w) => w.len(),
            Element::Bs(w) => {
                usize::try_from(w.spelled_len()).unwrap_or(usize::MAX)
            }
            Element::Product(w) => w.syllables().len(),
        }
    }
}

impl From<FreeWord> for Element {
    fn from(w: FreeWord) -> Self {
        Element::Free(w)
    }
}

impl From<BsWord> for Element {
    fn from(w: BsWord) -> Self {
        Element::Bs(w)
    }
}

impl MarkedGroup {
    pub fn free(rank: u32) -> Self {
        MarkedGroup::Free { rank }
    }

    pub fn bs(n: u32) -> Self {
        MarkedGroup::BaumslagSolitar { n }
    }

    pub fn free_product(left: MarkedGroup, right: MarkedGroup) -> Self {
        MarkedGroup::FreeProduct {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Checks structural parameters (`n ≥ 2`, finite left factors of products).
    pub fn validate(&self) -> Result<()> {
        match self {
            MarkedGroup::Free { .. } | MarkedGroup::FreeInfinite => Ok(()),
            MarkedGroup::BaumslagSolitar { n } if *n >= 2 => Ok(()),
            MarkedGroup::BaumslagSolitar { n } => {
                Err(Error::domain(format!("BS(1,{n}) needs n >= 2")))
            }
            MarkedGroup::FreeProduct { left, right } => {
                left.validate()?;
                right.validate()?;
                if left.rank().is_none() {
                    return Err(Error::domain(
                        "the left factor of a free product needs finitely many generators",
                    ));
                }
                Ok(())
            }
        }
    }

    /// Number of marked generators, `None` for `F_∞` (and products containing it on the right).
    pub fn rank(&self) -> Option<u32> {
        match self {
            MarkedGroup::Free { rank } => Some(*rank),
            MarkedGroup::FreeInfinite => None,
            MarkedGroup::BaumslagSolitar { .. } => Some(2),
            MarkedGroup::FreeProduct { left, right } => Some(left.rank()? + right.rank()?),
        }
    }

    pub fn is_free(&self) -> bool {
        matches!(self, MarkedGroup::Free { .. } | MarkedGroup::FreeInfinite)
    }

    pub fn factors(&self) -> Option<(&MarkedGroup, &MarkedGroup)> {
        match self {
            MarkedGroup::FreeProduct { left, right } => Some((left, right)),
            _ => None,
        }
    }

    pub fn factor(&self, side: Side) -> Option<&MarkedGroup> {
        self.factors().map(|(l, r)| match side {
            Side::Left => l,
            Side::Right => r,
        })
    }

    pub fn identity(&self) -> Element {
        match self {
            MarkedGroup::Free { .. } | MarkedGroup::FreeInfinite => {
                Element::Free(FreeWord::identity())
            }
            MarkedGroup::BaumslagSolitar { n } => Element::Bs(BsWord::identity(*n)),
            MarkedGroup::FreeProduct { .. } => Element::Product(FreeProductWord::identity()),
        }
    }

    /// Whether `e` is a well-formed element of this group.
    pub fn owns(&self, e: &Element) -> bool {
        match (self, e) {
            (MarkedGroup::Free { rank }, Element::Free(w)) => w.max_index() <= *rank,
            (MarkedGroup::FreeInfinite, Element::Free(_)) => true,
            (MarkedGroup::BaumslagSolitar { n }, Element::Bs(w)) => w.n() == *n,
            (MarkedGroup::FreeProduct { left, right }, Element::Product(w)) => {
                w.syllables().iter().all(|s| match s.side {
                    Side::Left => left.owns(&s.element),
                    Side::Right => right.owns(&s.element),
                })
            }
            _ => false,
        }
    }

    fn check(&self, e: &Element) -> Result<()> {
        if self.owns(e) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "element {e:?} does not belong to {}",
                self.describe()
            )))
        }
    }

    fn check_letter(&self, l: Letter) -> Result<()> {
        match self.rank() {
            Some(r) if l.index() > r => Err(Error::domain(format!(
                "generator index {} exceeds the {} marked generators of {}",
                l.index(),
                r,
                self.describe()
            ))),
            _ => Ok(()),
        }
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        self.multiply_unchecked(a, b)
    }

    fn multiply_unchecked(&self, a: &Element, b: &Element) -> Result<Element> {
        Ok(match (self, a, b) {
            (_, Element::Free(x), Element::Free(y)) => Element::Free(x.mul(y)),
            (_, Element::Bs(x), Element::Bs(y)) => Element::Bs(x.mul(y)?),
            (MarkedGroup::FreeProduct { left, right }, Element::Product(x), Element::Product(y)) => {
                Element::Product(x.mul(y, left, right)?)
            }
            _ => return Err(Error::domain("mismatched element kinds")),
        })
    }

    pub fn invert(&self, a: &Element) -> Result<Element> {
        self.check(a)?;
        Ok(self.invert_unchecked(a))
    }

    fn invert_unchecked(&self, a: &Element) -> Element {
        match (self, a) {
            (_, Element::Free(x)) => Element::Free(x.inverse()),
            (_, Element::Bs(x)) => Element::Bs(x.inverse()),
            (MarkedGroup::FreeProduct { left, right }, Element::Product(x)) => {
                Element::Product(x.inverse(left, right))
            }
            _ => unreachable!("checked element"),
        }
    }

    /// Product of many elements, left to right.
    pub fn product<'a, I: IntoIterator<Item = &'a Element>>(&self, items: I) -> Result<Element> {
        let mut acc = self.identity();
        for e in items {
            acc = self.multiply(&acc, e)?;
        }
        Ok(acc)
    }

    /// The element spelled by one signed marked generator.
    pub fn generator(&self, l: Letter) -> Result<Element> {
        self.check_letter(l)?;
        Ok(match self {
            MarkedGroup::Free { .. } | MarkedGroup::FreeInfinite => {
                Element::Free(FreeWord::letter(l))
            }
            MarkedGroup::BaumslagSolitar { n } => Element::Bs(BsWord::normal_form(*n, &[l])?),
            MarkedGroup::FreeProduct { left, right } => {
                let k = left.rank().expect("validated product");
                let (side, inner) = if l.index() <= k {
                    (Side::Left, left.generator(l)?)
                } else {
                    (Side::Right, right.generator(Letter::new(l.index() - k, l.is_inverse()))?)
                };
                Element::Product(FreeProductWord::syllable(side, inner))
            }
        })
    }

    /// Evaluates a letter word to a normal form.
    pub fn from_letters(&self, letters: &[Letter]) -> Result<Element> {
        for &l in letters {
            self.check_letter(l)?;
        }
        match self {
            MarkedGroup::Free { .. } | MarkedGroup::FreeInfinite => {
                Ok(Element::Free(FreeWord::reduce(letters.iter().copied())))
            }
            MarkedGroup::BaumslagSolitar { n } => Ok(Element::Bs(BsWord::normal_form(*n, letters)?)),
            MarkedGroup::FreeProduct { .. } => {
                let mut acc = self.identity();
                for &l in letters {
                    acc = self.multiply_unchecked(&acc, &self.generator(l)?)?;
                }
                Ok(acc)
            }
        }
    }

    /// Marked generators and their inverses in the order `a, A, b, B, …`.
    /// `F_∞` (or a product with it) needs an explicit rank cutoff.
    pub fn generators(&self, cutoff: Option<u32>) -> Result<Vec<Element>> {
        let r = match (self.rank(), cutoff) {
            (Some(r), Some(c)) => r.min(c),
            (Some(r), None) => r,
            (None, Some(c)) => c,
            (None, None) => {
                return Err(Error::domain(format!(
                    "{} has infinitely many generators; a rank cutoff is required",
                    self.describe()
                )))
            }
        };
        let mut out = Vec::with_capacity(2 * r as usize);
        for i in 1..=r {
            out.push(self.generator(Letter::new(i, false))?);
            out.push(self.generator(Letter::new(i, true))?);
        }
        Ok(out)
    }

    /// `(global generator index, exponent)` runs spelling the normal form of `e`.
    pub fn runs(&self, e: &Element) -> Result<Vec<(u32, BigInt)>> {
        self.check(e)?;
        Ok(match (self, e) {
            (_, Element::Free(w)) => {
                let mut out: Vec<(u32, BigInt)> = Vec::new();
                for l in w.letters() {
                    let step = if l.is_inverse() { -BigInt::one() } else { BigInt::one() };
                    match out.last_mut() {
                        Some((i, exp)) if *i == l.index() => *exp += step,
                        _ => out.push((l.index(), step)),
                    }
                }
                out
            }
            (_, Element::Bs(w)) => w.runs(),
            (MarkedGroup::FreeProduct { left, right }, Element::Product(w)) => {
                let k = left.rank().expect("validated product");
                let mut out = Vec::new();
                for syl in w.syllables() {
                    match syl.side {
                        Side::Left => out.extend(left.runs(&syl.element)?),
                        Side::Right => out.extend(
                            right
                                .runs(&syl.element)?
                                .into_iter()
                                .map(|(i, x)| (i + k, x)),
                        ),
                    }
                }
                out
            }
            _ => unreachable!("checked element"),
        })
    }

    /// Letter spelling of `e`; refuses normal forms longer than `max_len` letters.
    pub fn spell(&self, e: &Element, max_len: usize) -> Result<Vec<Letter>> {
        let mut out = Vec::new();
        for (i, exp) in self.runs(e)? {
            let count = exp.abs();
            if count > BigInt::from(max_len - out.len().min(max_len)) {
                return Err(Error::Encoding(format!(
                    "spelling of {} exceeds {max_len} letters",
                    self.format(e)
                )));
            }
            let count = usize::try_from(count).expect("bounded");
            out.extend(std::iter::repeat(Letter::new(i, exp.is_negative())).take(count));
        }
        Ok(out)
    }

    pub fn describe(&self) -> String {
        match self {
            MarkedGroup::Free { rank } => format!("F_{rank}"),
            MarkedGroup::FreeInfinite => "F_inf".to_string(),
            MarkedGroup::BaumslagSolitar { n } => format!("BS(1,{n})"),
            MarkedGroup::FreeProduct { left, right } => {
                format!("({} * {})", left.describe(), right.describe())
            }
        }
    }

    pub fn parse(&self, text: &str) -> Result<Element> {
        notation::parse_element(self, text)
    }

    /// Parses a comma separated list of elements.
    pub fn parse_list(&self, text: &str) -> Result<Vec<Element>> {
        if text.trim().is_empty() {
            return Ok(Vec::new());
        }
        text.split(',').map(|t| self.parse(t)).collect()
    }

    pub fn format(&self, e: &Element) -> String {
        notation::format_element(self, e)
    }
}

/// Free reduction of letters drawn from one marked free group.
pub fn reduce(group: &MarkedGroup, letters: &[Letter]) -> Result<FreeWord> {
    if !group.is_free() {
        return Err(Error::domain(format!("{} is not a free group", group.describe())));
    }
    match group.from_letters(letters)? {
        Element::Free(w) => Ok(w),
        _ => unreachable!(),
    }
}

/// Normal form `t^p s^m t^-q` of a word in `s^±1, t^±1`.
pub fn bs_normal_form(n: u32, letters: &[Letter]) -> Result<BsWord> {
    MarkedGroup::bs(n).validate()?;
    BsWord::normal_form(n, letters)
}

/// All elements of word length at most `radius`, each exactly once, by
/// increasing length and then in element order.
pub fn ball(group: &MarkedGroup, radius: usize) -> Result<Vec<Element>> {
    group.validate()?;
    let gens = group.generators(None)?;
    let mut seen: BTreeSet<Element> = BTreeSet::new();
    let mut out = vec![group.identity()];
    seen.insert(group.identity());
    let mut layer = vec![group.identity()];
    for _ in 0..radius {
        let mut next = BTreeSet::new();
        for e in &layer {
            for g in &gens {
                let h = group.multiply_unchecked(e, g)?;
                if !seen.contains(&h) {
                    next.insert(h);
                }
            }
        }
        seen.extend(next.iter().cloned());
        layer = next.into_iter().collect();
        out.extend(layer.iter().cloned());
    }
    Ok(out)
}

/// Number of elements of `F_rank` of length at most `radius`: `1 + Σ 2n(2n-1)^(k-1)`.
pub fn free_ball_size(rank: u64, radius: u32) -> u64 {
    if rank == 0 {
        return 1;
    }
    (1..=radius).fold(1u64, |acc, k| acc + 2 * rank * (2 * rank - 1).pow(k - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_balls() {
        let f2 = MarkedGroup::free(2);
        assert_eq!(ball(&f2, 1).unwrap().len(), 5);
        assert_eq!(ball(&f2, 2).unwrap().len(), 17);
        for r in 0..5 {
            assert_eq!(ball(&f2, r).unwrap().len() as u64, free_ball_size(2, r as u32));
            assert_eq!(
                ball(&MarkedGroup::free(3), r).unwrap().len() as u64,
                free_ball_size(3, r as u32)
            );
        }
    }

    #[test]
    fn free_inf_ball_refused() {
        assert!(ball(&MarkedGroup::FreeInfinite, 1).is_err());
    }

    #[test]
    fn bs_ball_dedupes() {
        let g = MarkedGroup::bs(2);
        let b2 = ball(&g, 2).unwrap();
        // brute force: every word of length ≤ 2 and pairwise normal-form comparison
        let letters: Vec<Letter> = (1..=2)
            .flat_map(|i| [Letter::new(i, false), Letter::new(i, true)])
            .collect();
        let mut words: Vec<Vec<Letter>> = vec![vec![]];
        for l in &letters {
            words.push(vec![*l]);
            for m in &letters {
                words.push(vec![*l, *m]);
            }
        }
        let mut distinct: Vec<Element> = Vec::new();
        for w in &words {
            let e = g.from_letters(w).unwrap();
            if !distinct.iter().any(|d| *d == e) {
                distinct.push(e);
            }
        }
        assert_eq!(b2.len(), distinct.len());
        for d in &distinct {
            assert!(b2.contains(d));
        }
    }

    #[test]
    fn mixed_generators_rejected() {
        let f2 = MarkedGroup::free(2);
        assert!(reduce(&f2, &[Letter::gen(1), Letter::gen(3)]).is_err());
        assert!(reduce(&MarkedGroup::bs(2), &[Letter::gen(1)]).is_err());
    }

    #[test]
    fn product_syllables() {
        let g = MarkedGroup::free_product(MarkedGroup::free(1), MarkedGroup::free(1));
        let a = g.generator(Letter::gen(1)).unwrap();
        let b = g.generator(Letter::gen(2)).unwrap();
        let ab = g.multiply(&a, &b).unwrap();
        assert_eq!(ab.as_product().unwrap().syllables().len(), 2);
        let back = g.multiply(&ab, &g.invert(&b).unwrap()).unwrap();
        assert_eq!(back, a);
        assert!(g.multiply(&ab, &g.invert(&ab).unwrap()).unwrap().is_identity());
    }
}
