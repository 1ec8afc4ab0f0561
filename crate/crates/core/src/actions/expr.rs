use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::encode::{decode_n_adic, encode_n_adic, unzigzag_big, zigzag_big};
use super::perm::Perm;
use super::schreier;
use crate::error::{Error, Result};
use crate::group::{pow_n_signed, Element, Letter, MarkedGroup, Side};
use crate::stallings::{CosetTable, SubgroupGraph};

/// Longest single-generator run evaluated step by step before a cycle must
/// have been found.
const MAX_RUN_STEPS: u64 = 1 << 22;

/// A finite-index coset action placed on distinct points of `ℕ`: state `i`
/// sits at `points[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawEmbeddedTable", into = "RawEmbeddedTable")]
pub struct EmbeddedTable {
    table: CosetTable,
    points: Vec<u64>,
    index: BTreeMap<u64, usize>,
}

#[derive(Serialize, Deserialize)]
struct RawEmbeddedTable {
    table: CosetTable,
    points: Vec<u64>,
}

impl TryFrom<RawEmbeddedTable> for EmbeddedTable {
    type Error = Error;
    fn try_from(raw: RawEmbeddedTable) -> Result<Self> {
        EmbeddedTable::new(raw.table, raw.points)
    }
}

impl From<EmbeddedTable> for RawEmbeddedTable {
    fn from(e: EmbeddedTable) -> Self {
        RawEmbeddedTable {
            table: e.table,
            points: e.points,
        }
    }
}

impl EmbeddedTable {
    pub fn new(table: CosetTable, points: Vec<u64>) -> Result<Self> {
        if points.len() != table.degree() {
            return Err(Error::domain(format!(
                "{} points for a table of degree {}",
                points.len(),
                table.degree()
            )));
        }
        let mut index = BTreeMap::new();
        for (i, &p) in points.iter().enumerate() {
            if index.insert(p, i).is_some() {
                return Err(Error::domain(format!("point {p} hosts two states")));
            }
        }
        Ok(EmbeddedTable { table, points, index })
    }

    pub fn table(&self) -> &CosetTable {
        &self.table
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }

    pub fn state_at(&self, x: u64) -> Option<usize> {
        self.index.get(&x).copied()
    }
}

/// A bijection `ℕ → ℕ` used to transport an action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bijection {
    Perm { perm: Perm },
    /// `ℕ → ℕ ⊔ ℕ` with the disjoint union interleaved (even: original
    /// points, odd: added points): `x ↦ 2x` below `m`, `x ↦ 2(x−m)+1` on
    /// `[m, 2m)`, identity from `2m` on.
    Augment { m: u64 },
}

impl Bijection {
    pub fn apply(&self, x: u64) -> Result<u64> {
        match self {
            Bijection::Perm { perm } => Ok(perm.apply(x)),
            Bijection::Augment { m } => Ok(if x < *m {
                2 * x
            } else if x - m < *m {
                2 * (x - m) + 1
            } else {
                x
            }),
        }
    }

    pub fn apply_inverse(&self, y: u64) -> Result<u64> {
        match self {
            Bijection::Perm { perm } => Ok(perm.apply_inverse(y)),
            Bijection::Augment { m } => Ok(if y / 2 >= *m {
                y
            } else if y % 2 == 0 {
                y / 2
            } else {
                m + y / 2
            }),
        }
    }
}

/// Permutation actions on `ℕ`, built from closed-form pieces.
///
/// Every variant is interpreted relative to a [`MarkedGroup`]; see
/// [`Action`] for the validated pairing of the two.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionExpr {
    Trivial,
    /// Generator `i` acts by `gens[i-1]`; generators past the list act trivially.
    FinSupp { gens: Vec<Perm> },
    /// Coset actions on disjoint point sets; every other point is fixed.
    Cosets { blocks: Vec<EmbeddedTable> },
    /// `F_n` acting on `F_n / H` by left multiplication, base coset at 0.
    QuasiRegular { subgroup: SubgroupGraph },
    /// `BS(1,n)` on `ℤ[1/n]`: `s: x ↦ x+1`, `t: x ↦ x/n`.
    AffineBs,
    /// Generator `i` translates `ℤ` (zigzag coded) by `steps[i-1]`.
    IntegerShift { steps: Vec<i64> },
    /// `by⁻¹ ∘ inner ∘ by`.
    Conjugate { inner: Box<ActionExpr>, by: Bijection },
    /// `inner` on even points `2u`, odd points fixed.
    TrivialAugment { inner: Box<ActionExpr> },
    /// Part `j` of `k` lives on the points `≡ j (mod k)`.
    DisjointUnion { parts: Vec<ActionExpr> },
    /// `left ∗ right` for a free product group.
    FreeProduct { left: Box<ActionExpr>, right: Box<ActionExpr> },
    /// `base`, except that the listed generators act by the given permutations.
    Rewire {
        base: Box<ActionExpr>,
        #[serde(with = "override_pairs")]
        overrides: BTreeMap<u32, Perm>,
    },
    /// `base` off `frozen`, identity on it; `frozen` is a union of `base`-orbits.
    Freeze { base: Box<ActionExpr>, frozen: BTreeSet<u64> },
}

// Integer map keys do not survive the buffering of internally tagged enums,
// so overrides travel as `[[index, perm], ...]`.
mod override_pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Perm;

    pub fn serialize<S: Serializer>(map: &BTreeMap<u32, Perm>, ser: S) -> Result<S::Ok, S::Error> {
        map.iter().collect::<Vec<_>>().serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<BTreeMap<u32, Perm>, D::Error> {
        Ok(Vec::<(u32, Perm)>::deserialize(de)?.into_iter().collect())
    }
}

fn double(u: u64) -> Result<u64> {
    u.checked_mul(2)
        .ok_or_else(|| Error::Encoding(format!("point 2·{u} overflows")))
}

fn spread(k: u64, j: u64, u: u64) -> Result<u64> {
    u.checked_mul(k)
        .and_then(|v| v.checked_add(j))
        .ok_or_else(|| Error::Encoding(format!("point {k}·{u}+{j} overflows")))
}

impl ActionExpr {
    pub fn conjugate(self, by: Bijection) -> Self {
        ActionExpr::Conjugate {
            inner: Box::new(self),
            by,
        }
    }

    pub fn augment(self) -> Self {
        ActionExpr::TrivialAugment {
            inner: Box::new(self),
        }
    }

    /// Generators with index above this act trivially.
    pub fn active_rank(&self, group: &MarkedGroup) -> Option<u32> {
        if let Some(r) = group.rank() {
            return Some(r);
        }
        Some(match self {
            ActionExpr::Trivial => 0,
            ActionExpr::FinSupp { gens } => gens.len() as u32,
            ActionExpr::IntegerShift { steps } => steps.len() as u32,
            ActionExpr::Conjugate { inner, .. } | ActionExpr::TrivialAugment { inner } => {
                inner.active_rank(group)?
            }
            ActionExpr::DisjointUnion { parts } => {
                let mut r = 0;
                for p in parts {
                    r = r.max(p.active_rank(group)?);
                }
                r
            }
            ActionExpr::Rewire { base, overrides } => base
                .active_rank(group)?
                .max(overrides.keys().copied().max().unwrap_or(0)),
            ActionExpr::Freeze { base, .. } => base.active_rank(group)?,
            _ => return None,
        })
    }

    /// Checks that the expression makes sense for `group`.
    pub fn validate(&self, group: &MarkedGroup) -> Result<()> {
        group.validate()?;
        let free = matches!(group, MarkedGroup::Free { .. } | MarkedGroup::FreeInfinite);
        let within_rank = |k: usize| group.rank().map_or(true, |r| k <= r as usize);
        match self {
            ActionExpr::Trivial => Ok(()),
            ActionExpr::FinSupp { gens } => {
                if !within_rank(gens.len()) || matches!(group, MarkedGroup::FreeProduct { .. }) {
                    return Err(Error::domain("permutation list does not match the generators"));
                }
                Ok(())
            }
            ActionExpr::Cosets { blocks } => {
                let mut used = BTreeSet::new();
                for b in blocks {
                    if *group != MarkedGroup::free(b.table.rank()) {
                        return Err(Error::domain("coset table over a different group"));
                    }
                    for &p in &b.points {
                        if !used.insert(p) {
                            return Err(Error::domain(format!("point {p} lies in two blocks")));
                        }
                    }
                }
                Ok(())
            }
            ActionExpr::QuasiRegular { subgroup } => {
                if *group != subgroup.ambient() {
                    return Err(Error::domain("subgroup of a different group"));
                }
                Ok(())
            }
            ActionExpr::AffineBs => match group {
                MarkedGroup::BaumslagSolitar { .. } => Ok(()),
                _ => Err(Error::domain("the affine action needs a BS(1,n) group")),
            },
            ActionExpr::IntegerShift { steps } => {
                if !free || !within_rank(steps.len()) {
                    return Err(Error::domain("integer shifts need a free group and one step per generator"));
                }
                Ok(())
            }
            ActionExpr::Conjugate { inner, .. } | ActionExpr::TrivialAugment { inner } => {
                inner.validate(group)
            }
            ActionExpr::DisjointUnion { parts } => {
                if parts.is_empty() {
                    return Err(Error::domain("empty disjoint union"));
                }
                parts.iter().try_for_each(|p| p.validate(group))
            }
            ActionExpr::FreeProduct { left, right } => match group {
                MarkedGroup::FreeProduct { left: g, right: k } => {
                    left.validate(g)?;
                    right.validate(k)
                }
                _ => Err(Error::domain("a free product action needs a free product group")),
            },
            ActionExpr::Rewire { base, overrides } => {
                if !free || overrides.keys().any(|&i| i == 0 || !within_rank(i as usize)) {
                    return Err(Error::domain("rewired generators out of range"));
                }
                base.validate(group)
            }
            ActionExpr::Freeze { base, frozen } => {
                base.validate(group)?;
                let letters = letters_of(group, base.active_rank(group))?;
                for &x in frozen {
                    for &l in &letters {
                        let y = base.apply_letter(group, l, x)?;
                        if !frozen.contains(&y) {
                            return Err(Error::domain(format!(
                                "frozen set is not invariant: {x} ↦ {y}"
                            )));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Image of `x` under one signed marked generator.
    pub fn apply_letter(&self, group: &MarkedGroup, l: Letter, x: u64) -> Result<u64> {
        match self {
            ActionExpr::Trivial => Ok(x),
            ActionExpr::FinSupp { gens } => Ok(match gens.get(l.index() as usize - 1) {
                Some(p) if l.is_inverse() => p.apply_inverse(x),
                Some(p) => p.apply(x),
                None => x,
            }),
            ActionExpr::Cosets { blocks } => {
                for b in blocks {
                    if let Some(i) = b.state_at(x) {
                        return Ok(b.points[b.table.step(i, l.inverse())]);
                    }
                }
                Ok(x)
            }
            ActionExpr::QuasiRegular { subgroup } => {
                let Some(c) = schreier::decode(subgroup, x) else {
                    return Ok(x);
                };
                schreier::encode(subgroup, &schreier::right_step(subgroup, &c, l.inverse()))
            }
            ActionExpr::IntegerShift { steps } => {
                let step = steps.get(l.index() as usize - 1).copied().unwrap_or(0);
                let step = if l.is_inverse() { -step } else { step };
                zigzag_big(&(unzigzag_big(x) + step))
            }
            ActionExpr::Rewire { base, overrides } => match overrides.get(&l.index()) {
                Some(p) if l.is_inverse() => Ok(p.apply_inverse(x)),
                Some(p) => Ok(p.apply(x)),
                None => base.apply_letter(group, l, x),
            },
            ActionExpr::FreeProduct { .. } | ActionExpr::AffineBs => {
                self.apply(group, &group.generator(l)?, x)
            }
            ActionExpr::Conjugate { inner, by } => {
                by.apply_inverse(inner.apply_letter(group, l, by.apply(x)?)?)
            }
            ActionExpr::TrivialAugment { inner } => {
                if x % 2 == 1 {
                    Ok(x)
                } else {
                    double(inner.apply_letter(group, l, x / 2)?)
                }
            }
            ActionExpr::DisjointUnion { parts } => {
                let k = parts.len() as u64;
                spread(k, x % k, parts[(x % k) as usize].apply_letter(group, l, x / k)?)
            }
            ActionExpr::Freeze { base, frozen } => {
                if frozen.contains(&x) {
                    Ok(x)
                } else {
                    base.apply_letter(group, l, x)
                }
            }
        }
    }

    /// `g · x`, for `g` in normal form.
    pub fn apply(&self, group: &MarkedGroup, g: &Element, x: u64) -> Result<u64> {
        match self {
            ActionExpr::Trivial => Ok(x),
            ActionExpr::AffineBs => {
                let MarkedGroup::BaumslagSolitar { n } = group else {
                    return Err(Error::domain("the affine action needs a BS(1,n) group"));
                };
                let f = g
                    .as_bs()
                    .ok_or_else(|| Error::domain("expected a BS(1,n) element"))?
                    .affine();
                let r: BigRational = decode_n_adic(*n, x);
                encode_n_adic(*n, &(pow_n_signed(*n, f.exp) * r + f.shift))
            }
            ActionExpr::IntegerShift { steps } => {
                let mut total = unzigzag_big(x);
                for (i, exp) in group.runs(g)? {
                    let step = steps.get(i as usize - 1).copied().unwrap_or(0);
                    total += exp * step;
                }
                zigzag_big(&total)
            }
            ActionExpr::FreeProduct { left, right } => {
                let MarkedGroup::FreeProduct { left: gl, right: gr } = group else {
                    return Err(Error::domain("a free product action needs a free product group"));
                };
                let w = g
                    .as_product()
                    .ok_or_else(|| Error::domain("expected a free product element"))?;
                let mut y = x;
                for syl in w.syllables().iter().rev() {
                    y = match syl.side {
                        Side::Left => left.apply(gl, &syl.element, y)?,
                        Side::Right => right.apply(gr, &syl.element, y)?,
                    };
                }
                Ok(y)
            }
            ActionExpr::Conjugate { inner, by } => {
                by.apply_inverse(inner.apply(group, g, by.apply(x)?)?)
            }
            ActionExpr::TrivialAugment { inner } => {
                if x % 2 == 1 {
                    Ok(x)
                } else {
                    double(inner.apply(group, g, x / 2)?)
                }
            }
            ActionExpr::DisjointUnion { parts } => {
                let k = parts.len() as u64;
                spread(k, x % k, parts[(x % k) as usize].apply(group, g, x / k)?)
            }
            ActionExpr::Freeze { base, frozen } => {
                if frozen.contains(&x) {
                    Ok(x)
                } else {
                    base.apply(group, g, x)
                }
            }
            ActionExpr::FinSupp { .. }
            | ActionExpr::Cosets { .. }
            | ActionExpr::QuasiRegular { .. }
            | ActionExpr::Rewire { .. } => {
                let mut y = x;
                for (i, exp) in group.runs(g)?.into_iter().rev() {
                    y = self.apply_run(group, i, &exp, y)?;
                }
                Ok(y)
            }
        }
    }

    /// `gen^exp · x`, shortening long runs by the cycle length through `x`.
    fn apply_run(&self, group: &MarkedGroup, gen: u32, exp: &BigInt, x: u64) -> Result<u64> {
        let l = Letter::new(gen, exp.is_negative());
        let count = exp.abs();
        let mut y = x;
        let mut done: u64 = 0;
        loop {
            let left = &count - BigInt::from(done);
            if left.is_zero() {
                return Ok(y);
            }
            y = self.apply_letter(group, l, y)?;
            done += 1;
            if y == x {
                let rest = (&count % BigInt::from(done)).to_u64().expect("below cycle length");
                let mut z = x;
                for _ in 0..rest {
                    z = self.apply_letter(group, l, z)?;
                }
                return Ok(z);
            }
            if done >= MAX_RUN_STEPS {
                return Err(Error::Encoding(format!(
                    "generator power with exponent {exp} is too long to evaluate at {x}"
                )));
            }
        }
    }
}

/// Signed generators `a, A, b, B, …` up to `rank` (all of them for finite rank).
pub(crate) fn letters_of(group: &MarkedGroup, rank: Option<u32>) -> Result<Vec<Letter>> {
    let r = match (group.rank(), rank) {
        (Some(r), _) => r,
        (None, Some(r)) => r,
        (None, None) => {
            return Err(Error::domain("cannot bound the active generators of this action"))
        }
    };
    Ok((1..=r)
        .flat_map(|i| [Letter::new(i, false), Letter::new(i, true)])
        .collect())
}

/// A validated action of a marked group on `ℕ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAction", into = "RawAction")]
pub struct Action {
    group: MarkedGroup,
    expr: ActionExpr,
}

#[derive(Serialize, Deserialize)]
struct RawAction {
    group: MarkedGroup,
    action: ActionExpr,
}

impl TryFrom<RawAction> for Action {
    type Error = Error;
    fn try_from(raw: RawAction) -> Result<Self> {
        Action::new(raw.group, raw.action)
    }
}

impl From<Action> for RawAction {
    fn from(a: Action) -> Self {
        RawAction {
            group: a.group,
            action: a.expr,
        }
    }
}

impl Action {
    pub fn new(group: MarkedGroup, expr: ActionExpr) -> Result<Self> {
        expr.validate(&group)?;
        Ok(Action { group, expr })
    }

    pub fn trivial(group: MarkedGroup) -> Result<Self> {
        Action::new(group, ActionExpr::Trivial)
    }

    pub fn group(&self) -> &MarkedGroup {
        &self.group
    }

    pub fn expr(&self) -> &ActionExpr {
        &self.expr
    }

    pub fn into_expr(self) -> ActionExpr {
        self.expr
    }

    pub fn evaluate(&self, g: &Element, x: u64) -> Result<u64> {
        if !self.group.owns(g) {
            return Err(Error::domain(format!(
                "{} is not an element of {}",
                self.group.format(g),
                self.group.describe()
            )));
        }
        self.expr.apply(&self.group, g, x)
    }

    pub fn apply_letter(&self, l: Letter, x: u64) -> Result<u64> {
        self.expr.apply_letter(&self.group, l, x)
    }

    /// Signed generators that may act nontrivially, in the order `a, A, b, B, …`.
    pub fn letters(&self) -> Result<Vec<Letter>> {
        letters_of(&self.group, self.expr.active_rank(&self.group))
    }

    /// The factor action of a free product action on one side.
    pub fn factor(&self, side: Side) -> Result<Action> {
        match (&self.group, &self.expr) {
            (MarkedGroup::FreeProduct { left, right }, ActionExpr::FreeProduct { left: l, right: r }) => {
                Ok(match side {
                    Side::Left => Action { group: (**left).clone(), expr: (**l).clone() },
                    Side::Right => Action { group: (**right).clone(), expr: (**r).clone() },
                })
            }
            _ => Err(Error::domain("not a free product action")),
        }
    }

    pub fn free_product(left: Action, right: Action) -> Result<Action> {
        let group = MarkedGroup::free_product(left.group, right.group);
        Action::new(
            group,
            ActionExpr::FreeProduct {
                left: Box::new(left.expr),
                right: Box::new(right.expr),
            },
        )
    }

    pub fn with_expr(&self, expr: ActionExpr) -> Result<Action> {
        Action::new(self.group.clone(), expr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::ball;
    use crate::stallings::{graph_from_generators, hall_complete};
    use crate::group::FreeWord;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f2() -> MarkedGroup {
        MarkedGroup::free(2)
    }

    fn samples() -> Vec<Action> {
        let a = Letter::gen(1);
        let h = graph_from_generators(2, &[FreeWord::reduce([a, a]), FreeWord::reduce([Letter::gen(2), a])]).unwrap();
        let table = hall_complete(&graph_from_generators(2, &[FreeWord::reduce([a, a, a])]).unwrap());
        let fin = ActionExpr::FinSupp {
            gens: vec![Perm::cycle(&[0, 1, 2]).unwrap(), Perm::transposition(1, 5)],
        };
        let z = MarkedGroup::free(1);
        vec![
            Action::new(f2(), fin.clone()).unwrap(),
            Action::new(f2(), ActionExpr::QuasiRegular { subgroup: h }).unwrap(),
            Action::new(f2(), ActionExpr::Cosets { blocks: vec![EmbeddedTable::new(table, vec![4, 0, 9]).unwrap()] }).unwrap(),
            Action::new(f2(), ActionExpr::IntegerShift { steps: vec![1, -3] }).unwrap(),
            Action::new(f2(), fin.clone().augment().conjugate(Bijection::Augment { m: 3 })).unwrap(),
            Action::new(
                f2(),
                ActionExpr::DisjointUnion { parts: vec![fin.clone(), ActionExpr::IntegerShift { steps: vec![2, 1] }] },
            )
            .unwrap(),
            Action::new(
                f2(),
                ActionExpr::Rewire {
                    base: Box::new(ActionExpr::IntegerShift { steps: vec![1, 0] }),
                    overrides: BTreeMap::from([(2, Perm::transposition(0, 7))]),
                },
            )
            .unwrap(),
            Action::new(MarkedGroup::bs(2), ActionExpr::AffineBs).unwrap(),
            Action::new(MarkedGroup::bs(3), ActionExpr::AffineBs.augment().conjugate(Bijection::Augment { m: 10 })).unwrap(),
            Action::free_product(
                Action::new(z.clone(), ActionExpr::IntegerShift { steps: vec![2] }).unwrap(),
                Action::new(z.clone(), ActionExpr::IntegerShift { steps: vec![-1] }).unwrap().with_expr(
                    ActionExpr::DisjointUnion { parts: vec![ActionExpr::IntegerShift { steps: vec![-1] }, ActionExpr::Trivial] },
                ).unwrap(),
            )
            .unwrap(),
            Action::new(
                f2(),
                ActionExpr::Freeze { base: Box::new(fin), frozen: BTreeSet::from([0, 1, 2, 5]) },
            )
            .unwrap(),
        ]
    }

    fn random_element(rng: &mut ChaCha8Rng, group: &MarkedGroup) -> Element {
        let r = group.rank().unwrap();
        let len = rng.gen_range(0..8);
        let letters: Vec<Letter> = (0..len).map(|_| Letter::new(rng.gen_range(1..=r), rng.gen_bool(0.5))).collect();
        group.from_letters(&letters).unwrap()
    }

    #[test]
    fn action_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for act in samples() {
            let group = act.group().clone();
            for _ in 0..300 {
                let g = random_element(&mut rng, &group);
                let h = random_element(&mut rng, &group);
                let x = rng.gen_range(0..60);
                let gh = group.multiply(&g, &h).unwrap();
                let lhs = act.evaluate(&gh, x).unwrap_or_else(|e| panic!("{e} {:?}", act.expr()));
                let rhs = act.evaluate(&g, act.evaluate(&h, x).unwrap()).unwrap();
                assert_eq!(lhs, rhs, "{:?}", act.expr());
                assert_eq!(act.evaluate(&group.identity(), x).unwrap(), x);
                let back = act.evaluate(&group.invert(&g).unwrap(), lhs).unwrap();
                assert_eq!(back, act.evaluate(&h, x).unwrap());
            }
        }
    }

    #[test]
    fn letters_agree_with_elements() {
        for act in samples() {
            for l in act.letters().unwrap() {
                let g = act.group().generator(l).unwrap();
                for x in 0..40 {
                    assert_eq!(act.apply_letter(l, x).unwrap(), act.evaluate(&g, x).unwrap());
                }
            }
        }
    }

    #[test]
    fn bs_relation_on_window() {
        for n in [2u32, 3] {
            let g = MarkedGroup::bs(n);
            let act = Action::new(g.clone(), ActionExpr::AffineBs).unwrap();
            let lhs = g.parse("T s t").unwrap();
            let rhs = g.parse(&format!("s^{n}")).unwrap();
            for x in 0..1000 {
                let y = act.evaluate(&lhs, x).unwrap();
                assert_eq!(y, act.evaluate(&rhs, x).unwrap());
                // independent route: letter by letter
                let z = [Letter::gen(2).inverse(), Letter::gen(1), Letter::gen(2)]
                    .iter()
                    .rev()
                    .fold(x, |p, &l| act.apply_letter(l, p).unwrap());
                assert_eq!(z, y);
            }
            let tst = act.evaluate(&g.parse("T s t").unwrap(), 0).unwrap();
            assert_eq!(decode_n_adic(n, tst), BigRational::from_integer(BigInt::from(n)));
        }
    }

    #[test]
    fn quasi_regular_stabilizer_is_the_subgroup() {
        let h = graph_from_generators(2, &[FreeWord::reduce([Letter::gen(1)])]).unwrap();
        let act = Action::new(f2(), ActionExpr::QuasiRegular { subgroup: h.clone() }).unwrap();
        for e in ball(&f2(), 4).unwrap() {
            let fixed = act.evaluate(&e, 0).unwrap() == 0;
            assert_eq!(fixed, crate::stallings::member(e.as_free().unwrap(), &h));
        }
    }

    #[test]
    fn long_powers_use_cycles() {
        let g = f2();
        let act = &samples()[0];
        let e = g.parse("a^1000001").unwrap();
        assert_eq!(act.evaluate(&e, 0).unwrap(), 2);
        let shift = Action::new(g.clone(), ActionExpr::IntegerShift { steps: vec![1, 1] }).unwrap();
        assert_eq!(shift.evaluate(&g.parse("a^1000000").unwrap(), 0).unwrap(), 2000000);
    }

    #[test]
    fn augment_bijection_round_trips() {
        let b = Bijection::Augment { m: 7 };
        let mut seen = BTreeSet::new();
        for x in 0..100 {
            let y = b.apply(x).unwrap();
            assert!(seen.insert(y));
            assert_eq!(b.apply_inverse(y).unwrap(), x);
        }
    }

    #[test]
    fn invalid_expressions_are_rejected() {
        assert!(Action::new(f2(), ActionExpr::AffineBs).is_err());
        let fin = ActionExpr::FinSupp { gens: vec![Perm::transposition(0, 1)] };
        assert!(Action::new(f2(), ActionExpr::Freeze { base: Box::new(fin), frozen: BTreeSet::from([0]) }).is_err());
        let json = serde_json::to_string(&samples()[2]).unwrap();
        let back: Action = serde_json::from_str(&json).unwrap();
        assert_eq!(back, samples()[2]);
    }
}
