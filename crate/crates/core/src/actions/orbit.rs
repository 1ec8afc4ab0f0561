use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::expr::Action;
use crate::error::{Error, Refusal, Result};
use crate::group::{Element, Letter};

/// An orbit explored breadth-first under the signed generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Orbit {
    Finite { points: Vec<u64> },
    /// More than `budget` points; `explored` lists every point seen and
    /// `frontier` those not yet expanded.
    Exceeded { explored: Vec<u64>, frontier: Vec<u64> },
}

impl Orbit {
    pub fn is_finite(&self) -> bool {
        matches!(self, Orbit::Finite { .. })
    }

    pub fn points(&self) -> Option<&[u64]> {
        match self {
            Orbit::Finite { points } => Some(points),
            Orbit::Exceeded { .. } => None,
        }
    }

    /// Points known to lie in the orbit.
    pub fn known(&self) -> &[u64] {
        match self {
            Orbit::Finite { points } => points,
            Orbit::Exceeded { explored, .. } => explored,
        }
    }
}

/// Breadth-first closure of `x`, giving up once more than `budget` points
/// have been seen.
pub fn orbit(act: &Action, x: u64, budget: usize) -> Result<Orbit> {
    if budget == 0 {
        return Err(Error::domain("orbit budget must be at least 1"));
    }
    let letters = act.letters()?;
    let mut seen = BTreeSet::from([x]);
    let mut queue = VecDeque::from([x]);
    while let Some(p) = queue.pop_front() {
        for &l in &letters {
            let q = act.apply_letter(l, p)?;
            if seen.insert(q) {
                if seen.len() > budget {
                    queue.push_front(p);
                    return Ok(Orbit::Exceeded {
                        explored: seen.into_iter().collect(),
                        frontier: {
                            let mut f: Vec<u64> = queue.into_iter().collect();
                            f.push(q);
                            f.sort_unstable();
                            f.dedup();
                            f
                        },
                    });
                }
                queue.push_back(q);
            }
        }
    }
    Ok(Orbit::Finite {
        points: seen.into_iter().collect(),
    })
}

/// Shortest words carrying `x` to each target, ties broken by element order.
///
/// Exploration is layer by layer; a point first seen in layer `k` keeps the
/// least word among all length-`k` candidates.
pub fn reaching_words(
    act: &Action,
    x: u64,
    targets: &BTreeSet<u64>,
    budget: usize,
) -> Result<BTreeMap<u64, Element>> {
    let group = act.group();
    let letters = act.letters()?;
    let gens: Vec<(Letter, Element)> = letters
        .iter()
        .map(|&l| Ok((l, group.generator(l)?)))
        .collect::<Result<_>>()?;
    let mut words: BTreeMap<u64, Element> = BTreeMap::from([(x, group.identity())]);
    let mut layer = vec![x];
    let done = |words: &BTreeMap<u64, Element>| targets.iter().all(|t| words.contains_key(t));
    while !done(&words) {
        if layer.is_empty() || words.len() > budget {
            let missing: Vec<String> = targets
                .iter()
                .filter(|t| !words.contains_key(t))
                .map(u64::to_string)
                .collect();
            let why = if layer.is_empty() { "outside the orbit of" } else { "not reached within budget from" };
            return Err(Error::Refusal(Refusal::new(format!(
                "points {} {why} {x}",
                missing.join(", ")
            ))));
        }
        let mut next: BTreeMap<u64, Element> = BTreeMap::new();
        for p in &layer {
            let w = &words[p];
            for (l, g) in &gens {
                let q = act.apply_letter(*l, *p)?;
                if words.contains_key(&q) {
                    continue;
                }
                let candidate = group.multiply(g, w)?;
                match next.get(&q) {
                    Some(best) if *best <= candidate => {}
                    _ => {
                        next.insert(q, candidate);
                    }
                }
            }
        }
        layer = next.keys().copied().collect();
        words.extend(next);
    }
    Ok(targets.iter().map(|t| (*t, words[t].clone())).collect())
}

/// Every point of the orbit of `x` met while at most `budget` points are
/// known, each with a shortest word reaching it (ties broken by element
/// order), in discovery order. The flag is true when the orbit was exhausted.
pub fn orbit_words(act: &Action, x: u64, budget: usize) -> Result<(Vec<(u64, Element)>, bool)> {
    if budget == 0 {
        return Err(Error::domain("orbit budget must be at least 1"));
    }
    let group = act.group();
    let gens: Vec<(Letter, Element)> = act
        .letters()?
        .into_iter()
        .map(|l| Ok((l, group.generator(l)?)))
        .collect::<Result<_>>()?;
    let mut seen = BTreeSet::from([x]);
    let mut out = vec![(x, group.identity())];
    let mut layer = vec![(x, group.identity())];
    while !layer.is_empty() {
        let mut next: BTreeMap<u64, Element> = BTreeMap::new();
        for (p, w) in &layer {
            for (l, g) in &gens {
                let q = act.apply_letter(*l, *p)?;
                if seen.contains(&q) {
                    continue;
                }
                let candidate = group.multiply(g, w)?;
                match next.get(&q) {
                    Some(best) if *best <= candidate => {}
                    _ => {
                        next.insert(q, candidate);
                    }
                }
            }
        }
        layer = Vec::new();
        for (q, w) in next {
            if out.len() >= budget {
                return Ok((out, false));
            }
            seen.insert(q);
            out.push((q, w.clone()));
            layer.push((q, w));
        }
    }
    Ok((out, true))
}

/// `{g ∈ Ω : g·x = x}` in the order of `Ω`.
pub fn stabilizer_window(act: &Action, x: u64, omega: &[Element]) -> Result<Vec<Element>> {
    let mut out = Vec::new();
    for g in omega {
        if act.evaluate(g, x)? == x {
            out.push(g.clone());
        }
    }
    Ok(out)
}

/// Intermediate points of a word applied letter by letter; duplicates kept.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub points: Vec<u64>,
}

impl Trace {
    pub fn end(&self) -> u64 {
        *self.points.last().expect("a trace starts at its point")
    }

    pub fn as_set(&self) -> BTreeSet<u64> {
        self.points.iter().copied().collect()
    }
}

/// Trace of `x` under the written word `v_k ⋯ v_1`: `x, v_1x, v_2v_1x, …`.
pub fn trace(act: &Action, word: &[Element], x: u64) -> Result<Trace> {
    if word.is_empty() {
        return Err(Error::domain("a trace needs a nonempty word"));
    }
    let mut points = vec![x];
    let mut y = x;
    for v in word.iter().rev() {
        y = act.evaluate(v, y)?;
        points.push(y);
    }
    Ok(Trace { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::{decode_n_adic, encode_n_adic, ActionExpr, EmbeddedTable, Perm};
    use crate::group::{ball, FreeWord, MarkedGroup};
    use crate::stallings::{graph_from_generators, separate};
    use num_rational::BigRational;

    fn f2() -> MarkedGroup {
        MarkedGroup::free(2)
    }

    fn coset_action() -> Action {
        let a = Letter::gen(1);
        let h = graph_from_generators(2, &[FreeWord::reduce([a, a]), FreeWord::letter(Letter::gen(2))]).unwrap();
        let t = separate(&h, &FreeWord::letter(a)).unwrap();
        Action::new(f2(), ActionExpr::Cosets { blocks: vec![EmbeddedTable::new(t, vec![0, 1]).unwrap()] }).unwrap()
    }

    #[test]
    fn orbit_examples() {
        let fixed = Action::new(f2(), ActionExpr::FinSupp { gens: vec![] }).unwrap();
        assert_eq!(orbit(&fixed, 7, 10).unwrap(), Orbit::Finite { points: vec![7] });
        assert_eq!(orbit(&coset_action(), 0, 10).unwrap().points().unwrap().len(), 2);
        let bs = Action::new(MarkedGroup::bs(2), ActionExpr::AffineBs).unwrap();
        let mut last = 0;
        for budget in [10, 100, 1000] {
            let o = orbit(&bs, 0, budget).unwrap();
            assert!(!o.is_finite());
            assert!(o.known().len() > last);
            last = o.known().len();
        }
    }

    #[test]
    fn stabilizer_window_examples() {
        let act = coset_action();
        let omega = ball(&f2(), 1).unwrap();
        let w = stabilizer_window(&act, 0, &omega).unwrap();
        let names: Vec<String> = w.iter().map(|e| f2().format(e)).collect();
        assert_eq!(names, ["1", "b", "B"]);
        assert_eq!(stabilizer_window(&act, 0, &[f2().identity()]).unwrap().len(), 1);
    }

    #[test]
    fn traces() {
        let g = f2();
        let act = Action::new(g.clone(), ActionExpr::FinSupp { gens: vec![Perm::transposition(0, 1)] }).unwrap();
        let word = g.parse_list("A, a").unwrap();
        assert_eq!(trace(&act, &word, 0).unwrap().points, vec![0, 1, 0]);
        let bs = MarkedGroup::bs(2);
        let act = Action::new(bs.clone(), ActionExpr::AffineBs).unwrap();
        let word = bs.parse_list("t, s").unwrap();
        let tr = trace(&act, &word, 0).unwrap();
        let half = encode_n_adic(2, &BigRational::new(1.into(), 2.into())).unwrap();
        assert_eq!(tr.points, vec![0, encode_n_adic(2, &BigRational::from_integer(1.into())).unwrap(), half]);
        assert_eq!(decode_n_adic(2, tr.end()), BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn reaching_words_are_shortest() {
        let h = graph_from_generators(2, &[FreeWord::letter(Letter::gen(1))]).unwrap();
        let act = Action::new(f2(), ActionExpr::QuasiRegular { subgroup: h }).unwrap();
        let targets: BTreeSet<u64> = (0..30).collect();
        let words = reaching_words(&act, 0, &targets, 10_000).unwrap();
        for (p, w) in &words {
            assert_eq!(act.evaluate(w, 0).unwrap(), *p);
            // no shorter word reaches p
            let shorter = ball(&f2(), w.normal_form_len().saturating_sub(1)).unwrap();
            if !w.is_identity() {
                assert!(shorter.iter().all(|u| act.evaluate(u, 0).unwrap() != *p));
            }
        }
        let (all, done) = orbit_words(&act, 0, 30).unwrap();
        assert!(!done);
        for (p, w) in &all {
            if targets.contains(p) {
                assert_eq!(words[p], *w);
            }
        }
        let fixed = Action::trivial(f2()).unwrap();
        let err = reaching_words(&fixed, 0, &BTreeSet::from([3]), 100).unwrap_err();
        assert!(err.is_refusal());
    }
}
