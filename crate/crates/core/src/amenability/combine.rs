use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;

use super::search::{folner_search_with, SearchOptions};
use super::{folner_check, FolnerCertificate};
use crate::actions::{augment_fixed_point, augment_with_cutoff, orbit, orbit_words, Action, ActionConstraint, ActionExpr, Bijection, Orbit, Perm};
use crate::error::{Error, Refusal, Result};
use crate::group::{Element, FreeProductWord, MarkedGroup, Side};

/// A shortest syllable word carrying `x` into `F`.
///
/// `trace` lists `x` and the point after each syllable, so it ends at `y`
/// and meets `F` only there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reach {
    pub z: FreeProductWord,
    pub y: u64,
    pub trace: Vec<u64>,
}

fn product_factors(group: &MarkedGroup) -> Result<(&MarkedGroup, &MarkedGroup)> {
    group
        .factors()
        .ok_or_else(|| Error::domain(format!("{} is not a free product", group.describe())))
}

/// Syllable-layer breadth-first search from `x` for the first layer meeting
/// `F`.
///
/// Layer `k` holds the points first reached by words of `k` syllables; each
/// syllable ranges over the factor orbit of its starting point, explored up
/// to `budget` points. Among hits in the first successful layer the least
/// word wins, then the least point.
pub fn min_length_reaching(act: &Action, x: u64, f: &BTreeSet<u64>, budget: usize) -> Result<Reach> {
    let (lg, rg) = product_factors(act.group())?;
    let sides = [(Side::Left, act.factor(Side::Left)?), (Side::Right, act.factor(Side::Right)?)];
    if f.contains(&x) {
        return Ok(Reach {
            z: FreeProductWord::identity(),
            y: x,
            trace: vec![x],
        });
    }
    // point -> (word, side of its leftmost syllable, parent)
    let mut visited: BTreeMap<u64, (FreeProductWord, Option<Side>, u64)> =
        BTreeMap::from([(x, (FreeProductWord::identity(), None, x))]);
    let mut layer = vec![x];
    while !layer.is_empty() {
        let mut next: BTreeMap<u64, (FreeProductWord, Side, u64)> = BTreeMap::new();
        for &p in &layer {
            let (w, last, _) = visited[&p].clone();
            for (side, factor) in &sides {
                if last == Some(*side) {
                    continue;
                }
                let (ball, _) = orbit_words(factor, p, budget)?;
                for (q, g) in ball.into_iter().skip(1) {
                    if visited.contains_key(&q) {
                        continue;
                    }
                    let candidate = FreeProductWord::syllable(*side, g).mul(&w, lg, rg)?;
                    match next.get(&q) {
                        Some((best, _, _)) if *best <= candidate => {}
                        _ => {
                            next.insert(q, (candidate, *side, p));
                        }
                    }
                }
            }
        }
        let hit = next
            .iter()
            .filter(|(q, _)| f.contains(q))
            .min_by(|a, b| (&a.1 .0, a.0).cmp(&(&b.1 .0, b.0)))
            .map(|(q, _)| *q);
        for (q, (w, side, parent)) in &next {
            visited.insert(*q, (w.clone(), Some(*side), *parent));
        }
        if let Some(y) = hit {
            let mut trace = vec![y];
            let mut p = y;
            while p != x {
                p = visited[&p].2;
                trace.push(p);
            }
            trace.reverse();
            return Ok(Reach {
                z: visited[&y].0.clone(),
                y,
                trace,
            });
        }
        if visited.len() > budget {
            return Err(Error::refusal(format!(
                "target set not reached from {x} within {budget} points"
            )));
        }
        layer = next.into_keys().collect();
    }
    Err(Error::refusal(format!("target set is outside the orbit of {x}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineCase {
    /// Every factor orbit inside the orbit of `x` is finite.
    FiniteOrbits,
    /// Some factor orbit inside the orbit of `x` is unbounded within budget.
    Surgery,
}

/// Data of the surgery, kept for inspection and for the invariant checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case2Witness {
    /// The modified factor; the Følner set lives in an orbit of the other one.
    pub modified: Side,
    pub b: Vec<u64>,
    pub f: Vec<u64>,
    pub z: FreeProductWord,
    pub y: u64,
    pub trace: Vec<u64>,
    pub c: Vec<u64>,
    pub d: Vec<u64>,
    pub xi: Perm,
    pub cutoff: u64,
}

#[derive(Clone, Debug)]
pub struct Combined {
    pub case: CombineCase,
    pub phi: Action,
    pub psi: Action,
    /// Certificate for `φ′ ∗ ψ′` over `S ∪ T` embedded in `G ∗ K`.
    pub certificate: FolnerCertificate,
    pub witness: Option<Case2Witness>,
}

impl Combined {
    pub fn product(&self) -> Result<Action> {
        Action::free_product(self.phi.clone(), self.psi.clone())
    }
}

/// Inputs of [`free_product_combine`]: actions `σ` of `G` and `τ` of `K`,
/// the point `x`, the windows `S ⊆ G`, `T ⊆ K`, `A ⊆ ℕ`, and `ε`.
#[derive(Clone, Debug)]
pub struct CombineRequest {
    pub sigma: Action,
    pub tau: Action,
    pub x: u64,
    pub epsilon: Rational64,
    pub s: Vec<Element>,
    pub t: Vec<Element>,
    pub a: Vec<u64>,
    pub budget: usize,
}

fn embed(side: Side, g: &Element) -> Element {
    Element::Product(FreeProductWord::syllable(side, g.clone()))
}

fn closure(act: &Action, start: &BTreeSet<u64>, budget: usize) -> Result<BTreeSet<u64>> {
    let mut out = BTreeSet::new();
    for &p in start {
        if out.contains(&p) {
            continue;
        }
        match orbit(act, p, budget)? {
            Orbit::Finite { points } => out.extend(points),
            Orbit::Exceeded { .. } => {
                return Err(Error::refusal(format!("orbit of {p} exceeds budget {budget}")))
            }
        }
    }
    Ok(out)
}

/// Actions `φ′` near `σ` on `(S, A)` and `ψ′` near `τ` on `(T, A)` whose
/// free product has an `(ε, S ∪ T)`-Følner set inside the orbit of `x`.
///
/// The case is chosen by probing the factor orbits of every point in the
/// explored orbit of `x`. A probe exceeding the budget selects the surgery,
/// which is sound whenever a large enough Følner set is found there. When the
/// orbit of `x` is exhausted and all probes close, the finite case applies;
/// otherwise the call refuses.
pub fn free_product_combine(req: &CombineRequest) -> Result<Combined> {
    if req.epsilon <= Rational64::default() {
        return Err(Error::domain("epsilon must be positive"));
    }
    let (g, k) = (req.sigma.group(), req.tau.group());
    for s in &req.s {
        if !g.owns(s) {
            return Err(Error::domain(format!("{s:?} is not in {}", g.describe())));
        }
    }
    for t in &req.t {
        if !k.owns(t) {
            return Err(Error::domain(format!("{t:?} is not in {}", k.describe())));
        }
    }
    let product = Action::free_product(req.sigma.clone(), req.tau.clone())?;
    let lx = orbit(&product, req.x, req.budget)?;
    let mut closed: [BTreeSet<u64>; 2] = [BTreeSet::new(), BTreeSet::new()];
    for &p in lx.known() {
        for (slot, side, act) in [(1, Side::Right, &req.tau), (0, Side::Left, &req.sigma)] {
            if closed[slot].contains(&p) {
                continue;
            }
            match orbit(act, p, req.budget)? {
                Orbit::Finite { points } => closed[slot].extend(points),
                Orbit::Exceeded { .. } => return surgery(req, side.other(), p),
            }
        }
    }
    match lx {
        Orbit::Finite { points } => finite_case(req, &points),
        Orbit::Exceeded { .. } => Err(Error::refusal(format!(
            "the orbit of {} exceeds budget {} while every probed factor orbit is finite",
            req.x, req.budget
        ))),
    }
}

fn window_a(req: &CombineRequest) -> Vec<u64> {
    let mut a: BTreeSet<u64> = req.a.iter().copied().collect();
    a.insert(req.x);
    a.into_iter().collect()
}

fn certificate_window(req: &CombineRequest) -> Vec<Element> {
    req.s
        .iter()
        .map(|s| embed(Side::Left, s))
        .chain(req.t.iter().map(|t| embed(Side::Right, t)))
        .collect()
}

/// Freezes the `σ`-orbits of `C ∖ B`, where `B` is the `σ`-closure of
/// `A ∩ Lx` and `C` the `τ`-closure of `B`.
fn finite_case(req: &CombineRequest, lx: &[u64]) -> Result<Combined> {
    let a = window_a(req);
    let lx: BTreeSet<u64> = lx.iter().copied().collect();
    let start: BTreeSet<u64> = a.iter().copied().filter(|p| lx.contains(p)).collect();
    let b = closure(&req.sigma, &start, req.budget)?;
    let c = closure(&req.tau, &b, req.budget)?;
    let outside: BTreeSet<u64> = c.difference(&b).copied().collect();
    let frozen = closure(&req.sigma, &outside, req.budget)?;
    assert!(frozen.is_disjoint(&b), "B is σ-invariant");
    let phi = if frozen.is_empty() {
        req.sigma.clone()
    } else {
        req.sigma.with_expr(ActionExpr::Freeze {
            base: Box::new(req.sigma.expr().clone()),
            frozen,
        })?
    };
    let psi = req.tau.clone();
    let joint = Action::free_product(phi.clone(), psi.clone())?;
    let orbit_x = match orbit(&joint, req.x, c.len().max(1))? {
        Orbit::Finite { points } => points,
        Orbit::Exceeded { .. } => unreachable!("C is invariant under φ′ and τ"),
    };
    assert!(orbit_x.iter().all(|p| c.contains(p)));
    let kept = ActionConstraint::new(req.sigma.clone(), req.s.clone(), a)?;
    assert!(kept.admits(&phi)?, "φ′ agrees with σ on B ⊇ A ∩ Lx and off Lx");
    let certificate = folner_check(&joint, &orbit_x, &certificate_window(req), req.epsilon)?;
    Ok(Combined {
        case: CombineCase::FiniteOrbits,
        phi,
        psi,
        certificate,
        witness: None,
    })
}

/// Least `m` with `m·ε > 2(|B|+1)`.
fn size_bound(b: usize, epsilon: Rational64) -> usize {
    let need = Rational64::from_integer(2 * (b as i64 + 1)) / epsilon;
    (need.floor().to_integer() + 1) as usize
}

/// Cutoff growth attempts when an augmented syllable leaves the agreement region.
const CUTOFF_ATTEMPTS: usize = 8;

/// Surgery on the `modified` factor; the Følner set is taken in the orbit of
/// `y0` under the other factor.
fn surgery(req: &CombineRequest, modified: Side, y0: u64) -> Result<Combined> {
    let (sig, tau, s, t) = match modified {
        Side::Left => (&req.sigma, &req.tau, &req.s, &req.t),
        Side::Right => (&req.tau, &req.sigma, &req.t, &req.s),
    };
    let a = window_a(req);
    let mut b: BTreeSet<u64> = a.iter().copied().collect();
    for g in s {
        for &p in &a {
            b.insert(sig.evaluate(g, p)?);
        }
    }
    let min_size = size_bound(b.len(), req.epsilon);
    let opts = SearchOptions {
        budget: req.budget.max(2 * min_size),
        min_size,
        seed: Vec::new(),
    };
    let folner = folner_search_with(tau, y0, t, req.epsilon, &opts).map_err(|e| match e {
        Error::Refusal(r) => Error::Refusal(Refusal {
            reason: format!("no Følner set of size ≥ {min_size} in the orbit of {y0}: {}", r.reason),
            ..r
        }),
        other => other,
    })?;
    let f: BTreeSet<u64> = folner.f.iter().copied().collect();
    let product = Action::free_product(req.sigma.clone(), req.tau.clone())?;
    let reach = min_length_reaching(&product, req.x, &f, req.budget)?;
    let y = reach.y;
    let trace: BTreeSet<u64> = reach.trace.iter().copied().collect();
    let d: Vec<u64> = f.iter().copied().filter(|p| !b.contains(p) && *p != y).collect();
    let top = b.iter().chain(&f).chain(&trace).copied().max().expect("x ∈ B");
    let z = Element::Product(reach.z.clone());

    let mut cutoff = top + 1;
    for _ in 0..CUTOFF_ATTEMPTS {
        let aug = augment_with_cutoff(sig, cutoff, 0)?;
        let c: Vec<u64> = (0..d.len() as u64).map(|i| augment_fixed_point(cutoff, i)).collect();
        let xi = Perm::from_pairs(c.iter().zip(&d).flat_map(|(&p, &q)| [(p, q), (q, p)]))?;
        let phi = aug.action.with_expr(aug.action.expr().clone().conjugate(Bijection::Perm { perm: xi.clone() }))?;
        let (left, right) = match modified {
            Side::Left => (phi.clone(), tau.clone()),
            Side::Right => (tau.clone(), phi.clone()),
        };
        let joint = Action::free_product(left.clone(), right.clone())?;
        if joint.evaluate(&z, req.x)? != y {
            cutoff = cutoff.checked_mul(4).ok_or_else(|| Error::Encoding("cutoff overflow".into()))?;
            continue;
        }
        let witness = Case2Witness {
            modified,
            b: b.iter().copied().collect(),
            f: f.iter().copied().collect(),
            z: reach.z.clone(),
            y,
            trace: reach.trace.clone(),
            c,
            d,
            xi,
            cutoff,
        };
        check_invariants(&witness, &joint, req.x)?;
        assert!(
            Rational64::from_integer(witness.f.len() as i64) * req.epsilon
                > Rational64::from_integer(2 * (witness.b.len() as i64 + 1)),
            "|F| > 2(|B|+1)/ε"
        );
        let kept = ActionConstraint::new(sig.clone(), s.clone(), a.clone())?;
        assert!(kept.admits(&phi)?, "ξ fixes B, so φ′ agrees with σ on (S, A)");
        let certificate = folner_check(&joint, &witness.f, &certificate_window(req), req.epsilon)
            .expect("|φ′(s)F Δ F| ≤ 2(|B|+1) < ε|F| and F is (ε, T)-Følner");
        return Ok(Combined {
            case: CombineCase::Surgery,
            phi: left,
            psi: right,
            certificate,
            witness: Some(witness),
        });
    }
    Err(Error::refusal(format!(
        "the syllable path from {} leaves every augmentation cutoff tried",
        req.x
    )))
}

/// The six surgery invariants, each checked on its own.
pub fn check_invariants(w: &Case2Witness, joint: &Action, x: u64) -> Result<()> {
    let b: BTreeSet<u64> = w.b.iter().copied().collect();
    let f: BTreeSet<u64> = w.f.iter().copied().collect();
    let trace: BTreeSet<u64> = w.trace.iter().copied().collect();
    let fail = |what: &str| Err(Error::precondition(format!("surgery invariant failed: {what}"), None));
    if w.c.iter().any(|p| b.contains(p) || f.contains(p) || trace.contains(p)) {
        return fail("C meets B ∪ F ∪ trace");
    }
    if !w.xi.is_involution() {
        return fail("ξ² ≠ 1");
    }
    if w.b.iter().any(|&p| w.xi.apply(p) != p) {
        return fail("ξ moves a point of B");
    }
    if w.trace.iter().any(|&p| w.xi.apply(p) != p) {
        return fail("ξ moves a point of the trace");
    }
    let d: Vec<u64> = w.f.iter().copied().filter(|p| !b.contains(p) && *p != w.y).collect();
    if d != w.d {
        return fail("D ≠ F ∖ (B ∪ {y})");
    }
    if joint.evaluate(&Element::Product(w.z.clone()), x)? != w.y || !f.contains(&w.y) {
        return fail("(φ′ ∗ ψ′)(z)x ≠ y ∈ F");
    }
    Ok(())
}
