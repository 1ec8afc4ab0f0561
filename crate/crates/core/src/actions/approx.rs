use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::expr::{Action, ActionExpr, Bijection, EmbeddedTable};
use super::orbit::{orbit, reaching_words};
use super::perm::Perm;
use crate::chabauty::{approx_by_joint_separation, symmetric_window, window_product};
use crate::error::{Error, Refusal, Result};
use crate::group::{Element, FreeWord, MarkedGroup};
use crate::stallings::{graph_from_generators, CosetTable};

/// The `i`-th fixed point added by [`augment_fixed_points`] with cutoff `m`.
pub fn augment_fixed_point(m: u64, i: u64) -> u64 {
    if i < m {
        m + i
    } else {
        2 * m + 2 * (i - m) + 1
    }
}

#[derive(Clone, Debug)]
pub struct Augmented {
    pub action: Action,
    /// Points below the cutoff that `act` keeps below it are untouched.
    pub cutoff: u64,
    pub fixed: Vec<u64>,
}

/// `act` with infinitely many fixed points added, agreeing with `act` on
/// `S × Y`.
///
/// `(act, 1)` on `ℕ ⊔ ℕ` is pulled back along a bijection that is the
/// identity on every point below the cutoff `1 + max(Y ∪ act(S)Y)`.
pub fn augment_fixed_points(act: &Action, s: &[Element], y: &[u64], m: usize) -> Result<Augmented> {
    let mut top = 0;
    for &p in y {
        top = top.max(p);
        for g in s {
            top = top.max(act.evaluate(g, p)?);
        }
    }
    augment_with_cutoff(act, top + 1, m)
}

/// [`augment_fixed_points`] with an explicit cutoff; any cutoff above
/// `max(Y ∪ act(S)Y)` keeps the agreement on `S × Y`.
pub fn augment_with_cutoff(act: &Action, cutoff: u64, m: usize) -> Result<Augmented> {
    if cutoff == 0 || cutoff > u64::MAX / 4 {
        return Err(Error::Encoding(format!("augmentation cutoff {cutoff} out of range")));
    }
    let expr = act.expr().clone().augment().conjugate(Bijection::Augment { m: cutoff });
    Ok(Augmented {
        action: act.with_expr(expr)?,
        cutoff,
        fixed: (0..m as u64).map(|i| augment_fixed_point(cutoff, i)).collect(),
    })
}

/// Group elements used to approximate an action near one orbit: `Ω` reaches
/// each point of `A` from `x`, `Ω̃ = {1} ∪ Ω ∪ SΩ` closed under inverses,
/// and `product = Ω̃·Ω̃`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitWindow {
    pub x: u64,
    pub a: Vec<u64>,
    pub omega: Vec<Element>,
    pub omega_tilde: Vec<Element>,
    pub product: Vec<Element>,
}

pub fn orbit_window(tau: &Action, x: u64, s: &[Element], a: &[u64], budget: usize) -> Result<OrbitWindow> {
    let mut targets: BTreeSet<u64> = a.iter().copied().collect();
    targets.insert(x);
    let words = reaching_words(tau, x, &targets, budget)?;
    let omega: BTreeSet<Element> = words.values().cloned().collect();
    let omega: Vec<Element> = omega.into_iter().collect();
    let group = tau.group();
    let omega_tilde = symmetric_window(group, &omega, s)?;
    let product = window_product(group, &omega_tilde, &omega_tilde)?;
    Ok(OrbitWindow {
        x,
        a: targets.into_iter().collect(),
        omega,
        omega_tilde,
        product,
    })
}

fn free_rank(tau: &Action) -> Result<u32> {
    match tau.group() {
        MarkedGroup::Free { rank } => Ok(*rank),
        g => Err(Error::Unsupported(format!(
            "finite-index approximation of stabilizers needs a free group of finite rank, not {}",
            g.describe()
        ))),
    }
}

/// A finite-index `K` with `K ∩ Ω̃Ω̃ = G_x(τ) ∩ Ω̃Ω̃`: the window part of the
/// stabilizer generates `L'`, and `K` approximates `L'` on the window by one
/// joint separation.
pub fn stabilizer_approximation(tau: &Action, window: &OrbitWindow) -> Result<CosetTable> {
    let rank = free_rank(tau)?;
    let mut gens: Vec<FreeWord> = Vec::new();
    for w in &window.product {
        if tau.evaluate(w, window.x)? == window.x {
            gens.push(w.as_free().expect("free group").clone());
        }
    }
    let l = graph_from_generators(rank, &gens)?;
    approx_by_joint_separation(&l, &window.product)
}

/// The coset map `gK ↦ τ(g)x` on `Ω̃K`, with the reason it is well defined
/// and injective checked on `Ω̃Ω̃`.
fn coset_points(tau: &Action, window: &OrbitWindow, k: &CosetTable) -> Result<BTreeMap<usize, u64>> {
    for w in &window.product {
        let in_k = k.contains(w.as_free().expect("free group"));
        let in_l = tau.evaluate(w, window.x)? == window.x;
        if in_k != in_l {
            return Err(Error::precondition(
                "the finite-index subgroup and the stabilizer differ on the product window",
                Some(tau.group().format(w)),
            ));
        }
    }
    let mut f = BTreeMap::new();
    for g in &window.omega_tilde {
        let state = k.coset_of(g.as_free().expect("free group"));
        let p = tau.evaluate(g, window.x)?;
        if let Some(old) = f.insert(state, p) {
            debug_assert_eq!(old, p, "checked on the product window");
        }
    }
    Ok(f)
}

/// Extends `f` injectively to all states, using the least points outside
/// `f`'s image and `avoid`.
fn extend_injectively(f: &BTreeMap<usize, u64>, degree: usize, avoid: &BTreeSet<u64>) -> Vec<u64> {
    let taken: BTreeSet<u64> = f.values().copied().collect();
    let mut free = (0u64..).filter(|p| !taken.contains(p) && !avoid.contains(p));
    (0..degree)
        .map(|i| match f.get(&i) {
            Some(&p) => p,
            None => free.next().expect("infinitely many points"),
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct FiniteOrbitApprox {
    pub action: Action,
    pub table: CosetTable,
    /// `f̃`: state `i` of `table` sits at `points[i]`.
    pub points: Vec<u64>,
    pub window: OrbitWindow,
}

/// An action in `O(τ, S, A)` whose orbit through `x` is `G/K` placed by `f̃`;
/// every point outside that orbit is fixed.
///
/// `A` must lie in the `τ`-orbit of `x` and be reachable within `budget`.
/// `K` must agree with the stabilizer `G_x(τ)` on `Ω̃Ω̃`.
pub fn finite_orbit_approximation(
    tau: &Action,
    x: u64,
    s: &[Element],
    a: &[u64],
    k: &CosetTable,
    budget: usize,
) -> Result<FiniteOrbitApprox> {
    let rank = free_rank(tau)?;
    if k.rank() != rank {
        return Err(Error::domain("coset table over a different free group"));
    }
    let window = orbit_window(tau, x, s, a, budget)?;
    let f = coset_points(tau, &window, k)?;
    let points = extend_injectively(&f, k.degree(), &BTreeSet::new());
    let block = EmbeddedTable::new(k.clone(), points.clone())?;
    let action = tau.with_expr(ActionExpr::Cosets { blocks: vec![block] })?;
    Ok(FiniteOrbitApprox {
        action,
        table: k.clone(),
        points,
        window,
    })
}

/// An action in `O(τ, S, A)` with only finite orbits, for `A` spread over
/// several `τ`-orbits. Each orbit meeting `A` is approximated on its own;
/// points of `A` are grouped by exploring orbits within `budget`.
pub fn approximate_finite_orbits(tau: &Action, s: &[Element], a: &[u64], budget: usize) -> Result<Action> {
    let mut remaining: BTreeSet<u64> = a.iter().copied().collect();
    let mut pieces: Vec<(OrbitWindow, CosetTable, BTreeMap<usize, u64>)> = Vec::new();
    while let Some(x) = remaining.pop_first() {
        let known: BTreeSet<u64> = orbit(tau, x, budget)?.known().iter().copied().collect();
        let class: Vec<u64> = remaining.iter().copied().filter(|p| known.contains(p)).collect();
        for p in &class {
            remaining.remove(p);
        }
        let mut members = class;
        members.push(x);
        let window = orbit_window(tau, x, s, &members, budget)?;
        let k = stabilizer_approximation(tau, &window)?;
        let f = coset_points(tau, &window, &k)?;
        pieces.push((window, k, f));
    }
    let mut used: BTreeSet<u64> = BTreeSet::new();
    for (w, _, f) in &pieces {
        for p in f.values() {
            if !used.insert(*p) {
                return Err(Error::Refusal(Refusal::new(format!(
                    "orbits through {} and an earlier point of A could not be told apart within budget",
                    w.x
                ))));
            }
        }
    }
    let mut blocks = Vec::new();
    for (_, k, f) in pieces {
        let points = extend_injectively(&f, k.degree(), &used);
        used.extend(points.iter().copied());
        blocks.push(EmbeddedTable::new(k, points)?);
    }
    tau.with_expr(ActionExpr::Cosets { blocks })
}

/// `φ` with generator `x_{r+1}` acting by the transposition `(x y)`, where
/// `r` is at least the active rank of `φ`; agrees with `φ` on `F_r`.
pub fn transitive_extension(phi: &Action, r: u32, x: u64, y: u64) -> Result<(Action, u32)> {
    if *phi.group() != MarkedGroup::FreeInfinite {
        return Err(Error::domain("transitive extension adds a generator of F_inf"));
    }
    let active = phi.expr().active_rank(phi.group()).expect("bounded for F_inf");
    let next = r.max(active) + 1;
    let swap = Perm::transposition(x, y);
    let expr = match phi.expr() {
        ActionExpr::Rewire { base, overrides } => {
            let mut overrides = overrides.clone();
            overrides.insert(next, swap);
            ActionExpr::Rewire { base: base.clone(), overrides }
        }
        other => ActionExpr::Rewire {
            base: Box::new(other.clone()),
            overrides: BTreeMap::from([(next, swap)]),
        },
    };
    Ok((phi.with_expr(expr)?, next))
}

/// Serializable record of the coset placement `f̃`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub degree: usize,
    pub points: Vec<u64>,
}

impl From<&FiniteOrbitApprox> for Placement {
    fn from(a: &FiniteOrbitApprox) -> Self {
        Placement {
            degree: a.table.degree(),
            points: a.points.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::constraint::ActionConstraint;
    use crate::actions::orbit::{orbit, stabilizer_window};
    use crate::group::{ball, Letter};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f2() -> MarkedGroup {
        MarkedGroup::free(2)
    }

    fn quasi_regular_a() -> Action {
        let h = graph_from_generators(2, &[FreeWord::letter(Letter::gen(1))]).unwrap();
        Action::new(f2(), ActionExpr::QuasiRegular { subgroup: h }).unwrap()
    }

    #[test]
    fn augmentation_keeps_window_and_adds_fixed_points() {
        let bs = MarkedGroup::bs(2);
        let act = Action::new(bs.clone(), ActionExpr::AffineBs).unwrap();
        let s = bs.parse_list("s").unwrap();
        let aug = augment_fixed_points(&act, &s, &[0], 10).unwrap();
        let c = ActionConstraint::new(act.clone(), s.clone(), vec![0]).unwrap();
        assert!(c.admits(&aug.action).unwrap());
        let moved = act.evaluate(&s[0], 0).unwrap();
        for &p in &aug.fixed {
            assert!(p != 0 && p != moved);
            for g in ball(&bs, 2).unwrap() {
                assert_eq!(aug.action.evaluate(&g, p).unwrap(), p);
            }
        }
        let trivial = Action::trivial(f2()).unwrap();
        let aug = augment_fixed_points(&trivial, &[], &[3], 2).unwrap();
        assert_eq!(aug.action.evaluate(&f2().parse("a b").unwrap(), 5).unwrap(), 5);
    }

    #[test]
    fn finite_orbit_on_quasi_regular_action() {
        let tau = quasi_regular_a();
        let s = f2().parse_list("a, b").unwrap();
        let a: Vec<u64> = orbit(&tau, 0, 40).unwrap().known().iter().copied().take(12).collect();
        let window = orbit_window(&tau, 0, &s, &a, 10_000).unwrap();
        let k = stabilizer_approximation(&tau, &window).unwrap();
        let approx = finite_orbit_approximation(&tau, 0, &s, &a, &k, 10_000).unwrap();
        let sigma = &approx.action;
        let c = ActionConstraint::new(tau.clone(), s, a.clone()).unwrap();
        assert!(c.violations(sigma).unwrap().is_empty());
        let o = orbit(sigma, 0, 100_000).unwrap();
        assert_eq!(o.points().unwrap().len(), k.degree());
        let image: BTreeSet<u64> = approx.points.iter().copied().collect();
        for p in 0..500u64 {
            if !image.contains(&p) {
                for l in sigma.letters().unwrap() {
                    assert_eq!(sigma.apply_letter(l, p).unwrap(), p);
                }
            }
        }
        let test = ball(&f2(), 3).unwrap();
        for g in &test {
            let fixed = sigma.evaluate(g, 0).unwrap() == 0;
            assert_eq!(fixed, k.contains(g.as_free().unwrap()));
        }
    }

    #[test]
    fn wrong_table_is_reported() {
        let tau = quasi_regular_a();
        let s = f2().parse_list("a, b").unwrap();
        let k = CosetTable::whole(2);
        let err = finite_orbit_approximation(&tau, 0, &s, &[0, 1, 2], &k, 1000).unwrap_err();
        match err {
            Error::Precondition { witness: Some(w), .. } => {
                let g = f2().parse(&w).unwrap();
                assert_ne!(tau.evaluate(&g, 0).unwrap(), 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn several_orbits() {
        let g = f2();
        let parts = vec![
            ActionExpr::IntegerShift { steps: vec![1, 2] },
            ActionExpr::IntegerShift { steps: vec![0, 1] },
        ];
        let tau = Action::new(g.clone(), ActionExpr::DisjointUnion { parts }).unwrap();
        let s = g.parse_list("a, b, a b").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pool: Vec<u64> = (0..40).collect();
        pool.shuffle(&mut rng);
        let a: Vec<u64> = pool[..8].to_vec();
        let sigma = approximate_finite_orbits(&tau, &s, &a, 5000).unwrap();
        let c = ActionConstraint::new(tau, s, a.clone()).unwrap();
        assert!(c.admits(&sigma).unwrap());
        for p in a {
            assert!(orbit(&sigma, p, 100_000).unwrap().is_finite());
        }
    }

    #[test]
    fn stabilizer_windows_follow_the_constraint() {
        let tau = quasi_regular_a();
        let omega = ball(&f2(), 2).unwrap();
        let s = omega.clone();
        let window = orbit_window(&tau, 0, &s, &[0], 1000).unwrap();
        let k = stabilizer_approximation(&tau, &window).unwrap();
        let sigma = finite_orbit_approximation(&tau, 0, &s, &[0], &k, 1000).unwrap().action;
        assert_eq!(
            stabilizer_window(&sigma, 0, &omega).unwrap(),
            stabilizer_window(&tau, 0, &omega).unwrap()
        );
    }

    #[test]
    fn transitive_extension_joins_points() {
        let g = MarkedGroup::FreeInfinite;
        let mut act = Action::trivial(g.clone()).unwrap();
        let mut r = 0;
        for y in 1..8 {
            let (next, idx) = transitive_extension(&act, r, 0, y).unwrap();
            let w = g.parse(&format!("x{idx}")).unwrap();
            assert_eq!(next.evaluate(&w, 0).unwrap(), y);
            act = next;
            r = idx;
        }
        let o = orbit(&act, 0, 100).unwrap();
        assert_eq!(o.points().unwrap(), (0..8).collect::<Vec<u64>>().as_slice());
        let (same, _) = transitive_extension(&act, r, 3, 3).unwrap();
        assert_eq!(same.evaluate(&g.parse(&format!("x{}", r + 1)).unwrap(), 3).unwrap(), 3);
    }
}
