//! Finite fusion runs: a schedule of density providers threaded through
//! nested basic open sets `O(φ, S, A)`.
//!
//! Each provider moves the current action to a nearby one with a checkable
//! property and pins that property by enlarging the window `(S, A)`, so every
//! later action in the run keeps it. The run stops after finitely many
//! stages; no limit object is produced.

mod schedule;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_rational::Rational64;

use crate::actions::{
    approximate_finite_orbits, reaching_words, transitive_extension, Action, ActionConstraint, Orbit,
};
use crate::amenability::{free_product_combine, CombineRequest, FolnerCertificate};
use crate::error::{Error, Refusal, Result};
use crate::group::{Element, FreeProductWord, MarkedGroup, Side};

pub use schedule::{
    diagonal_pairs, ProviderSpec, ScheduleFile, StageRecord, Transcript, WitnessJson,
};

/// One dense open set, given constructively.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provider {
    /// Actions in which the `⟨H⟩`-orbit of `x` is finite.
    FiniteOrbit { h: Vec<Element>, x: u64 },
    /// Actions of `F_∞` in which `y` lies in the orbit of `x`.
    Transitivity { x: u64, y: u64 },
    /// Actions of `G ∗ K` whose orbit of `x` holds an `(ε, S ∪ T)`-Følner set.
    AmenableOrbit {
        x: u64,
        epsilon: Rational64,
        s: Vec<Element>,
        t: Vec<Element>,
    },
}

pub fn provider_finite_orbit(h: Vec<Element>, x: u64) -> Provider {
    Provider::FiniteOrbit { h, x }
}

pub fn provider_transitivity(x: u64, y: u64) -> Provider {
    Provider::Transitivity { x, y }
}

pub fn provider_amenable_orbit(x: u64, epsilon: Rational64, s: Vec<Element>, t: Vec<Element>) -> Provider {
    Provider::AmenableOrbit { x, epsilon, s, t }
}

/// What a provider established; checkable against any later action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    FiniteOrbit { x: u64, h: Vec<Element>, orbit: Vec<u64> },
    Transitivity { x: u64, y: u64, word: Element },
    Folner {
        x: u64,
        certificate: FolnerCertificate,
        /// A word carrying `x` to each point of `F`.
        reach: BTreeMap<u64, Element>,
    },
}

/// Result of one refinement: the new action and the smaller open set
/// around it.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub action: Action,
    pub constraint: ActionConstraint,
    pub witness: Witness,
}

/// Closure of `x` under `H ∪ H⁻¹`.
pub fn subgroup_orbit(act: &Action, h: &[Element], x: u64, budget: usize) -> Result<Orbit> {
    let group = act.group();
    let mut moves = Vec::new();
    for g in h {
        moves.push(g.clone());
        moves.push(group.invert(g)?);
    }
    let mut seen = BTreeSet::from([x]);
    let mut queue = VecDeque::from([x]);
    while let Some(p) = queue.pop_front() {
        for g in &moves {
            let q = act.evaluate(g, p)?;
            if seen.insert(q) {
                if seen.len() > budget {
                    return Ok(Orbit::Exceeded {
                        explored: seen.into_iter().collect(),
                        frontier: queue.into_iter().collect(),
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

impl Provider {
    pub fn name(&self) -> String {
        match self {
            Provider::FiniteOrbit { x, .. } => format!("finite_orbit(x={x})"),
            Provider::Transitivity { x, y } => format!("transitivity({x}->{y})"),
            Provider::AmenableOrbit { x, epsilon, .. } => {
                format!("amenable_orbit(x={x}, eps={}/{})", epsilon.numer(), epsilon.denom())
            }
        }
    }

    /// An action inside `c` with the provider's property, and a constraint
    /// inside `c` around it that pins the property.
    pub fn refine(&self, c: &ActionConstraint, budget: usize) -> Result<Refinement> {
        let out = match self {
            Provider::FiniteOrbit { h, x } => self.refine_finite(c, h, *x, budget)?,
            Provider::Transitivity { x, y } => refine_transitive(c, *x, *y)?,
            Provider::AmenableOrbit { x, epsilon, s, t } => refine_amenable(c, *x, *epsilon, s, t, budget)?,
        };
        if let Some(v) = c.violations(&out.action)?.first() {
            return Err(Error::precondition(
                format!("{} left its input constraint", self.name()),
                Some(format!("{} at {}", v.element, v.point)),
            ));
        }
        if !out.constraint.implies(c)? {
            return Err(Error::precondition(format!("{} widened the constraint", self.name()), None));
        }
        verify_witness(&out.witness, &out.action, budget)?;
        Ok(out)
    }

    fn refine_finite(&self, c: &ActionConstraint, h: &[Element], x: u64, budget: usize) -> Result<Refinement> {
        let base = &c.base;
        for g in h {
            if !base.group().owns(g) {
                return Err(Error::domain(format!("{g:?} is not in {}", base.group().describe())));
            }
        }
        let action = match subgroup_orbit(base, h, x, budget)? {
            Orbit::Finite { .. } => base.clone(),
            Orbit::Exceeded { .. } => {
                let mut a = c.a.clone();
                a.push(x);
                approximate_finite_orbits(base, &c.s, &a, budget)?
            }
        };
        let orbit = match subgroup_orbit(&action, h, x, budget)? {
            Orbit::Finite { points } => points,
            Orbit::Exceeded { .. } => {
                return Err(Error::refusal(format!("orbit of {x} still exceeds budget {budget}")))
            }
        };
        let constraint = c.refine(action.clone(), h, &orbit)?;
        Ok(Refinement {
            action,
            constraint,
            witness: Witness::FiniteOrbit {
                x,
                h: h.to_vec(),
                orbit,
            },
        })
    }
}

fn refine_transitive(c: &ActionConstraint, x: u64, y: u64) -> Result<Refinement> {
    let base = &c.base;
    let group = base.group();
    if *group != MarkedGroup::FreeInfinite {
        return Err(Error::domain("transitivity providers act on F_inf"));
    }
    if x == y {
        let word = group.identity();
        return Ok(Refinement {
            action: base.clone(),
            constraint: c.refine(base.clone(), &[word.clone()], &[x])?,
            witness: Witness::Transitivity { x, y, word },
        });
    }
    let used = c
        .s
        .iter()
        .map(|g| g.as_free().map_or(0, |w| w.max_index()))
        .max()
        .unwrap_or(0);
    let (action, index) = transitive_extension(base, used, x, y)?;
    let word = group.parse(&format!("x{index}"))?;
    let constraint = c.refine(action.clone(), &[word.clone()], &[x])?;
    Ok(Refinement {
        action,
        constraint,
        witness: Witness::Transitivity { x, y, word },
    })
}

/// Syllables of the window words and the points they start from, so that
/// agreement of each factor on its syllables forces agreement on `S × A`.
fn split_window(c: &ActionConstraint) -> Result<(Vec<Element>, Vec<Element>, Vec<u64>)> {
    let base = &c.base;
    let mut left = BTreeSet::new();
    let mut right = BTreeSet::new();
    let mut points: BTreeSet<u64> = c.a.iter().copied().collect();
    let factors = [base.factor(Side::Left)?, base.factor(Side::Right)?];
    for w in &c.s {
        let word = w.as_product().expect("element of a free product");
        for &a in &c.a {
            let mut p = a;
            for syl in word.syllables().iter().rev() {
                match syl.side {
                    Side::Left => left.insert(syl.element.clone()),
                    Side::Right => right.insert(syl.element.clone()),
                };
                points.insert(p);
                p = factors[usize::from(syl.side == Side::Right)].evaluate(&syl.element, p)?;
            }
        }
    }
    Ok((left.into_iter().collect(), right.into_iter().collect(), points.into_iter().collect()))
}

fn refine_amenable(
    c: &ActionConstraint,
    x: u64,
    epsilon: Rational64,
    s: &[Element],
    t: &[Element],
    budget: usize,
) -> Result<Refinement> {
    let base = &c.base;
    let (mut keep_s, mut keep_t, a) = split_window(c)?;
    keep_s.extend(s.iter().cloned());
    keep_t.extend(t.iter().cloned());
    let req = CombineRequest {
        sigma: base.factor(Side::Left)?,
        tau: base.factor(Side::Right)?,
        x,
        epsilon,
        s: keep_s,
        t: keep_t,
        a,
        budget,
    };
    let combined = free_product_combine(&req)?;
    let action = combined.product()?;
    let certificate = combined.certificate;
    let targets: BTreeSet<u64> = certificate.f.iter().copied().collect();
    let reach = reaching_words(&action, x, &targets, budget.max(4 * targets.len()))?;
    let mut pins: Vec<Element> = certificate.omega.clone();
    pins.extend(reach.values().cloned());
    let mut points = certificate.f.clone();
    points.push(x);
    let constraint = c.refine(action.clone(), &pins, &points)?;
    Ok(Refinement {
        action,
        constraint,
        witness: Witness::Folner { x, certificate, reach },
    })
}

/// Re-establishes a witness on `act` from scratch.
pub fn verify_witness(w: &Witness, act: &Action, budget: usize) -> Result<()> {
    let fail = |what: String| Err(Error::precondition(what, None));
    match w {
        Witness::FiniteOrbit { x, h, orbit } => match subgroup_orbit(act, h, *x, budget.max(orbit.len()))? {
            Orbit::Finite { points } if points == *orbit => Ok(()),
            _ => fail(format!("orbit of {x} changed")),
        },
        Witness::Transitivity { x, y, word } => {
            if act.evaluate(word, *x)? == *y {
                Ok(())
            } else {
                fail(format!("{} no longer carries {x} to {y}", act.group().format(word)))
            }
        }
        Witness::Folner { x, certificate, reach } => {
            certificate.verify(act)?;
            for f in &certificate.f {
                match reach.get(f) {
                    Some(w) if act.evaluate(w, *x)? == *f => {}
                    _ => return fail(format!("{f} is no longer reached from {x}")),
                }
            }
            Ok(())
        }
    }
}

#[derive(Clone, Debug)]
pub struct Stage {
    pub provider: Provider,
    pub action: Action,
    pub constraint: ActionConstraint,
    pub witness: Witness,
}

/// A finished run: nested constraints, one per stage, all witnesses
/// re-verified on the final action.
#[derive(Clone, Debug)]
pub struct FusionRun {
    pub initial: ActionConstraint,
    pub stages: Vec<Stage>,
}

impl FusionRun {
    pub fn final_action(&self) -> &Action {
        self.stages.last().map_or(&self.initial.base, |s| &s.action)
    }

    pub fn final_constraint(&self) -> &ActionConstraint {
        self.stages.last().map_or(&self.initial, |s| &s.constraint)
    }

    /// Every stage action lies in every earlier constraint, checked point by
    /// point.
    pub fn check_nesting(&self) -> Result<()> {
        let mut constraints = vec![&self.initial];
        for (j, stage) in self.stages.iter().enumerate() {
            for (i, c) in constraints.iter().enumerate() {
                if let Some(v) = c.violations(&stage.action)?.first() {
                    return Err(Error::precondition(
                        format!("stage {j} action leaves constraint {i}"),
                        Some(format!("{} at {}", v.element, v.point)),
                    ));
                }
            }
            constraints.push(&stage.constraint);
        }
        Ok(())
    }

    pub fn check_witnesses(&self, budget: usize) -> Result<()> {
        let last = self.final_action();
        for (i, stage) in self.stages.iter().enumerate() {
            verify_witness(&stage.witness, last, budget).map_err(|e| {
                Error::precondition(format!("stage {i} witness fails on the final action: {e}"), None)
            })?;
        }
        Ok(())
    }
}

fn at_stage(e: Error, stage: usize) -> Error {
    match e {
        Error::Refusal(r) => Error::Refusal(Refusal {
            stage: Some(stage),
            ..r
        }),
        Error::Precondition { reason, witness } => Error::Precondition {
            reason: format!("stage {stage}: {reason}"),
            witness,
        },
        other => other,
    }
}

/// Runs the schedule from `initial`; a refusal carries its stage index.
pub fn run_fusion(schedule: &[Provider], initial: ActionConstraint, stage_budget: usize) -> Result<FusionRun> {
    let mut run = FusionRun {
        initial,
        stages: Vec::with_capacity(schedule.len()),
    };
    for (i, provider) in schedule.iter().enumerate() {
        let current = run.final_constraint().clone();
        let r = provider.refine(&current, stage_budget).map_err(|e| at_stage(e, i))?;
        run.stages.push(Stage {
            provider: provider.clone(),
            action: r.action,
            constraint: r.constraint,
            witness: r.witness,
        });
    }
    run.check_nesting()?;
    run.check_witnesses(stage_budget)?;
    Ok(run)
}

/// Embeds a factor element into `G ∗ K`.
pub fn embed(side: Side, g: &Element) -> Element {
    Element::Product(FreeProductWord::syllable(side, g.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::{orbit, orbit_words, stabilizer_window, ActionExpr, Bijection, Perm};
    use crate::group::{ball, FreeWord, Letter};
    use crate::stallings::{graph_from_generators, SubgroupGraph};

    fn f2() -> MarkedGroup {
        MarkedGroup::free(2)
    }

    fn regular() -> Action {
        Action::new(f2(), ActionExpr::QuasiRegular { subgroup: SubgroupGraph::trivial(2) }).unwrap()
    }

    fn quasi_regular_a() -> Action {
        let h = graph_from_generators(2, &[FreeWord::letter(Letter::gen(1))]).unwrap();
        Action::new(f2(), ActionExpr::QuasiRegular { subgroup: h }).unwrap()
    }

    #[test]
    fn empty_schedule_returns_initial() {
        let c = ActionConstraint::new(regular(), f2().parse_list("a").unwrap(), vec![0, 1]).unwrap();
        let run = run_fusion(&[], c.clone(), 100).unwrap();
        assert_eq!(run.final_constraint(), &c);
    }

    #[test]
    fn finite_orbit_providers_compose() {
        let h = f2().parse_list("a, b").unwrap();
        let c = ActionConstraint::new(regular(), h.clone(), vec![0]).unwrap();
        let schedule = vec![provider_finite_orbit(h.clone(), 0), provider_finite_orbit(h.clone(), 1)];
        let run = run_fusion(&schedule, c, 5000).unwrap();
        for x in [0, 1] {
            assert!(orbit(run.final_action(), x, 100_000).unwrap().is_finite());
        }
        // already finite: the provider keeps the action
        let again = provider_finite_orbit(h, 0).refine(run.final_constraint(), 5000).unwrap();
        assert_eq!(&again.action, run.final_action());
    }

    #[test]
    fn stabilizers_are_finite_index_and_agree_on_windows() {
        let h = f2().parse_list("a, b").unwrap();
        let c = ActionConstraint::new(quasi_regular_a(), h.clone(), vec![0, 1, 2]).unwrap();
        let r = provider_finite_orbit(h, 0).refine(&c, 5000).unwrap();
        let omega = ball(&f2(), 1).unwrap();
        assert_eq!(
            stabilizer_window(&r.action, 0, &omega).unwrap(),
            stabilizer_window(&quasi_regular_a(), 0, &omega).unwrap()
        );
        let (_, done) = orbit_words(&r.action, 0, 100_000).unwrap();
        assert!(done);
    }

    #[test]
    fn transitivity_schedule_joins_window() {
        let g = MarkedGroup::FreeInfinite;
        let c = ActionConstraint::everything(Action::trivial(g).unwrap());
        let schedule: Vec<Provider> = diagonal_pairs(6).into_iter().map(|(x, y)| provider_transitivity(x, y)).collect();
        let run = run_fusion(&schedule, c, 100).unwrap();
        let o = orbit(run.final_action(), 0, 100).unwrap();
        assert_eq!(o.points().unwrap(), &[0, 1, 2, 3, 4, 5]);
        let same = provider_transitivity(3, 3).refine(run.final_constraint(), 10).unwrap();
        assert!(matches!(same.witness, Witness::Transitivity { word, .. } if word.is_identity()));
    }

    #[test]
    fn amenable_orbits_on_translations() {
        let z = MarkedGroup::free(1);
        let copies = |steps: [i64; 2]| {
            ActionExpr::DisjointUnion { parts: steps.iter().map(|&s| ActionExpr::IntegerShift { steps: vec![s] }).collect() }
        };
        let base = Action::free_product(
            Action::new(z.clone(), copies([0, 1])).unwrap(),
            Action::new(z.clone(), copies([1, 0])).unwrap(),
        )
        .unwrap();
        let a = z.parse_list("a").unwrap();
        let c = ActionConstraint::new(base, vec![embed(Side::Left, &a[0])], vec![0, 1]).unwrap();
        let schedule: Vec<Provider> = [2, 4, 8]
            .iter()
            .map(|&q| provider_amenable_orbit(0, Rational64::new(1, q), a.clone(), a.clone()))
            .collect();
        let run = run_fusion(&schedule, c, 4000).unwrap();
        let mut last = 0;
        for stage in &run.stages {
            match &stage.witness {
                Witness::Folner { certificate, .. } => {
                    assert!(certificate.f.len() > last);
                    last = certificate.f.len();
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn perturbations_outside_the_window_keep_witnesses() {
        let h = f2().parse_list("a, b").unwrap();
        let c = ActionConstraint::new(regular(), h.clone(), vec![0]).unwrap();
        let run = run_fusion(&[provider_finite_orbit(h, 0)], c, 5000).unwrap();
        let fin = run.final_constraint();
        let used: BTreeSet<u64> = fin.a.iter().copied().collect();
        let top = *used.iter().max().unwrap();
        // points outside the window and outside the orbit
        let far = 10 * top + 1_000;
        let outside = run
            .final_action()
            .with_expr(run.final_action().expr().clone().conjugate(Bijection::Perm { perm: Perm::transposition(far, far + 1) }))
            .unwrap();
        assert!(fin.admits(&outside).unwrap());
        verify_witness(&run.stages[0].witness, &outside, 5000).unwrap();
        let inside = run
            .final_action()
            .with_expr(run.final_action().expr().clone().conjugate(Bijection::Perm { perm: Perm::transposition(0, far) }))
            .unwrap();
        assert!(!fin.admits(&inside).unwrap());
    }
}
