use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::expr::Action;
use crate::error::{Error, Result};
use crate::group::Element;

/// The basic open set `O(φ, S, A) = {σ : σ(s)a = φ(s)a for s ∈ S, a ∈ A}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionConstraint {
    pub base: Action,
    pub s: Vec<Element>,
    pub a: Vec<u64>,
}

/// One pair `(s, a)` on which an action leaves the constraint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub element: String,
    pub point: u64,
    pub expected: u64,
    pub found: u64,
}

impl ActionConstraint {
    /// `S` and `A` are stored sorted and deduplicated.
    pub fn new(base: Action, s: Vec<Element>, a: Vec<u64>) -> Result<Self> {
        for g in &s {
            if !base.group().owns(g) {
                return Err(Error::domain(format!("{g:?} is not in {}", base.group().describe())));
            }
        }
        let s: BTreeSet<Element> = s.into_iter().collect();
        let a: BTreeSet<u64> = a.into_iter().collect();
        Ok(ActionConstraint {
            base,
            s: s.into_iter().collect(),
            a: a.into_iter().collect(),
        })
    }

    /// The whole space: no conditions.
    pub fn everything(base: Action) -> Self {
        ActionConstraint { base, s: Vec::new(), a: Vec::new() }
    }

    pub fn violations(&self, sigma: &Action) -> Result<Vec<Violation>> {
        if sigma.group() != self.base.group() {
            return Err(Error::domain("actions of different groups"));
        }
        let mut out = Vec::new();
        for g in &self.s {
            for &a in &self.a {
                let expected = self.base.evaluate(g, a)?;
                let found = sigma.evaluate(g, a)?;
                if expected != found {
                    out.push(Violation {
                        element: self.base.group().format(g),
                        point: a,
                        expected,
                        found,
                    });
                }
            }
        }
        Ok(out)
    }

    pub fn admits(&self, sigma: &Action) -> Result<bool> {
        Ok(self.violations(sigma)?.is_empty())
    }

    /// A constraint around `new_base` with `S` and `A` enlarged; it implies
    /// `self` because `new_base` satisfies `self`.
    pub fn refine(&self, new_base: Action, more_s: &[Element], more_a: &[u64]) -> Result<Self> {
        let bad = self.violations(&new_base)?;
        if let Some(v) = bad.first() {
            return Err(Error::precondition(
                "refined action leaves the constraint",
                Some(format!("{} at {}: expected {}, found {}", v.element, v.point, v.expected, v.found)),
            ));
        }
        let mut s = self.s.clone();
        s.extend(more_s.iter().cloned());
        let mut a = self.a.clone();
        a.extend(more_a.iter().copied());
        ActionConstraint::new(new_base, s, a)
    }

    /// `self ⊆ other` as sets of actions, witnessed by containment of the
    /// windows and `self.base ∈ other`.
    pub fn implies(&self, other: &ActionConstraint) -> Result<bool> {
        let s: BTreeSet<&Element> = self.s.iter().collect();
        let a: BTreeSet<&u64> = self.a.iter().collect();
        Ok(other.s.iter().all(|g| s.contains(g))
            && other.a.iter().all(|p| a.contains(p))
            && other.admits(&self.base)?)
    }
}
