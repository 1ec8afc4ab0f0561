use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finitely supported permutation of `ℕ`; only moved points are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<(u64, u64)>", into = "Vec<(u64, u64)>")]
pub struct Perm {
    fwd: BTreeMap<u64, u64>,
    bwd: BTreeMap<u64, u64>,
}

impl Perm {
    pub fn identity() -> Self {
        Perm::default()
    }

    /// From `(x, image)` pairs; unlisted points are fixed.
    pub fn from_pairs<I: IntoIterator<Item = (u64, u64)>>(pairs: I) -> Result<Self> {
        let mut fwd = BTreeMap::new();
        let mut bwd = BTreeMap::new();
        for (x, y) in pairs {
            if fwd.insert(x, y).is_some_and(|old| old != y) {
                return Err(Error::domain(format!("point {x} has two images")));
            }
            if bwd.insert(y, x).is_some_and(|old| old != x) {
                return Err(Error::domain(format!("point {y} has two preimages")));
            }
        }
        fwd.retain(|x, y| x != y);
        bwd.retain(|x, y| x != y);
        let moved: BTreeSet<u64> = fwd.keys().copied().collect();
        let hit: BTreeSet<u64> = bwd.keys().copied().collect();
        if moved != hit {
            return Err(Error::domain("pairs do not close up into a permutation"));
        }
        Ok(Perm { fwd, bwd })
    }

    /// The transposition `(x y)`, or the identity when `x = y`.
    pub fn transposition(x: u64, y: u64) -> Self {
        Perm::from_pairs([(x, y), (y, x)]).expect("transposition")
    }

    /// The cycle `c₀ → c₁ → … → c₀`.
    pub fn cycle(points: &[u64]) -> Result<Self> {
        let k = points.len();
        Perm::from_pairs((0..k).map(|i| (points[i], points[(i + 1) % k])))
    }

    pub fn apply(&self, x: u64) -> u64 {
        self.fwd.get(&x).copied().unwrap_or(x)
    }

    pub fn apply_inverse(&self, x: u64) -> u64 {
        self.bwd.get(&x).copied().unwrap_or(x)
    }

    pub fn inverse(&self) -> Perm {
        Perm {
            fwd: self.bwd.clone(),
            bwd: self.fwd.clone(),
        }
    }

    pub fn support(&self) -> BTreeSet<u64> {
        self.fwd.keys().copied().collect()
    }

    pub fn is_identity(&self) -> bool {
        self.fwd.is_empty()
    }

    pub fn is_involution(&self) -> bool {
        self.fwd.iter().all(|(x, y)| self.apply(*y) == *x)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.fwd.iter().map(|(x, y)| (*x, *y))
    }
}

impl TryFrom<Vec<(u64, u64)>> for Perm {
    type Error = Error;
    fn try_from(pairs: Vec<(u64, u64)>) -> Result<Self> {
        Perm::from_pairs(pairs)
    }
}

impl From<Perm> for Vec<(u64, u64)> {
    fn from(p: Perm) -> Self {
        p.fwd.into_iter().collect()
    }
}

/// Prescribed values of one permutation near a finite set: `forward[a] = σ(a)`
/// and `backward[a] = σ⁻¹(a)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermWindow {
    #[serde(default)]
    pub forward: BTreeMap<u64, u64>,
    #[serde(default)]
    pub backward: BTreeMap<u64, u64>,
}

impl PermWindow {
    pub fn from_forward<I: IntoIterator<Item = (u64, u64)>>(pairs: I) -> Self {
        PermWindow {
            forward: pairs.into_iter().collect(),
            backward: BTreeMap::new(),
        }
    }

    /// All prescribed values as one injective forward map.
    pub fn forward_map(&self) -> Result<BTreeMap<u64, u64>> {
        let mut map = self.forward.clone();
        for (&a, &b) in &self.backward {
            match map.insert(b, a) {
                Some(old) if old != a => {
                    return Err(Error::domain(format!(
                        "window sends {b} to both {old} and {a}"
                    )))
                }
                _ => {}
            }
        }
        let mut images = BTreeSet::new();
        for (&x, &y) in &map {
            if !images.insert(y) {
                return Err(Error::domain(format!("window is not injective: {y} is hit twice, last from {x}")));
            }
        }
        Ok(map)
    }
}

/// Finitely supported permutations agreeing with each window: the prescribed
/// values on the domain `D`, then `σ(D)∖D` onto `D∖σ(D)` in increasing order,
/// every other point fixed. The support stays inside `D ∪ σ(D)`.
pub fn finite_support_approx(partials: &[PermWindow]) -> Result<Vec<Perm>> {
    partials
        .iter()
        .map(|w| {
            let map = w.forward_map()?;
            let domain: BTreeSet<u64> = map.keys().copied().collect();
            let image: BTreeSet<u64> = map.values().copied().collect();
            let outside: Vec<u64> = image.difference(&domain).copied().collect();
            let missing: Vec<u64> = domain.difference(&image).copied().collect();
            let closing = outside.into_iter().zip(missing);
            Perm::from_pairs(map.into_iter().chain(closing))
        })
        .collect()
}
