//! Følner sets of actions on `ℕ` with exact rational certificates, Følner
//! search, the free-product surgery that moves a Følner set into the orbit of
//! a chosen point, and the exhaustive `BS(1,n)` non-separability check.

mod combine;
mod search;
mod witness;

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::actions::Action;
use crate::error::{Error, Refusal, Result};
use crate::group::{Element, MarkedGroup};

pub use combine::{
    check_invariants, free_product_combine, min_length_reaching, Case2Witness, CombineCase, CombineRequest, Combined,
    Reach,
};
pub use search::{folner_search, folner_search_with, SearchOptions, DEFAULT_BUDGET};
pub use witness::{bs_nonseparability_witness, BsWitnessReport, DegreeCount};

/// An `(ε, Ω)`-Følner set `F` with the exact ratios `|gF Δ F| / |F|`.
///
/// `f` is sorted; `omega` is sorted and free of repeats; `ratios[i]` belongs
/// to `omega[i]` and every ratio is below `epsilon`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FolnerCertificate {
    pub f: Vec<u64>,
    pub omega: Vec<Element>,
    pub epsilon: Rational64,
    pub ratios: Vec<Rational64>,
}

/// Wire form: `{"F": [..], "omega": [..], "epsilon": "p/q", "ratios": {word: "p/q"}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    #[serde(rename = "F")]
    pub f: Vec<u64>,
    pub omega: Vec<String>,
    pub epsilon: String,
    pub ratios: BTreeMap<String, String>,
}

pub fn format_ratio(r: &Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_ratio(text: &str) -> Result<Rational64> {
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    let (p, q) = match text.trim().split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text.trim(), "1"),
    };
    let p: i64 = p.parse().map_err(|_| bad())?;
    let q: i64 = q.parse().map_err(|_| bad())?;
    if q == 0 {
        return Err(bad());
    }
    Ok(Rational64::new(p, q))
}

impl FolnerCertificate {
    pub fn max_ratio(&self) -> Rational64 {
        self.ratios.iter().copied().max().unwrap_or_default()
    }

    pub fn to_json(&self, group: &MarkedGroup) -> CertificateJson {
        let names: Vec<String> = self.omega.iter().map(|g| group.format(g)).collect();
        CertificateJson {
            f: self.f.clone(),
            ratios: names
                .iter()
                .cloned()
                .zip(self.ratios.iter().map(format_ratio))
                .collect(),
            omega: names,
            epsilon: format_ratio(&self.epsilon),
        }
    }

    /// Parses the wire form without trusting it; see [`FolnerCertificate::verify`].
    pub fn from_json(group: &MarkedGroup, json: &CertificateJson) -> Result<Self> {
        let mut pairs = Vec::new();
        for name in &json.omega {
            let g = group.parse(name)?;
            let r = json
                .ratios
                .get(name)
                .ok_or_else(|| Error::Parse(format!("no ratio for {name}")))?;
            pairs.push((g, parse_ratio(r)?));
        }
        pairs.sort();
        pairs.dedup();
        let f: BTreeSet<u64> = json.f.iter().copied().collect();
        Ok(FolnerCertificate {
            f: f.into_iter().collect(),
            omega: pairs.iter().map(|p| p.0.clone()).collect(),
            epsilon: parse_ratio(&json.epsilon)?,
            ratios: pairs.into_iter().map(|p| p.1).collect(),
        })
    }

    /// Recomputes every ratio for `act` and demands an exact match.
    pub fn verify(&self, act: &Action) -> Result<()> {
        let fresh = folner_check(act, &self.f, &self.omega, self.epsilon)?;
        if fresh != *self {
            return Err(Error::precondition(
                "certificate ratios do not match the action",
                Some(format!("{:?} vs {:?}", self.ratios, fresh.ratios)),
            ));
        }
        Ok(())
    }
}

/// `|gF Δ F| / |F| = 2|gF ∖ F| / |F|` for each `g`, exactly.
pub fn folner_ratios(act: &Action, f: &[u64], omega: &[Element]) -> Result<Vec<Rational64>> {
    let set: BTreeSet<u64> = f.iter().copied().collect();
    if set.is_empty() {
        return Err(Error::domain("a Følner set must be nonempty"));
    }
    let size = i64::try_from(set.len()).map_err(|_| Error::domain("set too large"))?;
    let mut out = Vec::with_capacity(omega.len());
    for g in omega {
        let mut escaped: i64 = 0;
        for &p in &set {
            if !set.contains(&act.evaluate(g, p)?) {
                escaped += 1;
            }
        }
        out.push(Rational64::new(2 * escaped, size));
    }
    Ok(out)
}

fn canonical_omega(omega: &[Element]) -> Vec<Element> {
    let set: BTreeSet<Element> = omega.iter().cloned().collect();
    set.into_iter().collect()
}

/// A certificate when every ratio is below `epsilon`; otherwise a refusal
/// carrying the largest ratio.
pub fn folner_check(act: &Action, f: &[u64], omega: &[Element], epsilon: Rational64) -> Result<FolnerCertificate> {
    if epsilon <= Rational64::default() {
        return Err(Error::domain("epsilon must be positive"));
    }
    let omega = canonical_omega(omega);
    let set: BTreeSet<u64> = f.iter().copied().collect();
    let f: Vec<u64> = set.into_iter().collect();
    let ratios = folner_ratios(act, &f, &omega)?;
    let worst = ratios.iter().copied().max().unwrap_or_default();
    if worst >= epsilon {
        let at = ratios.iter().position(|r| *r == worst).expect("max is attained");
        return Err(Error::Refusal(Refusal {
            reason: format!(
                "|gF Δ F|/|F| = {} is not below {} for g = {}",
                format_ratio(&worst),
                format_ratio(&epsilon),
                act.group().format(&omega[at])
            ),
            best_ratio: Some(worst),
            stage: None,
        }));
    }
    Ok(FolnerCertificate {
        f,
        omega,
        epsilon,
        ratios,
    })
}
