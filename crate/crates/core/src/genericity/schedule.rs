//! Wire forms: schedule files in, transcripts out.

use serde::{Deserialize, Serialize};

use super::{verify_witness, FusionRun, Provider, Witness};
use crate::actions::{Action, ActionConstraint};
use crate::amenability::{format_ratio, parse_ratio, CertificateJson, FolnerCertificate};
use crate::error::{Error, Result};
use crate::group::{MarkedGroup, Side};

/// One provider as written in a schedule file; words are in the ambient
/// notation, except `s`/`t` of `amenable_orbit`, which use the factor's.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "provider", rename_all = "snake_case")]
pub enum ProviderSpec {
    FiniteOrbit { h: Vec<String>, x: u64 },
    Transitivity { x: u64, y: u64 },
    AmenableOrbit {
        x: u64,
        epsilon: String,
        s: Vec<String>,
        t: Vec<String>,
    },
}

fn parse_words(group: &MarkedGroup, words: &[String]) -> Result<Vec<crate::group::Element>> {
    words.iter().map(|w| group.parse(w)).collect()
}

fn factor(group: &MarkedGroup, side: Side) -> Result<&MarkedGroup> {
    group
        .factor(side)
        .ok_or_else(|| Error::domain(format!("{} is not a free product", group.describe())))
}

impl ProviderSpec {
    pub fn to_provider(&self, group: &MarkedGroup) -> Result<Provider> {
        Ok(match self {
            ProviderSpec::FiniteOrbit { h, x } => Provider::FiniteOrbit {
                h: parse_words(group, h)?,
                x: *x,
            },
            ProviderSpec::Transitivity { x, y } => Provider::Transitivity { x: *x, y: *y },
            ProviderSpec::AmenableOrbit { x, epsilon, s, t } => Provider::AmenableOrbit {
                x: *x,
                epsilon: parse_ratio(epsilon)?,
                s: parse_words(factor(group, Side::Left)?, s)?,
                t: parse_words(factor(group, Side::Right)?, t)?,
            },
        })
    }

    pub fn from_provider(group: &MarkedGroup, p: &Provider) -> Result<Self> {
        let names = |g: &MarkedGroup, ws: &[crate::group::Element]| ws.iter().map(|w| g.format(w)).collect();
        Ok(match p {
            Provider::FiniteOrbit { h, x } => ProviderSpec::FiniteOrbit { h: names(group, h), x: *x },
            Provider::Transitivity { x, y } => ProviderSpec::Transitivity { x: *x, y: *y },
            Provider::AmenableOrbit { x, epsilon, s, t } => ProviderSpec::AmenableOrbit {
                x: *x,
                epsilon: format_ratio(epsilon),
                s: names(factor(group, Side::Left)?, s),
                t: names(factor(group, Side::Right)?, t),
            },
        })
    }
}

/// `{"action": {...}, "s": [..], "a": [..], "providers": [..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub action: Action,
    #[serde(default)]
    pub s: Vec<String>,
    #[serde(default)]
    pub a: Vec<u64>,
    pub providers: Vec<ProviderSpec>,
}

impl ScheduleFile {
    /// The initial constraint and the first `stages` providers (all when `None`).
    pub fn load(&self, stages: Option<usize>) -> Result<(ActionConstraint, Vec<Provider>)> {
        let group = self.action.group();
        let initial = ActionConstraint::new(self.action.clone(), parse_words(group, &self.s)?, self.a.clone())?;
        let take = stages.unwrap_or(self.providers.len());
        if take > self.providers.len() {
            return Err(Error::domain(format!(
                "{take} stages requested, schedule has {}",
                self.providers.len()
            )));
        }
        let providers = self.providers[..take]
            .iter()
            .map(|p| p.to_provider(group))
            .collect::<Result<_>>()?;
        Ok((initial, providers))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessJson {
    FiniteOrbit { x: u64, h: Vec<String>, orbit: Vec<u64> },
    Transitivity { x: u64, y: u64, word: String },
    Folner {
        x: u64,
        certificate: CertificateJson,
        /// `[point, word]` pairs; integer map keys do not survive the
        /// buffering of internally tagged enums.
        reach: Vec<(u64, String)>,
    },
}

impl WitnessJson {
    pub fn from_witness(group: &MarkedGroup, w: &Witness) -> Self {
        match w {
            Witness::FiniteOrbit { x, h, orbit } => WitnessJson::FiniteOrbit {
                x: *x,
                h: h.iter().map(|g| group.format(g)).collect(),
                orbit: orbit.clone(),
            },
            Witness::Transitivity { x, y, word } => WitnessJson::Transitivity {
                x: *x,
                y: *y,
                word: group.format(word),
            },
            Witness::Folner { x, certificate, reach } => WitnessJson::Folner {
                x: *x,
                certificate: certificate.to_json(group),
                reach: reach.iter().map(|(p, w)| (*p, group.format(w))).collect(),
            },
        }
    }

    pub fn to_witness(&self, group: &MarkedGroup) -> Result<Witness> {
        Ok(match self {
            WitnessJson::FiniteOrbit { x, h, orbit } => Witness::FiniteOrbit {
                x: *x,
                h: parse_words(group, h)?,
                orbit: orbit.clone(),
            },
            WitnessJson::Transitivity { x, y, word } => Witness::Transitivity {
                x: *x,
                y: *y,
                word: group.parse(word)?,
            },
            WitnessJson::Folner { x, certificate, reach } => Witness::Folner {
                x: *x,
                certificate: FolnerCertificate::from_json(group, certificate)?,
                reach: reach
                    .iter()
                    .map(|(p, w)| Ok((*p, group.parse(w)?)))
                    .collect::<Result<_>>()?,
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub index: usize,
    pub provider: ProviderSpec,
    pub action: Action,
    pub s: Vec<String>,
    pub a: Vec<u64>,
    pub witness: WitnessJson,
}

/// Everything needed to re-check a run without rerunning it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub initial: Action,
    pub initial_s: Vec<String>,
    pub initial_a: Vec<u64>,
    pub stages: Vec<StageRecord>,
}

impl Transcript {
    pub fn from_run(run: &FusionRun) -> Result<Self> {
        let group = run.initial.base.group();
        let words = |c: &ActionConstraint| c.s.iter().map(|g| group.format(g)).collect::<Vec<_>>();
        let stages = run
            .stages
            .iter()
            .enumerate()
            .map(|(index, st)| {
                Ok(StageRecord {
                    index,
                    provider: ProviderSpec::from_provider(group, &st.provider)?,
                    action: st.action.clone(),
                    s: words(&st.constraint),
                    a: st.constraint.a.clone(),
                    witness: WitnessJson::from_witness(group, &st.witness),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Transcript {
            initial: run.initial.base.clone(),
            initial_s: words(&run.initial),
            initial_a: run.initial.a.clone(),
            stages,
        })
    }

    /// Rebuilds the run from the recorded data and re-checks nesting and
    /// every witness on the final action.
    pub fn verify(&self, budget: usize) -> Result<()> {
        let group = self.initial.group();
        let initial = ActionConstraint::new(self.initial.clone(), parse_words(group, &self.initial_s)?, self.initial_a.clone())?;
        let mut run = FusionRun {
            initial,
            stages: Vec::new(),
        };
        for rec in &self.stages {
            let constraint = ActionConstraint::new(rec.action.clone(), parse_words(group, &rec.s)?, rec.a.clone())?;
            run.stages.push(super::Stage {
                provider: rec.provider.to_provider(group)?,
                action: rec.action.clone(),
                constraint,
                witness: rec.witness.to_witness(group)?,
            });
        }
        run.check_nesting()?;
        for (i, st) in run.stages.iter().enumerate() {
            verify_witness(&st.witness, &st.action, budget)
                .map_err(|e| Error::precondition(format!("stage {i} witness: {e}"), None))?;
        }
        run.check_witnesses(budget)
    }
}

/// Ordered pairs `(x, y)`, `x ≠ y < n`, in diagonal order: by `x + y`, then `x`.
pub fn diagonal_pairs(n: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for sum in 1..(2 * n).saturating_sub(2) + 1 {
        for x in 0..=sum {
            let y = sum - x;
            if x < n && y < n && x != y {
                out.push((x, y));
            }
        }
    }
    out
}
