//! Randomized self-check suites. Case `i` draws from its own ChaCha stream,
//! so results do not depend on how cases are spread over threads.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use sepkit::actions::{Action, ActionExpr};
use sepkit::amenability::folner_ratios;
use sepkit::error::{Error, Result};
use sepkit::group::{ball, Element, FreeWord, MarkedGroup};
use num_rational::Rational64;
use sepkit::stallings::{graph_from_generators, graph_with_hairs, member, separate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// `separate` on random `(H, g)` in `F_2`.
    Separation,
    /// Følner ratios against set arithmetic on random `(F, Ω)`.
    Folner,
}

#[derive(Serialize)]
struct CaseResult {
    index: usize,
    ok: bool,
    detail: String,
}

pub fn rng_for(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn separation_case(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    // H = F_2 has nothing to separate; redraw it
    let (gens, h) = loop {
        let gens: Vec<FreeWord> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let len = rng.gen_range(1..=5);
                FreeWord::random(rng, 2, len)
            })
            .collect();
        let h = graph_from_generators(2, &gens)?;
        if !(h.is_complete() && h.vertex_count() == 1) {
            break (gens, h);
        }
    };
    let g = loop {
        let len = rng.gen_range(1..=8);
        let g = FreeWord::random(rng, 2, len);
        if !member(&g, &h) {
            break g;
        }
    };
    let k = separate(&h, &g)?;
    let haired = graph_with_hairs(&h, std::slice::from_ref(&g))?;
    let ok = gens.iter().all(|w| k.contains(w)) && !k.contains(&g) && k.degree() == haired.vertex_count();
    Ok((ok, format!("H = <{}>, g = {g}, degree {}", join(&gens), k.degree())))
}

fn join(ws: &[FreeWord]) -> String {
    ws.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(", ")
}

fn folner_case(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let g = MarkedGroup::free(2);
    let act = Action::new(g.clone(), ActionExpr::IntegerShift { steps: vec![1, 3] })?;
    let words = ball(&g, 2)?;
    let f: BTreeSet<u64> = (0..rng.gen_range(1..30)).map(|_| rng.gen_range(0..60)).collect();
    let f: Vec<u64> = f.into_iter().collect();
    let omega: BTreeSet<Element> = (0..3).map(|_| words[rng.gen_range(0..words.len())].clone()).collect();
    let omega: Vec<Element> = omega.into_iter().collect();
    let got = folner_ratios(&act, &f, &omega)?;
    let set: BTreeSet<u64> = f.iter().copied().collect();
    let mut ok = true;
    for (w, r) in omega.iter().zip(&got) {
        let image: BTreeSet<u64> = f.iter().map(|&p| act.evaluate(w, p)).collect::<Result<_>>()?;
        let sym = image.symmetric_difference(&set).count() as i64;
        ok &= *r == Rational64::new(sym, f.len() as i64);
    }
    Ok((ok, format!("|F| = {}, |Ω| = {}", f.len(), omega.len())))
}

pub fn run(suite: Suite, cases: usize, seed: u64, jobs: usize) -> Result<Value> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Unsupported(e.to_string()))?;
    let results: Vec<Result<CaseResult>> = pool.install(|| {
        (0..cases)
            .into_par_iter()
            .map(|index| {
                let mut rng = rng_for(seed, index);
                let (ok, detail) = match suite {
                    Suite::Separation => separation_case(&mut rng)?,
                    Suite::Folner => folner_case(&mut rng)?,
                };
                Ok(CaseResult { index, ok, detail })
            })
            .collect()
    });
    let results: Vec<CaseResult> = results.into_iter().collect::<Result<_>>()?;
    let failures: Vec<&CaseResult> = results.iter().filter(|r| !r.ok).collect();
    let mut summary = BTreeMap::new();
    summary.insert("suite", serde_json::to_value(format!("{suite:?}").to_lowercase()).expect("string"));
    summary.insert("cases", cases.into());
    summary.insert("seed", seed.into());
    summary.insert("failures", failures.len().into());
    summary.insert("failed_cases", serde_json::to_value(&failures).expect("plain data"));
    let value = serde_json::to_value(summary).expect("plain data");
    if failures.is_empty() {
        Ok(value)
    } else {
        Err(Error::precondition(
            format!("{} of {cases} cases failed", failures.len()),
            Some(failures[0].detail.clone()),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_count_does_not_change_results() {
        let one = run(Suite::Separation, 40, 3, 1).unwrap();
        let four = run(Suite::Separation, 40, 3, 4).unwrap();
        assert_eq!(one, four);
        assert_eq!(one["failures"], 0);
        run(Suite::Folner, 20, 3, 2).unwrap();
    }
}
