use itertools::Itertools;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest degree accepted; `7!² ≈ 2.5·10⁷` pairs.
const MAX_DEGREE: usize = 7;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeCount {
    pub degree: usize,
    /// Pairs `(π_s, π_t)` in `S_d` with `π_t⁻¹ π_s π_t = π_sⁿ`.
    pub homomorphisms: u64,
    /// Homomorphisms with `π_s ∉ ⟨π_sⁿ⟩`.
    pub counterexamples: u64,
    /// Homomorphisms whose `π_s` has order prime to `n`.
    pub coprime_order: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BsWitnessReport {
    pub n: u32,
    pub d_max: usize,
    pub degrees: Vec<DegreeCount>,
    pub homomorphisms: u64,
    /// First few counterexamples as image lists of `π_s` and `π_t`.
    pub counterexamples: Vec<(Vec<usize>, Vec<usize>)>,
}

fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&i| p[i]).collect()
}

fn power(p: &[usize], k: u32) -> Vec<usize> {
    let mut out: Vec<usize> = (0..p.len()).collect();
    for _ in 0..k {
        out = compose(p, &out);
    }
    out
}

fn order(p: &[usize]) -> u64 {
    let mut seen = vec![false; p.len()];
    let mut l = 1u64;
    for i in 0..p.len() {
        let mut len = 0u64;
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len > 0 {
            l = l.lcm(&len);
        }
    }
    l
}

fn in_cyclic(target: &[usize], gen: &[usize]) -> bool {
    let id: Vec<usize> = (0..gen.len()).collect();
    let mut p = id.clone();
    loop {
        if p == target {
            return true;
        }
        p = compose(gen, &p);
        if p == id {
            return false;
        }
    }
}

/// Checks every homomorphism `BS(1,n) → S_d`, `1 ≤ d ≤ d_max`, for an image
/// of `s` outside the cyclic group generated by the image of `sⁿ`.
///
/// Finite quotients cannot tell `s` from `t⁻¹⟨s⟩t = ⟨sⁿ⟩`, so the count of
/// counterexamples is always zero.
pub fn bs_nonseparability_witness(n: u32, d_max: usize) -> Result<BsWitnessReport> {
    if n < 2 {
        return Err(Error::domain("n must be at least 2"));
    }
    if d_max == 0 || d_max > MAX_DEGREE {
        return Err(Error::domain(format!("degree bound must lie in 1..={MAX_DEGREE}")));
    }
    let mut report = BsWitnessReport {
        n,
        d_max,
        degrees: Vec::new(),
        homomorphisms: 0,
        counterexamples: Vec::new(),
    };
    for d in 1..=d_max {
        let perms: Vec<Vec<usize>> = (0..d).permutations(d).collect();
        let mut count = DegreeCount {
            degree: d,
            homomorphisms: 0,
            counterexamples: 0,
            coprime_order: 0,
        };
        for ps in &perms {
            let sn = power(ps, n);
            // π_t⁻¹ π_s π_t = π_sⁿ  ⟺  π_s π_t = π_t π_sⁿ
            let hits = perms
                .iter()
                .filter(|pt| compose(ps, pt) == compose(pt, &sn))
                .collect::<Vec<_>>();
            if hits.is_empty() {
                continue;
            }
            let k = hits.len() as u64;
            count.homomorphisms += k;
            if order(ps).gcd(&u64::from(n)) == 1 {
                count.coprime_order += k;
            }
            if !in_cyclic(ps, &sn) {
                count.counterexamples += k;
                for pt in hits.into_iter().take(4usize.saturating_sub(report.counterexamples.len())) {
                    report.counterexamples.push((ps.clone(), pt.clone()));
                }
            }
        }
        report.homomorphisms += count.homomorphisms;
        report.degrees.push(count);
    }
    Ok(report)
}
