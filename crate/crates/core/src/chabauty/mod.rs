//! Finite windows into the space of subgroups.
//!
//! A point of the space is a [`SubgroupHandle`] with decidable membership; a
//! basic open set is a [`ChabautyBall`] `{K : K∩Ω = H∩Ω}`.

mod json;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub use json::{BallJson, HandleJson};

use crate::error::{Error, Result};
use crate::group::{Element, FreeWord, Letter, MarkedGroup};
use crate::stallings::{self, CosetTable, SubgroupGraph};

type MembershipFn = dyn Fn(&Element) -> bool + Send + Sync;

/// A subgroup given by an arbitrary membership test, e.g. one of infinite rank.
#[derive(Clone)]
pub struct Predicate {
    pub group: MarkedGroup,
    pub name: String,
    test: Arc<MembershipFn>,
}

impl Predicate {
    pub fn new(
        group: MarkedGroup,
        name: impl Into<String>,
        test: impl Fn(&Element) -> bool + Send + Sync + 'static,
    ) -> Self {
        Predicate {
            group,
            name: name.into(),
            test: Arc::new(test),
        }
    }
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Predicate({} in {})", self.name, self.group.describe())
    }
}

/// A subgroup with decidable membership.
#[derive(Clone, Debug)]
pub enum SubgroupHandle {
    Graph(SubgroupGraph),
    /// The stabilizer of state 0.
    Table(CosetTable),
    /// `⟨gens⟩`; decidable in free groups, and in `BS(1,n)` when every
    /// generator is a translation.
    WordList { group: MarkedGroup, gens: Vec<Element> },
    /// Translations of `BS(1,n)` by integer multiples of `step`; `step = 0`
    /// is the trivial subgroup. `⟨s^k⟩` has step `k`.
    BsCyclic { n: u32, step: BigRational },
    Predicate(Predicate),
}

/// Translation amount of a `BS(1,n)` element, if it is a translation.
fn bs_translation(e: &Element) -> Option<BigRational> {
    let f = e.as_bs()?.affine();
    (f.exp == 0).then_some(f.shift)
}

/// Nonnegative generator of the additive subgroup of `ℚ` spanned by `xs`.
fn rational_gcd<'a>(xs: impl IntoIterator<Item = &'a BigRational>) -> BigRational {
    let xs: Vec<&BigRational> = xs.into_iter().collect();
    let den = xs.iter().fold(BigInt::from(1), |l, x| l.lcm(x.denom()));
    let num = xs.iter().fold(BigInt::zero(), |g, x| {
        g.gcd(&(x.numer() * (&den / x.denom())))
    });
    BigRational::new(num, den)
}

fn is_multiple(x: &BigRational, step: &BigRational) -> bool {
    if step.is_zero() {
        x.is_zero()
    } else {
        (x / step).is_integer()
    }
}

fn free_words(group: &MarkedGroup, elems: &[Element]) -> Result<Vec<FreeWord>> {
    elems
        .iter()
        .map(|e| {
            if !group.owns(e) {
                return Err(Error::domain(format!("{e:?} is not in {}", group.describe())));
            }
            e.as_free()
                .cloned()
                .ok_or_else(|| Error::domain("expected a free group element"))
        })
        .collect()
}

impl SubgroupHandle {
    pub fn ambient(&self) -> MarkedGroup {
        match self {
            SubgroupHandle::Graph(g) => g.ambient(),
            SubgroupHandle::Table(t) => t.ambient(),
            SubgroupHandle::WordList { group, .. } => group.clone(),
            SubgroupHandle::BsCyclic { n, .. } => MarkedGroup::bs(*n),
            SubgroupHandle::Predicate(p) => p.group.clone(),
        }
    }

    /// `⟨s^k⟩ ≤ BS(1,n)`.
    pub fn bs_power_of_s(n: u32, k: i64) -> Self {
        SubgroupHandle::BsCyclic {
            n,
            step: BigRational::from_integer(BigInt::from(k).abs()),
        }
    }

    pub fn contains(&self, g: &Element) -> Result<bool> {
        let group = self.ambient();
        if !group.owns(g) {
            return Err(Error::domain(format!(
                "{g:?} is not an element of {}",
                group.describe()
            )));
        }
        match self {
            SubgroupHandle::Graph(h) => Ok(stallings::member(g.as_free().expect("owned"), h)),
            SubgroupHandle::Table(t) => Ok(t.contains(g.as_free().expect("owned"))),
            SubgroupHandle::BsCyclic { step, .. } => {
                Ok(bs_translation(g).is_some_and(|x| is_multiple(&x, step)))
            }
            SubgroupHandle::Predicate(p) => Ok((p.test)(g)),
            SubgroupHandle::WordList { group, gens } => match group {
                MarkedGroup::Free { .. } | MarkedGroup::FreeInfinite => {
                    let words = free_words(group, gens)?;
                    let w = g.as_free().expect("owned");
                    let rank = words.iter().map(FreeWord::max_index).max().unwrap_or(0).max(1);
                    if w.max_index() > rank {
                        return Ok(false);
                    }
                    let h = stallings::graph_from_generators(rank, &words)?;
                    Ok(stallings::member(w, &h))
                }
                MarkedGroup::BaumslagSolitar { .. } => {
                    let steps: Option<Vec<BigRational>> = gens.iter().map(bs_translation).collect();
                    match steps {
                        Some(steps) => {
                            let step = rational_gcd(&steps);
                            Ok(bs_translation(g).is_some_and(|x| is_multiple(&x, &step)))
                        }
                        None => Err(Error::Unsupported(
                            "membership in a BS(1,n) subgroup with non-translation generators"
                                .into(),
                        )),
                    }
                }
                MarkedGroup::FreeProduct { .. } => Err(Error::Unsupported(
                    "membership in finitely generated subgroups of free products".into(),
                )),
            },
        }
    }

    /// `H ∩ Ω` in the order of `Ω`.
    pub fn intersect_window(&self, window: &[Element]) -> Result<Vec<Element>> {
        let mut out = Vec::new();
        for g in window {
            if self.contains(g)? {
                out.push(g.clone());
            }
        }
        Ok(out)
    }
}

/// The basic open set `W(center, window) = {K : K∩Ω = center∩Ω}`.
#[derive(Clone, Debug)]
pub struct ChabautyBall {
    pub center: SubgroupHandle,
    pub window: Vec<Element>,
}

impl ChabautyBall {
    pub fn new(center: SubgroupHandle, window: Vec<Element>) -> Self {
        ChabautyBall { center, window }
    }

    /// Window elements on which `k` and the center disagree.
    pub fn disagreements(&self, k: &SubgroupHandle) -> Result<Vec<Element>> {
        if k.ambient() != self.center.ambient() {
            return Err(Error::domain("subgroups of different groups"));
        }
        let mut out = Vec::new();
        for g in &self.window {
            if k.contains(g)? != self.center.contains(g)? {
                out.push(g.clone());
            }
        }
        Ok(out)
    }
}

pub fn in_ball(k: &SubgroupHandle, ball: &ChabautyBall) -> Result<bool> {
    Ok(ball.disagreements(k)?.is_empty())
}

/// Sorted, deduplicated copy of a window.
pub fn canonical_window(window: &[Element]) -> Vec<Element> {
    let set: BTreeSet<Element> = window.iter().cloned().collect();
    set.into_iter().collect()
}

/// `{1} ∪ Ω ∪ SΩ` closed under inverses, in canonical order.
pub fn symmetric_window(group: &MarkedGroup, omega: &[Element], s: &[Element]) -> Result<Vec<Element>> {
    let mut set = BTreeSet::from([group.identity()]);
    for w in omega {
        set.insert(w.clone());
        for x in s {
            set.insert(group.multiply(x, w)?);
        }
    }
    let inverses: Vec<Element> = set.iter().map(|e| group.invert(e)).collect::<Result<_>>()?;
    set.extend(inverses);
    Ok(set.into_iter().collect())
}

/// All products `uv` with `u ∈ left`, `v ∈ right`, in canonical order.
pub fn window_product(group: &MarkedGroup, left: &[Element], right: &[Element]) -> Result<Vec<Element>> {
    let mut set = BTreeSet::new();
    for u in left {
        for v in right {
            set.insert(group.multiply(u, v)?);
        }
    }
    Ok(set.into_iter().collect())
}

/// `⟨L∩Ω⟩`, which lies in `W(L,Ω)` because `L∩Ω ⊆ ⟨L∩Ω⟩ ≤ L`.
///
/// Translation-only generating sets in `BS(1,n)` come back as
/// [`SubgroupHandle::BsCyclic`].
pub fn fg_approximation(l: &SubgroupHandle, omega: &[Element]) -> Result<SubgroupHandle> {
    let group = l.ambient();
    let gens: Vec<Element> = l
        .intersect_window(&canonical_window(omega))?
        .into_iter()
        .filter(|g| !g.is_identity())
        .collect();
    if let MarkedGroup::BaumslagSolitar { n } = group {
        let steps: Option<Vec<BigRational>> = gens.iter().map(bs_translation).collect();
        if let Some(steps) = steps {
            return Ok(SubgroupHandle::BsCyclic {
                n,
                step: rational_gcd(&steps),
            });
        }
    }
    Ok(SubgroupHandle::WordList { group, gens })
}

/// Diagonal action on reachable pairs; the stabilizer of `(0,0)` is the
/// intersection of the two stabilizers.
pub fn intersect_tables(t1: &CosetTable, t2: &CosetTable) -> Result<CosetTable> {
    if t1.rank() != t2.rank() {
        return Err(Error::domain("coset tables over different free groups"));
    }
    let rank = t1.rank();
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::from([((0, 0), 0)]);
    let mut states = vec![(0usize, 0usize)];
    let mut perm = vec![Vec::new(); rank as usize];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (u, v) = states[i];
        for g in 1..=rank {
            let l = Letter::gen(g);
            let pair = (t1.step(u, l), t2.step(v, l));
            let j = *index.entry(pair).or_insert_with(|| {
                states.push(pair);
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            let row = &mut perm[g as usize - 1];
            if row.len() <= i {
                row.resize(i + 1, usize::MAX);
            }
            row[i] = j;
        }
    }
    let d = states.len();
    for row in &mut perm {
        row.resize(d, usize::MAX);
    }
    CosetTable::new(rank, perm)
}

/// A finite-index `K ≥ L` with `K∩Ω = L∩Ω`: the intersection of one
/// separating table per window element outside `L`.
///
/// Window elements are visited in shortlex order; an element already excluded
/// by the running intersection contributes no further factor.
pub fn approx_by_finite_index(l: &SubgroupGraph, omega: &[Element]) -> Result<CosetTable> {
    let group = l.ambient();
    let window = canonical_window(omega);
    let words = free_words(&group, &window)?;
    let mut k = stallings::hall_complete(l);
    for g in &words {
        if stallings::member(g, l) || !k.contains(g) {
            continue;
        }
        k = intersect_tables(&k, &stallings::separate(l, g)?)?;
    }
    Ok(k.canonical())
}

/// A finite-index `K ≥ L` with `K∩Ω = L∩Ω` from a single completion: the
/// Stallings graph of `L` with one hair per window element outside `L`.
///
/// The hairs fold into a tree hanging off the core, so no hair returns to the
/// base. The index is at most the size of that folded graph, usually far
/// below the product of separation degrees.
pub fn approx_by_joint_separation(l: &SubgroupGraph, omega: &[Element]) -> Result<CosetTable> {
    let group = l.ambient();
    let window = canonical_window(omega);
    let outside: Vec<FreeWord> = free_words(&group, &window)?
        .into_iter()
        .filter(|g| !stallings::member(g, l))
        .collect();
    Ok(stallings::separate_many(l, &outside)?.canonical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::ball;
    use crate::stallings::graph_from_generators;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f2() -> MarkedGroup {
        MarkedGroup::free(2)
    }

    fn graph(list: &str) -> SubgroupGraph {
        let words = free_words(&f2(), &f2().parse_list(list).unwrap()).unwrap();
        graph_from_generators(2, &words).unwrap()
    }

    fn random_graph(rng: &mut ChaCha8Rng) -> SubgroupGraph {
        let gens: Vec<FreeWord> = (0..rng.gen_range(0..=3))
            .map(|_| {
                let len = rng.gen_range(1..=5);
                FreeWord::reduce((0..len).map(|_| Letter::new(rng.gen_range(1..=2), rng.gen_bool(0.5))))
            })
            .collect();
        graph_from_generators(2, &gens).unwrap()
    }

    /// `⟨bⁱ a b⁻ⁱ : i ≥ 0⟩`: total `b`-exponent 0 and every `a`-letter read at
    /// nonnegative `b`-height.
    fn positive_conjugates() -> SubgroupHandle {
        SubgroupHandle::Predicate(Predicate::new(f2(), "<b^i a b^-i>", |e| {
            let mut height = 0i64;
            for l in e.as_free().unwrap().letters() {
                if l.index() == 2 {
                    height += if l.is_inverse() { -1 } else { 1 };
                } else if height < 0 {
                    return false;
                }
            }
            height == 0
        }))
    }

    #[test]
    fn ball_membership_basics() {
        let h = SubgroupHandle::Graph(graph("a"));
        let b1 = ChabautyBall::new(h.clone(), ball(&f2(), 1).unwrap());
        assert!(in_ball(&h, &b1).unwrap());
        assert!(in_ball(&SubgroupHandle::Graph(graph("a, b a B")), &b1).unwrap());
        let empty = ChabautyBall::new(h.clone(), vec![]);
        assert!(in_ball(&SubgroupHandle::Graph(graph("b")), &empty).unwrap());
        let b3 = ChabautyBall::new(h, ball(&f2(), 3).unwrap());
        assert!(!in_ball(&SubgroupHandle::Graph(graph("a, b a B")), &b3).unwrap());
    }

    #[test]
    fn ball_symmetry_and_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let w2 = ball(&f2(), 2).unwrap();
        let w1 = ball(&f2(), 1).unwrap();
        for _ in 0..100 {
            let h = SubgroupHandle::Graph(random_graph(&mut rng));
            let k = SubgroupHandle::Table(stallings::hall_complete(&random_graph(&mut rng)));
            let there = in_ball(&k, &ChabautyBall::new(h.clone(), w2.clone())).unwrap();
            let back = in_ball(&h, &ChabautyBall::new(k.clone(), w2.clone())).unwrap();
            assert_eq!(there, back);
            if there {
                assert!(in_ball(&k, &ChabautyBall::new(h, w1.clone())).unwrap());
            }
        }
    }

    #[test]
    fn fg_approximation_of_infinite_rank_subgroup() {
        let l = positive_conjugates();
        let omega = ball(&f2(), 3).unwrap();
        let approx = fg_approximation(&l, &omega).unwrap();
        let SubgroupHandle::WordList { gens, .. } = &approx else { panic!() };
        let text: Vec<String> = gens.iter().map(|g| f2().format(g)).collect();
        assert!(text.contains(&"a".to_string()) && text.contains(&"b a B".to_string()));
        assert!(in_ball(&approx, &ChabautyBall::new(l, omega)).unwrap());
        let cyc = SubgroupHandle::Graph(graph("a"));
        let b = vec![f2().parse("b").unwrap()];
        let approx = fg_approximation(&cyc, &b).unwrap();
        assert!(!approx.contains(&f2().parse("a").unwrap()).unwrap());
        assert!(in_ball(&approx, &ChabautyBall::new(cyc, b)).unwrap());
    }

    #[test]
    fn bs_cyclic_handles() {
        let g = MarkedGroup::bs(2);
        let s = SubgroupHandle::bs_power_of_s(2, 1);
        let s2 = SubgroupHandle::bs_power_of_s(2, 2);
        let tst = g.parse("T s t").unwrap();
        let sq = g.parse("s s").unwrap();
        assert_eq!(tst, sq);
        let one = g.parse("s").unwrap();
        assert!(s.contains(&one).unwrap() && !s2.contains(&one).unwrap());
        assert!(!s.contains(&g.parse("t").unwrap()).unwrap());
        let approx = fg_approximation(&s2, &ball(&g, 3).unwrap()).unwrap();
        let SubgroupHandle::BsCyclic { step, .. } = &approx else { panic!() };
        assert_eq!(*step, BigRational::from_integer(2.into()));
    }

    #[test]
    fn intersection_is_conjunction() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let words = ball(&f2(), 5).unwrap();
        for _ in 0..20 {
            let t1 = stallings::hall_complete(&random_graph(&mut rng));
            let t2 = stallings::hall_complete(&random_graph(&mut rng));
            let t = intersect_tables(&t1, &t2).unwrap();
            assert!(t.degree() <= t1.degree() * t2.degree());
            for e in &words {
                let w = e.as_free().unwrap();
                assert_eq!(t.contains(w), t1.contains(w) && t2.contains(w));
            }
        }
        let t = stallings::hall_complete(&graph("aa, b"));
        assert_eq!(intersect_tables(&t, &t).unwrap(), t);
        assert_eq!(intersect_tables(&t, &CosetTable::whole(2)).unwrap(), t);
    }

    #[test]
    fn approximation_examples() {
        let l = graph("aa, b");
        let omega = ball(&f2(), 1).unwrap();
        let k = approx_by_finite_index(&l, &omega).unwrap();
        let ball_l = ChabautyBall::new(SubgroupHandle::Graph(l), omega);
        assert!(in_ball(&SubgroupHandle::Table(k.clone()), &ball_l).unwrap());
        assert_eq!(k.degree(), 2);
        let trivial = SubgroupGraph::trivial(2);
        let omega = ball(&f2(), 2).unwrap();
        let k = approx_by_finite_index(&trivial, &omega).unwrap();
        for e in &omega {
            assert_eq!(k.contains(e.as_free().unwrap()), e.is_identity());
        }
    }

    #[test]
    fn approximation_postconditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for radius in 0..=2 {
            let omega = ball(&f2(), radius).unwrap();
            for _ in 0..40 {
                let l = random_graph(&mut rng);
                let k = approx_by_finite_index(&l, &omega).unwrap();
                let joint = approx_by_joint_separation(&l, &omega).unwrap();
                for g in l.free_basis() {
                    assert!(k.contains(&g));
                    assert!(joint.contains(&g));
                }
                let b = ChabautyBall::new(SubgroupHandle::Graph(l), omega.clone());
                assert!(b.disagreements(&SubgroupHandle::Table(k)).unwrap().is_empty());
                assert!(b.disagreements(&SubgroupHandle::Table(joint)).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn window_helpers() {
        let g = f2();
        let omega = g.parse_list("a").unwrap();
        let s = g.parse_list("b").unwrap();
        let w = symmetric_window(&g, &omega, &s).unwrap();
        let names: Vec<String> = w.iter().map(|e| g.format(e)).collect();
        assert_eq!(names, ["1", "a", "A", "A B", "b a"]);
        let p = window_product(&g, &w, &w).unwrap();
        for u in &w {
            assert!(p.contains(u));
        }
    }
}
