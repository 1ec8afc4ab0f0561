use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::group::{FreeWord, Letter, MarkedGroup};

use super::SubgroupGraph;

/// A transitive permutation table: `perm[g][i]` is the state reached from
/// `i` along generator `g + 1` (right action, reading words left to right).
/// State 0 is the subgroup itself; its stabilizer is a subgroup of index
/// `degree`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "super::GraphJson", into = "super::GraphJson")]
pub struct CosetTable {
    rank: u32,
    perm: Vec<Vec<usize>>,
    inv: Vec<Vec<usize>>,
}

impl CosetTable {
    /// Validates bijectivity and transitivity from state 0.
    pub fn new(rank: u32, perm: Vec<Vec<usize>>) -> Result<Self> {
        if perm.len() != rank as usize {
            return Err(Error::domain(format!(
                "table has {} generator rows, expected {rank}",
                perm.len()
            )));
        }
        let degree = perm.first().map_or(1, Vec::len);
        if degree == 0 {
            return Err(Error::domain("a coset table needs at least one state"));
        }
        let mut inv = Vec::with_capacity(perm.len());
        for (g, row) in perm.iter().enumerate() {
            if row.len() != degree {
                return Err(Error::domain(format!("row {} has the wrong length", g + 1)));
            }
            let mut back = vec![usize::MAX; degree];
            for (i, &j) in row.iter().enumerate() {
                if j >= degree || back[j] != usize::MAX {
                    return Err(Error::domain(format!(
                        "generator {} does not act bijectively",
                        g + 1
                    )));
                }
                back[j] = i;
            }
            inv.push(back);
        }
        let table = CosetTable { rank, perm, inv };
        if table.reachable_from_base() != degree {
            return Err(Error::domain("coset table is not transitive from state 0"));
        }
        Ok(table)
    }

    /// Index-one table: the whole group.
    pub fn whole(rank: u32) -> Self {
        CosetTable {
            rank,
            perm: vec![vec![0]; rank as usize],
            inv: vec![vec![0]; rank as usize],
        }
    }

    fn reachable_from_base(&self) -> usize {
        let degree = self.degree();
        let mut seen = vec![false; degree];
        seen[0] = true;
        let mut count = 1;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for row in self.perm.iter().chain(&self.inv) {
                let v = row[u];
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn ambient(&self) -> MarkedGroup {
        MarkedGroup::free(self.rank)
    }

    pub fn degree(&self) -> usize {
        self.perm.first().map_or(1, Vec::len)
    }

    pub fn step(&self, state: usize, l: Letter) -> usize {
        let g = l.index() as usize - 1;
        if l.is_inverse() {
            self.inv[g][state]
        } else {
            self.perm[g][state]
        }
    }

    /// State reached from `state` reading `w` left to right.
    pub fn walk(&self, state: usize, w: &FreeWord) -> usize {
        w.letters().iter().fold(state, |s, &l| self.step(s, l))
    }

    /// Whether `w` lies in the stabilizer of state 0.
    pub fn contains(&self, w: &FreeWord) -> bool {
        w.max_index() <= self.rank && self.walk(0, w) == 0
    }

    /// The state representing the left coset `gK`, i.e. `0 · g⁻¹`.
    pub fn coset_of(&self, g: &FreeWord) -> usize {
        self.walk(0, &g.inverse())
    }

    /// The left action of `g` on cosets: `hK ↦ ghK`, i.e. `i ↦ i · g⁻¹`.
    pub fn left_act(&self, g: &FreeWord, state: usize) -> usize {
        self.walk(state, &g.inverse())
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.perm
    }

    /// The table as a complete folded graph (same numbering).
    pub fn to_graph(&self) -> SubgroupGraph {
        let mut edges = Vec::new();
        for (g, row) in self.perm.iter().enumerate() {
            for (i, &j) in row.iter().enumerate() {
                edges.push((i, g as u32 + 1, j));
            }
        }
        SubgroupGraph::assemble(self.rank, self.degree(), &edges)
    }

    pub fn from_graph(graph: &SubgroupGraph) -> Result<Self> {
        if !graph.is_complete() {
            return Err(Error::domain("graph is not complete; run hall_complete first"));
        }
        let perm = (1..=graph.rank())
            .map(|g| {
                (0..graph.vertex_count())
                    .map(|v| graph.step(v, Letter::gen(g)).expect("complete"))
                    .collect()
            })
            .collect();
        CosetTable::new(graph.rank(), perm)
    }

    /// Renumbers states in breadth-first order from state 0.
    pub fn canonical(&self) -> CosetTable {
        let mut number: BTreeMap<usize, usize> = BTreeMap::new();
        number.insert(0, 0);
        let mut order = vec![0];
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for g in 1..=self.rank {
                for inverse in [false, true] {
                    let v = self.step(u, Letter::new(g, inverse));
                    if !number.contains_key(&v) {
                        number.insert(v, order.len());
                        order.push(v);
                        queue.push_back(v);
                    }
                }
            }
        }
        let perm = self
            .perm
            .iter()
            .map(|row| order.iter().map(|&old| number[&row[old]]).collect())
            .collect();
        CosetTable::new(self.rank, perm).expect("renumbering preserves validity")
    }
}
