use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::group::{FreeWord, Letter, MarkedGroup};

use super::fold::Folder;

/// A finitely generated subgroup of `F_rank` as a folded based labeled graph.
///
/// Vertex 0 is the base. `out[g][v] = Some(w)` is the edge `v --(g+1)--> w`;
/// `inc` holds the reverse direction. Folded means both are partial
/// injections.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "super::GraphJson", into = "super::GraphJson")]
pub struct SubgroupGraph {
    rank: u32,
    vertices: usize,
    out: Vec<Vec<Option<usize>>>,
    inc: Vec<Vec<Option<usize>>>,
}

impl SubgroupGraph {
    /// Builds a graph from positive edges, folding and renumbering from the base.
    pub fn from_edges(rank: u32, vertices: usize, edges: &[(usize, u32, usize)]) -> Result<Self> {
        let mut folder = Folder::new();
        for _ in 0..vertices.max(1) {
            folder.add_vertex();
        }
        for &(u, g, v) in edges {
            if g == 0 || g > rank || u >= vertices || v >= vertices {
                return Err(Error::domain(format!("edge ({u}, {g}, {v}) out of range")));
            }
            folder.add_edge(u, Letter::gen(g), v);
        }
        let (n, edges) = folder.finish(0);
        Ok(Self::assemble(rank, n, &edges))
    }

    pub(crate) fn assemble(rank: u32, vertices: usize, edges: &[(usize, u32, usize)]) -> Self {
        let mut out = vec![vec![None; vertices]; rank as usize];
        let mut inc = vec![vec![None; vertices]; rank as usize];
        for &(u, g, v) in edges {
            out[g as usize - 1][u] = Some(v);
            inc[g as usize - 1][v] = Some(u);
        }
        SubgroupGraph {
            rank,
            vertices,
            out,
            inc,
        }
    }

    pub fn trivial(rank: u32) -> Self {
        Self::assemble(rank, 1, &[])
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn ambient(&self) -> MarkedGroup {
        MarkedGroup::free(self.rank)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn base(&self) -> usize {
        0
    }

    pub fn step(&self, v: usize, l: Letter) -> Option<usize> {
        let g = l.index() as usize;
        if g == 0 || g > self.rank as usize {
            return None;
        }
        if l.is_inverse() {
            self.inc[g - 1][v]
        } else {
            self.out[g - 1][v]
        }
    }

    /// Endpoint of reading `w` from `v`, if every edge exists.
    pub fn read(&self, v: usize, w: &FreeWord) -> Option<usize> {
        w.letters().iter().try_fold(v, |cur, &l| self.step(cur, l))
    }

    /// Positive edges `(u, generator, v)` in generator-then-source order.
    pub fn edges(&self) -> Vec<(usize, u32, usize)> {
        let mut e = Vec::new();
        for (g, row) in self.out.iter().enumerate() {
            for (u, t) in row.iter().enumerate() {
                if let Some(v) = t {
                    e.push((u, g as u32 + 1, *v));
                }
            }
        }
        e
    }

    pub fn degree(&self, v: usize) -> usize {
        let outs = self.out.iter().filter(|row| row[v].is_some()).count();
        let ins = self.inc.iter().filter(|row| row[v].is_some()).count();
        outs + ins
    }

    /// Whether every vertex has an edge of every signed label.
    pub fn is_complete(&self) -> bool {
        self.out.iter().chain(&self.inc).all(|row| row.iter().all(Option::is_some))
    }

    pub fn is_folded(&self) -> bool {
        // partial injectivity: out and inc mirror each other
        self.out.iter().zip(&self.inc).all(|(o, i)| {
            o.iter()
                .enumerate()
                .all(|(u, t)| t.map_or(true, |v| i[v] == Some(u)))
                && i.iter()
                    .enumerate()
                    .all(|(v, s)| s.map_or(true, |u| o[u] == Some(v)))
        })
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for row in self.out.iter().chain(&self.inc) {
                if let Some(v) = row[u] {
                    if !seen[v] {
                        seen[v] = true;
                        count += 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        count == self.vertices
    }

    /// Whether every non-base vertex has degree at least two.
    pub fn is_core(&self) -> bool {
        (1..self.vertices).all(|v| self.degree(v) >= 2)
    }

    /// Removes hanging trees: repeatedly deletes non-base vertices of degree
    /// at most one. The base is always kept.
    pub fn core(&self) -> SubgroupGraph {
        let mut alive = vec![true; self.vertices];
        let mut deg: Vec<usize> = (0..self.vertices).map(|v| self.degree(v)).collect();
        let mut stack: Vec<usize> = (1..self.vertices).filter(|&v| deg[v] <= 1).collect();
        while let Some(v) = stack.pop() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for row in self.out.iter().chain(&self.inc) {
                if let Some(w) = row[v] {
                    if alive[w] && w != v {
                        deg[w] -= 1;
                        if w != 0 && deg[w] <= 1 {
                            stack.push(w);
                        }
                    }
                }
            }
        }
        let edges: Vec<_> = self
            .edges()
            .into_iter()
            .filter(|&(u, _, v)| alive[u] && alive[v])
            .collect();
        Self::renumbered(self.rank, self.vertices, &edges)
    }

    /// Canonical breadth-first renumbering from the base; unreachable vertices are dropped.
    pub(crate) fn renumbered(rank: u32, vertices: usize, edges: &[(usize, u32, usize)]) -> Self {
        let mut folder = Folder::new();
        for _ in 0..vertices.max(1) {
            folder.add_vertex();
        }
        for &(u, g, v) in edges {
            folder.add_edge(u, Letter::gen(g), v);
        }
        let (n, edges) = folder.finish(0);
        Self::assemble(rank, n, &edges)
    }

    /// Generators of the subgroup read off a spanning tree: one word per
    /// non-tree edge. The result is a free basis.
    pub fn free_basis(&self) -> Vec<FreeWord> {
        // spanning tree by BFS, tree paths from the base
        let mut path: Vec<Option<FreeWord>> = vec![None; self.vertices];
        path[0] = Some(FreeWord::identity());
        let mut tree_edge = vec![vec![false; self.vertices]; self.rank as usize];
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for g in 1..=self.rank {
                for inverse in [false, true] {
                    let l = Letter::new(g, inverse);
                    if let Some(v) = self.step(u, l) {
                        if path[v].is_none() {
                            let p = path[u].as_ref().expect("visited").mul(&FreeWord::letter(l));
                            path[v] = Some(p);
                            let src = if inverse { v } else { u };
                            tree_edge[g as usize - 1][src] = true;
                            queue.push_back(v);
                        }
                    }
                }
            }
        }
        let mut basis = Vec::new();
        for (u, g, v) in self.edges() {
            if !tree_edge[g as usize - 1][u] {
                let pu = path[u].as_ref().expect("connected");
                let pv = path[v].as_ref().expect("connected");
                basis.push(pu.mul(&FreeWord::letter(Letter::gen(g))).mul(&pv.inverse()));
            }
        }
        basis
    }
}
