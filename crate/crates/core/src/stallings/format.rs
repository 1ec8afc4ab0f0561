use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{free_letter_name, Letter};

use super::{CosetTable, SubgroupGraph};

/// Serialized form of a subgroup graph: edges grouped by generator name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub rank: u32,
    pub vertices: usize,
    pub base: usize,
    pub edges: BTreeMap<String, Vec<[usize; 2]>>,
}

fn generator_index(name: &str, rank: u32) -> Result<u32> {
    (1..=rank)
        .find(|&g| free_letter_name(Letter::gen(g)) == name)
        .ok_or_else(|| Error::Parse(format!("unknown generator {name:?}")))
}

impl From<&SubgroupGraph> for GraphJson {
    fn from(g: &SubgroupGraph) -> Self {
        let mut edges: BTreeMap<String, Vec<[usize; 2]>> = BTreeMap::new();
        for i in 1..=g.rank() {
            edges.insert(free_letter_name(Letter::gen(i)), Vec::new());
        }
        for (u, i, v) in g.edges() {
            edges.get_mut(&free_letter_name(Letter::gen(i))).expect("named").push([u, v]);
        }
        GraphJson {
            rank: g.rank(),
            vertices: g.vertex_count(),
            base: g.base(),
            edges,
        }
    }
}

impl From<&CosetTable> for GraphJson {
    fn from(t: &CosetTable) -> Self {
        GraphJson::from(&t.to_graph())
    }
}

impl From<SubgroupGraph> for GraphJson {
    fn from(g: SubgroupGraph) -> Self {
        GraphJson::from(&g)
    }
}

impl From<CosetTable> for GraphJson {
    fn from(t: CosetTable) -> Self {
        GraphJson::from(&t)
    }
}

impl TryFrom<GraphJson> for SubgroupGraph {
    type Error = Error;
    fn try_from(j: GraphJson) -> Result<Self> {
        j.to_graph()
    }
}

impl TryFrom<GraphJson> for CosetTable {
    type Error = Error;
    fn try_from(j: GraphJson) -> Result<Self> {
        j.to_table()
    }
}

impl GraphJson {
    /// Rebuilds the graph, folding if the listed edges are not folded.
    pub fn to_graph(&self) -> Result<SubgroupGraph> {
        if self.base != 0 {
            return Err(Error::Parse("base vertex must be 0".into()));
        }
        let mut edges = Vec::new();
        for (name, list) in &self.edges {
            let g = generator_index(name, self.rank)?;
            edges.extend(list.iter().map(|&[u, v]| (u, g, v)));
        }
        SubgroupGraph::from_edges(self.rank, self.vertices, &edges)
    }

    /// Reads a complete table keeping the state numbering as given.
    pub fn to_table(&self) -> Result<CosetTable> {
        if self.base != 0 {
            return Err(Error::Parse("base state must be 0".into()));
        }
        let mut perm = vec![vec![None; self.vertices]; self.rank as usize];
        for (name, list) in &self.edges {
            let g = generator_index(name, self.rank)?;
            for &[u, v] in list {
                let slot = perm[g as usize - 1]
                    .get_mut(u)
                    .ok_or_else(|| Error::Parse(format!("state {u} out of range")))?;
                if slot.replace(v).is_some() {
                    return Err(Error::Parse(format!("state {u} has two {name}-edges")));
                }
            }
        }
        let perm = perm
            .into_iter()
            .map(|row| row.into_iter().collect::<Option<Vec<usize>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Parse("coset table is not complete".into()))?;
        CosetTable::new(self.rank, perm)
    }
}

/// Graphviz rendering; the base vertex is double-circled.
pub fn graph_to_dot(g: &SubgroupGraph) -> String {
    let mut s = String::from("digraph subgroup {\n  rankdir=LR;\n  node [shape=circle];\n");
    for v in 0..g.vertex_count() {
        let shape = if v == g.base() { "doublecircle" } else { "circle" };
        let _ = writeln!(s, "  {v} [shape={shape}];");
    }
    for (u, i, v) in g.edges() {
        let _ = writeln!(s, "  {u} -> {v} [label=\"{}\"];", free_letter_name(Letter::gen(i)));
    }
    s.push_str("}\n");
    s
}

pub fn table_to_dot(t: &CosetTable) -> String {
    graph_to_dot(&t.to_graph())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stallings::{graph_from_generators, hall_complete};
    use crate::group::FreeWord;

    #[test]
    fn json_round_trip() {
        let gens = vec![
            FreeWord::reduce([Letter::gen(1), Letter::gen(1)]),
            FreeWord::reduce([Letter::gen(2), Letter::gen(1), Letter::gen(2).inverse()]),
        ];
        let h = graph_from_generators(2, &gens).unwrap();
        let j = GraphJson::from(&h);
        let text = serde_json::to_string(&j).unwrap();
        let back: GraphJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_graph().unwrap(), h);
        let t = hall_complete(&h);
        assert_eq!(GraphJson::from(&t).to_table().unwrap(), t);
    }

    #[test]
    fn dot_marks_base() {
        let h = graph_from_generators(2, &[FreeWord::reduce([Letter::gen(1), Letter::gen(1)])]).unwrap();
        let dot = graph_to_dot(&h);
        assert!(dot.contains("0 [shape=doublecircle]"));
        assert!(dot.contains("0 -> 1 [label=\"a\"]"));
    }
}
