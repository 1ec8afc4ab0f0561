use std::collections::{BTreeMap, VecDeque};

use crate::group::Letter;

/// Incremental Stallings folding over a union-find of vertices.
///
/// Every vertex keeps one outgoing edge per signed label; adding an edge that
/// collides with an existing one queues the two targets for identification,
/// and identifications cascade until the graph is folded again.
#[derive(Debug, Clone, Default)]
pub(crate) struct Folder {
    parent: Vec<usize>,
    adj: Vec<BTreeMap<Letter, usize>>,
    pending: Vec<(usize, usize)>,
}

impl Folder {
    pub fn new() -> Self {
        Folder::default()
    }

    pub fn add_vertex(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.adj.push(BTreeMap::new());
        self.parent.len() - 1
    }

    pub fn find(&mut self, v: usize) -> usize {
        let mut root = v;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = v;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub fn add_edge(&mut self, u: usize, label: Letter, v: usize) {
        let (u, v) = (self.find(u), self.find(v));
        self.attach(u, label, v);
        self.attach(v, label.inverse(), u);
        self.drain();
    }

    /// Adds the path spelling `word` from `from` and returns its endpoint.
    /// The last edge closes onto `to` when given.
    pub fn add_path(&mut self, from: usize, word: &[Letter], to: Option<usize>) -> usize {
        let mut cur = from;
        for (i, &l) in word.iter().enumerate() {
            let next = match to {
                Some(end) if i + 1 == word.len() => end,
                _ => self.add_vertex(),
            };
            self.add_edge(cur, l, next);
            cur = self.find(next);
        }
        self.find(cur)
    }

    fn attach(&mut self, u: usize, label: Letter, v: usize) {
        match self.adj[u].get(&label).copied() {
            Some(w) => {
                let w = self.find(w);
                if w != v {
                    self.pending.push((w, v));
                }
            }
            None => {
                self.adj[u].insert(label, v);
            }
        }
    }

    fn drain(&mut self) {
        while let Some((a, b)) = self.pending.pop() {
            let (a, b) = (self.find(a), self.find(b));
            if a == b {
                continue;
            }
            let (keep, gone) = (a.min(b), a.max(b));
            self.parent[gone] = keep;
            let moved = std::mem::take(&mut self.adj[gone]);
            for (label, t) in moved {
                let t = self.find(t);
                self.attach(keep, label, t);
            }
        }
    }

    /// Folded edges reachable from `base`, renumbered in breadth-first
    /// discovery order (labels visited `a, A, b, B, …`). Returns the vertex
    /// count and the positive edges `(u, generator, v)`.
    pub fn finish(&mut self, base: usize) -> (usize, Vec<(usize, u32, usize)>) {
        let root = self.find(base);
        let mut number: BTreeMap<usize, usize> = BTreeMap::new();
        let mut order = vec![root];
        number.insert(root, 0);
        let mut queue = VecDeque::from([root]);
        let mut edges = Vec::new();
        while let Some(u) = queue.pop_front() {
            let out: Vec<(Letter, usize)> = self.adj[u].iter().map(|(&l, &t)| (l, t)).collect();
            for (l, t) in out {
                let t = self.find(t);
                if !number.contains_key(&t) {
                    number.insert(t, order.len());
                    order.push(t);
                    queue.push_back(t);
                }
                if !l.is_inverse() {
                    edges.push((number[&u], l.index(), number[&t]));
                }
            }
        }
        (order.len(), edges)
    }
}
