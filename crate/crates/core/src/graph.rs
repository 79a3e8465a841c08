//! Undirected simple graphs over nodes `0..n`.
//!
//! Storage is a dense adjacency bitmap plus per-node sorted neighbor lists;
//! every traversal in the crate iterates neighbors in ascending order.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    adjacency: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges())
            .finish()
    }
}

/// Diameter of a graph; `Infinite` when it is disconnected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Diameter {
    Finite(usize),
    Infinite,
}

impl Diameter {
    pub fn finite(self) -> Option<usize> {
        match self {
            Diameter::Finite(d) => Some(d),
            Diameter::Infinite => None,
        }
    }
}

impl fmt::Display for Diameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diameter::Finite(d) => write!(f, "{d}"),
            Diameter::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMetrics {
    pub connected: bool,
    pub diameter: Diameter,
    pub max_degree: usize,
    pub edge_count: usize,
}

impl Graph {
    /// Graph on `n` nodes with no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adjacency: vec![false; n * n],
            neighbors: vec![Vec::new(); n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.link(i, j);
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges).expect("path edges are valid")
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n > 2 {
            edges.push((n - 1, 0));
        }
        Self::from_edges(n, &edges).expect("cycle edges are valid")
    }

    /// Builds a graph from unordered pairs. Duplicates collapse; self-loops
    /// and out-of-range endpoints are errors.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::InvalidEdge(i, j));
        }
        if !self.has_edge(i, j) {
            self.link(i, j);
        }
        Ok(())
    }

    fn link(&mut self, i: usize, j: usize) {
        self.adjacency[i * self.n + j] = true;
        self.adjacency[j * self.n + i] = true;
        insert_sorted(&mut self.neighbors[i], j);
        insert_sorted(&mut self.neighbors[j], i);
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.adjacency[i * self.n + j]
    }

    /// Sorted neighbor list of `i` (the edge set `E_i`).
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, nbrs) in self.neighbors.iter().enumerate() {
            out.extend(nbrs.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.n == other.n && self.edges().iter().all(|&(i, j)| other.has_edge(i, j))
    }

    /// Breadth-first distances from `source`; `None` marks unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        if source >= self.n {
            return dist;
        }
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &v in &self.neighbors[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn metrics(&self) -> GraphMetrics {
        GraphMetrics {
            connected: is_connected(self),
            diameter: diameter(self),
            max_degree: self.max_degree(),
            edge_count: self.edge_count(),
        }
    }

    /// Edge-list text: header `n=<count>`, then one `i j` line per edge with
    /// `i < j`, lexicographic.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("n={}\n", self.n);
        for (i, j) in self.edges() {
            s.push_str(&format!("{i} {j}\n"));
        }
        s
    }
}

impl FromStr for Graph {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            msg: "missing `n=<count>` header".into(),
        })?;
        let n = header
            .trim()
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::Parse {
                line: 1,
                msg: format!("bad header {header:?}"),
            })?;
        let mut g = Graph::empty(n);
        for (ln, line) in lines {
            let bad = |msg: String| Error::Parse { line: ln + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(bad(format!("expected `i j`, got {line:?}")));
            }
            let i: usize = fields[0].parse().map_err(|_| bad(format!("bad node {:?}", fields[0])))?;
            let j: usize = fields[1].parse().map_err(|_| bad(format!("bad node {:?}", fields[1])))?;
            if i >= j {
                return Err(bad(format!("edge {i} {j} must satisfy i < j")));
            }
            g.add_edge(i, j).map_err(|e| bad(e.to_string()))?;
        }
        Ok(g)
    }
}

fn insert_sorted(v: &mut Vec<usize>, x: usize) {
    if let Err(pos) = v.binary_search(&x) {
        v.insert(pos, x);
    }
}

/// G(n, p): pairs `(i, j)`, `i < j`, visited lexicographically with one
/// uniform draw each; the edge is kept when the draw is below `p`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                g.link(i, j);
            }
        }
    }
    g
}

/// Rejection-samples G(n, p) until a connected draw appears, bumping the seed
/// deterministically. Returns the graph and the seed that produced it.
pub fn connected_erdos_renyi(n: usize, p: f64, seed: u64, max_attempts: usize) -> Option<(Graph, u64)> {
    (0..max_attempts as u64).find_map(|attempt| {
        let s = seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let g = erdos_renyi(n, p, s);
        is_connected(&g).then_some((g, s))
    })
}

pub fn is_connected(g: &Graph) -> bool {
    g.node_count() <= 1 || g.bfs_distances(0).iter().all(Option::is_some)
}

pub fn diameter(g: &Graph) -> Diameter {
    let mut best = 0;
    for s in 0..g.node_count() {
        for d in g.bfs_distances(s) {
            match d {
                Some(d) => best = best.max(d),
                None => return Diameter::Infinite,
            }
        }
    }
    Diameter::Finite(best)
}

/// Union of edge sets over graphs sharing a node set.
pub fn graph_union<'a>(graphs: impl IntoIterator<Item = &'a Graph>) -> Result<Graph> {
    let mut iter = graphs.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::InvalidParameter("union of zero graphs".into()))?;
    let mut out = first.clone();
    for g in iter {
        if g.n != out.n {
            return Err(Error::NodeCountMismatch {
                expected: out.n,
                found: g.n,
            });
        }
        for (i, j) in g.edges() {
            if !out.has_edge(i, j) {
                out.link(i, j);
            }
        }
    }
    Ok(out)
}
