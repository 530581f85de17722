//! Graphs, label maps and purely topological vertex scores.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// An immutable simple graph, directed or undirected, with optional self-loops.
///
/// Undirected edges are stored canonically as `(u, v)` with `u <= v`, and the
/// adjacency lists are symmetric. Edge lists and adjacency lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    directed: bool,
    allow_self_loops: bool,
    edges: Vec<(usize, usize)>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    names: Vec<String>,
}

impl Graph {
    /// Builds a graph from an edge iterator. Duplicate edges are collapsed.
    /// Vertices are named by their decimal index.
    pub fn from_edges<I>(n: usize, directed: bool, allow_self_loops: bool, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut list = Vec::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v && !allow_self_loops {
                return Err(Error::SelfLoopDisallowed { vertex: u });
            }
            list.push(if directed || u <= v { (u, v) } else { (v, u) });
        }
        list.sort_unstable();
        list.dedup();

        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for &(u, v) in &list {
            out_adj[u].push(v);
            in_adj[v].push(u);
            if !directed && u != v {
                out_adj[v].push(u);
                in_adj[u].push(v);
            }
        }
        for adj in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            adj.sort_unstable();
        }
        Ok(Graph {
            n,
            directed,
            allow_self_loops,
            edges: list,
            out_adj,
            in_adj,
            names: (0..n).map(|i| format!("{i}")).collect(),
        })
    }

    /// Replaces the external vertex names.
    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, found: names.len() });
        }
        self.names = names;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored edges (unordered pairs when undirected).
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn allows_self_loops(&self) -> bool {
        self.allow_self_loops
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Successors of `v`; all neighbors when undirected.
    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    /// Predecessors of `v`; all neighbors when undirected.
    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out_adj[u].binary_search(&v).is_ok()
    }

    pub fn has_self_loop(&self, v: usize) -> bool {
        self.has_edge(v, v)
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|s| s == name)
    }
}

/// A full labeling of the vertices by `k` categorical types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    labels: Vec<usize>,
    vocab: Vec<String>,
}

impl LabelMap {
    pub fn new(labels: Vec<usize>, vocab: Vec<String>) -> Result<Self> {
        let k = vocab.len();
        if let Some((vertex, &ty)) = labels.iter().enumerate().find(|(_, &t)| t >= k) {
            return Err(Error::TypeOutOfRange { vertex, ty, k });
        }
        Ok(LabelMap { labels, vocab })
    }

    /// Labels named by their decimal index, `k` types.
    pub fn from_indices(labels: Vec<usize>, k: usize) -> Result<Self> {
        Self::new(labels, (0..k).map(|i| format!("{i}")).collect())
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.vocab.len()
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.vocab.iter().position(|s| s == label)
    }
}

/// Degree of every active vertex within the subgraph induced by `active`.
///
/// Directed graphs count in- plus out-edges; a reciprocated pair counts twice.
/// Self-loops are ignored. Inactive vertices score `-inf`.
pub fn degree_scores(graph: &Graph, active: &[bool]) -> Vec<f64> {
    (0..graph.n())
        .map(|v| {
            if !active[v] {
                return f64::NEG_INFINITY;
            }
            let count = |adj: &[usize]| adj.iter().filter(|&&u| u != v && active[u]).count();
            let d = if graph.is_directed() {
                count(graph.out_neighbors(v)) + count(graph.in_neighbors(v))
            } else {
                count(graph.out_neighbors(v))
            };
            d as f64
        })
        .collect()
}

/// Unnormalized shortest-path betweenness on the subgraph induced by
/// `active` (Brandes accumulation). Undirected graphs count each unordered
/// pair once. Inactive vertices score `-inf`.
pub fn betweenness_scores(graph: &Graph, active: &[bool]) -> Vec<f64> {
    let n = graph.n();
    let mut bc = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);

    for s in (0..n).filter(|&s| active[s]) {
        for v in order.drain(..) {
            sigma[v] = 0.0;
            dist[v] = usize::MAX;
            delta[v] = 0.0;
            preds[v].clear();
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in graph.out_neighbors(v) {
                if !active[w] || w == v {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }

    for (v, b) in bc.iter_mut().enumerate() {
        if !active[v] {
            *b = f64::NEG_INFINITY;
        } else if !graph.is_directed() {
            *b /= 2.0;
        }
    }
    bc
}
