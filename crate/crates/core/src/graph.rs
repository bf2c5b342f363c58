//! Simple undirected graphs and the inverse-graph construction.
//!
//! Self-loops are kept apart from the adjacency lists so that neighbor
//! queries never return the vertex itself; consumers decide what a loop
//! means (see `solver::LoopPolicy`).

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numtheory::{mod_inverse, Prime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: vertex {vertex} out of range 1..={n}")]
    Range { line: usize, vertex: usize, n: usize },
    #[error("missing 'p edge' header")]
    MissingHeader,
    #[error("malformed JSON graph: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    self_loops: BTreeSet<usize>,
}

/// Wire form of [`Graph`]: `{"n": .., "adjacency": [[..]..], "self_loops": [..]}`.
#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    adjacency: Vec<Vec<usize>>,
    self_loops: Vec<usize>,
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        GraphJson {
            n: g.n(),
            self_loops: g.self_loops.into_iter().collect(),
            adjacency: g.adj,
        }
    }
}

impl TryFrom<GraphJson> for Graph {
    type Error = GraphError;

    fn try_from(j: GraphJson) -> Result<Self, GraphError> {
        if j.adjacency.len() != j.n {
            return Err(GraphError::Json(format!(
                "adjacency has {} rows, expected {}",
                j.adjacency.len(),
                j.n
            )));
        }
        let edges = j
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |&v| (u, v)));
        let g = Graph::from_edges(j.n, edges.chain(j.self_loops.iter().map(|&v| (v, v))))?;
        // A one-sided adjacency entry would be silently symmetrized above.
        for (u, row) in j.adjacency.iter().enumerate() {
            for &v in row {
                if !j.adjacency[v].contains(&u) && u != v {
                    return Err(GraphError::Json(format!("edge {u}-{v} is not symmetric")));
                }
            }
        }
        Ok(g)
    }
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges collapse, `(v, v)`
    /// records a self-loop.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n];
        let mut self_loops = BTreeSet::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                self_loops.insert(u);
            } else {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
        }
        Ok(Graph { adj, self_loops })
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
            self_loops: BTreeSet::new(),
        }
    }

    pub fn cycle(n: usize) -> Self {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("in range")
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::from_edges(n, edges).expect("in range")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Sorted neighbors of `v`, never including `v` itself.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        if u == v {
            return self.self_loops.contains(&u);
        }
        self.adj[u].binary_search(&v).is_ok()
    }

    #[inline]
    pub fn has_self_loop(&self, v: usize) -> bool {
        self.self_loops.contains(&v)
    }

    pub fn self_loops(&self) -> &BTreeSet<usize> {
        &self.self_loops
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order. Loops excluded.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Subgraph induced by removing `v` (vertices above `v` shift down by one).
    pub fn without_vertex(&self, v: usize) -> Graph {
        let shift = |w: usize| if w > v { w - 1 } else { w };
        let edges = self
            .edges()
            .filter(|&(a, b)| a != v && b != v)
            .map(|(a, b)| (shift(a), shift(b)))
            .chain(self.self_loops.iter().filter(|&&w| w != v).map(|&w| (shift(w), shift(w))));
        Graph::from_edges(self.n() - 1, edges).expect("in range")
    }

    pub fn is_regular(&self) -> Option<usize> {
        let d = self.adj.first().map_or(0, Vec::len);
        self.adj.iter().all(|r| r.len() == d).then_some(d)
    }

    pub fn is_connected(&self) -> bool {
        if self.n() == 0 {
            return true;
        }
        let mut seen = vec![false; self.n()];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))
    }
}

/// DIMACS edge format: `p edge n m` then 1-indexed `e u v` lines, self-loops
/// as `e v v`.
pub fn to_dimacs(g: &Graph) -> String {
    let m = g.num_edges() + g.self_loops.len();
    let mut out = format!("p edge {} {}\n", g.n(), m);
    let mut lines: Vec<(usize, usize)> = g.edges().collect();
    lines.extend(g.self_loops.iter().map(|&v| (v, v)));
    lines.sort_unstable();
    for (u, v) in lines {
        writeln!(out, "e {} {}", u + 1, v + 1).expect("write to String");
    }
    out
}

pub fn from_dimacs(text: &str) -> Result<Graph, GraphError> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let parse = |s: &str| -> Result<usize, GraphError> {
            s.parse().map_err(|_| GraphError::Parse {
                line,
                message: format!("expected a non-negative integer, found {s:?}"),
            })
        };
        match fields.as_slice() {
            [] => {}
            ["c", ..] => {}
            ["p", kind, nv, ne] => {
                if n.is_some() {
                    return Err(GraphError::Parse {
                        line,
                        message: "duplicate problem line".into(),
                    });
                }
                if !matches!(*kind, "edge" | "col") {
                    return Err(GraphError::Parse {
                        line,
                        message: format!("unsupported problem type {kind:?}"),
                    });
                }
                n = Some(parse(nv)?);
                parse(ne)?;
            }
            ["e", a, b] => {
                let Some(nv) = n else {
                    return Err(GraphError::MissingHeader);
                };
                let (a, b) = (parse(a)?, parse(b)?);
                for v in [a, b] {
                    if v == 0 || v > nv {
                        return Err(GraphError::Range { line, vertex: v, n: nv });
                    }
                }
                edges.push((a - 1, b - 1));
            }
            _ => {
                return Err(GraphError::Parse {
                    line,
                    message: format!("unrecognized line {raw:?}"),
                })
            }
        }
    }
    let n = n.ok_or(GraphError::MissingHeader)?;
    Graph::from_edges(n, edges)
}

/// The inverse graph on `Z_p`: `x ~ x+1`, `x ~ x-1`, `x ~ -x^{-1}`, with
/// `0^{-1} := 0` giving vertex 0 a self-loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InverseGraph {
    p: Prime,
    graph: Graph,
}

impl InverseGraph {
    pub fn new(p: Prime) -> Self {
        let n = p.get() as usize;
        let mut edges = Vec::with_capacity(2 * n);
        for x in 0..n {
            edges.push((x, (x + 1) % n));
            let y = inverse_step(x as u64, p) as usize;
            // x^2 = -1 is fixed by R but gets no loop; only 0 does
            if y != x || x == 0 {
                edges.push((x, y));
            }
        }
        InverseGraph {
            p,
            graph: Graph::from_edges(n, edges).expect("vertices are residues mod p"),
        }
    }

    #[inline]
    pub fn p(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }
}

impl std::ops::Deref for InverseGraph {
    type Target = Graph;

    fn deref(&self) -> &Graph {
        &self.graph
    }
}

/// `build_inverse_graph`.
pub fn build_inverse_graph(p: Prime) -> InverseGraph {
    InverseGraph::new(p)
}

/// The `R` move `x -> -x^{-1} (mod p)`, fixing 0.
#[inline]
pub fn inverse_step(x: u64, p: Prime) -> u64 {
    match mod_inverse(x, p) {
        Ok(inv) => (p.get() - inv) % p.get(),
        Err(_) => 0,
    }
}
