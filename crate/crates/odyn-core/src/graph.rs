//! Simple undirected graphs and the random-walk averaging operator.

use crate::error::{Error, Result};
use std::collections::BTreeSet;

/// An unweighted simple undirected graph on nodes `0..n`, stored as
/// compressed sparse neighbor lists sorted by node id, so every iteration
/// order is deterministic.
///
/// Invariants enforced at construction: no self-loops, no duplicate edges,
/// every node has degree ≥ 1 (the averaging operator is undefined on an
/// isolated node).
#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Graph {
    /// Build from an edge list. Node count is `1 + max node id`; duplicate
    /// and reversed-duplicate edges collapse to one undirected edge.
    pub fn from_edges(edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        let mut max_id = 0usize;
        let mut any = false;
        for (u, v) in edges {
            if u == v {
                return Err(Error::invalid(format!("self-loop at node {u}")));
            }
            set.insert((u.min(v), u.max(v)));
            max_id = max_id.max(u).max(v);
            any = true;
        }
        if !any {
            return Err(Error::invalid("edge list is empty"));
        }
        let n = max_id + 1;
        let mut degree = vec![0usize; n];
        for &(u, v) in &set {
            degree[u] += 1;
            degree[v] += 1;
        }
        if let Some(node) = degree.iter().position(|&d| d == 0) {
            return Err(Error::invalid(format!("node {node} is isolated (degree 0)")));
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut neighbors = vec![0usize; 2 * set.len()];
        let mut cursor = offsets.clone();
        for &(u, v) in &set {
            neighbors[cursor[u]] = v;
            cursor[u] += 1;
            neighbors[cursor[v]] = u;
            cursor[v] += 1;
        }
        // BTreeSet iteration inserts each adjacency in ascending order of the
        // opposite endpoint only for the min side; sort to guarantee order.
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Ok(Graph { offsets, neighbors })
    }

    /// Parse edge-list text: one edge per line `u v`, `#` comments and blank
    /// lines allowed. A third token on a line is an error (weighted input is
    /// not supported), as are self-loops and isolated nodes in `[0, n)`.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
                (Some(a), Some(b), None) => (a, b),
                (_, _, Some(_)) => {
                    return Err(Error::parse(
                        line_no,
                        "expected two node ids, found extra tokens (weights are not supported)",
                    ))
                }
                _ => return Err(Error::parse(line_no, "expected two node ids")),
            };
            let u: usize = a
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid node id {a:?}")))?;
            let v: usize = b
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid node id {b:?}")))?;
            if u == v {
                return Err(Error::parse(line_no, format!("self-loop at node {u}")));
            }
            edges.push((u, v));
        }
        if edges.is_empty() {
            return Err(Error::invalid("edge list is empty"));
        }
        Self::from_edges(edges)
    }

    /// Serialize back to edge-list text (one `u v` line per edge, u < v,
    /// ascending). `parse_edge_list(g.to_edge_list())` reproduces `g`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for u in 0..self.node_count() {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push_str(&format!("{u} {v}\n"));
                }
            }
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[self.offsets[node]..self.offsets[node + 1]]
    }

    /// Apply the random-walk matrix: `y_i = (1/deg(i)) · Σ_{j ∈ N(i)} x_j`.
    pub fn random_walk_apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.node_count();
        if x.len() != n {
            return Err(Error::contract(format!(
                "vector length {} does not match node count {n}",
                x.len()
            )));
        }
        Ok((0..n)
            .map(|i| {
                let nb = self.neighbors(i);
                nb.iter().map(|&j| x[j]).sum::<f64>() / nb.len() as f64
            })
            .collect())
    }

    /// Complete graph on `n ≥ 2` nodes.
    pub fn complete(n: usize) -> Result<Self> {
        Self::from_edges((0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    /// Path `0 – 1 – … – (n-1)`, `n ≥ 2`.
    pub fn path(n: usize) -> Result<Self> {
        Self::from_edges((1..n).map(|v| (v - 1, v)))
    }

    /// Star with center `0` and `n-1` leaves, `n ≥ 2`.
    pub fn star(n: usize) -> Result<Self> {
        Self::from_edges((1..n).map(|v| (0, v)))
    }

    /// Cycle on `n ≥ 3` nodes.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::contract("cycle needs at least 3 nodes".to_string()));
        }
        Self::from_edges((0..n).map(|u| (u, (u + 1) % n)))
    }
}
