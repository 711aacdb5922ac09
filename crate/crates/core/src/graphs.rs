//! Undirected graphs paired with a target clique size: the source side of
//! the reduction, a small text format, and seeded generators for the test
//! corpus.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

/// Graph plus target clique size. Vertices are 0-indexed internally; the
/// text format and all rendered output use 1-indexed identifiers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueInstance {
    n: usize,
    k: usize,
    /// Normalized `u < v`, sorted, deduplicated.
    edges: Vec<(u32, u32)>,
}

impl CliqueInstance {
    pub fn new(
        n: usize,
        k: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        if k < 2 {
            return Err(GraphError::Invalid(format!("target clique size must be at least 2; got {k}")));
        }
        if k > n {
            return Err(GraphError::Invalid(format!(
                "target clique size {k} exceeds vertex count {n}"
            )));
        }
        let mut normalized = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(GraphError::Invalid(format!("self-loop at vertex {}", u + 1)));
            }
            if u >= n || v >= n {
                return Err(GraphError::Invalid(format!(
                    "edge ({}, {}) references a vertex beyond {n}",
                    u + 1,
                    v + 1
                )));
            }
            normalized.push((u.min(v) as u32, u.max(v) as u32));
        }
        normalized.sort_unstable();
        normalized.dedup();
        Ok(CliqueInstance { n, k, edges: normalized })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        if u == v {
            return false;
        }
        let key = (u.min(v) as u32, u.max(v) as u32);
        self.edges.binary_search(&key).is_ok()
    }

    /// Ordered vertex pairs that are either equal or non-adjacent, in
    /// ascending order. These are exactly the pairs the adjacency family
    /// penalizes.
    pub fn eligible_pairs(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in 0..self.n {
                if u == v || !self.adjacent(u, v) {
                    out.push((u as u32, v as u32));
                }
            }
        }
        out
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        for (i, &u) in vertices.iter().enumerate() {
            if u >= self.n {
                return false;
            }
            for &v in &vertices[i + 1..] {
                if !self.adjacent(u, v) {
                    return false;
                }
            }
        }
        // Repeats would slip through the pairwise check only as self-pairs,
        // which `adjacent` already rejects, but an explicit length check
        // keeps the contract obvious for the empty and singleton cases.
        vertices.len() == vertices.iter().collect::<std::collections::BTreeSet<_>>().len()
    }

    /// Parses the text format: first line `n m k`, then `m` lines `u v` with
    /// 1-indexed endpoints. Lines starting with `#` and blank lines are
    /// ignored.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut rows = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = rows
            .next()
            .ok_or_else(|| GraphError::Parse { line: 0, message: "empty graph file".into() })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(GraphError::Parse {
                line,
                message: format!("header must be 'n m k'; got {header:?}"),
            });
        }
        let parse_int = |line: usize, s: &str| {
            s.parse::<usize>()
                .map_err(|_| GraphError::Parse { line, message: format!("bad integer {s:?}") })
        };
        let n = parse_int(line, fields[0])?;
        let m = parse_int(line, fields[1])?;
        let k = parse_int(line, fields[2])?;
        let mut edges = Vec::with_capacity(m);
        for (line, row) in rows {
            let fields: Vec<&str> = row.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(GraphError::Parse {
                    line,
                    message: format!("edge line must be 'u v'; got {row:?}"),
                });
            }
            let u = parse_int(line, fields[0])?;
            let v = parse_int(line, fields[1])?;
            if u == 0 || v == 0 {
                return Err(GraphError::Parse { line, message: "vertices are 1-indexed".into() });
            }
            edges.push((u - 1, v - 1));
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: 0,
                message: format!("header promises {m} edges; file has {}", edges.len()),
            });
        }
        Self::new(n, k, edges)
    }

    /// Renders the text format (1-indexed, no comments); parsing the result
    /// reproduces the instance exactly.
    pub fn render(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n, self.edges.len(), self.k);
        for &(u, v) in &self.edges {
            out.push_str(&format!("{} {}\n", u + 1, v + 1));
        }
        out
    }

    // ----- corpus generators -----

    pub fn complete(n: usize, k: usize) -> Result<Self, GraphError> {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::new(n, k, edges)
    }

    pub fn cycle(n: usize, k: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::Invalid(format!("a cycle needs at least 3 vertices; got {n}")));
        }
        let edges = (0..n).map(|u| (u, (u + 1) % n));
        Self::new(n, k, edges)
    }

    pub fn path(n: usize, k: usize) -> Result<Self, GraphError> {
        let edges = (0..n.saturating_sub(1)).map(|u| (u, u + 1));
        Self::new(n, k, edges)
    }

    pub fn star(n: usize, k: usize) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::Invalid(format!("a star needs at least 2 vertices; got {n}")));
        }
        Self::new(n, k, (1..n).map(|v| (0, v)))
    }

    pub fn empty(n: usize, k: usize) -> Result<Self, GraphError> {
        Self::new(n, k, std::iter::empty())
    }

    /// Seeded Erdos-Renyi graph: each pair independently becomes an edge
    /// with probability `p`.
    pub fn erdos_renyi(n: usize, k: usize, p: f64, seed: u64) -> Result<Self, GraphError> {
        assert!((0.0..=1.0).contains(&p), "edge probability must lie in [0, 1]");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        Self::new(n, k, edges)
    }

    /// Seeded Erdos-Renyi base with a clique planted on `k` vertices chosen
    /// by the same stream, so the instance is guaranteed to be a
    /// yes-instance.
    pub fn planted_clique(n: usize, k: usize, p: f64, seed: u64) -> Result<Self, GraphError> {
        let base = Self::erdos_renyi(n, k, p, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9));
        let mut vertices: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.gen_range(i..n);
            vertices.swap(i, j);
        }
        let planted = &vertices[..k];
        let mut edges: Vec<(usize, usize)> =
            base.edges.iter().map(|&(u, v)| (u as usize, v as usize)).collect();
        for (i, &u) in planted.iter().enumerate() {
            for &v in &planted[i + 1..] {
                edges.push((u, v));
            }
        }
        Self::new(n, k, edges)
    }
}

impl fmt::Display for CliqueInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "graph(n={}, m={}, k={})", self.n, self.edges.len(), self.k)
    }
}
