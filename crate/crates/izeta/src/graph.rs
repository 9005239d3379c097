//! Sparse graph sampling and bookkeeping.
//!
//! Graphs are undirected simple graphs on vertices `0..n`, stored as a sorted
//! edge list. The random model draws each of the n(n-1)/2 pairs
//! independently with probability rho/n, scanning pairs in row-major order
//! with one uniform draw each, so a (seed, stream) pair pins the exact graph
//! across runs and thread counts.

use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

/// Parameters of the random graph ensemble: n vertices, edge probability
/// rho/n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleParams {
    pub n: usize,
    pub rho: f64,
}

impl EnsembleParams {
    pub fn new(n: usize, rho: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParam(format!(
                "ensemble needs at least 2 vertices, got {n}"
            )));
        }
        if !rho.is_finite() || rho <= 0.0 || rho >= n as f64 {
            return Err(Error::InvalidParam(format!(
                "edge density rho must lie in (0, n), got {rho}"
            )));
        }
        Ok(EnsembleParams { n, rho })
    }

    pub fn edge_probability(&self) -> f64 {
        self.rho / self.n as f64
    }

    /// Expected number of edges, n(n-1)/2 * rho/n.
    pub fn expected_edges(&self) -> f64 {
        (self.n - 1) as f64 * self.rho / 2.0
    }
}

/// One sampled (or constructed) graph: sorted edge list plus degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    n: usize,
    edges: Vec<(u32, u32)>,
    degrees: Vec<u32>,
}

impl GraphSample {
    /// Builds from an explicit edge list. Edges are normalized to (low, high)
    /// and sorted; loops, duplicates and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParam("graph needs at least one vertex".into()));
        }
        let mut norm: Vec<(u32, u32)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidParam(format!("self-loop at vertex {a}")));
            }
            if a as usize >= n || b as usize >= n {
                return Err(Error::InvalidParam(format!(
                    "edge ({a}, {b}) outside vertex range 0..{n}"
                )));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        if norm.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParam("duplicate edge in list".into()));
        }
        let mut degrees = vec![0u32; n];
        for &(a, b) in &norm {
            degrees[a as usize] += 1;
            degrees[b as usize] += 1;
        }
        Ok(GraphSample {
            n,
            edges: norm,
            degrees,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> u32 {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    /// Sorted neighbor lists, one per vertex.
    pub fn neighbors_sorted(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let adj = self.neighbors_sorted();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adj[v as usize] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Plain text form: header line "n m", then one "a b" line per edge.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.n, self.edges.len());
        for &(a, b) in &self.edges {
            let _ = writeln!(s, "{a} {b}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph text".into()))?;
        let mut it = header.split_whitespace();
        let n: usize = it
            .next()
            .ok_or_else(|| Error::Parse("missing vertex count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("vertex count: {e}")))?;
        let m: usize = it
            .next()
            .ok_or_else(|| Error::Parse("missing edge count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("edge count: {e}")))?;
        let mut edges = Vec::with_capacity(m);
        for (idx, line) in lines.enumerate() {
            let mut it = line.split_whitespace();
            let a: u32 = it
                .next()
                .ok_or_else(|| Error::Parse(format!("edge line {} empty", idx + 2)))?
                .parse()
                .map_err(|e| Error::Parse(format!("edge line {}: {e}", idx + 2)))?;
            let b: u32 = it
                .next()
                .ok_or_else(|| Error::Parse(format!("edge line {} lacks endpoint", idx + 2)))?
                .parse()
                .map_err(|e| Error::Parse(format!("edge line {}: {e}", idx + 2)))?;
            edges.push((a, b));
        }
        if edges.len() != m {
            return Err(Error::Parse(format!(
                "header promises {m} edges, found {}",
                edges.len()
            )));
        }
        Self::from_edges(n, edges)
    }
}

/// Degree summary of one graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub mean: f64,
    pub min: u32,
    pub max: u32,
    pub isolated: usize,
}

pub fn degree_stats(g: &GraphSample) -> DegreeStats {
    let degs = g.degrees();
    DegreeStats {
        mean: degs.iter().map(|&d| d as f64).sum::<f64>() / g.n() as f64,
        min: degs.iter().copied().min().unwrap_or(0),
        max: degs.iter().copied().max().unwrap_or(0),
        isolated: degs.iter().filter(|&&d| d == 0).count(),
    }
}

/// RNG for one replica: the master seed keys the cipher, the replica index
/// selects an independent stream. Replicas can then run in any order or in
/// parallel without touching each other's draws.
pub fn replica_rng(master_seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica);
    rng
}

/// Draws one graph: pairs (i, j), i < j, scanned in row-major order, one
/// uniform draw each, edge kept when the draw falls below rho/n.
pub fn sample_er_graph(params: &EnsembleParams, rng: &mut impl Rng) -> GraphSample {
    let n = params.n;
    let p = params.edge_probability();
    let mut edges = Vec::with_capacity((params.expected_edges() * 1.2) as usize + 8);
    let mut degrees = vec![0u32; n];
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            if rng.random::<f64>() < p {
                edges.push((i, j));
                degrees[i as usize] += 1;
                degrees[j as usize] += 1;
            }
        }
    }
    GraphSample { n, edges, degrees }
}

/// Cycle on n >= 3 vertices.
pub fn cycle_graph(n: usize) -> Result<GraphSample> {
    if n < 3 {
        return Err(Error::InvalidParam(format!("cycle needs n >= 3, got {n}")));
    }
    GraphSample::from_edges(
        n,
        (0..n as u32).map(|i| (i, (i + 1) % n as u32)),
    )
}

/// Complete graph on n >= 2 vertices.
pub fn complete_graph(n: usize) -> Result<GraphSample> {
    if n < 2 {
        return Err(Error::InvalidParam(format!(
            "complete graph needs n >= 2, got {n}"
        )));
    }
    let mut edges = Vec::new();
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            edges.push((i, j));
        }
    }
    GraphSample::from_edges(n, edges)
}

/// Path on n >= 2 vertices (n - 1 edges).
pub fn path_graph(n: usize) -> Result<GraphSample> {
    if n < 2 {
        return Err(Error::InvalidParam(format!("path needs n >= 2, got {n}")));
    }
    GraphSample::from_edges(n, (0..n as u32 - 1).map(|i| (i, i + 1)))
}

/// The Petersen graph: outer pentagon, inner pentagram, five spokes.
pub fn petersen_graph() -> GraphSample {
    let mut edges = Vec::with_capacity(15);
    for i in 0..5u32 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    GraphSample::from_edges(10, edges).expect("fixed construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(EnsembleParams::new(1, 0.5).is_err());
        assert!(EnsembleParams::new(10, 0.0).is_err());
        assert!(EnsembleParams::new(10, 10.0).is_err());
        assert!(EnsembleParams::new(10, f64::NAN).is_err());
        let p = EnsembleParams::new(100, 10.0).unwrap();
        assert_eq!(p.edge_probability(), 0.1);
        assert_eq!(p.expected_edges(), 495.0);
    }

    #[test]
    fn from_edges_normalizes_and_validates() {
        let g = GraphSample::from_edges(4, [(2, 0), (3, 1), (0, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 3)]);
        assert_eq!(g.degrees(), &[2, 2, 1, 1]);
        assert!(GraphSample::from_edges(3, [(0, 0)]).is_err());
        assert!(GraphSample::from_edges(3, [(0, 3)]).is_err());
        assert!(GraphSample::from_edges(3, [(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn builtin_shapes() {
        let c3 = cycle_graph(3).unwrap();
        assert_eq!(c3.edge_count(), 3);
        assert!(c3.degrees().iter().all(|&d| d == 2));

        let k4 = complete_graph(4).unwrap();
        assert_eq!(k4.edge_count(), 6);
        assert!(k4.degrees().iter().all(|&d| d == 3));

        let p2 = path_graph(2).unwrap();
        assert_eq!(p2.edges(), &[(0, 1)]);

        let pet = petersen_graph();
        assert_eq!(pet.n(), 10);
        assert_eq!(pet.edge_count(), 15);
        assert!(pet.degrees().iter().all(|&d| d == 3));
        assert!(pet.is_connected());
        // girth 5: no two adjacent vertices share a neighbor
        let adj = pet.neighbors_sorted();
        for &(a, b) in pet.edges() {
            let common = adj[a as usize]
                .iter()
                .filter(|x| adj[b as usize].contains(x))
                .count();
            assert_eq!(common, 0);
        }
    }

    #[test]
    fn connectivity() {
        assert!(path_graph(5).unwrap().is_connected());
        let split = GraphSample::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(!split.is_connected());
        let lonely = GraphSample::from_edges(3, [(0, 1)]).unwrap();
        assert!(!lonely.is_connected());
    }

    #[test]
    fn text_round_trip() {
        let g = petersen_graph();
        let text = g.to_text();
        assert!(text.starts_with("10 15\n"));
        let back = GraphSample::from_text(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn text_parse_errors() {
        assert!(GraphSample::from_text("").is_err());
        assert!(GraphSample::from_text("3").is_err());
        assert!(GraphSample::from_text("3 2\n0 1").is_err());
        assert!(GraphSample::from_text("3 1\n0 x").is_err());
        assert!(GraphSample::from_text("3 1\n0 1\n1 2").is_err());
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let params = EnsembleParams::new(50, 5.0).unwrap();
        let g1 = sample_er_graph(&params, &mut replica_rng(123, 0));
        let g2 = sample_er_graph(&params, &mut replica_rng(123, 0));
        assert_eq!(g1, g2);
        let g3 = sample_er_graph(&params, &mut replica_rng(123, 1));
        assert_ne!(g1, g3);
        let g4 = sample_er_graph(&params, &mut replica_rng(124, 0));
        assert_ne!(g1, g4);
    }

    #[test]
    fn sampled_edge_count_near_expectation() {
        let params = EnsembleParams::new(100, 10.0).unwrap();
        let reps = 2000;
        let mut total = 0usize;
        for r in 0..reps {
            total += sample_er_graph(&params, &mut replica_rng(7, r)).edge_count();
        }
        let mean = total as f64 / reps as f64;
        let expect = params.expected_edges();
        // binomial standard error of the mean over 2000 replicas
        let pairs = 100.0 * 99.0 / 2.0;
        let p = params.edge_probability();
        let se = (pairs * p * (1.0 - p) / reps as f64).sqrt();
        assert!(
            (mean - expect).abs() < 5.0 * se,
            "mean {mean} vs expected {expect} (se {se})"
        );
    }

    #[test]
    fn degree_stats_summary() {
        let g = GraphSample::from_edges(5, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let s = degree_stats(&g);
        assert_eq!(s.max, 3);
        assert_eq!(s.min, 0);
        assert_eq!(s.isolated, 1);
        assert!((s.mean - 6.0 / 5.0).abs() < 1e-15);
    }
}
