//! Weighted undirected graphs, the two experiment generators and the
//! edge-list text format.
//!
//! Nodes are 0-based in memory. The text format and every report use
//! 1-based labels.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use petgraph::unionfind::UnionFind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// An edge stored once, with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub u: usize,
    pub v: usize,
    pub weight: T,
}

/// A neighbour entry in an adjacency list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub node: usize,
    pub edge: usize,
}

/// Connected, simple, weighted undirected graph. Immutable once built.
#[derive(Debug, Clone)]
pub struct Graph<T> {
    n: usize,
    edges: Vec<Edge<T>>,
    adjacency: Vec<Vec<Incidence>>,
}

impl<T: Real> Graph<T> {
    /// Builds a graph from 0-based `(u, v, w)` triples.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut stored = Vec::new();
        let mut adjacency = vec![Vec::new(); n];
        for (a, b, w) in edges {
            for node in [a, b] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node: node + 1, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a + 1));
            }
            if !(w > T::zero()) || !w.is_finite() {
                return Err(Error::NonPositiveWeight(a + 1, b + 1));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((u, v)) {
                return Err(Error::DuplicateEdge(u + 1, v + 1));
            }
            let idx = stored.len();
            stored.push(Edge { u, v, weight: w });
            adjacency[u].push(Incidence { node: v, edge: idx });
            adjacency[v].push(Incidence { node: u, edge: idx });
        }
        if n == 0 {
            return Err(Error::InvalidParameters("graph needs at least one node".into()));
        }
        let mut uf = UnionFind::<usize>::new(n);
        for e in &stored {
            uf.union(e.u, e.v);
        }
        let root = uf.find(0);
        if (1..n).any(|i| uf.find(i) != root) {
            return Err(Error::Disconnected);
        }
        for list in &mut adjacency {
            list.sort_by_key(|inc| inc.node);
        }
        Ok(Self { n, edges: stored, adjacency })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    /// Neighbours of `i`, sorted by node index.
    pub fn neighbors(&self, i: usize) -> &[Incidence] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Index of edge `{i, j}` if present.
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let list = self.adjacency.get(i)?;
        list.binary_search_by_key(&j, |inc| inc.node)
            .ok()
            .map(|pos| list[pos].edge)
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<T> {
        self.edge_index(i, j).map(|e| self.edges[e].weight)
    }

    /// Edge density `2m / (n^2 - n)`.
    pub fn density(&self) -> f64 {
        let n = self.n as f64;
        2.0 * self.edges.len() as f64 / (n * n - n)
    }

    pub fn is_unweighted(&self) -> bool {
        self.edges.iter().all(|e| e.weight == T::one())
    }

    /// Parses the edge-list format: header `n m`, then `m` lines `i j w`
    /// with 1-based labels. Blank lines and `#` comments are skipped.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header \"n m\"".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse { line: hline, msg: "header must be \"n m\"".into() });
        }
        let n: usize = parse_field(fields[0], hline, "node count")?;
        let m: usize = parse_field(fields[1], hline, "edge count")?;

        let mut triples = Vec::with_capacity(m);
        for (line, l) in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse { line, msg: "expected \"i j w\"".into() });
            }
            let i: usize = parse_field(f[0], line, "node label")?;
            let j: usize = parse_field(f[1], line, "node label")?;
            let w: T = parse_field(f[2], line, "weight")?;
            for node in [i, j] {
                if node == 0 || node > n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            triples.push((i - 1, j - 1, w));
        }
        if triples.len() != m {
            return Err(Error::Parse {
                line: hline,
                msg: format!("header announces {m} edges, found {}", triples.len()),
            });
        }
        Self::new(n, triples)
    }

    pub fn from_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_edge_list(&std::fs::read_to_string(path)?)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", e.u + 1, e.v + 1, e.weight);
        }
        out
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_edge_list())?;
        Ok(())
    }
}

fn parse_field<V: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<V> {
    s.parse().map_err(|_| Error::Parse { line, msg: format!("bad {what} {s:?}") })
}

/// Ring `1-2-…-n-1` plus `m - n` extra edges drawn uniformly without
/// replacement from the remaining node pairs. All weights are one.
pub fn small_world<T: Real>(n: usize, m: usize, seed: u64) -> Result<Graph<T>> {
    if n < 3 {
        return Err(Error::InvalidParameters(format!("small-world needs n >= 3, got {n}")));
    }
    let max = n * (n - 1) / 2;
    if m < n || m > max {
        return Err(Error::InvalidParameters(format!("small-world needs {n} <= m <= {max}, got {m}")));
    }
    let ring: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).chain([(0, n - 1)]).collect();
    let ring_set: HashSet<_> = ring.iter().copied().collect();
    let free: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|p| !ring_set.contains(p))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, free.len(), m - n).into_vec();
    picked.sort_unstable();

    let edges = ring
        .into_iter()
        .chain(picked.into_iter().map(|k| free[k]))
        .map(|(u, v)| (u, v, T::one()));
    Graph::new(n, edges)
}

/// Node sets of the two barbell lobes (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lobes {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Lobes {
    /// Labels `1..=n` form the right lobe and `n+1..=2n` the left lobe.
    pub fn barbell(lobe_size: usize) -> Self {
        Self {
            right: (0..lobe_size).collect(),
            left: (lobe_size..2 * lobe_size).collect(),
        }
    }
}

/// Two copies of `K_n` joined by the single bridge `n -- n+1`.
pub fn barbell<T: Real>(n: usize) -> Result<Graph<T>> {
    if n < 2 {
        return Err(Error::InvalidParameters(format!("barbell lobes need n >= 2, got {n}")));
    }
    let clique = |offset: usize| {
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (offset + i, offset + j)))
    };
    let edges = clique(0)
        .chain(clique(n))
        .chain([(n - 1, n)])
        .map(|(u, v)| (u, v, T::one()));
    Graph::new(2 * n, edges)
}

/// Complete graph `K_n` with unit weights.
pub fn complete<T: Real>(n: usize) -> Result<Graph<T>> {
    Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, T::one()))))
}

/// Path `P_n` with unit weights.
pub fn path<T: Real>(n: usize) -> Result<Graph<T>> {
    Graph::new(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1, T::one())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p2_from_text() {
        let g = Graph::<f64>::parse_edge_list("2 1\n1 2 1.0").unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(0, 1), Some(1.0));
        assert_eq!(g.weight(1, 0), Some(1.0));
    }

    #[test]
    fn rejects_bad_files() {
        let cases = [
            ("2 1\n1 1 1.0", "self-loop"),
            ("4 2\n1 2 1\n3 4 1", "disconnected"),
            ("2 2\n1 2 1\n2 1 3", "duplicate"),
            ("2 1\n1 2 0", "nonpositive"),
            ("2 1\n1 2 -1.5", "nonpositive"),
            ("2 1\n1 x 1", "line"),
            ("2 1\n1 3 1", "out of range"),
            ("3 3\n1 2 1\n2 3 1", "announces"),
        ];
        for (text, needle) in cases {
            let err = Graph::<f64>::parse_edge_list(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{text:?} gave {err}");
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::<f64>::parse_edge_list("3 2\n# comment\n1 2 0.5\n\n2 3 2.25\n").unwrap();
        let h = Graph::<f64>::parse_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(g.edges(), h.edges());
    }

    #[test]
    fn small_world_grid_densities() {
        let g = small_world::<f64>(10, 18, 7).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (10, 18));
        assert!((g.density() - 0.4).abs() < 1e-12);
        let g = small_world::<f64>(10, 36, 7).unwrap();
        assert!((g.density() - 0.8).abs() < 1e-12);
        assert!((small_world::<f64>(20, 76, 7).unwrap().density() - 0.4).abs() < 1e-12);
        assert!((small_world::<f64>(20, 152, 7).unwrap().density() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn small_world_contains_ring_and_is_seeded() {
        let g = small_world::<f64>(12, 30, 3).unwrap();
        for i in 0..12 {
            assert!(g.edge_index(i, (i + 1) % 12).is_some());
        }
        assert!(g.is_unweighted());
        let h = small_world::<f64>(12, 30, 3).unwrap();
        assert_eq!(g.edges(), h.edges());
        let k = small_world::<f64>(12, 30, 4).unwrap();
        assert_ne!(g.edges(), k.edges());
    }

    #[test]
    fn small_world_with_m_equal_n_is_the_cycle() {
        let g = small_world::<f64>(5, 5, 99).unwrap();
        assert_eq!(g.edge_count(), 5);
        assert!(g.degrees().iter().all(|&d| d == 2));
    }

    #[test]
    fn small_world_range_checks() {
        assert!(small_world::<f64>(10, 9, 0).is_err());
        assert!(small_world::<f64>(10, 46, 0).is_err());
        assert!(small_world::<f64>(2, 2, 0).is_err());
        assert!(small_world::<f64>(10, 45, 0).is_ok());
    }

    #[test]
    fn barbell_shapes() {
        let g = barbell::<f64>(6).unwrap();
        assert_eq!(g.node_count(), 12);
        let g = barbell::<f64>(20).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (40, 381));
        assert!(g.edge_index(19, 20).is_some());
        let g = barbell::<f64>(2).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (4, 3));
        assert_eq!(g.degrees(), vec![1, 2, 2, 1]);
        assert!(barbell::<f64>(1).is_err());
    }

    #[test]
    fn barbell_lobes_partition_nodes() {
        let lobes = Lobes::barbell(20);
        assert_eq!(lobes.right, (0..20).collect::<Vec<_>>());
        assert_eq!(lobes.left, (20..40).collect::<Vec<_>>());
    }

    #[test]
    fn handshake() {
        for seed in 0..10 {
            let g = small_world::<f32>(15, 40, seed).unwrap();
            assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
        }
    }
}
