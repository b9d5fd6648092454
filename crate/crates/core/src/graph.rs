//! Undirected simple graphs over taxpayer indices.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};

/// Undirected graph without self-loops, stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Build a graph from arbitrary pairs; duplicates and reversed pairs
    /// collapse to one edge.
    pub fn from_edge_list<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut sets = vec![BTreeSet::new(); n];
        for (u, v) in pairs {
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            sets[u].insert(v);
            sets[v].insert(u);
        }
        Ok(Self {
            adj: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    /// `n` isolated taxpayers.
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
        }
    }

    /// Node 0 joined to every other node.
    pub fn star(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize {
                what: "star size",
                min: 2,
                got: n,
            });
        }
        Self::from_edge_list(n, (1..n).map(|leaf| (0, leaf)))
    }

    /// `h` rows by `w` columns with wraparound in both directions. Node
    /// `(row, col)` has index `row * w + col`.
    pub fn torus(w: usize, h: usize) -> Result<Self> {
        for (what, got) in [("torus width", w), ("torus height", h)] {
            if got < 3 {
                return Err(Error::InvalidSize { what, min: 3, got });
            }
        }
        let idx = |r: usize, c: usize| r * w + c;
        let mut pairs = Vec::with_capacity(2 * w * h);
        for r in 0..h {
            for c in 0..w {
                pairs.push((idx(r, c), idx(r, (c + 1) % w)));
                pairs.push((idx(r, c), idx((r + 1) % h, c)));
            }
        }
        Self::from_edge_list(w * h, pairs)
    }

    /// Parse the edge-list text format: one `u v` pair per line, 0-based,
    /// blank lines and `#` comments ignored. Without an explicit `n` the node
    /// count is one past the largest index seen.
    pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let mut next = || -> Result<usize> {
                let tok = fields.next().ok_or_else(|| Error::Parse {
                    line: lineno + 1,
                    msg: "expected two node indices".into(),
                })?;
                tok.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    msg: format!("`{tok}` is not a node index"),
                })
            };
            let u = next()?;
            let v = next()?;
            if fields.next().is_some() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: "trailing fields after edge".into(),
                });
            }
            pairs.push((u, v));
        }
        let inferred = pairs.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        Self::from_edge_list(n.unwrap_or(inferred), pairs)
    }

    pub fn read_edge_list(path: impl AsRef<Path>, n: Option<usize>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_edge_list(&text, n)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adj[x].len()
    }

    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.adj[x]
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.adj[x].binary_search(&y).is_ok()
    }

    /// Each edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// `x` followed by its neighbours.
    pub fn closed_neighborhood(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(x).chain(self.adj[x].iter().copied())
    }

    /// The closed neighbourhood `{x} ∪ {y : y ~ x}`, sorted.
    pub fn neighborhood(&self, x: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.closed_neighborhood(x).collect();
        out.sort_unstable();
        out
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_shape() {
        let g = Graph::star(10).unwrap();
        assert_eq!(g.edge_count(), 9);
        assert_eq!(g.degree(0), 9);
        assert!((1..10).all(|i| g.degree(i) == 1));
        assert_eq!(Graph::star(2).unwrap().edge_count(), 1);
        let g3 = Graph::star(3).unwrap();
        assert!(g3.has_edge(1, 0) && g3.has_edge(0, 2) && !g3.has_edge(1, 2));
        assert!(matches!(Graph::star(1), Err(Error::InvalidSize { .. })));
    }

    #[test]
    fn torus_shape() {
        let g = Graph::torus(10, 10).unwrap();
        assert_eq!(g.node_count(), 100);
        assert_eq!(g.edge_count(), 200);
        assert!((0..100).all(|x| g.degree(x) == 4));
        // (1,1) in 1-based labels is node 0; its neighbours are (1,2), (2,1),
        // (1,10) and (10,1).
        let mut want = vec![1, 10, 9, 90];
        want.sort_unstable();
        assert_eq!(g.neighbors(0), want.as_slice());

        let small = Graph::torus(3, 3).unwrap();
        assert_eq!((small.node_count(), small.edge_count()), (9, 18));
        assert!(Graph::torus(2, 5).is_err());
        assert!(Graph::torus(5, 2).is_err());
    }

    #[test]
    fn rectangular_torus_is_four_regular() {
        let g = Graph::torus(7, 4).unwrap();
        assert_eq!(g.edge_count(), 2 * 7 * 4);
        assert!((0..28).all(|x| g.degree(x) == 4));
    }

    #[test]
    fn edge_list_dedup_and_validation() {
        let g = Graph::from_edge_list(2, [(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(matches!(
            Graph::from_edge_list(3, [(0, 0)]),
            Err(Error::SelfLoop(0))
        ));
        assert!(matches!(
            Graph::from_edge_list(3, [(0, 3)]),
            Err(Error::NodeOutOfRange { node: 3, n: 3 })
        ));
        let g = Graph::from_edge_list(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(g.component_count(), 2);
    }

    #[test]
    fn neighborhoods() {
        let star = Graph::star(10).unwrap();
        assert_eq!(star.neighborhood(0), (0..10).collect::<Vec<_>>());
        assert_eq!(star.neighborhood(3), vec![0, 3]);
        let torus = Graph::torus(10, 10).unwrap();
        assert!((0..100).all(|x| torus.neighborhood(x).len() == 5));
        assert_eq!(Graph::empty(1).neighborhood(0), vec![0]);
    }

    #[test]
    fn parse_text_format() {
        let text = "# a path\n0 1\n\n1 2  # trailing comment\n2 1\n";
        let g = Graph::parse_edge_list(text, None).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
        let g = Graph::parse_edge_list(text, Some(5)).unwrap();
        assert_eq!(g.node_count(), 5);
        assert!(matches!(
            Graph::parse_edge_list("0 x\n", None),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Graph::parse_edge_list("0\n", None),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Graph::parse_edge_list("0 1 2\n", None),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Graph::parse_edge_list("4 4\n", None),
            Err(Error::SelfLoop(4))
        ));
    }

    #[test]
    fn edges_iterates_each_once() {
        let g = Graph::torus(4, 3).unwrap();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges.len(), g.edge_count());
        assert!(edges.iter().all(|&(u, v)| u < v && g.has_edge(v, u)));
    }
}
