//! Finite simple graphs with a canonical edge orientation.
//!
//! Every edge is stored as `(i, j)` with `i < j`; that pair is also the
//! orientation used by the edge-weight process, so the weight of an edge is
//! `opinion[j] - opinion[i]`.

mod clique;
mod coloring;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use clique::{
    clique_peel, enumerate_clique_peels, max_clique, CliqueMode, CliquePeel, EXACT_CLIQUE_LIMIT,
    PEEL_ENUMERATION_LIMIT,
};
pub use coloring::{chromatic_number_exact, greedy_coloring, Coloring, EXACT_COLORING_LIMIT};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    incident: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list. Pairs are normalized to `i < j`;
    /// edge indices follow the order of `edges`.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "graph needs at least one vertex".into(),
            ));
        }
        let mut seen = HashSet::new();
        let mut normalized = Vec::new();
        for (a, b) in edges {
            for index in [a, b] {
                if index >= n {
                    return Err(Error::VertexOutOfRange { index, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::DuplicateEdge(e.0, e.1));
            }
            normalized.push(e);
        }
        let mut neighbors = vec![Vec::new(); n];
        let mut incident = vec![Vec::new(); n];
        for (k, &(i, j)) in normalized.iter().enumerate() {
            neighbors[i].push(j);
            neighbors[j].push(i);
            incident[i].push(k);
            incident[j].push(k);
        }
        Ok(Graph {
            n,
            edges: normalized,
            neighbors,
            incident,
        })
    }

    pub fn path(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "path needs at least one vertex".into(),
            ));
        }
        Self::from_edges(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!(
                "cycle length must be at least 3, got {n}"
            )));
        }
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn complete(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "complete graph needs at least one vertex".into(),
            ));
        }
        Self::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    /// `width x height` grid with periodic boundary in both axes. Vertex
    /// `(x, y)` has index `y * width + x`, matching row-major snapshots.
    pub fn torus(width: usize, height: usize) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::InvalidArgument(format!(
                "torus dimensions must be at least 3x3, got {width}x{height}"
            )));
        }
        let idx = |x: usize, y: usize| y * width + x;
        let mut edges = Vec::with_capacity(2 * width * height);
        for y in 0..height {
            for x in 0..width {
                edges.push((idx(x, y), idx((x + 1) % width, y)));
                edges.push((idx(x, y), idx(x, (y + 1) % height)));
            }
        }
        Self::from_edges(width * height, edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> (usize, usize) {
        self.edges[k]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Indices of the edges touching `v`.
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let (short, other) = if self.degree(a) <= self.degree(b) {
            (a, b)
        } else {
            (b, a)
        };
        self.neighbors[short].contains(&other)
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.neighbors[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Errors unless the graph is connected; dynamics entry points call this.
    pub fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::Disconnected)
        }
    }

    /// Two-coloring by breadth-first search, component by component.
    pub fn two_coloring(&self) -> Option<Vec<usize>> {
        let mut side = vec![usize::MAX; self.n];
        let mut queue = std::collections::VecDeque::new();
        for start in 0..self.n {
            if side[start] != usize::MAX {
                continue;
            }
            side[start] = 0;
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                for &w in &self.neighbors[v] {
                    if side[w] == usize::MAX {
                        side[w] = 1 - side[v];
                        queue.push_back(w);
                    } else if side[w] == side[v] {
                        return None;
                    }
                }
            }
        }
        Some(side)
    }

    pub fn is_bipartite(&self) -> bool {
        self.two_coloring().is_some()
    }

    pub fn is_tree(&self) -> bool {
        self.n_edges() + 1 == self.n && self.is_connected()
    }

    /// Subgraph induced by `vertices` (in the given order), together with the
    /// map from new indices back to the original ones. May be disconnected.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Option<(Graph, Vec<usize>)> {
        if vertices.is_empty() {
            return None;
        }
        let mut position = vec![usize::MAX; self.n];
        for (k, &v) in vertices.iter().enumerate() {
            position[v] = k;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(i, j)| position[i] != usize::MAX && position[j] != usize::MAX)
            .map(|&(i, j)| (position[i], position[j]));
        let g =
            Graph::from_edges(vertices.len(), edges).expect("induced subgraph of a valid graph");
        Some((g, vertices.to_vec()))
    }

    /// Adjacency as bitmasks; only for graphs with at most 64 vertices.
    pub(crate) fn adjacency_masks(&self) -> Vec<u64> {
        assert!(self.n <= 64, "bitmask adjacency needs n <= 64");
        let mut masks = vec![0u64; self.n];
        for &(i, j) in &self.edges {
            masks[i] |= 1 << j;
            masks[j] |= 1 << i;
        }
        masks
    }

    /// Renders the edge-list text format accepted by [`parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for &(i, j) in &self.edges {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }
}

/// Parses the edge-list format: a header line `N M`, then `M` lines `i j`.
/// Lines starting with `#` are comments.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let parse_pair = |line: usize, s: &str| -> Result<(usize, usize)> {
        let mut it = s.split_whitespace();
        let mut next = || -> Result<usize> {
            let tok = it.next().ok_or_else(|| Error::Parse {
                line,
                message: "expected two integers".into(),
            })?;
            tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("not a nonnegative integer: {tok:?}"),
            })
        };
        let pair = (next()?, next()?);
        if it.next().is_some() {
            return Err(Error::Parse {
                line,
                message: "expected exactly two integers".into(),
            });
        }
        Ok(pair)
    };

    let (line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let (n, m) = parse_pair(line, header)?;
    let mut edges = Vec::with_capacity(m);
    let mut last_line = line;
    for (line, body) in lines {
        if edges.len() == m {
            return Err(Error::Parse {
                line,
                message: format!("more than the declared {m} edges"),
            });
        }
        edges.push(parse_pair(line, body)?);
        last_line = line;
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: last_line,
            message: format!("declared {m} edges, found {}", edges.len()),
        });
    }
    Graph::from_edges(n, edges)
}

/// Graph description used on command lines: `path:N`, `cycle:N`,
/// `complete:N` or `torus:WxH`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphSpec {
    Path(usize),
    Cycle(usize),
    Complete(usize),
    Torus(usize, usize),
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        match *self {
            GraphSpec::Path(n) => Graph::path(n),
            GraphSpec::Cycle(n) => Graph::cycle(n),
            GraphSpec::Complete(n) => Graph::complete(n),
            GraphSpec::Torus(w, h) => Graph::torus(w, h),
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Path(n) => write!(f, "path:{n}"),
            GraphSpec::Cycle(n) => write!(f, "cycle:{n}"),
            GraphSpec::Complete(n) => write!(f, "complete:{n}"),
            GraphSpec::Torus(w, h) => write!(f, "torus:{w}x{h}"),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidArgument(format!(
                "bad graph spec {s:?}; expected path:N, cycle:N, complete:N or torus:WxH"
            ))
        };
        let (kind, size) = s.split_once(':').ok_or_else(bad)?;
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        match kind {
            "path" => Ok(GraphSpec::Path(num(size)?)),
            "cycle" => Ok(GraphSpec::Cycle(num(size)?)),
            "complete" => Ok(GraphSpec::Complete(num(size)?)),
            "torus" => {
                let (w, h) = size.split_once('x').ok_or_else(bad)?;
                Ok(GraphSpec::Torus(num(w)?, num(h)?))
            }
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_five() {
        let g = Graph::path(5).unwrap();
        assert_eq!(g.n_vertices(), 5);
        assert_eq!(g.n_edges(), 4);
        assert!(g.is_connected());
        assert!(g.is_bipartite());
        assert!(g.is_tree());
    }

    #[test]
    fn torus_three_by_three() {
        let g = Graph::torus(3, 3).unwrap();
        assert_eq!(g.n_vertices(), 9);
        assert_eq!(g.n_edges(), 18);
        assert!((0..9).all(|v| g.degree(v) == 4));
    }

    #[test]
    fn torus_and_cycle_size_limits() {
        assert!(Graph::torus(2, 5).is_err());
        assert!(Graph::torus(5, 2).is_err());
        assert!(Graph::cycle(2).is_err());
        assert!(Graph::path(0).is_err());
    }

    #[test]
    fn complete_six() {
        let g = Graph::complete(6).unwrap();
        assert_eq!(g.n_edges(), 15);
    }

    #[test]
    fn cycle_parity() {
        assert!(Graph::cycle(4).unwrap().is_bipartite());
        assert!(!Graph::cycle(5).unwrap().is_bipartite());
    }

    #[test]
    fn load_path_three() {
        let g = parse_edge_list("3 2\n0 1\n1 2\n").unwrap();
        assert_eq!(g, Graph::path(3).unwrap());
    }

    #[test]
    fn load_normalizes_orientation() {
        let g = parse_edge_list("2 1\n1 0\n").unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn load_rejects_bad_documents() {
        assert!(matches!(
            parse_edge_list("2 1\n0 0\n"),
            Err(Error::SelfLoop(0))
        ));
        assert!(matches!(
            parse_edge_list("3 2\n0 1\n1 0\n"),
            Err(Error::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            parse_edge_list("3 1\n0 3\n"),
            Err(Error::VertexOutOfRange { index: 3, n: 3 })
        ));
        match parse_edge_list("3 2\n0 1\n1 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            parse_edge_list("3 2\n0 1\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_edge_list("3 1\n0 1\n1 2\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn load_skips_comments() {
        let g = parse_edge_list("# triangle\n3 3\n0 1\n# middle\n1 2\n2 0\n").unwrap();
        assert_eq!(g, Graph::cycle(3).unwrap());
    }

    #[test]
    fn induced_subgraph_can_be_disconnected() {
        let g = Graph::path(4).unwrap();
        let (h, map) = g.induced_subgraph(&[0, 3]).unwrap();
        assert_eq!(h.n_edges(), 0);
        assert!(!h.is_connected());
        assert_eq!(map, vec![0, 3]);
    }

    #[test]
    fn graph_spec_round_trip() {
        for s in ["path:100", "cycle:7", "complete:6", "torus:64x32"] {
            let spec: GraphSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("torus:64".parse::<GraphSpec>().is_err());
        assert!("star:5".parse::<GraphSpec>().is_err());
    }
}
