//! Host graphs over which processors (and comparators) are laid out.
//!
//! Nodes are 0-based contiguous integers. Edges are stored as sorted
//! `(u, v)` pairs with `u < v`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Line,
    Grid2d,
    Hypercube,
    Complete,
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Line => "line",
            Family::Grid2d => "grid2d",
            Family::Hypercube => "hypercube",
            Family::Complete => "complete",
            Family::Custom => "custom",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "line" => Ok(Family::Line),
            "grid" | "grid2d" => Ok(Family::Grid2d),
            "hypercube" => Ok(Family::Hypercube),
            "complete" => Ok(Family::Complete),
            "custom" => Ok(Family::Custom),
            other => Err(Error::Topology(format!("unknown family `{other}`"))),
        }
    }
}

/// Size descriptor passed to [`build_topology`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologySpec {
    Line(usize),
    Grid { rows: usize, cols: usize },
    Hypercube(usize),
    Complete(usize),
    Custom { n: usize, edges: Vec<(usize, usize)> },
}

impl TopologySpec {
    pub fn family(&self) -> Family {
        match self {
            TopologySpec::Line(_) => Family::Line,
            TopologySpec::Grid { .. } => Family::Grid2d,
            TopologySpec::Hypercube(_) => Family::Hypercube,
            TopologySpec::Complete(_) => Family::Complete,
            TopologySpec::Custom { .. } => Family::Custom,
        }
    }
}

/// A connected simple graph on `n` nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    n: usize,
    family: Family,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    grid: Option<(usize, usize)>,
}

/// Builds and validates a host graph.
pub fn build_topology(spec: TopologySpec) -> Result<Topology> {
    let family = spec.family();
    let mut grid = None;
    let (n, edges) = match spec {
        TopologySpec::Line(n) => {
            positive(n)?;
            (n, (1..n).map(|v| (v - 1, v)).collect::<Vec<_>>())
        }
        TopologySpec::Grid { rows, cols } => {
            positive(rows)?;
            positive(cols)?;
            grid = Some((rows, cols));
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    if c + 1 < cols {
                        edges.push((v, v + 1));
                    }
                    if r + 1 < rows {
                        edges.push((v, v + cols));
                    }
                }
            }
            (rows * cols, edges)
        }
        TopologySpec::Hypercube(n) => {
            positive(n)?;
            if !n.is_power_of_two() {
                return Err(Error::Topology(format!(
                    "hypercube size {n} is not a power of two"
                )));
            }
            let dim = n.trailing_zeros();
            let mut edges = Vec::new();
            for v in 0..n {
                for b in 0..dim {
                    let u = v ^ (1 << b);
                    if v < u {
                        edges.push((v, u));
                    }
                }
            }
            (n, edges)
        }
        TopologySpec::Complete(n) => {
            positive(n)?;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    edges.push((u, v));
                }
            }
            (n, edges)
        }
        TopologySpec::Custom { n, edges } => {
            positive(n)?;
            (n, edges)
        }
    };
    Topology::from_parts(n, family, edges, grid)
}

fn positive(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Topology("graph must have at least one node".into()))
    } else {
        Ok(())
    }
}

impl Topology {
    fn from_parts(
        n: usize,
        family: Family,
        raw_edges: Vec<(usize, usize)>,
        grid: Option<(usize, usize)>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(u, v) in &raw_edges {
            if u >= n || v >= n {
                return Err(Error::Topology(format!("edge ({u},{v}) leaves 0..{n}")));
            }
            if u == v {
                return Err(Error::Topology(format!("self-loop at node {u}")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::Topology(format!("duplicate edge ({u},{v})")));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let topo = Topology {
            n,
            family,
            edges,
            adjacency,
            grid,
        };
        if !topo.is_connected() {
            return Err(Error::Topology("graph is not connected".into()));
        }
        if family == Family::Hypercube {
            topo.check_hypercube()?;
        }
        Ok(topo)
    }

    fn check_hypercube(&self) -> Result<()> {
        if !self.n.is_power_of_two() {
            return Err(Error::Topology("hypercube size must be a power of two".into()));
        }
        let dim = self.n.trailing_zeros() as usize;
        let ok = self.edges.len() == self.n * dim / 2
            && self.edges.iter().all(|&(u, v)| (u ^ v).count_ones() == 1);
        if ok {
            Ok(())
        } else {
            Err(Error::Topology("edges are not the hypercube bit flips".into()))
        }
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &u in &self.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == self.n
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `(rows, cols)` for grid topologies.
    pub fn grid_shape(&self) -> Option<(usize, usize)> {
        self.grid
    }

    /// Sorted adjacency list of `v`.
    pub fn neighbors(&self, v: usize) -> Result<&[usize]> {
        self.adjacency
            .get(v)
            .map(Vec::as_slice)
            .ok_or(Error::NodeOutOfRange { node: v, n: self.n })
    }

    pub fn are_adjacent(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// True when `u == v` or `u` and `v` share an edge.
    pub fn is_local(&self, u: usize, v: usize) -> bool {
        u == v || self.are_adjacent(u, v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> TopologyJson {
        TopologyJson {
            n: self.n,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
            family: self.family,
            rows: self.grid.map(|g| g.0),
            cols: self.grid.map(|g| g.1),
        }
    }

    pub fn from_json(json: &TopologyJson) -> Result<Self> {
        let edges = json.edges.iter().map(|e| (e[0], e[1])).collect();
        let grid = match (json.rows, json.cols) {
            (Some(r), Some(c)) if r * c == json.n => Some((r, c)),
            (None, None) => None,
            _ => return Err(Error::Topology("rows*cols must equal n".into())),
        };
        positive(json.n)?;
        Topology::from_parts(json.n, json.family, edges, grid)
    }
}

/// On-disk graph format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
}

/// Boustrophedon order of a `rows x cols` row-major grid: even rows run
/// left to right, odd rows right to left.
pub fn snake_order(rows: usize, cols: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        if r % 2 == 0 {
            order.extend((0..cols).map(|c| r * cols + c));
        } else {
            order.extend((0..cols).rev().map(|c| r * cols + c));
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypercube_eight() {
        let t = build_topology(TopologySpec::Hypercube(8)).unwrap();
        assert_eq!(t.node_count(), 8);
        assert_eq!(t.edges().len(), 12);
        assert!((0..8).all(|v| t.degree(v) == 3));
        assert_eq!(t.neighbors(0).unwrap(), &[1, 2, 4]);
    }

    #[test]
    fn line_four() {
        let t = build_topology(TopologySpec::Line(4)).unwrap();
        assert_eq!(t.edges(), &[(0, 1), (1, 2), (2, 3)]);
        assert!(t.max_degree() <= 2);
        assert_eq!(t.neighbors(3).unwrap(), &[2]);
    }

    #[test]
    fn complete_graphs() {
        let t = build_topology(TopologySpec::Complete(5)).unwrap();
        assert_eq!(t.edges().len(), 10);
        let t3 = build_topology(TopologySpec::Complete(3)).unwrap();
        assert_eq!(t3.neighbors(1).unwrap(), &[0, 2]);
    }

    #[test]
    fn grid_valency() {
        let t = build_topology(TopologySpec::Grid { rows: 3, cols: 4 }).unwrap();
        assert_eq!(t.node_count(), 12);
        assert!(t.max_degree() <= 4);
        assert_eq!(t.neighbors(5).unwrap(), &[1, 4, 6, 9]);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(build_topology(TopologySpec::Hypercube(6)).is_err());
        assert!(build_topology(TopologySpec::Line(0)).is_err());
        assert!(build_topology(TopologySpec::Complete(0)).is_err());
    }

    #[test]
    fn rejects_bad_custom_graphs() {
        let loop_ = TopologySpec::Custom { n: 2, edges: vec![(0, 0), (0, 1)] };
        assert!(build_topology(loop_).is_err());
        let dup = TopologySpec::Custom { n: 2, edges: vec![(0, 1), (1, 0)] };
        assert!(build_topology(dup).is_err());
        let split = TopologySpec::Custom { n: 4, edges: vec![(0, 1), (2, 3)] };
        assert!(build_topology(split).is_err());
        let ok = TopologySpec::Custom { n: 3, edges: vec![(0, 1), (1, 2)] };
        assert!(build_topology(ok).is_ok());
    }

    #[test]
    fn neighbor_out_of_range() {
        let t = build_topology(TopologySpec::Line(4)).unwrap();
        assert!(matches!(t.neighbors(4), Err(Error::NodeOutOfRange { .. })));
    }

    #[test]
    fn hypercube_valency_is_dimension() {
        for dim in 0..7 {
            let t = build_topology(TopologySpec::Hypercube(1 << dim)).unwrap();
            assert!((0..t.node_count()).all(|v| t.degree(v) == dim));
        }
    }

    #[test]
    fn json_round_trip() {
        let t = build_topology(TopologySpec::Grid { rows: 2, cols: 3 }).unwrap();
        let s = serde_json::to_string(&t.to_json()).unwrap();
        let back: TopologyJson = serde_json::from_str(&s).unwrap();
        assert_eq!(Topology::from_json(&back).unwrap(), t);
        let hc: TopologyJson =
            serde_json::from_str(r#"{"n":2,"edges":[[0,1]],"family":"hypercube"}"#).unwrap();
        assert_eq!(Topology::from_json(&hc).unwrap().family(), Family::Hypercube);
    }

    #[test]
    fn snake() {
        assert_eq!(snake_order(2, 3), vec![0, 1, 2, 5, 4, 3]);
    }
}
