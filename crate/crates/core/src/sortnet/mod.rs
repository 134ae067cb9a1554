//! Comparator networks over host graphs.
//!
//! A [`Comparator`] routes the smaller element to `lo` and the larger to
//! `hi`. Descending comparators (`lo > hi`) are allowed; the bitonic network
//! needs them to stay hypercube-local. A network sorts when reading its
//! wires in [`ComparatorNetwork::order`] yields a nondecreasing sequence.

mod compile;
mod verify;

use serde::{Deserialize, Serialize};

use crate::topology::{snake_order, Family, Topology};
use crate::{ceil_log2, Error, Result};

pub use compile::{compile_reversible_sort, SortLayout, SortRecord};
pub use verify::{verify_network, VerifyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Comparator {
    /// Receives the minimum.
    pub lo: usize,
    /// Receives the maximum.
    pub hi: usize,
}

impl Comparator {
    pub fn new(lo: usize, hi: usize) -> Self {
        Comparator { lo, hi }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparatorNetwork {
    wires: usize,
    layers: Vec<Vec<Comparator>>,
    order: Vec<usize>,
}

impl ComparatorNetwork {
    /// Builds a network whose sorted output is read in wire-index order.
    pub fn new(wires: usize, layers: Vec<Vec<Comparator>>) -> Result<Self> {
        Self::with_order(wires, layers, (0..wires).collect())
    }

    /// `order[r]` is the wire holding the rank-`r` element after sorting.
    pub fn with_order(wires: usize, layers: Vec<Vec<Comparator>>, order: Vec<usize>) -> Result<Self> {
        if wires == 0 {
            return Err(Error::Network("a network needs at least one wire".into()));
        }
        let mut seen = vec![false; wires];
        if order.len() != wires
            || order.iter().any(|&w| w >= wires || std::mem::replace(&mut seen[w], true))
        {
            return Err(Error::Network("output order is not a permutation of the wires".into()));
        }
        let mut stamp = vec![usize::MAX; wires];
        for (li, layer) in layers.iter().enumerate() {
            for c in layer {
                if c.lo >= wires || c.hi >= wires || c.lo == c.hi {
                    return Err(Error::Network(format!(
                        "bad comparator ({},{}) on {wires} wires",
                        c.lo, c.hi
                    )));
                }
                for w in [c.lo, c.hi] {
                    if std::mem::replace(&mut stamp[w], li) == li {
                        return Err(Error::Network(format!("layer {li} touches wire {w} twice")));
                    }
                }
            }
        }
        Ok(ComparatorNetwork { wires, layers, order })
    }

    pub fn wires(&self) -> usize {
        self.wires
    }

    pub fn layers(&self) -> &[Vec<Comparator>] {
        &self.layers
    }

    /// Number of comparator layers.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Total comparator count, `s(T)`.
    pub fn size(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn comparators(&self) -> impl Iterator<Item = &Comparator> {
        self.layers.iter().flatten()
    }

    /// Copy with the layers `keep` retained, e.g. to build a broken network.
    pub fn truncated(&self, keep: usize) -> ComparatorNetwork {
        ComparatorNetwork {
            wires: self.wires,
            layers: self.layers[..keep.min(self.layers.len())].to_vec(),
            order: self.order.clone(),
        }
    }

    /// Runs the network on `values` with strict comparison; equal elements
    /// never swap. Returns the swap record in network order.
    pub fn apply<T: PartialOrd>(&self, values: &mut [T]) -> SortRecord {
        self.apply_by(values, |a, b| a > b)
    }

    /// Runs the network with a custom strict "greater" predicate.
    pub fn apply_by<T>(&self, values: &mut [T], mut greater: impl FnMut(&T, &T) -> bool) -> SortRecord {
        assert_eq!(values.len(), self.wires);
        let mut bits = Vec::with_capacity(self.size());
        for c in self.comparators() {
            let swap = greater(&values[c.lo], &values[c.hi]);
            if swap {
                values.swap(c.lo, c.hi);
            }
            bits.push(swap);
        }
        SortRecord { swap_bits: bits }
    }

    /// Values read in rank order.
    pub fn ranked<T: Clone>(&self, values: &[T]) -> Vec<T> {
        self.order.iter().map(|&w| values[w].clone()).collect()
    }

    pub fn to_json(&self) -> NetworkJson {
        let identity = self.order.iter().enumerate().all(|(r, &w)| r == w);
        NetworkJson {
            wires: self.wires,
            layers: self
                .layers
                .iter()
                .map(|l| l.iter().map(|c| [c.lo, c.hi]).collect())
                .collect(),
            order: (!identity).then(|| self.order.clone()),
        }
    }

    pub fn from_json(json: &NetworkJson) -> Result<Self> {
        let layers = json
            .layers
            .iter()
            .map(|l| l.iter().map(|p| Comparator::new(p[0], p[1])).collect())
            .collect();
        match &json.order {
            Some(order) => Self::with_order(json.wires, layers, order.clone()),
            None => Self::new(json.wires, layers),
        }
    }
}

/// On-disk network format. Each comparator is `[min_wire, max_wire]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkJson {
    pub wires: usize,
    pub layers: Vec<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
}

/// Bitonic sorter on `2^t` wires, depth `t(t+1)/2`. Every comparator joins
/// wires differing in exactly one bit.
pub fn bitonic_network(t: usize) -> Result<ComparatorNetwork> {
    if t == 0 || t > 24 {
        return Err(Error::InvalidParameter(format!("bitonic order t={t} outside 1..=24")));
    }
    let wires = 1usize << t;
    let mut layers = Vec::with_capacity(t * (t + 1) / 2);
    for s in 1..=t {
        for j in (0..s).rev() {
            let mut layer = Vec::with_capacity(wires / 2);
            for i in 0..wires {
                let p = i ^ (1 << j);
                if p > i {
                    let ascending = i & (1 << s) == 0;
                    layer.push(if ascending { Comparator::new(i, p) } else { Comparator::new(p, i) });
                }
            }
            layers.push(layer);
        }
    }
    ComparatorNetwork::new(wires, layers)
}

fn oets_layer(first: usize, n: usize, parity: usize, stride: usize, ascending: bool) -> Vec<Comparator> {
    (parity..n.saturating_sub(1))
        .step_by(2)
        .map(|i| {
            let (a, b) = (first + i * stride, first + (i + 1) * stride);
            if ascending { Comparator::new(a, b) } else { Comparator::new(b, a) }
        })
        .collect()
}

/// Odd-even transposition sort on a line of `n` wires: `n` layers
/// alternating even and odd adjacent pairs. Empty layers (n = 2) are kept.
pub fn oets_network(n: usize) -> Result<ComparatorNetwork> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("odd-even transposition needs n >= 2, got {n}")));
    }
    let layers = (0..n).map(|r| oets_layer(0, n, r % 2, 1, true)).collect();
    ComparatorNetwork::new(n, layers)
}

/// Shearsort on a row-major `rows x cols` grid, sorted in snake order:
/// `ceil(log2 rows) + 1` row phases (even rows ascending, odd rows
/// descending) interleaved with column phases, each phase an odd-even
/// transposition sort.
pub fn grid_network(rows: usize, cols: usize) -> Result<ComparatorNetwork> {
    if rows == 0 || cols == 0 || rows * cols < 2 {
        return Err(Error::InvalidParameter(format!("grid {rows}x{cols} has fewer than 2 cells")));
    }
    let rounds = ceil_log2(rows);
    let mut layers = Vec::new();
    for phase in 0..=rounds {
        for step in 0..cols {
            let mut layer = Vec::new();
            for r in 0..rows {
                layer.extend(oets_layer(r * cols, cols, step % 2, 1, r % 2 == 0));
            }
            layers.push(layer);
        }
        if phase < rounds {
            for step in 0..rows {
                let mut layer = Vec::new();
                for c in 0..cols {
                    layer.extend(oets_layer(c, rows, step % 2, cols, true));
                }
                layers.push(layer);
            }
        }
    }
    ComparatorNetwork::with_order(rows * cols, layers, snake_order(rows, cols))
}

/// Wire-to-node map with `per_node` consecutive wires on each node.
pub fn blocked_assignment(wires: usize, per_node: usize) -> Vec<usize> {
    (0..wires).map(|w| w / per_node).collect()
}

/// True iff every comparator joins wires on equal or adjacent nodes.
pub fn locality_check(net: &ComparatorNetwork, topo: &Topology, assign: &[usize]) -> bool {
    assert_eq!(assign.len(), net.wires(), "assignment must cover every wire");
    net.comparators()
        .all(|c| topo.is_local(assign[c.lo], assign[c.hi]))
}

/// A sorting network on `per_node` wires per node of `topo`, local under
/// [`blocked_assignment`]: odd-even transposition on lines, bitonic on
/// hypercubes and complete graphs, shearsort on grids. Other graphs get
/// odd-even transposition if it happens to be local.
pub fn local_network(topo: &Topology, per_node: usize) -> Result<ComparatorNetwork> {
    let wires = topo.node_count() * per_node;
    let net = match topo.family() {
        Family::Hypercube => bitonic_network(wires.trailing_zeros() as usize)?,
        Family::Complete if wires.is_power_of_two() && wires >= 2 => bitonic_network(wires.trailing_zeros() as usize)?,
        Family::Grid2d => {
            let (rows, cols) = topo.grid_shape().ok_or_else(|| Error::Topology("grid without shape".into()))?;
            grid_network(rows, cols * per_node)?
        }
        _ => oets_network(wires)?,
    };
    if !locality_check(&net, topo, &blocked_assignment(wires, per_node)) {
        return Err(Error::Network(format!("no local sorting network known for this {} graph", topo.family())));
    }
    Ok(net)
}
