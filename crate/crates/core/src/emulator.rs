//! Graph-local emulation of arbitrary quantum circuits.
//!
//! Node `v` owns two physical slots: the home slot `2v`, holding logical
//! qubit `v`, and the guest slot `2v + 1`, empty between timeslices. For a
//! two-qubit gate `(a, b)` the gate is assigned to node `a`; a data move
//! brings qubit `b` into `a`'s guest slot, the gate runs locally, and the
//! inverse move puts `b` back. Moves are fixed at compile time, so they
//! are realized as precomputed SWAP schedules over the sorting network.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datamove::{compile_fixed_permutation, SwapSchedule};
use crate::qsim::{QGate, QGateJson, QuantumCircuit};
use crate::sortnet::ComparatorNetwork;
use crate::topology::{Family, Topology};
use crate::{Error, Result};

/// A circuit of one- and two-qubit gates grouped into timeslices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalCircuit {
    width: usize,
    slices: Vec<Vec<QGate>>,
}

impl LogicalCircuit {
    pub fn new(width: usize, slices: Vec<Vec<QGate>>) -> Result<Self> {
        for (i, slice) in slices.iter().enumerate() {
            let mut used = vec![false; width];
            for g in slice {
                let qs = g.qubits();
                if qs.len() > 2 || matches!(g, QGate::PhaseFlip { .. }) {
                    return Err(Error::UnsupportedGate(format!("{g} in a logical circuit")));
                }
                for q in qs {
                    if q >= width {
                        return Err(Error::IndexOutOfRange { index: q, len: width });
                    }
                    if std::mem::replace(&mut used[q], true) {
                        return Err(Error::Circuit(format!("timeslice {i} uses qubit {q} twice")));
                    }
                }
            }
        }
        Ok(LogicalCircuit { width, slices })
    }

    /// Packs a flat gate list into timeslices as early as possible.
    pub fn from_gates(width: usize, gates: Vec<QGate>) -> Result<Self> {
        let mut frontier = vec![0usize; width];
        let mut slices: Vec<Vec<QGate>> = Vec::new();
        for g in gates {
            let qs = g.qubits();
            if let Some(&q) = qs.iter().find(|&&q| q >= width) {
                return Err(Error::IndexOutOfRange { index: q, len: width });
            }
            let at = qs.iter().map(|&q| frontier[q]).max().unwrap_or(0);
            if at == slices.len() {
                slices.push(Vec::new());
            }
            for &q in &qs {
                frontier[q] = at + 1;
            }
            slices[at].push(g);
        }
        Self::new(width, slices)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn slices(&self) -> &[Vec<QGate>] {
        &self.slices
    }

    pub fn depth(&self) -> usize {
        self.slices.len()
    }

    pub fn to_quantum(&self) -> QuantumCircuit {
        QuantumCircuit { width: self.width, gates: self.slices.iter().flatten().cloned().collect() }
    }

    pub fn to_json(&self) -> Result<LogicalCircuitJson> {
        Ok(LogicalCircuitJson {
            width: self.width,
            slices: Some(
                self.slices
                    .iter()
                    .map(|s| s.iter().map(QGateJson::from_gate).collect::<Result<_>>())
                    .collect::<Result<_>>()?,
            ),
            gates: None,
        })
    }

    pub fn from_json(json: &LogicalCircuitJson) -> Result<Self> {
        match (&json.slices, &json.gates) {
            (Some(slices), _) => Self::new(
                json.width,
                slices
                    .iter()
                    .map(|s| s.iter().map(QGateJson::to_gate).collect::<Result<_>>())
                    .collect::<Result<_>>()?,
            ),
            (None, Some(gates)) => {
                Self::from_gates(json.width, gates.iter().map(QGateJson::to_gate).collect::<Result<_>>()?)
            }
            (None, None) => Err(Error::Circuit("circuit JSON needs `slices` or `gates`".into())),
        }
    }
}

/// `{"width": W, "slices": [[{"g": "CNOT", "bits": [0, 3]}]]}`, or a flat
/// `"gates"` list packed on load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalCircuitJson {
    pub width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slices: Option<Vec<Vec<QGateJson>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gates: Option<Vec<QGateJson>>,
}

/// Random circuit over `{H, T, CNOT}`: each slice pairs a random subset of
/// qubits into CNOTs and gives most others a single-qubit gate.
pub fn random_logical_circuit<R: Rng>(width: usize, depth: usize, rng: &mut R) -> LogicalCircuit {
    let mut slices = Vec::with_capacity(depth);
    for _ in 0..depth {
        let mut qs: Vec<usize> = (0..width).collect();
        qs.shuffle(rng);
        let pairs = if width >= 2 { rng.gen_range(0..=width / 2) } else { 0 };
        let mut slice = Vec::new();
        for p in 0..pairs {
            slice.push(QGate::Cnot(qs[2 * p], qs[2 * p + 1]));
        }
        for &q in &qs[2 * pairs..] {
            match rng.gen_range(0..3) {
                0 => slice.push(QGate::H(q)),
                1 => slice.push(QGate::T(q)),
                _ => {}
            }
        }
        slices.push(slice);
    }
    LogicalCircuit { width, slices }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmulateOptions {
    /// Run gates on already-adjacent nodes without moving data.
    pub skip_adjacent: bool,
    /// On complete graphs, route moves as two layers of direct swaps
    /// instead of the network schedule.
    pub direct_on_complete: bool,
}

impl Default for EmulateOptions {
    fn default() -> Self {
        EmulateOptions { skip_adjacent: true, direct_on_complete: true }
    }
}

pub fn home_slot(v: usize) -> usize {
    2 * v
}

pub fn guest_slot(v: usize) -> usize {
    2 * v + 1
}

/// Result of [`assign_gates`] for one timeslice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    /// Node executing each gate of the slice.
    pub processor: Vec<usize>,
    /// Gates whose second qubit is moved into the processor's guest slot.
    pub moved: Vec<bool>,
    /// Slot `i` receives the register from slot `perm[i]`.
    pub perm: Vec<usize>,
}

/// Assigns each gate to the home node of its first qubit and builds the
/// slot permutation that brings each second qubit to that node's guest
/// slot. `skip` decides, per `(a, b)` node pair, whether the move can be
/// skipped.
pub fn assign_gates(
    slice: &[QGate],
    home: &[usize],
    nodes: usize,
    mut skip: impl FnMut(usize, usize) -> bool,
) -> Result<Assignment> {
    let mut perm: Vec<usize> = (0..2 * nodes).collect();
    let mut processor = Vec::with_capacity(slice.len());
    let mut moved = Vec::with_capacity(slice.len());
    let mut busy = vec![false; nodes];
    for g in slice {
        let qs = g.qubits();
        let p = home[qs[0]];
        if std::mem::replace(&mut busy[p], true) {
            return Err(Error::Circuit(format!("node {p} assigned two gates in one timeslice")));
        }
        processor.push(p);
        let is_move = qs.len() == 2 && !skip(p, home[qs[1]]);
        if is_move {
            let (from, to) = (home_slot(home[qs[1]]), guest_slot(p));
            perm[to] = from;
            perm[from] = to;
        }
        moved.push(is_move);
    }
    Ok(Assignment { processor, moved, perm })
}

/// Two layers of transpositions realizing any permutation: each cycle is
/// a product of two reflections.
pub fn direct_schedule(perm: &[usize]) -> SwapSchedule {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut first = Vec::new();
    let mut second = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        // Slot c[k] must receive from c[k+1].
        let mut cycle = vec![start];
        seen[start] = true;
        let mut cur = perm[start];
        while cur != start {
            seen[cur] = true;
            cycle.push(cur);
            cur = perm[cur];
        }
        let m = cycle.len();
        if m < 2 {
            continue;
        }
        // Reflection i -> -i then i -> -1 - i shifts every index down by one.
        for i in 1..m {
            let j = m - i;
            if i < j {
                first.push((cycle[i].min(cycle[j]), cycle[i].max(cycle[j])));
            }
        }
        for i in 0..m {
            let j = (2 * m - 1 - i) % m;
            if i < j {
                second.push((cycle[i].min(cycle[j]), cycle[i].max(cycle[j])));
            }
        }
    }
    let layers = [first, second].into_iter().filter(|l| !l.is_empty()).collect();
    SwapSchedule { slots: n, layers }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlicePlan {
    pub assignment: Assignment,
    pub forward: SwapSchedule,
    /// Gates on physical slots.
    pub local: Vec<QGate>,
    pub back: SwapSchedule,
    /// Stage-depth of this slice: swap layers plus one local layer.
    pub depth: usize,
    /// Stage-depth charged at network granularity: `2 L + 1` when data
    /// moves, else 1.
    pub network_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmulationPlan {
    /// Node hosting each logical qubit.
    pub home: Vec<usize>,
    pub slices: Vec<SlicePlan>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmulationMetrics {
    pub logical_depth: usize,
    pub emulated_depth: usize,
    pub network_depth: usize,
    /// `emulated_depth / logical_depth`.
    pub overhead: f64,
    pub network_overhead: f64,
    pub width: usize,
}

#[derive(Debug, Clone)]
pub struct Emulation {
    pub plan: EmulationPlan,
    pub circuit: QuantumCircuit,
    pub metrics: EmulationMetrics,
}

impl Emulation {
    /// Physical slot of each logical qubit, for equivalence checks.
    pub fn embedding(&self) -> Vec<usize> {
        self.plan.home.iter().map(|&v| home_slot(v)).collect()
    }
}

/// Rewrites `c` into a circuit whose gates all lie on single nodes or
/// edges of `topo`. `net` must have two wires per node, wire `w` on node
/// `w / 2`, and be local to `topo`.
pub fn emulate(
    c: &LogicalCircuit,
    topo: &Topology,
    net: &ComparatorNetwork,
    opts: EmulateOptions,
) -> Result<Emulation> {
    let nodes = topo.node_count();
    if c.width() > nodes {
        return Err(Error::InvalidParameter(format!(
            "{} logical qubits exceed {nodes} nodes",
            c.width()
        )));
    }
    if net.wires() != 2 * nodes {
        return Err(Error::Network(format!(
            "network has {} wires, need two per node ({})",
            net.wires(),
            2 * nodes
        )));
    }
    let home: Vec<usize> = (0..c.width()).collect();
    let direct = opts.direct_on_complete && topo.family() == Family::Complete;
    let mut circuit = QuantumCircuit::new(2 * nodes);
    let mut slices = Vec::with_capacity(c.depth());
    for slice in c.slices() {
        let assignment = assign_gates(slice, &home, nodes, |a, b| opts.skip_adjacent && topo.is_local(a, b))?;
        let forward = if direct {
            direct_schedule(&assignment.perm)
        } else {
            compile_fixed_permutation(&assignment.perm, net)?
        };
        let back = forward.inverse();
        let mut local = Vec::with_capacity(slice.len());
        for (g, (&p, &moved)) in slice.iter().zip(assignment.processor.iter().zip(&assignment.moved)) {
            let qs = g.qubits();
            let mut map = vec![0; c.width()];
            map[qs[0]] = home_slot(p);
            if qs.len() == 2 {
                map[qs[1]] = if moved { guest_slot(p) } else { home_slot(home[qs[1]]) };
            }
            local.push(g.remap(&map));
        }
        let any_move = assignment.moved.iter().any(|&m| m);
        let depth = forward.depth() + 1 + back.depth();
        let network_depth = if any_move {
            if direct { depth } else { 2 * net.depth() + 1 }
        } else {
            1
        };
        for &(s, t) in forward.layers.iter().flatten() {
            circuit.push(QGate::Swap(s, t));
        }
        circuit.gates.extend(local.iter().cloned());
        for &(s, t) in back.layers.iter().flatten() {
            circuit.push(QGate::Swap(s, t));
        }
        slices.push(SlicePlan { assignment, forward, local, back, depth, network_depth });
    }
    if let Some(g) = circuit.gates.iter().find(|g| {
        let qs = g.qubits();
        qs.len() == 2 && !topo.is_local(qs[0] / 2, qs[1] / 2)
    }) {
        return Err(Error::Circuit(format!("emitted gate {g} is not graph-local")));
    }
    let logical_depth = c.depth();
    let emulated_depth: usize = slices.iter().map(|s| s.depth).sum();
    let network_depth: usize = slices.iter().map(|s| s.network_depth).sum();
    let ratio = |x: usize| if logical_depth == 0 { 1.0 } else { x as f64 / logical_depth as f64 };
    let metrics = EmulationMetrics {
        logical_depth,
        emulated_depth,
        network_depth,
        overhead: ratio(emulated_depth),
        network_overhead: ratio(network_depth),
        width: 2 * nodes,
    };
    Ok(Emulation { plan: EmulationPlan { home, slices }, circuit, metrics })
}

/// One row of an overhead table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverheadRow {
    pub family: String,
    pub nodes: usize,
    pub logical_depth: usize,
    pub emulated_depth: usize,
    pub network_depth: usize,
    pub overhead: f64,
    pub network_overhead: f64,
    /// Lower-bound reference `D_G / (log2 N * log2 log2 N)`.
    pub lower_bound_ref: f64,
}

/// Reference curve for the emulation lower bound given a sorting depth.
pub fn lower_bound_reference(dg: usize, nodes: usize) -> f64 {
    let l = (nodes.max(2) as f64).log2();
    let ll = l.log2().max(1.0);
    dg as f64 / (l * ll)
}

/// Emulates each circuit and tabulates the worst overhead per topology.
pub fn overhead_report(
    circuits: &[LogicalCircuit],
    targets: &[(Topology, ComparatorNetwork)],
    opts: EmulateOptions,
) -> Result<Vec<OverheadRow>> {
    let mut rows = Vec::new();
    for (topo, net) in targets {
        let mut worst: Option<OverheadRow> = None;
        for c in circuits {
            let e = emulate(c, topo, net, opts)?;
            let row = OverheadRow {
                family: topo.family().to_string(),
                nodes: topo.node_count(),
                logical_depth: e.metrics.logical_depth,
                emulated_depth: e.metrics.emulated_depth,
                network_depth: e.metrics.network_depth,
                overhead: e.metrics.overhead,
                network_overhead: e.metrics.network_overhead,
                lower_bound_ref: lower_bound_reference(net.depth(), topo.node_count()),
            };
            if worst.as_ref().is_none_or(|w| row.overhead > w.overhead) {
                worst = Some(row);
            }
        }
        rows.extend(worst);
    }
    Ok(rows)
}
