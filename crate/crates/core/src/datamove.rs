//! Data moving: the permutation unitary `V_N` and its compile-time SWAP
//! schedule variant.
//!
//! Every node `i` holds two packets, `2i` (question) and `2i + 1` (answer).
//! A packet is `[flag, address, data]` with the flag as the low bit of the
//! sort key, so a question (`q = 0`) sorts before the answer (`a = 1`) of
//! the same address. The circuit formats packets, sorts them, hands each
//! answer's data to the question just before it, and unsorts.

use crate::bits_for;
use crate::revcirc::{CircuitBuilder, Register, RegisterKind, ReversibleCircuit};
use crate::sortnet::{compile_reversible_sort, ComparatorNetwork};
use crate::{Error, Result};

/// Where the destinations of `V_N` come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destinations {
    /// Fixed at build time: output slot `i` receives `x[perm[i]]`.
    Classical(Vec<usize>),
    /// Read from an index register `j` of `N` addresses.
    Quantum,
}

/// Wire offsets of the packets used by `V_N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketLayout {
    pub nodes: usize,
    pub address_bits: usize,
    pub data_bits: usize,
}

impl PacketLayout {
    pub fn new(nodes: usize, data_bits: usize) -> Self {
        PacketLayout { nodes, address_bits: bits_for(nodes), data_bits }
    }

    pub fn packets(&self) -> usize {
        2 * self.nodes
    }

    /// Sort key width: flag plus address.
    pub fn key_bits(&self) -> usize {
        self.address_bits + 1
    }

    pub fn packet_bits(&self) -> usize {
        self.key_bits() + self.data_bits
    }

    pub fn flag(&self, p: usize) -> usize {
        p * self.packet_bits()
    }

    pub fn address(&self, p: usize, i: usize) -> usize {
        self.flag(p) + 1 + i
    }

    pub fn data(&self, p: usize, i: usize) -> usize {
        self.flag(p) + self.key_bits() + i
    }

    pub fn total_bits(&self) -> usize {
        self.packets() * self.packet_bits()
    }

    /// Node hosting packet `p`.
    pub fn node_of(&self, p: usize) -> usize {
        p / 2
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::NotPermutation(format!("expected {n} entries, got {}", perm.len())));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n {
            return Err(Error::NotPermutation(format!("entry {p} out of range 0..{n}")));
        }
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::NotPermutation(format!("duplicate destination {p}")));
        }
    }
    Ok(())
}

/// Builds `V_N`: `|x_0 .. x_{N-1}>` to `|x_{j_0} .. x_{j_{N-1}}>`.
///
/// Registers: `j` (quantum destinations only, `N` little-endian addresses),
/// `x` (`N` blocks of `d` bits), and ancillas `packets`, `sort_bits` and
/// scratch, all returned to zero. Stage-depth is `2 L + 3` for a network of
/// `L` layers.
pub fn build_data_mover(
    n: usize,
    d: usize,
    net: &ComparatorNetwork,
    dest: &Destinations,
) -> Result<ReversibleCircuit> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("V_N needs N >= 1 and d >= 1".into()));
    }
    if net.wires() != 2 * n {
        return Err(Error::Network(format!(
            "network has {} wires, V_N needs {}",
            net.wires(),
            2 * n
        )));
    }
    if let Destinations::Classical(perm) = dest {
        check_permutation(perm, n)?;
    }
    let lay = PacketLayout::new(n, d);
    let a = lay.address_bits;
    let mut b = CircuitBuilder::new();
    let j = matches!(dest, Destinations::Quantum)
        .then(|| b.register("j", n * a, RegisterKind::Data));
    let x = b.register("x", n * d, RegisterKind::Data);
    let packets = b.register("packets", lay.total_bits(), RegisterKind::Ancilla);
    let sort_bits = b.register("sort_bits", net.size(), RegisterKind::Ancilla);
    let pk = |bit: usize| packets.start + bit;

    // Question addresses for packets 2i, emitted by F and again by F-hat.
    let address_gates = |b: &mut CircuitBuilder| {
        for i in 0..n {
            for t in 0..a {
                let target = pk(lay.address(2 * i, t));
                match (dest, j) {
                    (Destinations::Classical(perm), _) => {
                        if perm[i] >> t & 1 == 1 {
                            b.x(target);
                        }
                    }
                    (Destinations::Quantum, Some(jr)) => b.cnot(jr.start + i * a + t, target),
                    (Destinations::Quantum, None) => unreachable!(),
                }
            }
        }
    };
    let answer_gates = |b: &mut CircuitBuilder| {
        for i in 0..n {
            let p = 2 * i + 1;
            b.x(pk(lay.flag(p)));
            for t in 0..a {
                if i >> t & 1 == 1 {
                    b.x(pk(lay.address(p, t)));
                }
            }
            for t in 0..d {
                b.swap(x.start + i * d + t, pk(lay.data(p, t)));
            }
        }
    };

    b.begin_stage("format", 1);
    address_gates(&mut b);
    answer_gates(&mut b);

    let sort = compile_reversible_sort(net, lay.key_bits(), d)?;
    b.begin_stage("sort", net.depth());
    let emb = b.embed(&sort, &[("elements", packets), ("sort_bits", sort_bits)]);

    b.begin_stage("permute", 1);
    let order = net.order();
    for m in 0..n {
        for t in 0..d {
            b.swap(pk(lay.data(order[2 * m], t)), pk(lay.data(order[2 * m + 1], t)));
        }
    }

    b.begin_stage("unsort", net.depth());
    b.append_inverse(&sort, &emb.map);
    b.release(emb.scratch);

    b.begin_stage("unformat", 1);
    for i in 0..n {
        let p = 2 * i + 1;
        b.x(pk(lay.flag(p)));
        for t in 0..a {
            if i >> t & 1 == 1 {
                b.x(pk(lay.address(p, t)));
            }
        }
        for t in 0..d {
            b.swap(x.start + i * d + t, pk(lay.data(2 * i, t)));
        }
    }
    address_gates(&mut b);
    Ok(b.finish())
}

/// Layers of whole-register SWAPs realizing a fixed permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapSchedule {
    pub slots: usize,
    pub layers: Vec<Vec<(usize, usize)>>,
}

impl SwapSchedule {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn swap_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Replays the schedule on an array of registers.
    pub fn apply<T>(&self, values: &mut [T]) {
        for &(a, b) in self.layers.iter().flatten() {
            values.swap(a, b);
        }
    }

    /// Reversed schedule, realizing the inverse permutation.
    pub fn inverse(&self) -> SwapSchedule {
        SwapSchedule { slots: self.slots, layers: self.layers.iter().rev().cloned().collect() }
    }

    /// Bit-level circuit over a register `x` of `slots * d` bits.
    pub fn to_circuit(&self, d: usize) -> ReversibleCircuit {
        let mut b = CircuitBuilder::new();
        let x = b.register("x", self.slots * d, RegisterKind::Data);
        self.emit(&mut b, &x, d);
        b.finish()
    }

    /// Emits the schedule onto `reg`, slot `s` at bits `s*d..(s+1)*d`.
    pub fn emit(&self, b: &mut CircuitBuilder, reg: &Register, d: usize) {
        for &(s, t) in self.layers.iter().flatten() {
            for i in 0..d {
                b.swap(reg.start + s * d + i, reg.start + t * d + i);
            }
        }
    }
}

/// Precomputes the moves of `net` for a known permutation: slot `i` ends up
/// holding the register that started in slot `perm[i]`. Comparators that
/// would exchange become SWAPs, the rest vanish, and empty layers are
/// dropped.
pub fn compile_fixed_permutation(perm: &[usize], net: &ComparatorNetwork) -> Result<SwapSchedule> {
    let n = net.wires();
    check_permutation(perm, n)?;
    let mut rank_of_wire = vec![0; n];
    for (r, &w) in net.order().iter().enumerate() {
        rank_of_wire[w] = r;
    }
    // Element starting in slot perm[i] must finish on wire i.
    let mut keys = vec![0; n];
    for (i, &src) in perm.iter().enumerate() {
        keys[src] = rank_of_wire[i];
    }
    let mut layers = Vec::new();
    for layer in net.layers() {
        let mut swaps = Vec::new();
        for c in layer {
            if keys[c.lo] > keys[c.hi] {
                keys.swap(c.lo, c.hi);
                swaps.push((c.lo.min(c.hi), c.lo.max(c.hi)));
            }
        }
        if !swaps.is_empty() {
            layers.push(swaps);
        }
    }
    Ok(SwapSchedule { slots: n, layers })
}
