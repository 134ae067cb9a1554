//! Reversible compilation of comparator networks.

use super::ComparatorNetwork;
use crate::revcirc::{CircuitBuilder, Gate, Register, RegisterKind, ReversibleCircuit};
use crate::{Error, Result};

/// Which comparators exchanged their inputs, one bit per comparator in
/// network order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SortRecord {
    pub swap_bits: Vec<bool>,
}

impl SortRecord {
    pub fn len(&self) -> usize {
        self.swap_bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.swap_bits.is_empty()
    }

    pub fn swaps(&self) -> usize {
        self.swap_bits.iter().filter(|&&b| b).count()
    }
}

/// Bit layout of the element register of a compiled sort: element `e`
/// occupies `width()` bits from `e * width()`, key first (little-endian),
/// payload after.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SortLayout {
    pub key_bits: usize,
    pub payload_bits: usize,
    pub elements: usize,
}

impl SortLayout {
    pub fn width(&self) -> usize {
        self.key_bits + self.payload_bits
    }

    pub fn element(&self, e: usize) -> usize {
        e * self.width()
    }

    pub fn key_bit(&self, e: usize, i: usize) -> usize {
        self.element(e) + i
    }

    pub fn payload_bit(&self, e: usize, i: usize) -> usize {
        self.element(e) + self.key_bits + i
    }

    pub fn total_bits(&self) -> usize {
        self.elements * self.width()
    }
}

/// Emits one compiled comparator: `s ^= [key(lo) > key(hi)]`, then swaps
/// the full elements under `s`. `scratch` holds `key_bits + width`
/// zeroed bits and is returned zeroed.
pub(crate) fn emit_comparator(
    b: &mut CircuitBuilder,
    lo: &[usize],
    hi: &[usize],
    key_bits: usize,
    s: usize,
    scratch: &[usize],
) {
    let k = key_bits;
    let w = lo.len();
    let (eq, copies) = scratch.split_at(k + 1);
    debug_assert_eq!(copies.len(), w - 1);
    let mut compare = Vec::new();
    for i in 0..k {
        compare.push(Gate::cnot(lo[i], hi[i]));
        compare.push(Gate::x(hi[i]));
    }
    // eq[m] = 1 iff the top m key bits agree, scanning from the MSB.
    compare.push(Gate::x(eq[0]));
    for m in 0..k {
        compare.push(Gate::toffoli(eq[m], hi[k - 1 - m], eq[m + 1]));
    }
    b.push_all(&compare);
    for m in 0..k {
        let a = lo[k - 1 - m];
        b.toffoli(a, eq[m], s);
        b.toffoli(a, eq[m + 1], s);
    }
    b.push_all_rev(&compare);
    let fan = CircuitBuilder::fanout_gates(s, copies);
    b.push_all(&fan);
    for i in 0..w {
        let c = if i == 0 { s } else { copies[i - 1] };
        b.fredkin(c, lo[i], hi[i]);
    }
    b.push_all_rev(&fan);
}

/// Scratch bits used by one compiled comparator.
pub(crate) fn comparator_scratch(key_bits: usize, width: usize) -> usize {
    key_bits + width
}

/// Emits the network over the given element registers, writing swap bit
/// `c` of the record into `sort_bits[c]`. Comparators of one layer get
/// private scratch so they share timeslices.
pub(crate) fn emit_sort(
    b: &mut CircuitBuilder,
    net: &ComparatorNetwork,
    elements: &[Vec<usize>],
    key_bits: usize,
    sort_bits: &[usize],
) {
    debug_assert_eq!(elements.len(), net.wires());
    debug_assert_eq!(sort_bits.len(), net.size());
    let width = elements.first().map_or(0, Vec::len);
    let per = comparator_scratch(key_bits, width);
    let mut ordinal = 0;
    for layer in net.layers() {
        let pool = b.scratch(per * layer.len());
        for (c, chunk) in layer.iter().zip(pool.chunks(per.max(1))) {
            emit_comparator(b, &elements[c.lo], &elements[c.hi], key_bits, sort_bits[ordinal], chunk);
            ordinal += 1;
        }
        b.release(pool);
    }
}

/// Compiles `net` into a circuit mapping `|0>_sort |elements>` to
/// `|record>_sort |sorted elements>`.
///
/// Registers: `elements` (data, laid out per [`SortLayout`]), `sort_bits`
/// (one per comparator, zero on entry), and scratch ancillas. The inverse
/// circuit unsorts and clears `sort_bits`.
pub fn compile_reversible_sort(
    net: &ComparatorNetwork,
    key_bits: usize,
    payload_bits: usize,
) -> Result<ReversibleCircuit> {
    if key_bits == 0 {
        return Err(Error::InvalidParameter("sort keys need at least one bit".into()));
    }
    let layout = SortLayout { key_bits, payload_bits, elements: net.wires() };
    let mut b = CircuitBuilder::new();
    let data = b.register("elements", layout.total_bits(), RegisterKind::Data);
    let record = b.register("sort_bits", net.size(), RegisterKind::Data);
    let elements = element_bits(data, &layout);
    b.begin_stage("sort", net.depth());
    let bits: Vec<usize> = record.bits().collect();
    emit_sort(&mut b, net, &elements, key_bits, &bits);
    Ok(b.finish())
}

pub(crate) fn element_bits(data: Register, layout: &SortLayout) -> Vec<Vec<usize>> {
    (0..layout.elements)
        .map(|e| (0..layout.width()).map(|i| data.start + layout.element(e) + i).collect())
        .collect()
}
