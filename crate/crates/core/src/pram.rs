//! Quantum RAM lookups: the single lookup `U_(1,N)` and the parallel lookup
//! `U_(N,N)`.
//!
//! `U_(N,N)` works on `2N` packets `[flag, address, target, memory]`. Node
//! `i` formats a question `(j_i, q, y_i, 0)` and an answer `(i, a, 0, x_i)`,
//! the packets are sorted by `(address, flag)`, a cascade of `n =
//! ceil(log2 2N)` phases copies each answer's memory leftwards into every
//! question with the same address, targets absorb memories, and everything
//! except the targets is uncomputed.
//!
//! Every packet position also owns positional bookkeeping that never moves
//! with the sort: an aux-phase register recording the phase in which the
//! packet received data, and an aux-action bit that lives for one phase.

use crate::revcirc::{
    mcx_gates, mcx_scratch, CircuitBuilder, Gate, Lanes, RegisterKind, ReversibleCircuit,
};
use crate::sortnet::{compile_reversible_sort, ComparatorNetwork};
use crate::{bits_for, ceil_log2, Error, Result};

/// Field offsets of the lookup packets and their bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LookupLayout {
    pub nodes: usize,
    pub data_bits: usize,
    pub address_bits: usize,
    /// Cascade phase count `n`.
    pub phases: usize,
    /// Aux-phase width, enough to hold the values `0..=n`.
    pub phase_bits: usize,
}

impl LookupLayout {
    pub fn new(nodes: usize, data_bits: usize) -> Self {
        let phases = ceil_log2(2 * nodes);
        LookupLayout {
            nodes,
            data_bits,
            address_bits: bits_for(nodes),
            phases,
            phase_bits: bits_for(phases + 1),
        }
    }

    pub fn packets(&self) -> usize {
        2 * self.nodes
    }

    pub fn key_bits(&self) -> usize {
        self.address_bits + 1
    }

    pub fn packet_bits(&self) -> usize {
        1 + self.address_bits + 2 * self.data_bits
    }

    pub fn total_bits(&self) -> usize {
        self.packets() * self.packet_bits()
    }

    pub fn flag(&self, p: usize) -> usize {
        p * self.packet_bits()
    }

    pub fn address(&self, p: usize, i: usize) -> usize {
        self.flag(p) + 1 + i
    }

    pub fn target(&self, p: usize, i: usize) -> usize {
        self.flag(p) + 1 + self.address_bits + i
    }

    pub fn memory(&self, p: usize, i: usize) -> usize {
        self.target(p, self.data_bits) + i
    }
}

/// Reference semantics of `U_(N,N)`: `y_i ^ x[j_i]`.
pub fn gather_oracle(j: &[usize], y: &[u64], x: &[u64]) -> Result<Vec<u64>> {
    if j.len() != y.len() {
        return Err(Error::WidthMismatch { expected: j.len(), got: y.len() });
    }
    j.iter()
        .zip(y)
        .map(|(&ji, &yi)| {
            x.get(ji)
                .map(|&xv| yi ^ xv)
                .ok_or(Error::IndexOutOfRange { index: ji, len: x.len() })
        })
        .collect()
}

/// `U_(1,N)`: `|j>|y>|x_0..x_{N-1}>` to `|j>|y ^ x_j>|x>`.
///
/// Registers `j` (`ceil(log2 N)` bits), `y` (`d`), `x` (`N * d`). The
/// address is decoded by a demultiplexer tree fed by fanned-out copies of
/// `j`, each selected cell is masked into scratch and the masks are
/// XOR-reduced into `y`. Addresses `>= N` read zero.
pub fn build_single_lookup(n: usize, d: usize) -> Result<ReversibleCircuit> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("U_(1,N) needs N >= 1 and d >= 1".into()));
    }
    let a = bits_for(n);
    let mut b = CircuitBuilder::new();
    let j = b.register("j", a, RegisterKind::Data);
    let y = b.register("y", d, RegisterKind::Data);
    let x = b.register("x", n * d, RegisterKind::Data);
    b.begin_stage("lookup", 1);
    if a == 0 {
        for t in 0..d {
            b.cnot(x.start + t, y.start + t);
        }
        return Ok(b.finish());
    }
    let mut compute = Vec::new();
    let mut borrowed = Vec::new();
    // Level l of the demux reads bit l of j, copied 2^l times.
    let mut copies = Vec::with_capacity(a);
    for l in 0..a {
        let extra = b.scratch((1 << l) - 1);
        compute.extend(CircuitBuilder::fanout_gates(j.start + l, &extra));
        let mut all = vec![j.start + l];
        all.extend(&extra);
        borrowed.extend(extra);
        copies.push(all);
    }
    let root = b.scratch(1);
    compute.push(Gate::x(root[0]));
    borrowed.extend(&root);
    let mut nodes = root;
    for (l, copy) in copies.iter().enumerate() {
        let children = b.scratch(1 << (l + 1));
        for (v, &node) in nodes.iter().enumerate() {
            let (c0, c1) = (children[v], children[v + (1 << l)]);
            compute.push(Gate::toffoli(node, copy[v], c1));
            compute.push(Gate::cnot(node, c0));
            compute.push(Gate::cnot(c1, c0));
        }
        borrowed.extend(&children);
        nodes = children;
    }
    let masked = b.scratch(n * d);
    borrowed.extend(&masked);
    for (i, &leaf) in nodes.iter().take(n).enumerate() {
        let fan = b.scratch(d - 1);
        compute.extend(CircuitBuilder::fanout_gates(leaf, &fan));
        for t in 0..d {
            let c = if t == 0 { leaf } else { fan[t - 1] };
            compute.push(Gate::toffoli(c, x.start + i * d + t, masked[i * d + t]));
        }
        borrowed.extend(fan);
    }
    let mut stride = 1;
    while stride < n {
        for i in (0..n).step_by(2 * stride) {
            if i + stride < n {
                for t in 0..d {
                    compute.push(Gate::cnot(masked[(i + stride) * d + t], masked[i * d + t]));
                }
            }
        }
        stride *= 2;
    }
    b.push_all(&compute);
    for (t, &m) in masked.iter().enumerate().take(d) {
        b.cnot(m, y.start + t);
    }
    b.push_all_rev(&compute);
    b.release(borrowed);
    Ok(b.finish())
}

/// The cascade `B` on `2N` packets in sorted order, as a standalone
/// circuit over `packets`, `aux_phase` and the ancilla `aux_action`.
pub fn build_cascade(n: usize, d: usize) -> Result<ReversibleCircuit> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("cascade needs N >= 1 and d >= 1".into()));
    }
    let lay = LookupLayout::new(n, d);
    let order: Vec<usize> = (0..lay.packets()).collect();
    Ok(cascade_circuit(&lay, &order, RegisterKind::Data))
}

/// `order[r]` is the packet at sorted rank `r`.
fn cascade_circuit(lay: &LookupLayout, order: &[usize], phase_kind: RegisterKind) -> ReversibleCircuit {
    let (a, d, pb, np) = (lay.address_bits, lay.data_bits, lay.phase_bits, lay.packets());
    let mut b = CircuitBuilder::new();
    let pk = b.register("packets", lay.total_bits(), RegisterKind::Data);
    let ph = b.register("aux_phase", np * pb, phase_kind);
    let act = b.register("aux_action", np, RegisterKind::Ancilla);
    let flag = |p: usize| pk.start + lay.flag(p);
    let addr = |p: usize, i: usize| pk.start + lay.address(p, i);
    let mem = |p: usize, i: usize| pk.start + lay.memory(p, i);
    let phase = |p: usize| -> Vec<usize> { (0..pb).map(|i| ph.start + p * pb + i).collect() };
    let action = |p: usize| act.start + p;

    let tree = mcx_scratch(a + pb + 2).max(mcx_scratch(pb + 1));
    let fan = d.max(pb) - 1;
    let per_pair = 1 + tree + fan;
    for k in 0..lay.phases {
        b.begin_stage(&format!("phase{k}"), 1);
        let dist = 1usize << k;
        let stamp = k + 1;
        for parity in 0..2 {
            let pairs: Vec<(usize, usize)> = (0..np)
                .filter(|&l| l + dist < np && (l >> k) & 1 == parity)
                .map(|l| (order[l], order[l + dist]))
                .collect();
            let pool = b.scratch(per_pair * pairs.len());
            for (&(left, right), chunk) in pairs.iter().zip(pool.chunks(per_pair)) {
                let o = chunk[0];
                let tree_bits = &chunk[1..1 + tree];
                let copies = &chunk[1 + tree..];
                let mut prep = Vec::new();
                for i in 0..a {
                    prep.push(Gate::cnot(addr(left, i), addr(right, i)));
                    prep.push(Gate::x(addr(right, i)));
                }
                let mut empty = vec![flag(right)];
                empty.extend(phase(right));
                prep.extend(empty.iter().map(|&q| Gate::x(q)));
                prep.extend(mcx_gates(&empty, o, tree_bits));
                prep.extend(empty.iter().map(|&q| Gate::x(q)));
                prep.push(Gate::x(o));
                prep.push(Gate::x(flag(left)));
                prep.extend(phase(left).into_iter().map(Gate::x));
                b.push_all(&prep);
                let mut controls: Vec<usize> = (0..a).map(|i| addr(right, i)).collect();
                controls.push(flag(left));
                controls.extend(phase(left));
                controls.push(o);
                b.mcx_with(&controls, action(left), tree_bits);
                b.push_all_rev(&prep);

                let fan_gates = CircuitBuilder::fanout_gates(action(left), copies);
                b.push_all(&fan_gates);
                let ctl = |i: usize| if i == 0 { action(left) } else { copies[i - 1] };
                for t in 0..d {
                    b.toffoli(ctl(t), mem(right, t), mem(left, t));
                }
                let lp = phase(left);
                for (i, bit) in (0..pb).filter(|&bit| stamp >> bit & 1 == 1).enumerate() {
                    b.cnot(ctl(i), lp[bit]);
                }
                b.push_all_rev(&fan_gates);
            }
            b.release(pool);
        }
        // Packets that received this phase carry aux-phase k+1.
        let per = mcx_scratch(pb);
        let pool = b.scratch(per * np);
        for p in 0..np {
            let bits = phase(p);
            let zeros: Vec<usize> = (0..pb).filter(|&i| stamp >> i & 1 == 0).map(|i| bits[i]).collect();
            for &z in &zeros {
                b.x(z);
            }
            b.mcx_with(&bits, action(p), &pool[p * per..(p + 1) * per]);
            for &z in &zeros {
                b.x(z);
            }
        }
        b.release(pool);
    }
    b.finish()
}

/// The copy step `C`: every packet XORs its memory into its target.
pub fn build_copy(n: usize, d: usize) -> Result<ReversibleCircuit> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("copy needs N >= 1 and d >= 1".into()));
    }
    let lay = LookupLayout::new(n, d);
    let mut b = CircuitBuilder::new();
    let pk = b.register("packets", lay.total_bits(), RegisterKind::Data);
    b.begin_stage("copy", 1);
    for p in 0..lay.packets() {
        for t in 0..d {
            b.cnot(pk.start + lay.memory(p, t), pk.start + lay.target(p, t));
        }
    }
    Ok(b.finish())
}

/// `U_(N,N)`: `|j>|y>|x>` to `|j>|y_i ^ x_{j_i}>|x>` for every basis input,
/// duplicate addresses included.
///
/// Registers `j` (`N` addresses of `ceil(log2 N)` bits), `y` and `x` (`N`
/// blocks of `d` bits); ancillas `packets`, `sort_bits`, `aux_phase`,
/// `aux_action` and scratch are returned to zero. Stages: format, sort,
/// cascade, copy, uncascade, unsort, unformat.
pub fn build_parallel_lookup(n: usize, d: usize, net: &ComparatorNetwork) -> Result<ReversibleCircuit> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("U_(N,N) needs N >= 1 and d >= 1".into()));
    }
    if net.wires() != 2 * n {
        return Err(Error::Network(format!(
            "network has {} wires, U_(N,N) needs {}",
            net.wires(),
            2 * n
        )));
    }
    let lay = LookupLayout::new(n, d);
    let a = lay.address_bits;
    let mut b = CircuitBuilder::new();
    let j = b.register("j", n * a, RegisterKind::Data);
    let y = b.register("y", n * d, RegisterKind::Data);
    let x = b.register("x", n * d, RegisterKind::Data);
    let packets = b.register("packets", lay.total_bits(), RegisterKind::Ancilla);
    let sort_bits = b.register("sort_bits", net.size(), RegisterKind::Ancilla);
    let aux_phase = b.register("aux_phase", lay.packets() * lay.phase_bits, RegisterKind::Ancilla);
    let aux_action = b.register("aux_action", lay.packets(), RegisterKind::Ancilla);
    let pk = |bit: usize| packets.start + bit;

    b.begin_stage("format", 1);
    for i in 0..n {
        let (q, ans) = (2 * i, 2 * i + 1);
        for t in 0..a {
            b.swap(j.start + i * a + t, pk(lay.address(q, t)));
            if i >> t & 1 == 1 {
                b.x(pk(lay.address(ans, t)));
            }
        }
        b.x(pk(lay.flag(ans)));
        for t in 0..d {
            b.swap(y.start + i * d + t, pk(lay.target(q, t)));
            b.swap(x.start + i * d + t, pk(lay.memory(ans, t)));
        }
    }

    let sort = compile_reversible_sort(net, lay.key_bits(), 2 * d)?;
    b.begin_stage("sort", net.depth());
    let sort_emb = b.embed(&sort, &[("elements", packets), ("sort_bits", sort_bits)]);
    b.release(sort_emb.scratch.iter().copied());

    let cascade = cascade_circuit(&lay, net.order(), RegisterKind::Ancilla);
    let bind = [("packets", packets), ("aux_phase", aux_phase), ("aux_action", aux_action)];
    b.begin_stage("cascade", lay.phases);
    let cas_emb = b.embed(&cascade, &bind);
    b.release(cas_emb.scratch.iter().copied());

    b.begin_stage("copy", 1);
    for p in 0..lay.packets() {
        for t in 0..d {
            b.cnot(pk(lay.memory(p, t)), pk(lay.target(p, t)));
        }
    }

    b.begin_stage("uncascade", lay.phases);
    let cas_emb = b.embedding(&cascade, &bind);
    b.append_inverse(&cascade, &cas_emb.map);
    b.release(cas_emb.scratch);

    b.begin_stage("unsort", net.depth());
    let sort_emb = b.embedding(&sort, &[("elements", packets), ("sort_bits", sort_bits)]);
    b.append_inverse(&sort, &sort_emb.map);
    b.release(sort_emb.scratch);

    b.begin_stage("unformat", 1);
    for i in 0..n {
        let (q, ans) = (2 * i, 2 * i + 1);
        for t in 0..d {
            b.cnot(pk(lay.memory(ans, t)), pk(lay.target(ans, t)));
            b.swap(x.start + i * d + t, pk(lay.memory(ans, t)));
            b.swap(y.start + i * d + t, pk(lay.target(q, t)));
        }
        for t in 0..a {
            b.swap(j.start + i * a + t, pk(lay.address(q, t)));
            if i >> t & 1 == 1 {
                b.x(pk(lay.address(ans, t)));
            }
        }
        b.x(pk(lay.flag(ans)));
    }
    Ok(b.finish())
}

/// `U_(1,N)` realized as compute-copy-uncompute around `U_(N,N)` with a
/// single live query. Same registers as [`build_single_lookup`].
pub fn build_single_lookup_via_parallel(n: usize, d: usize, net: &ComparatorNetwork) -> Result<ReversibleCircuit> {
    let inner = build_parallel_lookup(n, d, net)?;
    let a = bits_for(n);
    let mut b = CircuitBuilder::new();
    let j = b.register("j", a, RegisterKind::Data);
    let y = b.register("y", d, RegisterKind::Data);
    let x = b.register("x", n * d, RegisterKind::Data);
    let pad = b.register("jpad", (n - 1) * a, RegisterKind::Ancilla);
    let live = b.register("ylive", n * d, RegisterKind::Ancilla);
    let jbits: Vec<usize> = j.bits().chain(pad.bits()).collect();
    let bind = vec![("j", jbits), ("y", live.bits().collect()), ("x", x.bits().collect())];
    b.begin_stage("lookup", 1);
    let emb = b.embedding_bits(&inner, &bind);
    b.append(&inner, &emb.map);
    for t in 0..d {
        b.cnot(live.start + t, y.start + t);
    }
    b.append_inverse(&inner, &emb.map);
    b.release(emb.scratch);
    Ok(b.finish())
}

/// One lookup input: `j` addresses, `y` targets, `x` memory cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupCase {
    pub j: Vec<u64>,
    pub y: Vec<u64>,
    pub x: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupOutcome {
    pub y: Vec<u64>,
    /// `j` and `x` came out unchanged.
    pub inputs_intact: bool,
    /// Every ancilla register came out zero.
    pub clean: bool,
}

/// Simulates a lookup circuit with registers `j`, `y`, `x` on many cases,
/// 64 at a time.
pub fn run_lookup_cases(c: &ReversibleCircuit, d: usize, cases: &[LookupCase]) -> Result<Vec<LookupOutcome>> {
    let reg = |name: &str| {
        c.register(name)
            .ok_or_else(|| Error::Circuit(format!("lookup circuit has no `{name}` register")))
    };
    let (jr, yr, xr) = (reg("j")?, reg("y")?, reg("x")?);
    let mut out = Vec::with_capacity(cases.len());
    for chunk in cases.chunks(Lanes::COUNT) {
        let mut lanes = Lanes::new(c.width());
        for (lane, case) in chunk.iter().enumerate() {
            let a = if case.j.is_empty() { 0 } else { jr.len / case.j.len() };
            if case.y.len() * d != yr.len || case.x.len() * d != xr.len || case.j.len() * a != jr.len {
                return Err(Error::WidthMismatch { expected: yr.len, got: case.y.len() * d });
            }
            for (i, &v) in case.j.iter().enumerate() {
                lanes.set_value(lane, jr.start + i * a, a, v);
            }
            for (i, &v) in case.y.iter().enumerate() {
                lanes.set_value(lane, yr.start + i * d, d, v);
            }
            for (i, &v) in case.x.iter().enumerate() {
                lanes.set_value(lane, xr.start + i * d, d, v);
            }
        }
        c.simulate_lanes(&mut lanes)?;
        let dirty = c.dirty_ancilla_mask(&lanes);
        for (lane, case) in chunk.iter().enumerate() {
            let a = if case.j.is_empty() { 0 } else { jr.len / case.j.len() };
            let y = (0..case.y.len()).map(|i| lanes.get_value(lane, yr.start + i * d, d)).collect();
            let j_ok = case.j.iter().enumerate().all(|(i, &v)| lanes.get_value(lane, jr.start + i * a, a) == v);
            let x_ok = case.x.iter().enumerate().all(|(i, &v)| lanes.get_value(lane, xr.start + i * d, d) == v);
            out.push(LookupOutcome { y, inputs_intact: j_ok && x_ok, clean: dirty >> lane & 1 == 0 });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sortnet::{bitonic_network, oets_network};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn expect(case: &LookupCase) -> Vec<u64> {
        let j: Vec<usize> = case.j.iter().map(|&v| v as usize).collect();
        gather_oracle(&j, &case.y, &case.x).unwrap()
    }

    #[test]
    fn gather_examples() {
        assert_eq!(gather_oracle(&[1, 1], &[0, 0], &[5, 7]).unwrap(), vec![7, 7]);
        assert_eq!(gather_oracle(&[0, 1], &[1, 2], &[4, 4]).unwrap(), vec![5, 6]);
        assert!(gather_oracle(&[2], &[0], &[1, 2]).is_err());
    }

    #[test]
    fn single_lookup_small() {
        let c = build_single_lookup(2, 1).unwrap();
        let out = run_lookup_cases(&c, 1, &[LookupCase { j: vec![1], y: vec![0], x: vec![0, 1] }]).unwrap();
        assert_eq!(out[0].y, vec![1]);
        assert!(out[0].clean && out[0].inputs_intact);
        let one = build_single_lookup(1, 3).unwrap();
        assert_eq!(one.size(), 3);
    }

    #[test]
    fn single_lookup_exhaustive_address() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [3usize, 5, 8] {
            let c = build_single_lookup(n, 4).unwrap();
            let mut cases = Vec::new();
            for j in 0..n as u64 {
                for _ in 0..200 {
                    cases.push(LookupCase {
                        j: vec![j],
                        y: vec![rng.gen_range(0..16)],
                        x: (0..n).map(|_| rng.gen_range(0..16)).collect(),
                    });
                }
            }
            for (case, out) in cases.iter().zip(run_lookup_cases(&c, 4, &cases).unwrap()) {
                assert_eq!(out.y, expect(case));
                assert!(out.clean && out.inputs_intact);
            }
        }
    }

    #[test]
    fn copy_step() {
        let c = build_copy(1, 2).unwrap();
        let lay = LookupLayout::new(1, 2);
        let mut input = vec![false; c.width()];
        input[lay.memory(1, 0)] = true;
        let out = c.simulate(&input).unwrap();
        assert!(out[lay.target(1, 0)] && out[lay.memory(1, 0)]);
        assert_eq!(c.compose(&c, &(0..c.width()).collect::<Vec<_>>()).unwrap().simulate(&input).unwrap(), input);
        assert_eq!(c.depth(), 1);
    }

    /// Packet values `(address, flag, memory)` in sorted order.
    fn run_cascade(n: usize, d: usize, packets: &[(u64, bool, u64)]) -> (Vec<u64>, Vec<u64>, bool) {
        let c = build_cascade(n, d).unwrap();
        let lay = LookupLayout::new(n, d);
        let mut input = vec![false; c.width()];
        for (p, &(addr, flag, m)) in packets.iter().enumerate() {
            input[lay.flag(p)] = flag;
            for i in 0..lay.address_bits {
                input[lay.address(p, i)] = addr >> i & 1 == 1;
            }
            for i in 0..d {
                input[lay.memory(p, i)] = m >> i & 1 == 1;
            }
        }
        let out = c.simulate(&input).unwrap();
        let ph = c.register("aux_phase").unwrap();
        let mems = (0..packets.len())
            .map(|p| (0..d).fold(0, |acc, i| acc | (out[lay.memory(p, i)] as u64) << i))
            .collect();
        let phases = (0..packets.len())
            .map(|p| (0..lay.phase_bits).fold(0, |acc, i| acc | (out[ph.start + p * lay.phase_bits + i] as u64) << i))
            .collect();
        (mems, phases, c.ancillas_clean(&out))
    }

    #[test]
    fn cascade_records_phases() {
        let packets = [
            (0, false, 0),
            (0, true, 5),
            (1, false, 0),
            (1, false, 0),
            (1, true, 6),
            (2, true, 7),
            (3, false, 0),
            (3, true, 2),
        ];
        let (mems, phases, clean) = run_cascade(4, 3, &packets);
        assert_eq!(mems, vec![5, 5, 6, 6, 6, 7, 2, 2]);
        assert_eq!(phases, vec![1, 0, 2, 1, 0, 0, 1, 0]);
        assert!(clean);
    }

    #[test]
    fn cascade_without_questions_is_identity() {
        let packets: Vec<_> = (0..8).map(|p| (p as u64 / 2, true, p as u64)).collect();
        let (mems, phases, clean) = run_cascade(4, 3, &packets);
        assert_eq!(mems, (0..8).collect::<Vec<u64>>());
        assert!(phases.iter().all(|&p| p == 0) && clean);
    }

    #[test]
    fn cascade_worst_case_reaches_every_question() {
        // All N questions address the last node.
        let n = 8;
        let mut packets: Vec<_> = (0..n as u64 - 1).map(|i| (i, true, i + 1)).collect();
        packets.extend((0..n).map(|_| (n as u64 - 1, false, 0)));
        packets.push((n as u64 - 1, true, 9));
        let (mems, _, clean) = run_cascade(n, 4, &packets);
        assert!(mems[n - 1..].iter().all(|&m| m == 9));
        assert!(clean);
    }

    #[test]
    fn parallel_lookup_examples() {
        let net = bitonic_network(3).unwrap();
        let c = build_parallel_lookup(4, 2, &net).unwrap();
        let cases = vec![
            LookupCase { j: vec![1; 4], y: vec![0; 4], x: vec![2, 3, 1, 0] },
            LookupCase { j: vec![0, 1, 2, 3], y: vec![1, 2, 3, 0], x: vec![3, 3, 1, 2] },
        ];
        let out = run_lookup_cases(&c, 2, &cases).unwrap();
        assert_eq!(out[0].y, vec![3; 4]);
        assert_eq!(out[1].y, vec![2, 1, 2, 2]);
        assert!(out.iter().all(|o| o.clean && o.inputs_intact));
        assert_eq!(c.metrics().stage_depth, 2 * 6 + 2 * 3 + 3);
    }

    #[test]
    fn parallel_lookup_random_with_duplicates() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (n, net) in [(4, oets_network(8).unwrap()), (8, bitonic_network(4).unwrap())] {
            let c = build_parallel_lookup(n, 3, &net).unwrap();
            let cases: Vec<LookupCase> = (0..256)
                .map(|_| {
                    let hot = rng.gen_range(1..=n as u64);
                    LookupCase {
                        j: (0..n).map(|_| rng.gen_range(0..hot)).collect(),
                        y: (0..n).map(|_| rng.gen_range(0..8)).collect(),
                        x: (0..n).map(|_| rng.gen_range(0..8)).collect(),
                    }
                })
                .collect();
            for (case, out) in cases.iter().zip(run_lookup_cases(&c, 3, &cases).unwrap()) {
                assert_eq!(out.y, expect(case));
                assert!(out.clean && out.inputs_intact);
            }
        }
    }

    #[test]
    fn single_lookup_paths_agree() {
        let net = bitonic_network(3).unwrap();
        let via = build_single_lookup_via_parallel(4, 2, &net).unwrap();
        let direct = build_single_lookup(4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cases: Vec<LookupCase> = (0..128)
            .map(|_| LookupCase {
                j: vec![rng.gen_range(0..4)],
                y: vec![rng.gen_range(0..4)],
                x: (0..4).map(|_| rng.gen_range(0..4)).collect(),
            })
            .collect();
        let a = run_lookup_cases(&via, 2, &cases).unwrap();
        let b = run_lookup_cases(&direct, 2, &cases).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|o| o.clean));
    }

    #[test]
    fn rejects_wrong_network() {
        assert!(build_parallel_lookup(4, 1, &bitonic_network(2).unwrap()).is_err());
        assert!(build_single_lookup(0, 1).is_err());
    }
}
