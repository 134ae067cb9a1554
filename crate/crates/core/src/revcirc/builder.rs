use std::collections::BTreeMap;

use super::{Gate, Register, RegisterKind, ReversibleCircuit, Stage};

/// Incremental circuit construction with ASAP timeslice packing.
///
/// Gates are placed in the earliest timeslice after every earlier gate
/// sharing a bit, but never before the current stage floor. Scratch bits
/// come from a pool of ancilla registers; callers must return them zeroed.
#[derive(Debug)]
pub struct CircuitBuilder {
    width: usize,
    layers: Vec<Vec<Gate>>,
    frontier: Vec<usize>,
    floor: usize,
    labels: BTreeMap<String, Register>,
    free: Vec<usize>,
    scratch_regs: usize,
    stages: Vec<Stage>,
    open: Option<(String, usize, usize)>,
}

impl Default for CircuitBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::with_width(0)
    }

    pub fn with_width(width: usize) -> Self {
        CircuitBuilder {
            width,
            layers: Vec::new(),
            frontier: vec![0; width],
            floor: 0,
            labels: BTreeMap::new(),
            free: Vec::new(),
            scratch_regs: 0,
            stages: Vec::new(),
            open: None,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Reserves a fresh named register.
    ///
    /// # Panics
    /// If `name` is already taken.
    pub fn register(&mut self, name: &str, len: usize, kind: RegisterKind) -> Register {
        let r = Register { start: self.width, len, kind };
        self.width += len;
        self.frontier.resize(self.width, 0);
        let prev = self.labels.insert(name.to_string(), r);
        assert!(prev.is_none(), "register `{name}` declared twice");
        r
    }

    /// Takes `n` zeroed scratch bits from the pool, growing it as needed.
    pub fn scratch(&mut self, n: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            match self.free.pop() {
                Some(b) => out.push(b),
                None => {
                    let missing = n - out.len();
                    let name = format!("scratch{}", self.scratch_regs);
                    self.scratch_regs += 1;
                    let r = self.register(&name, missing, RegisterKind::Ancilla);
                    out.extend(r.bits());
                }
            }
        }
        out
    }

    /// Returns scratch bits to the pool. They must be zero again.
    pub fn release(&mut self, bits: impl IntoIterator<Item = usize>) {
        self.free.extend(bits);
    }

    pub fn push(&mut self, g: Gate) {
        debug_assert!(g.bits().iter().all(|&b| b < self.width), "{g:?} out of range");
        debug_assert!(g.has_distinct_bits(), "{g:?} repeats a bit");
        let layer = g
            .bits()
            .iter()
            .map(|&b| self.frontier[b])
            .max()
            .unwrap_or(0)
            .max(self.floor);
        if layer == self.layers.len() {
            self.layers.push(Vec::new());
        }
        self.layers[layer].push(g);
        for &b in g.bits() {
            self.frontier[b] = layer + 1;
        }
    }

    pub fn push_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) {
        for g in gates {
            self.push(*g);
        }
    }

    /// Pushes the inverse of a gate sequence.
    pub fn push_all_rev(&mut self, gates: &[Gate]) {
        for g in gates.iter().rev() {
            self.push(*g);
        }
    }

    pub fn x(&mut self, a: usize) {
        self.push(Gate::x(a));
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        self.push(Gate::cnot(c, t));
    }

    pub fn toffoli(&mut self, c0: usize, c1: usize, t: usize) {
        self.push(Gate::toffoli(c0, c1, t));
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.push(Gate::swap(a, b));
    }

    pub fn fredkin(&mut self, c: usize, a: usize, b: usize) {
        self.push(Gate::fredkin(c, a, b));
    }

    /// Prevents later gates from being packed before the current end.
    pub fn seal(&mut self) {
        self.floor = self.layers.len();
    }

    /// Opens a labelled stage worth `units` of stage-depth.
    pub fn begin_stage(&mut self, name: &str, units: usize) {
        self.end_stage();
        self.seal();
        self.open = Some((name.to_string(), units, self.layers.len()));
    }

    pub fn end_stage(&mut self) {
        if let Some((name, units, start)) = self.open.take() {
            self.stages.push(Stage { name, units, start, end: self.layers.len() });
            self.seal();
        }
    }

    /// Appends `c` with its bit `i` placed on `map[i]`.
    pub fn append(&mut self, c: &ReversibleCircuit, map: &[usize]) {
        debug_assert_eq!(map.len(), c.width());
        for g in c.gates() {
            self.push(g.remap(map));
        }
    }

    pub fn append_inverse(&mut self, c: &ReversibleCircuit, map: &[usize]) {
        debug_assert_eq!(map.len(), c.width());
        for g in c.gates().rev() {
            self.push(g.remap(map));
        }
    }

    /// Appends `c`, mapping its declared registers by name onto registers of
    /// this builder (`bind`) and its remaining ancilla registers onto pool
    /// scratch. The returned [`Embedding`] lets the caller append the inverse
    /// later and must eventually be handed back to [`release`](Self::release).
    pub fn embed(&mut self, c: &ReversibleCircuit, bind: &[(&str, Register)]) -> Embedding {
        let emb = self.embedding(c, bind);
        self.append(c, &emb.map);
        emb
    }

    /// Builds the wire map used by [`embed`](Self::embed) without emitting
    /// gates.
    pub fn embedding(&mut self, c: &ReversibleCircuit, bind: &[(&str, Register)]) -> Embedding {
        let bits: Vec<(&str, Vec<usize>)> =
            bind.iter().map(|(n, r)| (*n, r.bits().collect())).collect();
        self.embedding_bits(c, &bits)
    }

    /// Like [`embedding`](Self::embedding) with registers bound to explicit
    /// bit lists.
    pub fn embedding_bits(&mut self, c: &ReversibleCircuit, bind: &[(&str, Vec<usize>)]) -> Embedding {
        let mut map = vec![usize::MAX; c.width()];
        let mut scratch = Vec::new();
        for (name, reg) in c.labels() {
            if let Some((_, target)) = bind.iter().find(|(n, _)| n == name) {
                assert_eq!(target.len(), reg.len, "register `{name}` length mismatch");
                for (i, &t) in target.iter().enumerate() {
                    map[reg.start + i] = t;
                }
            } else {
                assert_eq!(
                    reg.kind,
                    RegisterKind::Ancilla,
                    "data register `{name}` left unbound"
                );
                let bits = self.scratch(reg.len);
                for (i, &b) in bits.iter().enumerate() {
                    map[reg.start + i] = b;
                }
                scratch.extend(bits);
            }
        }
        assert!(map.iter().all(|&m| m != usize::MAX), "unlabelled bits in embedded circuit");
        Embedding { map, scratch }
    }

    /// Flips `target` iff every bit in `controls` is one. Uses a balanced
    /// Toffoli tree over clean scratch, uncomputed afterwards.
    pub fn mcx(&mut self, controls: &[usize], target: usize) {
        let anc = self.scratch(mcx_scratch(controls.len()));
        self.mcx_with(controls, target, &anc);
        self.release(anc);
    }

    /// [`mcx`](Self::mcx) with caller-provided scratch of
    /// [`mcx_scratch`] bits.
    pub fn mcx_with(&mut self, controls: &[usize], target: usize, scratch: &[usize]) {
        let gates = mcx_gates(controls, target, scratch);
        self.push_all(&gates);
    }

    /// CNOT-doubling tree copying `src` into every bit of `copies`, which
    /// must be zero. Depth `ceil(log2(copies + 1))`.
    pub fn fanout_gates(src: usize, copies: &[usize]) -> Vec<Gate> {
        let mut gates = Vec::with_capacity(copies.len());
        let mut have = vec![src];
        let mut next = 0;
        while next < copies.len() {
            let round = have.len().min(copies.len() - next);
            for i in 0..round {
                gates.push(Gate::cnot(have[i], copies[next + i]));
            }
            have.extend_from_slice(&copies[next..next + round]);
            next += round;
        }
        gates
    }

    pub fn finish(mut self) -> ReversibleCircuit {
        self.end_stage();
        ReversibleCircuit::from_parts(self.width, self.layers, self.labels, self.stages)
    }
}

/// Gates of a multi-controlled X: a balanced Toffoli tree over `scratch`
/// (at least [`mcx_scratch`] bits, left clean), flipping `target` iff every
/// control is one.
pub fn mcx_gates(controls: &[usize], target: usize, scratch: &[usize]) -> Vec<Gate> {
    match controls.len() {
        0 => vec![Gate::x(target)],
        1 => vec![Gate::cnot(controls[0], target)],
        2 => vec![Gate::toffoli(controls[0], controls[1], target)],
        _ => {
            let mut tape = Vec::new();
            let mut level: Vec<usize> = controls.to_vec();
            let mut pool = scratch.iter().copied();
            while level.len() > 2 {
                let mut next = Vec::with_capacity(level.len() / 2 + 1);
                for pair in level.chunks(2) {
                    if let [a, b] = *pair {
                        let anc = pool.next().expect("mcx scratch too small");
                        tape.push(Gate::toffoli(a, b, anc));
                        next.push(anc);
                    } else {
                        next.push(pair[0]);
                    }
                }
                level = next;
            }
            let mut gates = tape.clone();
            gates.push(Gate::toffoli(level[0], level[1], target));
            gates.extend(tape.into_iter().rev());
            gates
        }
    }
}

/// Scratch bits used by a multi-controlled X over `m` controls.
pub fn mcx_scratch(m: usize) -> usize {
    m.saturating_sub(2)
}

/// Wire map of an embedded sub-circuit plus the pool bits it borrowed.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub map: Vec<usize>,
    pub scratch: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mcx_truth_table_and_clean_scratch() {
        for m in 0..=6usize {
            let mut b = CircuitBuilder::new();
            let ctl = b.register("c", m, RegisterKind::Data);
            let t = b.register("t", 1, RegisterKind::Data);
            let controls: Vec<usize> = ctl.bits().collect();
            b.mcx(&controls, t.start);
            let c = b.finish();
            for v in 0..(1u64 << m) {
                let mut input = vec![false; c.width()];
                for (i, bit) in input.iter_mut().enumerate().take(m) {
                    *bit = v >> i & 1 == 1;
                }
                let out = c.simulate(&input).unwrap();
                let all = v == (1u64 << m) - 1;
                assert_eq!(out[t.start], all, "m={m} v={v}");
                assert!(c.ancillas_clean(&out));
            }
        }
    }

    #[test]
    fn fanout_copies_and_is_log_depth() {
        let copies: Vec<usize> = (1..16).collect();
        let gates = CircuitBuilder::fanout_gates(0, &copies);
        let c = ReversibleCircuit::from_gates(16, gates).unwrap();
        assert_eq!(c.depth(), 4);
        let mut input = vec![false; 16];
        input[0] = true;
        assert!(c.simulate(&input).unwrap().iter().all(|&b| b));
    }

    #[test]
    fn stages_and_floor() {
        let mut b = CircuitBuilder::with_width(2);
        b.begin_stage("a", 1);
        b.x(0);
        b.begin_stage("b", 3);
        b.x(1);
        let c = b.finish();
        assert_eq!(c.depth(), 2);
        let m = c.metrics();
        assert_eq!(m.stage_depth, 4);
        assert_eq!(m.stages[1].gate_depth, 1);
        let inv = c.invert().metrics();
        assert_eq!(inv.stages[0].name, "b^-1");
        assert_eq!(inv.stages[0].gate_depth, 1);
    }

    #[test]
    fn scratch_is_reused() {
        let mut b = CircuitBuilder::new();
        let s = b.scratch(3);
        b.release(s.clone());
        let t = b.scratch(2);
        assert!(t.iter().all(|x| s.contains(x)));
        assert_eq!(b.width(), 3);
    }
}
