//! Reversible gate-level IR over {X, CNOT, TOFFOLI, SWAP, FREDKIN}.
//!
//! A circuit is a list of timeslices, each a set of gates with disjoint
//! support. Every gate in the set is its own inverse, so inverting a
//! circuit only reverses the gate order.
//!
//! Depth is tracked at two granularities. Gate-depth is the number of
//! timeslices. Stage-depth is the sum of the declared units of each labelled
//! stage (comparator layers, cascade phases, formatting steps).

mod builder;
mod sim;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use builder::{mcx_gates, mcx_scratch, CircuitBuilder, Embedding};
pub use sim::Lanes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    X,
    Cnot,
    Toffoli,
    Swap,
    Fredkin,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::X => 1,
            GateKind::Cnot | GateKind::Swap => 2,
            GateKind::Toffoli | GateKind::Fredkin => 3,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Cnot => "CNOT",
            GateKind::Toffoli => "TOFFOLI",
            GateKind::Swap => "SWAP",
            GateKind::Fredkin => "FREDKIN",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag.to_ascii_uppercase().as_str() {
            "X" | "NOT" => Some(GateKind::X),
            "CNOT" | "CX" => Some(GateKind::Cnot),
            "TOFFOLI" | "CCX" => Some(GateKind::Toffoli),
            "SWAP" => Some(GateKind::Swap),
            "FREDKIN" | "CSWAP" => Some(GateKind::Fredkin),
            _ => None,
        }
    }
}

/// A primitive reversible gate. Bit order follows the tag: CNOT is
/// `[control, target]`, TOFFOLI `[c0, c1, target]`, FREDKIN
/// `[control, a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gate {
    kind: GateKind,
    bits: [usize; 3],
}

impl Gate {
    pub fn x(a: usize) -> Self {
        Gate { kind: GateKind::X, bits: [a, 0, 0] }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate { kind: GateKind::Cnot, bits: [control, target, 0] }
    }

    pub fn toffoli(c0: usize, c1: usize, target: usize) -> Self {
        Gate { kind: GateKind::Toffoli, bits: [c0, c1, target] }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Gate { kind: GateKind::Swap, bits: [a, b, 0] }
    }

    pub fn fredkin(control: usize, a: usize, b: usize) -> Self {
        Gate { kind: GateKind::Fredkin, bits: [control, a, b] }
    }

    pub fn new(kind: GateKind, bits: &[usize]) -> Result<Self> {
        if bits.len() != kind.arity() {
            return Err(Error::Circuit(format!(
                "{} takes {} bits, got {}",
                kind.tag(),
                kind.arity(),
                bits.len()
            )));
        }
        let mut b = [0; 3];
        b[..bits.len()].copy_from_slice(bits);
        Ok(Gate { kind, bits: b })
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn bits(&self) -> &[usize] {
        &self.bits[..self.kind.arity()]
    }

    pub fn remap(&self, map: &[usize]) -> Gate {
        let mut g = *self;
        for b in &mut g.bits[..self.kind.arity()] {
            *b = map[*b];
        }
        g
    }

    fn has_distinct_bits(&self) -> bool {
        let b = self.bits();
        match b.len() {
            1 => true,
            2 => b[0] != b[1],
            _ => b[0] != b[1] && b[0] != b[2] && b[1] != b[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegisterKind {
    /// Carries data in and out.
    Data,
    /// Must be zero on entry and on exit.
    Ancilla,
}

/// A named contiguous bit range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub start: usize,
    pub len: usize,
    pub kind: RegisterKind,
}

impl Register {
    pub fn bit(&self, i: usize) -> usize {
        debug_assert!(i < self.len);
        self.start + i
    }

    pub fn bits(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }

    /// Sub-range `[offset, offset + len)` of this register.
    pub fn slice(&self, offset: usize, len: usize) -> Register {
        debug_assert!(offset + len <= self.len);
        Register { start: self.start + offset, len, kind: self.kind }
    }
}

/// A labelled contiguous span of timeslices with its stage-depth units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub name: String,
    pub units: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReversibleCircuit {
    width: usize,
    layers: Vec<Vec<Gate>>,
    labels: BTreeMap<String, Register>,
    stages: Vec<Stage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageMetrics {
    pub name: String,
    pub gate_depth: usize,
    pub size: usize,
    pub stage_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Metrics {
    /// Number of timeslices.
    pub depth: usize,
    /// Number of gates.
    pub size: usize,
    /// Number of bits, inputs plus ancillas.
    pub width: usize,
    /// Sum of stage units; zero when the circuit carries no stage labels.
    pub stage_depth: usize,
    pub stages: Vec<StageMetrics>,
}

impl ReversibleCircuit {
    pub(crate) fn from_parts(
        width: usize,
        layers: Vec<Vec<Gate>>,
        labels: BTreeMap<String, Register>,
        stages: Vec<Stage>,
    ) -> Self {
        ReversibleCircuit { width, layers, labels, stages }
    }

    /// Packs `gates` greedily into timeslices.
    pub fn from_gates(width: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut b = CircuitBuilder::with_width(width);
        for g in gates {
            check_gate(&g, width)?;
            b.push(g);
        }
        Ok(b.finish())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    pub fn gates(&self) -> impl DoubleEndedIterator<Item = &Gate> + '_ {
        self.layers.iter().flatten()
    }

    pub fn size(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn labels(&self) -> &BTreeMap<String, Register> {
        &self.labels
    }

    pub fn register(&self, name: &str) -> Option<Register> {
        self.labels.get(name).copied()
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn ancilla_registers(&self) -> impl Iterator<Item = (&String, &Register)> {
        self.labels.iter().filter(|(_, r)| r.kind == RegisterKind::Ancilla)
    }

    /// Checks bit ranges and timeslice disjointness.
    pub fn validate(&self) -> Result<()> {
        let mut stamp = vec![usize::MAX; self.width];
        for (li, layer) in self.layers.iter().enumerate() {
            for g in layer {
                check_gate(g, self.width)?;
                for &b in g.bits() {
                    if stamp[b] == li {
                        return Err(Error::Circuit(format!(
                            "timeslice {li} touches bit {b} twice"
                        )));
                    }
                    stamp[b] = li;
                }
            }
        }
        Ok(())
    }

    /// Gate list reversed; each gate is self-inverse.
    pub fn invert(&self) -> ReversibleCircuit {
        let depth = self.layers.len();
        let layers = self
            .layers
            .iter()
            .rev()
            .map(|l| l.iter().rev().copied().collect())
            .collect();
        let stages = self
            .stages
            .iter()
            .rev()
            .map(|s| Stage {
                name: toggle_inverse_suffix(&s.name),
                units: s.units,
                start: depth - s.end,
                end: depth - s.start,
            })
            .collect();
        ReversibleCircuit {
            width: self.width,
            layers,
            labels: self.labels.clone(),
            stages,
        }
    }

    /// Runs `other` after `self`, with `other`'s bit `i` placed on `map[i]`.
    /// Timeslices are concatenated without repacking across the boundary.
    pub fn compose(&self, other: &ReversibleCircuit, map: &[usize]) -> Result<ReversibleCircuit> {
        if map.len() != other.width {
            return Err(Error::Circuit(format!(
                "wire map has {} entries for a circuit of width {}",
                map.len(),
                other.width
            )));
        }
        let mut seen = vec![false; self.width];
        for &m in map {
            if m >= self.width {
                return Err(Error::Circuit(format!(
                    "wire map target {m} overflows width {}",
                    self.width
                )));
            }
            if std::mem::replace(&mut seen[m], true) {
                return Err(Error::Circuit(format!("wire map is not injective at {m}")));
            }
        }
        let offset = self.layers.len();
        let mut layers = self.layers.clone();
        layers.extend(
            other
                .layers
                .iter()
                .map(|l| l.iter().map(|g| g.remap(map)).collect()),
        );
        let mut stages = self.stages.clone();
        stages.extend(other.stages.iter().map(|s| Stage {
            name: s.name.clone(),
            units: s.units,
            start: s.start + offset,
            end: s.end + offset,
        }));
        Ok(ReversibleCircuit {
            width: self.width,
            layers,
            labels: self.labels.clone(),
            stages,
        })
    }

    /// Greedy as-soon-as-possible repacking of all gates, ignoring stage
    /// boundaries. Stage labels are dropped.
    pub fn repack(&self) -> ReversibleCircuit {
        let mut b = CircuitBuilder::with_width(self.width);
        for g in self.gates() {
            b.push(*g);
        }
        let mut c = b.finish();
        c.labels = self.labels.clone();
        c
    }

    pub fn metrics(&self) -> Metrics {
        let stages: Vec<StageMetrics> = self
            .stages
            .iter()
            .map(|s| StageMetrics {
                name: s.name.clone(),
                gate_depth: s.end - s.start,
                size: self.layers[s.start..s.end].iter().map(Vec::len).sum(),
                stage_depth: s.units,
            })
            .collect();
        Metrics {
            depth: self.depth(),
            size: self.size(),
            width: self.width,
            stage_depth: stages.iter().map(|s| s.stage_depth).sum(),
            stages,
        }
    }

    /// True when every ancilla register is zero in `state`.
    pub fn ancillas_clean(&self, state: &[bool]) -> bool {
        self.ancilla_registers()
            .all(|(_, r)| r.bits().all(|b| !state[b]))
    }

    pub fn to_json(&self) -> CircuitJson {
        CircuitJson {
            width: self.width,
            gates: self
                .gates()
                .map(|g| GateJson {
                    g: g.kind.tag().to_string(),
                    bits: g.bits().to_vec(),
                })
                .collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn from_json(json: &CircuitJson) -> Result<Self> {
        let mut b = CircuitBuilder::with_width(json.width);
        for gj in &json.gates {
            let kind = GateKind::from_tag(&gj.g)
                .ok_or_else(|| Error::UnsupportedGate(gj.g.clone()))?;
            let g = Gate::new(kind, &gj.bits)?;
            check_gate(&g, json.width)?;
            b.push(g);
        }
        for (name, r) in &json.labels {
            if r.start + r.len > json.width {
                return Err(Error::Circuit(format!("label `{name}` overflows width")));
            }
        }
        let mut c = b.finish();
        c.labels = json.labels.clone();
        Ok(c)
    }
}

fn check_gate(g: &Gate, width: usize) -> Result<()> {
    if let Some(&b) = g.bits().iter().find(|&&b| b >= width) {
        return Err(Error::Circuit(format!(
            "{} touches bit {b} outside width {width}",
            g.kind.tag()
        )));
    }
    if !g.has_distinct_bits() {
        return Err(Error::Circuit(format!("{} repeats a bit", g.kind.tag())));
    }
    Ok(())
}

fn toggle_inverse_suffix(name: &str) -> String {
    match name.strip_suffix("^-1") {
        Some(base) => base.to_string(),
        None => format!("{name}^-1"),
    }
}

/// On-disk circuit format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitJson {
    pub width: usize,
    pub gates: Vec<GateJson>,
    #[serde(default)]
    pub labels: BTreeMap<String, Register>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateJson {
    pub g: String,
    pub bits: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn single_gate_semantics() {
        let x = ReversibleCircuit::from_gates(1, [Gate::x(0)]).unwrap();
        assert_eq!(x.simulate(&bits("0")).unwrap(), bits("1"));
        let cx = ReversibleCircuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        assert_eq!(cx.simulate(&bits("10")).unwrap(), bits("11"));
        let f = ReversibleCircuit::from_gates(3, [Gate::fredkin(0, 1, 2)]).unwrap();
        assert_eq!(f.simulate(&bits("101")).unwrap(), bits("110"));
        assert_eq!(f.simulate(&bits("001")).unwrap(), bits("001"));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let x = ReversibleCircuit::from_gates(2, [Gate::x(0)]).unwrap();
        assert!(matches!(
            x.simulate(&bits("1")),
            Err(Error::WidthMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn bad_gates_rejected() {
        assert!(ReversibleCircuit::from_gates(2, [Gate::cnot(0, 2)]).is_err());
        assert!(ReversibleCircuit::from_gates(2, [Gate::cnot(1, 1)]).is_err());
    }

    #[test]
    fn swap_is_its_own_inverse() {
        let s = ReversibleCircuit::from_gates(2, [Gate::swap(0, 1)]).unwrap();
        assert_eq!(s.invert().gates().collect::<Vec<_>>(), s.gates().collect::<Vec<_>>());
    }

    #[test]
    fn compose_checks_map() {
        let x = ReversibleCircuit::from_gates(2, [Gate::x(0)]).unwrap();
        let xx = x.compose(&x, &[0, 1]).unwrap();
        for s in ["00", "01", "10", "11"] {
            assert_eq!(xx.simulate(&bits(s)).unwrap(), bits(s));
        }
        assert!(x.compose(&x, &[0, 0]).is_err());
        assert!(x.compose(&x, &[0, 2]).is_err());
        assert!(x.compose(&x, &[0]).is_err());
    }

    #[test]
    fn metrics_of_single_gate() {
        let c = ReversibleCircuit::from_gates(3, [Gate::toffoli(0, 1, 2)]).unwrap();
        let m = c.metrics();
        assert_eq!((m.depth, m.size, m.width), (1, 1, 3));
    }

    #[test]
    fn packing_respects_support() {
        let c = ReversibleCircuit::from_gates(
            4,
            [Gate::cnot(0, 1), Gate::cnot(2, 3), Gate::cnot(1, 2)],
        )
        .unwrap();
        assert_eq!(c.depth(), 2);
        c.validate().unwrap();
    }

    #[test]
    fn json_round_trip() {
        let c = ReversibleCircuit::from_gates(
            3,
            [Gate::x(0), Gate::toffoli(0, 1, 2), Gate::fredkin(2, 0, 1)],
        )
        .unwrap();
        let s = serde_json::to_string(&c.to_json()).unwrap();
        assert!(s.contains(r#"{"g":"TOFFOLI","bits":[0,1,2]}"#));
        let back = ReversibleCircuit::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    fn random_circuit(rng: &mut ChaCha8Rng, width: usize, gates: usize) -> ReversibleCircuit {
        let mut out = Vec::new();
        while out.len() < gates {
            let a = rng.gen_range(0..width);
            let b = rng.gen_range(0..width);
            let c = rng.gen_range(0..width);
            let g = match rng.gen_range(0..5) {
                0 => Gate::x(a),
                1 => Gate::cnot(a, b),
                2 => Gate::toffoli(a, b, c),
                3 => Gate::swap(a, b),
                _ => Gate::fredkin(a, b, c),
            };
            if g.has_distinct_bits() {
                out.push(g);
            }
        }
        ReversibleCircuit::from_gates(width, out).unwrap()
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = random_circuit(&mut rng, 12, 80);
        let id: Vec<usize> = (0..12).collect();
        let cc = c.compose(&c.invert(), &id).unwrap();
        for _ in 0..100 {
            let x: Vec<bool> = (0..12).map(|_| rng.gen()).collect();
            assert_eq!(cc.simulate(&x).unwrap(), x);
        }
    }

    #[test]
    fn exhaustive_bijection_small_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for width in [4usize, 9, 16] {
            let c = random_circuit(&mut rng, width, 40);
            let mut seen = vec![false; 1 << width];
            for start in (0..1usize << width).step_by(64) {
                let n = (1usize << width).min(64);
                let mut lanes = Lanes::new(width);
                for lane in 0..n {
                    lanes.set_value(lane, 0, width, (start + lane) as u64);
                }
                c.simulate_lanes(&mut lanes).unwrap();
                for lane in 0..n {
                    let out = lanes.get_value(lane, 0, width) as usize;
                    assert!(!std::mem::replace(&mut seen[out], true));
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn invert_undoes_simulate(seed in any::<u64>(), input in proptest::collection::vec(any::<bool>(), 10)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = random_circuit(&mut rng, 10, 30);
            let y = c.simulate(&input).unwrap();
            prop_assert_eq!(c.invert().simulate(&y).unwrap(), input);
            prop_assert_eq!(c.invert().invert(), c);
        }

        #[test]
        fn repack_never_deepens(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = random_circuit(&mut rng, 8, 40);
            // Concatenation without repacking, then repacked.
            let id: Vec<usize> = (0..8).collect();
            let cat = c.compose(&c, &id).unwrap();
            let packed = cat.repack();
            prop_assert!(packed.depth() <= cat.depth());
            packed.validate().unwrap();
            for _ in 0..8 {
                let x: Vec<bool> = (0..8).map(|_| rng.gen()).collect();
                prop_assert_eq!(packed.simulate(&x).unwrap(), cat.simulate(&x).unwrap());
            }
        }
    }
}
