//! Basis-state simulation with 64 inputs packed per machine word.

use super::{GateKind, Register, ReversibleCircuit};
use crate::{Error, Result};

/// Up to 64 basis states stored as bit-planes: `planes[bit]` holds that bit
/// for every lane, lane `k` in bit `k` of the word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lanes {
    planes: Vec<u64>,
}

impl Lanes {
    pub const COUNT: usize = 64;

    pub fn new(width: usize) -> Self {
        Lanes { planes: vec![0; width] }
    }

    pub fn width(&self) -> usize {
        self.planes.len()
    }

    pub fn planes(&self) -> &[u64] {
        &self.planes
    }

    pub fn get_bit(&self, lane: usize, bit: usize) -> bool {
        self.planes[bit] >> lane & 1 == 1
    }

    pub fn set_bit(&mut self, lane: usize, bit: usize, v: bool) {
        let m = 1u64 << lane;
        if v {
            self.planes[bit] |= m;
        } else {
            self.planes[bit] &= !m;
        }
    }

    /// Writes `value` little-endian into `len` bits starting at `start`.
    pub fn set_value(&mut self, lane: usize, start: usize, len: usize, value: u64) {
        for i in 0..len {
            self.set_bit(lane, start + i, value >> i & 1 == 1);
        }
    }

    pub fn get_value(&self, lane: usize, start: usize, len: usize) -> u64 {
        (0..len).fold(0, |acc, i| acc | (self.get_bit(lane, start + i) as u64) << i)
    }

    pub fn set_reg(&mut self, lane: usize, reg: Register, value: u64) {
        self.set_value(lane, reg.start, reg.len, value);
    }

    pub fn get_reg(&self, lane: usize, reg: Register) -> u64 {
        self.get_value(lane, reg.start, reg.len)
    }

    /// Lanes in which any bit of `reg` is set.
    pub fn nonzero_mask(&self, reg: Register) -> u64 {
        reg.bits().fold(0, |acc, b| acc | self.planes[b])
    }

    pub fn lane(&self, lane: usize) -> Vec<bool> {
        (0..self.width()).map(|b| self.get_bit(lane, b)).collect()
    }
}

impl ReversibleCircuit {
    /// Runs one basis input through the circuit.
    pub fn simulate(&self, input: &[bool]) -> Result<Vec<bool>> {
        if input.len() != self.width {
            return Err(Error::WidthMismatch { expected: self.width, got: input.len() });
        }
        let mut lanes = Lanes::new(self.width);
        for (b, &v) in input.iter().enumerate() {
            lanes.set_bit(0, b, v);
        }
        self.run_planes(&mut lanes.planes);
        Ok(lanes.lane(0))
    }

    /// Runs 64 basis inputs at once.
    pub fn simulate_lanes(&self, lanes: &mut Lanes) -> Result<()> {
        if lanes.width() != self.width {
            return Err(Error::WidthMismatch { expected: self.width, got: lanes.width() });
        }
        self.run_planes(&mut lanes.planes);
        Ok(())
    }

    /// Lanes in which some ancilla register is nonzero.
    pub fn dirty_ancilla_mask(&self, lanes: &Lanes) -> u64 {
        self.ancilla_registers()
            .fold(0, |acc, (_, r)| acc | lanes.nonzero_mask(*r))
    }

    fn run_planes(&self, s: &mut [u64]) {
        for g in self.gates() {
            let b = g.bits();
            match g.kind() {
                GateKind::X => s[b[0]] = !s[b[0]],
                GateKind::Cnot => s[b[1]] ^= s[b[0]],
                GateKind::Toffoli => s[b[2]] ^= s[b[0]] & s[b[1]],
                GateKind::Swap => s.swap(b[0], b[1]),
                GateKind::Fredkin => {
                    let m = s[b[0]] & (s[b[1]] ^ s[b[2]]);
                    s[b[1]] ^= m;
                    s[b[2]] ^= m;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::revcirc::Gate;

    #[test]
    fn lanes_are_independent() {
        let c = ReversibleCircuit::from_gates(3, [Gate::toffoli(0, 1, 2)]).unwrap();
        let mut lanes = Lanes::new(3);
        for lane in 0..8 {
            lanes.set_value(lane, 0, 3, lane as u64);
        }
        c.simulate_lanes(&mut lanes).unwrap();
        for lane in 0..8u64 {
            let expect = lane ^ (((lane & 1) & (lane >> 1 & 1)) << 2);
            assert_eq!(lanes.get_value(lane as usize, 0, 3), expect);
        }
    }
}
