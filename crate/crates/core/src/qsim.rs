//! Dense statevector simulation for small widths.
//!
//! Qubit `q` is bit `q` of the basis index. SWAP gates are not applied to
//! the amplitudes; they relabel which physical bit holds each qubit, and
//! the permutation is folded back in when amplitudes are read.

use std::borrow::Cow;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::revcirc::{GateKind, ReversibleCircuit};
use crate::{Error, Result};

/// Largest supported register.
pub const MAX_QUBITS: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QGate {
    X(usize),
    Z(usize),
    H(usize),
    S(usize),
    T(usize),
    Cnot(usize, usize),
    Cz(usize, usize),
    Toffoli(usize, usize, usize),
    Swap(usize, usize),
    Fredkin(usize, usize, usize),
    /// Negates the amplitude when `table[v]` holds, `v` being the value of
    /// `qubits` read little-endian.
    PhaseFlip { qubits: Vec<usize>, table: Vec<bool> },
}

impl QGate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            QGate::X(a) | QGate::Z(a) | QGate::H(a) | QGate::S(a) | QGate::T(a) => vec![*a],
            QGate::Cnot(a, b) | QGate::Cz(a, b) | QGate::Swap(a, b) => vec![*a, *b],
            QGate::Toffoli(a, b, c) | QGate::Fredkin(a, b, c) => vec![*a, *b, *c],
            QGate::PhaseFlip { qubits, .. } => qubits.clone(),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            QGate::X(_) => "X",
            QGate::Z(_) => "Z",
            QGate::H(_) => "H",
            QGate::S(_) => "S",
            QGate::T(_) => "T",
            QGate::Cnot(..) => "CNOT",
            QGate::Cz(..) => "CZ",
            QGate::Toffoli(..) => "TOFFOLI",
            QGate::Swap(..) => "SWAP",
            QGate::Fredkin(..) => "FREDKIN",
            QGate::PhaseFlip { .. } => "PHASEFLIP",
        }
    }

    /// Builds a gate from its tag and qubits. `PHASEFLIP` is not available
    /// this way.
    pub fn from_tag(tag: &str, q: &[usize]) -> Result<QGate> {
        let want = |n: usize| {
            if q.len() == n {
                Ok(())
            } else {
                Err(Error::UnsupportedGate(format!("{tag} takes {n} qubits, got {}", q.len())))
            }
        };
        let g = match tag.to_ascii_uppercase().as_str() {
            "X" => want(1).map(|_| QGate::X(q[0]))?,
            "Z" => want(1).map(|_| QGate::Z(q[0]))?,
            "H" => want(1).map(|_| QGate::H(q[0]))?,
            "S" => want(1).map(|_| QGate::S(q[0]))?,
            "T" => want(1).map(|_| QGate::T(q[0]))?,
            "CNOT" | "CX" => want(2).map(|_| QGate::Cnot(q[0], q[1]))?,
            "CZ" => want(2).map(|_| QGate::Cz(q[0], q[1]))?,
            "SWAP" => want(2).map(|_| QGate::Swap(q[0], q[1]))?,
            "TOFFOLI" | "CCX" => want(3).map(|_| QGate::Toffoli(q[0], q[1], q[2]))?,
            "FREDKIN" | "CSWAP" => want(3).map(|_| QGate::Fredkin(q[0], q[1], q[2]))?,
            other => return Err(Error::UnsupportedGate(other.to_string())),
        };
        let mut sorted = q.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::UnsupportedGate(format!("{tag} repeats a qubit")));
        }
        Ok(g)
    }

    /// Same gate acting on `map[q]` instead of `q`.
    pub fn remap(&self, map: &[usize]) -> QGate {
        let m = |q: &usize| map[*q];
        match self {
            QGate::X(a) => QGate::X(m(a)),
            QGate::Z(a) => QGate::Z(m(a)),
            QGate::H(a) => QGate::H(m(a)),
            QGate::S(a) => QGate::S(m(a)),
            QGate::T(a) => QGate::T(m(a)),
            QGate::Cnot(a, b) => QGate::Cnot(m(a), m(b)),
            QGate::Cz(a, b) => QGate::Cz(m(a), m(b)),
            QGate::Swap(a, b) => QGate::Swap(m(a), m(b)),
            QGate::Toffoli(a, b, c) => QGate::Toffoli(m(a), m(b), m(c)),
            QGate::Fredkin(a, b, c) => QGate::Fredkin(m(a), m(b), m(c)),
            QGate::PhaseFlip { qubits, table } => QGate::PhaseFlip {
                qubits: qubits.iter().map(m).collect(),
                table: table.clone(),
            },
        }
    }
}

impl fmt::Display for QGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.tag(), self.qubits())
    }
}

impl FromStr for QGate {
    type Err = Error;

    /// Parses `TAG a b c`.
    fn from_str(s: &str) -> Result<Self> {
        let mut it = s.split_whitespace();
        let tag = it.next().ok_or_else(|| Error::UnsupportedGate("empty gate".into()))?;
        let qubits = it
            .map(|t| t.parse::<usize>().map_err(|e| Error::UnsupportedGate(format!("{t}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        QGate::from_tag(tag, &qubits)
    }
}

impl From<&crate::revcirc::Gate> for QGate {
    fn from(g: &crate::revcirc::Gate) -> Self {
        let b = g.bits();
        match g.kind() {
            GateKind::X => QGate::X(b[0]),
            GateKind::Cnot => QGate::Cnot(b[0], b[1]),
            GateKind::Toffoli => QGate::Toffoli(b[0], b[1], b[2]),
            GateKind::Swap => QGate::Swap(b[0], b[1]),
            GateKind::Fredkin => QGate::Fredkin(b[0], b[1], b[2]),
        }
    }
}

/// Gate-list circuit for the statevector simulator.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QuantumCircuit {
    pub width: usize,
    pub gates: Vec<QGate>,
}

impl QuantumCircuit {
    pub fn new(width: usize) -> Self {
        QuantumCircuit { width, gates: Vec::new() }
    }

    pub fn push(&mut self, g: QGate) -> &mut Self {
        self.gates.push(g);
        self
    }

    pub fn from_reversible(c: &ReversibleCircuit) -> Self {
        QuantumCircuit { width: c.width(), gates: c.gates().map(QGate::from).collect() }
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            if let Some(&q) = g.qubits().iter().find(|&&q| q >= self.width) {
                return Err(Error::IndexOutOfRange { index: q, len: self.width });
            }
            if let QGate::PhaseFlip { qubits, table } = g {
                if table.len() != 1 << qubits.len() {
                    return Err(Error::InvalidParameter("phase table size must be 2^qubits".into()));
                }
            }
        }
        Ok(())
    }
}

/// Amplitudes of a `width`-qubit register.
#[derive(Debug, Clone)]
pub struct Statevector {
    width: usize,
    amps: Vec<Complex64>,
    /// Physical bit holding each qubit.
    pos: Vec<usize>,
}

fn check_width(width: usize) -> Result<()> {
    if width > MAX_QUBITS {
        Err(Error::TooManyQubits { width, cap: MAX_QUBITS })
    } else {
        Ok(())
    }
}

impl Statevector {
    /// `|0...0>`.
    pub fn new(width: usize) -> Result<Self> {
        Self::basis(width, 0)
    }

    pub fn basis(width: usize, index: usize) -> Result<Self> {
        check_width(width)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << width];
        let len = amps.len();
        let slot = amps
            .get_mut(index)
            .ok_or(Error::IndexOutOfRange { index, len })?;
        *slot = Complex64::new(1.0, 0.0);
        Ok(Statevector { width, amps, pos: (0..width).collect() })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidParameter("amplitude count must be a power of two".into()));
        }
        let width = amps.len().trailing_zeros() as usize;
        check_width(width)?;
        Ok(Statevector { width, amps, pos: (0..width).collect() })
    }

    /// Normalized state with independent Gaussian amplitudes.
    pub fn random<R: Rng>(width: usize, rng: &mut R) -> Result<Self> {
        check_width(width)?;
        let mut gauss = || {
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
        };
        let mut amps: Vec<Complex64> = (0..1usize << width).map(|_| Complex64::new(gauss(), gauss())).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        Self::from_amplitudes(amps)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Amplitudes in qubit order.
    pub fn amplitudes(&self) -> Cow<'_, [Complex64]> {
        if self.pos.iter().enumerate().all(|(q, &p)| q == p) {
            return Cow::Borrowed(&self.amps);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let logical = self
                .pos
                .iter()
                .enumerate()
                .fold(0usize, |acc, (q, &p)| acc | (i >> p & 1) << q);
            out[logical] = a;
        }
        Cow::Owned(out)
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes().into_owned()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability mass on basis states satisfying `pred`.
    pub fn probability(&self, mut pred: impl FnMut(usize) -> bool) -> f64 {
        self.amplitudes()
            .iter()
            .enumerate()
            .filter(|(i, _)| pred(*i))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Draws a basis index with the Born rule.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let amps = self.amplitudes();
        let mut r: f64 = rng.gen::<f64>() * amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
        for (i, a) in amps.iter().enumerate() {
            r -= a.norm_sqr();
            if r <= 0.0 {
                return i;
            }
        }
        amps.len() - 1
    }

    fn one_qubit(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << self.pos[q];
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    fn phase_where(&mut self, mask: usize, phase: Complex64) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *a *= phase;
            }
        }
    }

    fn flip_where(&mut self, controls: usize, target: usize) {
        for i in 0..self.amps.len() {
            if i & controls == controls && i & target == 0 {
                self.amps.swap(i, i | target);
            }
        }
    }

    pub fn apply(&mut self, g: &QGate) -> Result<()> {
        if let Some(&q) = g.qubits().iter().find(|&&q| q >= self.width) {
            return Err(Error::IndexOutOfRange { index: q, len: self.width });
        }
        let one = Complex64::new(1.0, 0.0);
        let bit = |q: usize| 1usize << self.pos[q];
        match g {
            QGate::X(a) => self.flip_where(0, bit(*a)),
            QGate::Z(a) => self.phase_where(bit(*a), -one),
            QGate::S(a) => self.phase_where(bit(*a), Complex64::new(0.0, 1.0)),
            QGate::T(a) => self.phase_where(bit(*a), Complex64::from_polar(1.0, PI / 4.0)),
            QGate::H(a) => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                self.one_qubit(*a, [[h, h], [h, -h]]);
            }
            QGate::Cnot(c, t) => self.flip_where(bit(*c), bit(*t)),
            QGate::Cz(a, b) => self.phase_where(bit(*a) | bit(*b), -one),
            QGate::Toffoli(c0, c1, t) => self.flip_where(bit(*c0) | bit(*c1), bit(*t)),
            QGate::Swap(a, b) => self.pos.swap(*a, *b),
            QGate::Fredkin(c, a, b) => {
                let (c, a, b) = (bit(*c), bit(*a), bit(*b));
                for i in 0..self.amps.len() {
                    if i & c != 0 && i & a != 0 && i & b == 0 {
                        self.amps.swap(i, i ^ a ^ b);
                    }
                }
            }
            QGate::PhaseFlip { qubits, table } => {
                if table.len() != 1 << qubits.len() {
                    return Err(Error::InvalidParameter("phase table size must be 2^qubits".into()));
                }
                let bits: Vec<usize> = qubits.iter().map(|&q| self.pos[q]).collect();
                for (i, a) in self.amps.iter_mut().enumerate() {
                    let v = bits.iter().enumerate().fold(0usize, |acc, (k, &p)| acc | (i >> p & 1) << k);
                    if table[v] {
                        *a = -*a;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, c: &QuantumCircuit) -> Result<()> {
        if c.width != self.width {
            return Err(Error::WidthMismatch { expected: self.width, got: c.width });
        }
        for g in &c.gates {
            self.apply(g)?;
        }
        Ok(())
    }
}

/// Runs `c` on `|index>`.
pub fn run_basis(c: &QuantumCircuit, index: usize) -> Result<Statevector> {
    let mut s = Statevector::basis(c.width, index)?;
    s.apply_circuit(c)?;
    Ok(s)
}

/// Places a `a`-width state into `b`-width space, qubit `q` on
/// `embedding[q]`, remaining qubits `|0>`.
fn embed_state(amps: &[Complex64], embedding: &[usize], wb: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); 1 << wb];
    for (i, &a) in amps.iter().enumerate() {
        let j = embedding.iter().enumerate().fold(0usize, |acc, (q, &p)| acc | (i >> q & 1) << p);
        out[j] = a;
    }
    out
}

/// Checks that `b` acts like `a` with `a`'s qubit `q` on `b`'s qubit
/// `embedding[q]` and every other qubit of `b` an ancilla that starts and
/// ends in `|0>`. Uses every basis column when `b` has at most 10 qubits and
/// seeded random input states otherwise.
pub fn equivalent(a: &QuantumCircuit, b: &QuantumCircuit, embedding: &[usize], tol: f64) -> Result<bool> {
    Ok(max_deviation(a, b, embedding)? <= tol)
}

/// Largest amplitude difference found by [`equivalent`].
pub fn max_deviation(a: &QuantumCircuit, b: &QuantumCircuit, embedding: &[usize]) -> Result<f64> {
    if embedding.len() != a.width {
        return Err(Error::WidthMismatch { expected: a.width, got: embedding.len() });
    }
    let mut seen = vec![false; b.width];
    for &p in embedding {
        if p >= b.width || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidParameter("embedding must be injective into b".into()));
        }
    }
    check_width(b.width)?;
    let inputs: Vec<Statevector> = if b.width <= 10 {
        (0..1usize << a.width).map(|i| Statevector::basis(a.width, i)).collect::<Result<_>>()?
    } else {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xe9_01);
        (0..3).map(|_| Statevector::random(a.width, &mut rng)).collect::<Result<_>>()?
    };
    let mut worst = 0.0f64;
    for input in inputs {
        let mut sa = input.clone();
        sa.apply_circuit(a)?;
        let expect = embed_state(&sa.amplitudes(), embedding, b.width);
        let mut sb = Statevector::from_amplitudes(embed_state(&input.amplitudes(), embedding, b.width))?;
        sb.apply_circuit(b)?;
        let got = sb.amplitudes();
        for (x, y) in got.iter().zip(&expect) {
            worst = worst.max((x - y).norm());
        }
    }
    Ok(worst)
}

/// Outcome of [`grover_dynamics`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroverOutcome {
    pub success_probability: f64,
    pub closed_form: f64,
    pub iterations: usize,
    pub marked: usize,
    /// Set when nothing is marked; the probability is then zero.
    pub no_solution: bool,
}

/// `floor(pi/4 sqrt(N/M))`, the standard iteration count.
pub fn optimal_iterations(n: usize, m: usize) -> usize {
    if m == 0 {
        return 0;
    }
    ((PI / 4.0) * (n as f64 / m as f64).sqrt()).floor() as usize
}

/// `sin^2((2k+1) theta)` with `sin^2 theta = M/N`.
pub fn grover_closed_form(n: usize, m: usize, k: usize) -> f64 {
    let theta = (m as f64 / n as f64).sqrt().asin();
    ((2 * k + 1) as f64 * theta).sin().powi(2)
}

/// The uniform superposition over `log2 N` qubits followed by `k` rounds of
/// phase oracle and diffusion. Returns the mass on marked indices.
pub fn grover_state(marked: &[bool], iterations: usize) -> Result<Statevector> {
    let n = marked.len();
    if !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("search space {n} is not a power of two")));
    }
    let w = n.trailing_zeros() as usize;
    let qubits: Vec<usize> = (0..w).collect();
    let mut c = QuantumCircuit::new(w);
    for q in 0..w {
        c.push(QGate::H(q));
    }
    let mut zero = vec![false; n];
    zero[0] = true;
    let mut round = Vec::new();
    round.push(QGate::PhaseFlip { qubits: qubits.clone(), table: marked.to_vec() });
    round.extend((0..w).map(QGate::H));
    round.push(QGate::PhaseFlip { qubits, table: zero });
    round.extend((0..w).map(QGate::H));
    for _ in 0..iterations {
        c.gates.extend(round.iter().cloned());
    }
    let mut s = Statevector::new(w)?;
    s.apply_circuit(&c)?;
    Ok(s)
}

/// Success probability of Grover search for the marked set, together with
/// the closed-form prediction.
pub fn grover_dynamics(marked: &[bool], iterations: usize) -> Result<GroverOutcome> {
    let m = marked.iter().filter(|&&b| b).count();
    let s = grover_state(marked, iterations)?;
    let p = s.probability(|i| marked[i]);
    Ok(GroverOutcome {
        success_probability: p,
        closed_form: if m == 0 { 0.0 } else { grover_closed_form(marked.len(), m, iterations) },
        iterations,
        marked: m,
        no_solution: m == 0,
    })
}

/// JSON gate entry shared with the circuit formats.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QGateJson {
    pub g: String,
    pub bits: Vec<usize>,
}

impl QGateJson {
    pub fn to_gate(&self) -> Result<QGate> {
        QGate::from_tag(&self.g, &self.bits)
    }

    pub fn from_gate(g: &QGate) -> Result<QGateJson> {
        if matches!(g, QGate::PhaseFlip { .. }) {
            return Err(Error::UnsupportedGate("PHASEFLIP has no JSON form".into()));
        }
        Ok(QGateJson { g: g.tag().to_string(), bits: g.qubits() })
    }
}
