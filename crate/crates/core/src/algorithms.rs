//! Search algorithms on top of the memory-lookup circuits: oracle
//! composition, Multi-Grover, Element Distinctness and Collision Finding,
//! with query and stage-depth accounting.
//!
//! Grover dynamics run on the index register with the predicate applied
//! as a phase oracle. The compiled reversible oracle is checked against
//! the abstract predicate on every basis input first, which is what makes
//! the phase-oracle substitution exact.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::pram::{build_parallel_lookup, build_single_lookup};
use crate::qsim::{grover_closed_form, grover_state, optimal_iterations};
use crate::revcirc::{CircuitBuilder, Lanes, ReversibleCircuit, RegisterKind};
use crate::sortnet::{bitonic_network, ComparatorNetwork};
use crate::{bits_for, ceil_log2, Error, Result};

/// Entries `x` of `d` bits, plus an optional function table for the
/// collision problems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatabaseInstance {
    pub x: Vec<u64>,
    pub d: usize,
    pub f: Option<Vec<usize>>,
}

impl DatabaseInstance {
    pub fn new(x: Vec<u64>, d: usize, f: Option<Vec<usize>>) -> Result<Self> {
        if d == 0 || d > 63 {
            return Err(Error::InvalidParameter(format!("entry width {d} out of range 1..=63")));
        }
        if let Some(&v) = x.iter().find(|&&v| v >> d != 0) {
            return Err(Error::InvalidParameter(format!("entry {v} does not fit in {d} bits")));
        }
        if let Some(f) = &f {
            if f.len() != x.len() {
                return Err(Error::WidthMismatch { expected: x.len(), got: f.len() });
            }
            if let Some(&v) = f.iter().find(|&&v| v >= x.len()) {
                return Err(Error::IndexOutOfRange { index: v, len: x.len() });
            }
        }
        Ok(DatabaseInstance { x, d, f })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Entry `j`, zero past the end as the lookup circuits read it.
    pub fn entry(&self, j: usize) -> u64 {
        self.x.get(j).copied().unwrap_or(0)
    }
}

/// Counters accumulated over one run. Only ever increased.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CostLedger {
    pub oracle_calls: usize,
    pub pram_calls: usize,
    pub stage_depth: usize,
    pub width: usize,
}

impl CostLedger {
    pub fn charge(&mut self, oracle_calls: usize, pram_calls: usize, stage_depth: usize) {
        self.oracle_calls += oracle_calls;
        self.pram_calls += pram_calls;
        self.stage_depth += stage_depth;
    }

    pub fn use_width(&mut self, width: usize) {
        self.width = self.width.max(width);
    }

    pub fn merge(&mut self, other: &CostLedger) {
        self.charge(other.oracle_calls, other.pram_calls, other.stage_depth);
        self.use_width(other.width);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredicateKind {
    EqualsConstant(u64),
    PairEqual,
    Constant(bool),
    /// Defined only by its circuit.
    Custom,
}

/// A reversible predicate over `r` entries of `d` bits. The circuit has
/// registers `inputs` (`r * d` bits, entry `t` at `t * d`) and `b`, and
/// maps `|v>|b>` to `|v>|b xor alpha(v)>` with clean ancillas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateCircuit {
    pub r: usize,
    pub d: usize,
    pub kind: PredicateKind,
    pub circuit: ReversibleCircuit,
}

impl PredicateCircuit {
    /// `alpha(v) = [v == t]`.
    pub fn equals_constant(d: usize, t: u64) -> Result<Self> {
        if d == 0 || t >> d != 0 {
            return Err(Error::InvalidParameter(format!("constant {t} does not fit in {d} bits")));
        }
        let mut b = CircuitBuilder::new();
        let inp = b.register("inputs", d, RegisterKind::Data);
        let out = b.register("b", 1, RegisterKind::Data);
        let zeros: Vec<usize> = (0..d).filter(|&i| t >> i & 1 == 0).map(|i| inp.bit(i)).collect();
        for &q in &zeros {
            b.x(q);
        }
        let controls: Vec<usize> = inp.bits().collect();
        b.mcx(&controls, out.start);
        for &q in &zeros {
            b.x(q);
        }
        Ok(PredicateCircuit { r: 1, d, kind: PredicateKind::EqualsConstant(t), circuit: b.finish() })
    }

    /// `alpha(u, v) = [u == v]`.
    pub fn pair_equal(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("entries need at least one bit".into()));
        }
        let mut b = CircuitBuilder::new();
        let inp = b.register("inputs", 2 * d, RegisterKind::Data);
        let out = b.register("b", 1, RegisterKind::Data);
        for i in 0..d {
            b.cnot(inp.bit(i), inp.bit(d + i));
            b.x(inp.bit(d + i));
        }
        let controls: Vec<usize> = (d..2 * d).map(|i| inp.bit(i)).collect();
        b.mcx(&controls, out.start);
        for i in (0..d).rev() {
            b.x(inp.bit(d + i));
            b.cnot(inp.bit(i), inp.bit(d + i));
        }
        Ok(PredicateCircuit { r: 2, d, kind: PredicateKind::PairEqual, circuit: b.finish() })
    }

    /// The constant predicate; `false` is the identity.
    pub fn always(r: usize, d: usize, value: bool) -> Result<Self> {
        if r == 0 || d == 0 {
            return Err(Error::InvalidParameter("predicates need r >= 1 and d >= 1".into()));
        }
        let mut b = CircuitBuilder::new();
        b.register("inputs", r * d, RegisterKind::Data);
        let out = b.register("b", 1, RegisterKind::Data);
        if value {
            b.x(out.start);
        }
        Ok(PredicateCircuit { r, d, kind: PredicateKind::Constant(value), circuit: b.finish() })
    }

    /// Wraps a circuit with `inputs` and `b` registers.
    pub fn custom(r: usize, d: usize, circuit: ReversibleCircuit) -> Result<Self> {
        let inp = circuit.register("inputs").ok_or_else(|| Error::Circuit("predicate has no `inputs`".into()))?;
        let b = circuit.register("b").ok_or_else(|| Error::Circuit("predicate has no `b`".into()))?;
        if inp.len != r * d {
            return Err(Error::WidthMismatch { expected: r * d, got: inp.len });
        }
        if b.len != 1 {
            return Err(Error::WidthMismatch { expected: 1, got: b.len });
        }
        Ok(PredicateCircuit { r, d, kind: PredicateKind::Custom, circuit })
    }

    /// The abstract predicate on `r` entries.
    pub fn evaluate(&self, v: &[u64]) -> Result<bool> {
        if v.len() != self.r {
            return Err(Error::WidthMismatch { expected: self.r, got: v.len() });
        }
        Ok(match self.kind {
            PredicateKind::EqualsConstant(t) => v[0] == t,
            PredicateKind::PairEqual => v[0] == v[1],
            PredicateKind::Constant(c) => c,
            PredicateKind::Custom => self.simulate(v)?,
        })
    }

    /// Runs the circuit on `v` with `b = 0`.
    pub fn simulate(&self, v: &[u64]) -> Result<bool> {
        let inp = self.circuit.register("inputs").expect("checked on construction");
        let b = self.circuit.register("b").expect("checked on construction");
        let mut state = vec![false; self.circuit.width()];
        for (t, &val) in v.iter().enumerate() {
            for i in 0..self.d {
                state[inp.bit(t * self.d + i)] = val >> i & 1 == 1;
            }
        }
        let out = self.circuit.simulate(&state)?;
        Ok(out[b.start])
    }
}

/// `O_alpha`: `r` lookups `U_(1,N)` into a load register, the predicate,
/// then the lookups again to clear the load register.
///
/// Registers: `j` (`r` addresses of `ceil(log2 N)` bits), `b`, `x`
/// (`N * d`), and the ancilla `load` (`r * d`).
pub fn compose_oracle(alpha: &PredicateCircuit, n: usize, d: usize) -> Result<ReversibleCircuit> {
    if alpha.d != d {
        return Err(Error::WidthMismatch { expected: d, got: alpha.d });
    }
    let r = alpha.r;
    if r == 0 {
        return Err(Error::InvalidParameter("oracle needs r >= 1".into()));
    }
    let lookup = build_single_lookup(n, d)?;
    let a = bits_for(n);
    let mut b = CircuitBuilder::new();
    let j = b.register("j", r * a, RegisterKind::Data);
    let out = b.register("b", 1, RegisterKind::Data);
    let x = b.register("x", n * d, RegisterKind::Data);
    let load = b.register("load", r * d, RegisterKind::Ancilla);
    let mut embeddings = Vec::with_capacity(r);
    b.begin_stage("load", r);
    for t in 0..r {
        let emb = b.embedding(&lookup, &[("j", j.slice(t * a, a)), ("y", load.slice(t * d, d)), ("x", x)]);
        b.append(&lookup, &emb.map);
        embeddings.push(emb);
    }
    b.begin_stage("predicate", 1);
    let pemb = b.embedding(&alpha.circuit, &[("inputs", load), ("b", out)]);
    b.append(&alpha.circuit, &pemb.map);
    b.release(pemb.scratch);
    b.begin_stage("unload", r);
    for emb in embeddings.into_iter().rev() {
        b.append_inverse(&lookup, &emb.map);
        b.release(emb.scratch);
    }
    Ok(b.finish())
}

/// Result of checking a composed oracle on every basis input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleCheck {
    pub inputs_checked: usize,
    pub mismatches: usize,
    /// Every ancilla, including the load register, came back zero.
    pub clean: bool,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.clean
    }
}

/// Runs `oracle` on every address tuple and both values of `b`, comparing
/// against `alpha` on the addressed entries.
pub fn verify_oracle(oracle: &ReversibleCircuit, alpha: &PredicateCircuit, db: &DatabaseInstance) -> Result<OracleCheck> {
    let reg = |name: &str| oracle.register(name).ok_or_else(|| Error::Circuit(format!("oracle has no `{name}`")));
    let (jr, br, xr) = (reg("j")?, reg("b")?, reg("x")?);
    let r = alpha.r;
    let a = jr.len / r;
    if xr.len != db.len() * db.d {
        return Err(Error::WidthMismatch { expected: xr.len, got: db.len() * db.d });
    }
    let tuples = 1usize << (r * a);
    let total = 2 * tuples;
    let (mut mismatches, mut clean) = (0, true);
    let mut start = 0;
    while start < total {
        let n = (total - start).min(Lanes::COUNT);
        let mut lanes = Lanes::new(oracle.width());
        for lane in 0..n {
            let id = start + lane;
            lanes.set_value(lane, jr.start, jr.len, (id >> 1) as u64);
            lanes.set_bit(lane, br.start, id & 1 == 1);
            for (i, &v) in db.x.iter().enumerate() {
                lanes.set_value(lane, xr.start + i * db.d, db.d, v);
            }
        }
        oracle.simulate_lanes(&mut lanes)?;
        clean &= oracle.dirty_ancilla_mask(&lanes) & (u64::MAX >> (64 - n)) == 0;
        for lane in 0..n {
            let id = start + lane;
            let tuple = id >> 1;
            let vals: Vec<u64> = (0..r).map(|t| db.entry(tuple >> (t * a) & ((1 << a) - 1))).collect();
            let want = (id & 1 == 1) ^ alpha.evaluate(&vals)?;
            let x_ok = db.x.iter().enumerate().all(|(i, &v)| lanes.get_value(lane, xr.start + i * db.d, db.d) == v);
            let j_ok = lanes.get_value(lane, jr.start, jr.len) == tuple as u64;
            if lanes.get_bit(lane, br.start) != want || !x_ok || !j_ok {
                mismatches += 1;
            }
        }
        start += n;
    }
    Ok(OracleCheck { inputs_checked: total, mismatches, clean })
}

/// Address tuples of `r` entries, flattened with entry `t` at bits
/// `t * a..`.
fn marked_tuples(alpha: &PredicateCircuit, db: &DatabaseInstance) -> Result<Vec<bool>> {
    let a = bits_for(db.len());
    let r = alpha.r;
    (0..1usize << (r * a))
        .map(|tuple| {
            let vals: Vec<u64> = (0..r).map(|t| db.entry(tuple >> (t * a) & ((1 << a) - 1))).collect();
            alpha.evaluate(&vals)
        })
        .collect()
}

fn unflatten(tuple: usize, a: usize, r: usize) -> Vec<usize> {
    (0..r).map(|t| tuple >> (t * a) & ((1 << a) - 1)).collect()
}

/// Tuple sizes up to this many address bits are checked exhaustively
/// before searching.
const EXHAUSTIVE_ORACLE_BITS: usize = 12;

/// Searches attempted before reporting that nothing was found.
pub const SEARCH_ATTEMPTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGroverResult {
    /// Per predicate: a verified solution tuple, or `None`.
    pub solutions: Vec<Option<Vec<usize>>>,
    /// Iterations each search actually needed; the rest of each round was
    /// padded with identity calls.
    pub iterations: Vec<usize>,
    /// Iterations per round, the maximum over the searches.
    pub round_iterations: usize,
    pub attempts: usize,
    pub ledger: CostLedger,
}

/// Runs one Grover search per predicate in lock step, each on `r`-tuples
/// of addresses. Search `i` uses the iteration count for its exact number
/// of solutions and idles for the rest of the round. Rounds repeat until
/// every search has a verified answer or [`SEARCH_ATTEMPTS`] is reached.
pub fn multi_grover<R: Rng>(
    alphas: &[PredicateCircuit],
    db: &DatabaseInstance,
    rng: &mut R,
) -> Result<MultiGroverResult> {
    let n = db.len();
    if alphas.is_empty() || alphas.len() > n {
        return Err(Error::InvalidParameter(format!("need 1..={n} predicates, got {}", alphas.len())));
    }
    let r = alphas[0].r;
    if let Some(p) = alphas.iter().find(|p| p.r != r || p.d != db.d) {
        return Err(Error::InvalidParameter(format!(
            "predicate over r={} d={} mixed with r={r} d={}",
            p.r, p.d, db.d
        )));
    }
    let a = bits_for(n);
    let mut ledger = CostLedger::default();
    let net = bitonic_network(ceil_log2(2 * n).max(1))?;
    let pram = build_parallel_lookup(n, db.d, &net)?;
    let pram_depth = pram.metrics().stage_depth;
    ledger.use_width(pram.width() + alphas.iter().map(|p| p.circuit.width()).sum::<usize>());

    let mut marked = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        if r * a <= EXHAUSTIVE_ORACLE_BITS {
            let oracle = compose_oracle(alpha, n, db.d)?;
            let check = verify_oracle(&oracle, alpha, db)?;
            if !check.passed() {
                return Err(Error::Circuit(format!(
                    "composed oracle disagrees with its predicate on {} inputs",
                    check.mismatches
                )));
            }
        }
        marked.push(marked_tuples(alpha, db)?);
    }
    let space = 1usize << (r * a);
    let iterations: Vec<usize> = marked
        .iter()
        .map(|m| optimal_iterations(space, m.iter().filter(|&&b| b).count()))
        .collect();
    let round = iterations.iter().copied().max().unwrap_or(0);
    let states = marked
        .iter()
        .zip(&iterations)
        .map(|(m, &k)| grover_state(m, k))
        .collect::<Result<Vec<_>>>()?;

    let mut solutions: Vec<Option<Vec<usize>>> = vec![None; alphas.len()];
    let mut attempts = 0;
    while attempts < SEARCH_ATTEMPTS && solutions.iter().any(Option::is_none) {
        attempts += 1;
        // One oracle call per iteration, each a U_(N,N), the predicates
        // and a U_(N,N) per tuple entry.
        ledger.charge(round, 2 * r * round, round * (2 * r * pram_depth + 2) + 1);
        for (i, state) in states.iter().enumerate() {
            if solutions[i].is_some() {
                continue;
            }
            let tuple = state.sample(rng);
            let idx = unflatten(tuple, a, r);
            let vals: Vec<u64> = idx.iter().map(|&j| db.entry(j)).collect();
            if idx.iter().all(|&j| j < n) && alphas[i].evaluate(&vals)? {
                solutions[i] = Some(idx);
            }
        }
    }
    Ok(MultiGroverResult { solutions, iterations, round_iterations: round, attempts, ledger })
}

/// Outcome of a collision search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Collision {
    Pair(usize, usize),
    /// No collision was found within the budget.
    None,
}

impl Collision {
    pub fn is_valid_for(&self, f: &[usize]) -> bool {
        match *self {
            Collision::Pair(i, j) => i != j && i < f.len() && j < f.len() && f[i] == f[j],
            Collision::None => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistinctnessRun {
    pub result: Collision,
    /// Collision found inside the first sample, before any search.
    pub found_in_sample: bool,
    /// Grover iterations per block search.
    pub block_iterations: usize,
    /// Amplification iterations per attempt.
    pub amplification_iterations: usize,
    /// Invocations of the amplified routine, summed over attempts.
    pub amplification_rounds: usize,
    pub attempts: usize,
    /// Estimated success probability of one routine invocation.
    pub routine_success: f64,
    pub ledger: CostLedger,
}

/// Samples used to estimate the routine's success probability.
const ROUTINE_SAMPLES: usize = 2048;

/// Element Distinctness with `S` processors on a table `f: [N] -> [N]`.
///
/// The routine samples `S` inputs, sorts their values with a compiled
/// network and looks for an internal collision. Otherwise it marks every
/// input outside the sample whose value is in the sample (a binary search
/// over the sorted list with `U_(S,S)` lookups) and runs `S` parallel
/// Grover searches over blocks of about `N / S` inputs. The routine is
/// wrapped in amplitude amplification, simulated exactly on its
/// two-dimensional success/failure subspace.
#[derive(Debug, Clone)]
pub struct ElementDistinctness {
    pub n: usize,
    pub s: usize,
    /// Stage-depth of one sort of the sample.
    pub sort_depth: usize,
    /// Stage-depth of one evaluation of the membership function.
    pub membership_depth: usize,
    pub lookups_per_membership: usize,
    pub width: usize,
    sort: ComparatorNetwork,
}

impl ElementDistinctness {
    pub fn new(n: usize, s: usize) -> Result<Self> {
        if s == 0 || s > n {
            return Err(Error::InvalidParameter(format!("S = {s} outside 1..={n}")));
        }
        let sort = bitonic_network(ceil_log2(s).max(1))?;
        let d = bits_for(n).max(1);
        let pnet = bitonic_network(ceil_log2(2 * s).max(1))?;
        let pram = build_parallel_lookup(s, 2 * d, &pnet)?;
        let lookups = ceil_log2(s) + 1;
        Ok(ElementDistinctness {
            n,
            s,
            sort_depth: sort.depth(),
            membership_depth: lookups * pram.metrics().stage_depth + 1,
            lookups_per_membership: lookups,
            width: pram.width(),
            sort,
        })
    }

    /// Block boundaries of the `S` parallel searches.
    fn blocks(&self) -> Vec<std::ops::Range<usize>> {
        (0..self.s).map(|b| b * self.n / self.s..(b + 1) * self.n / self.s).collect()
    }

    pub fn block_iterations(&self) -> usize {
        let largest = self.n.div_ceil(self.s);
        optimal_iterations(largest, 1)
    }

    /// Stage-depth of one routine invocation.
    pub fn routine_depth(&self) -> usize {
        self.sort_depth + self.block_iterations() * (self.membership_depth + 1)
    }

    fn check_table(&self, f: &[usize]) -> Result<()> {
        if f.len() != self.n {
            return Err(Error::WidthMismatch { expected: self.n, got: f.len() });
        }
        if let Some(&v) = f.iter().find(|&&v| v >= self.n) {
            return Err(Error::IndexOutOfRange { index: v, len: self.n });
        }
        Ok(())
    }

    /// Sorts the sampled `(f(x), x)` pairs with the compiled network and
    /// returns the first adjacent pair of equal values.
    fn sorted_sample(&self, f: &[usize], sample: &[usize]) -> Option<(usize, usize)> {
        let mut items: Vec<(usize, usize)> = sample.iter().map(|&x| (f[x], x)).collect();
        items.resize(self.sort.wires(), (usize::MAX, usize::MAX));
        self.sort.apply_by(&mut items, |a, b| a > b);
        let items = self.sort.ranked(&items);
        items[..sample.len()].windows(2).find(|w| w[0].0 == w[1].0).map(|w| (w[0].1, w[1].1))
    }

    /// One routine invocation for a given sample: per-block success
    /// probabilities of the parallel searches.
    fn block_probabilities(&self, f: &[usize], sample: &[usize]) -> Vec<(f64, Vec<usize>)> {
        let mut in_sample = vec![false; self.n];
        let mut value_in = vec![false; self.n];
        for &x in sample {
            in_sample[x] = true;
            value_in[f[x]] = true;
        }
        let k = self.block_iterations();
        self.blocks()
            .into_iter()
            .map(|blk| {
                let size = blk.len();
                let marked: Vec<usize> = blk.filter(|&x| !in_sample[x] && value_in[f[x]]).collect();
                let p = if marked.is_empty() { 0.0 } else { grover_closed_form(size, marked.len(), k) };
                (p, marked)
            })
            .collect()
    }

    /// Draws one routine outcome: a collision pair or nothing.
    fn draw_routine<R: Rng>(&self, f: &[usize], rng: &mut R) -> Option<(usize, usize)> {
        let sample_set: Vec<usize> = sample(rng, self.n, self.s).into_vec();
        if let Some(p) = self.sorted_sample(f, &sample_set) {
            return Some((p.0.min(p.1), p.0.max(p.1)));
        }
        for (p, marked) in self.block_probabilities(f, &sample_set) {
            if !marked.is_empty() && rng.gen::<f64>() < p {
                let x = marked[rng.gen_range(0..marked.len())];
                let partner = sample_set.iter().copied().find(|&y| f[y] == f[x])?;
                return Some((x.min(partner), x.max(partner)));
            }
        }
        None
    }

    pub fn run<R: Rng>(&self, f: &[usize], rng: &mut R) -> Result<DistinctnessRun> {
        self.check_table(f)?;
        let first: Vec<usize> = sample(rng, self.n, self.s).into_vec();
        self.run_with_sample(f, &first, rng)
    }

    /// Like [`run`](Self::run) with a fixed first sample.
    pub fn run_with_sample<R: Rng>(&self, f: &[usize], first: &[usize], rng: &mut R) -> Result<DistinctnessRun> {
        self.check_table(f)?;
        if first.len() != self.s || first.iter().any(|&x| x >= self.n) {
            return Err(Error::InvalidParameter(format!("sample must hold {} inputs below {}", self.s, self.n)));
        }
        let mut ledger = CostLedger::default();
        ledger.use_width(self.width);
        ledger.charge(0, 0, self.sort_depth);
        let hit = self.sorted_sample(f, first);
        let k_block = self.block_iterations();
        if let Some((i, j)) = hit {
            return Ok(DistinctnessRun {
                result: Collision::Pair(i.min(j), i.max(j)),
                found_in_sample: true,
                block_iterations: k_block,
                amplification_iterations: 0,
                amplification_rounds: 0,
                attempts: 0,
                routine_success: 1.0,
                ledger,
            });
        }

        let mut wins = 0usize;
        for _ in 0..ROUTINE_SAMPLES {
            if self.draw_routine(f, rng).is_some() {
                wins += 1;
            }
        }
        let p = wins as f64 / ROUTINE_SAMPLES as f64;
        let k_amp = amplification_iterations(p, self.n, self.s);
        let p_amp = if p > 0.0 { ((2 * k_amp + 1) as f64 * p.sqrt().asin()).sin().powi(2) } else { 0.0 };

        let mut attempts = 0;
        let mut result = Collision::None;
        while attempts < SEARCH_ATTEMPTS {
            attempts += 1;
            let invocations = 2 * k_amp + 1;
            ledger.charge(
                invocations * k_block,
                invocations * k_block * self.lookups_per_membership,
                invocations * self.routine_depth(),
            );
            if rng.gen::<f64>() < p_amp {
                // Measure the amplified state in its success subspace.
                let mut pair = None;
                for _ in 0..ROUTINE_SAMPLES * 64 {
                    if let Some(found) = self.draw_routine(f, rng) {
                        pair = Some(found);
                        break;
                    }
                }
                if let Some((i, j)) = pair {
                    let c = Collision::Pair(i, j);
                    if c.is_valid_for(f) {
                        result = c;
                        break;
                    }
                }
            }
        }
        Ok(DistinctnessRun {
            result,
            found_in_sample: false,
            block_iterations: k_block,
            amplification_iterations: k_amp,
            amplification_rounds: attempts * (2 * k_amp + 1),
            attempts,
            routine_success: p,
            ledger,
        })
    }
}

/// Amplification iterations for a routine succeeding with probability
/// `p`: the better of the two integers around `pi / (4 theta) - 1/2`.
/// With `p = 0` the full budget `floor(pi/4 sqrt(N/S))` is spent.
pub fn amplification_iterations(p: f64, n: usize, s: usize) -> usize {
    if p <= 0.0 {
        return optimal_iterations(n, s);
    }
    if p >= 1.0 {
        return 0;
    }
    let theta = p.sqrt().asin();
    let ideal = std::f64::consts::PI / (4.0 * theta) - 0.5;
    let success = |k: usize| ((2 * k + 1) as f64 * theta).sin().powi(2);
    let lo = ideal.floor().max(0.0) as usize;
    if success(lo + 1) > success(lo) {
        lo + 1
    } else {
        lo
    }
}

/// Convenience wrapper building an [`ElementDistinctness`] for one run.
pub fn element_distinctness<R: Rng>(f: &[usize], s: usize, rng: &mut R) -> Result<DistinctnessRun> {
    ElementDistinctness::new(f.len(), s)?.run(f, rng)
}

/// Checks that `f` is one-to-one or two-to-one.
pub fn check_collision_promise(f: &[usize]) -> Result<bool> {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &v in f {
        *counts.entry(v).or_default() += 1;
    }
    let max = counts.values().copied().max().unwrap_or(1);
    let min = counts.values().copied().min().unwrap_or(1);
    match (min, max) {
        (1, 1) => Ok(false),
        (2, 2) => Ok(true),
        _ => Err(Error::PromiseViolation(format!(
            "values have between {min} and {max} preimages; expected all 1 or all 2"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionRun {
    pub result: Collision,
    /// Inputs sampled for the reduction.
    pub sampled: usize,
    /// Grover iterations of each block search.
    pub iterations_per_search: usize,
    pub ledger: CostLedger,
}

/// Collision Finding by reduction: restrict `f` to `ceil(2 sqrt N)`
/// random inputs and solve Element Distinctness there.
pub fn collision_finding<R: Rng>(f: &[usize], s: usize, rng: &mut R) -> Result<CollisionRun> {
    check_collision_promise(f)?;
    let n = f.len();
    let m = ((2.0 * (n as f64).sqrt()).ceil() as usize).clamp(2.min(n), n);
    let chosen: Vec<usize> = sample(rng, n, m).into_vec();
    // Relabel the sampled values into 0..m so the restriction is a table.
    let mut labels: HashMap<usize, usize> = HashMap::new();
    let restricted: Vec<usize> = chosen
        .iter()
        .map(|&x| {
            let next = labels.len();
            *labels.entry(f[x]).or_insert(next)
        })
        .collect();
    let ed = ElementDistinctness::new(m, s.clamp(1, m))?;
    let run = ed.run(&restricted, rng)?;
    let result = match run.result {
        Collision::Pair(i, j) => {
            let (a, b) = (chosen[i], chosen[j]);
            Collision::Pair(a.min(b), a.max(b))
        }
        Collision::None => Collision::None,
    };
    debug_assert!(result.is_valid_for(f));
    Ok(CollisionRun { result, sampled: m, iterations_per_search: ed.block_iterations(), ledger: run.ledger })
}

/// Collision Finding by direct search: sample `S` inputs, then run `S`
/// Grover searches on disjoint random blocks of `N / S^2` inputs for a
/// partner of a sampled value. Repeats up to [`SEARCH_ATTEMPTS`] times.
pub fn collision_direct<R: Rng>(f: &[usize], s: usize, rng: &mut R) -> Result<CollisionRun> {
    check_collision_promise(f)?;
    let n = f.len();
    if s == 0 || s > n {
        return Err(Error::InvalidParameter(format!("S = {s} outside 1..={n}")));
    }
    let block = (n / (s * s)).max(1);
    let k = optimal_iterations(block, 1);
    let mut ledger = CostLedger::default();
    let lookups = ceil_log2(s) + 1;
    for _ in 0..SEARCH_ATTEMPTS {
        ledger.charge(k, k * lookups, k * (lookups + 1) + 1);
        let picked: Vec<usize> = sample(rng, n, (s + s * block).min(n)).into_vec();
        let (l, rest) = picked.split_at(s.min(picked.len()));
        let mut seen: HashMap<usize, usize> = HashMap::new();
        for &x in l {
            if let Some(&y) = seen.get(&f[x]) {
                return Ok(CollisionRun {
                    result: Collision::Pair(x.min(y), x.max(y)),
                    sampled: s,
                    iterations_per_search: k,
                    ledger,
                });
            }
            seen.insert(f[x], x);
        }
        for chunk in rest.chunks(block) {
            let marked: Vec<usize> = chunk.iter().copied().filter(|x| seen.contains_key(&f[*x])).collect();
            if marked.is_empty() {
                continue;
            }
            if rng.gen::<f64>() < grover_closed_form(chunk.len(), marked.len(), k) {
                let x = marked[rng.gen_range(0..marked.len())];
                let y = seen[&f[x]];
                return Ok(CollisionRun {
                    result: Collision::Pair(x.min(y), x.max(y)),
                    sampled: s,
                    iterations_per_search: k,
                    ledger,
                });
            }
        }
    }
    Ok(CollisionRun { result: Collision::None, sampled: s, iterations_per_search: k, ledger })
}

/// A random permutation table with `x_b` overwritten by `f(x_a)` for a
/// random pair `a != b`: exactly one collision.
pub fn planted_collision<R: Rng>(n: usize, rng: &mut R) -> (Vec<usize>, (usize, usize)) {
    let mut f: Vec<usize> = sample(rng, n, n).into_vec();
    let pair = sample(rng, n, 2).into_vec();
    f[pair[1]] = f[pair[0]];
    (f, (pair[0].min(pair[1]), pair[0].max(pair[1])))
}

/// A random two-to-one table on even `n`.
pub fn random_two_to_one<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let order = sample(rng, n, n).into_vec();
    let values = sample(rng, n, n / 2).into_vec();
    let mut f = vec![0; n];
    for (i, &x) in order.iter().enumerate() {
        f[x] = values[i / 2];
    }
    f
}
