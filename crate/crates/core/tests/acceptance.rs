//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use qroute_core::algorithms::{
    collision_finding, compose_oracle, planted_collision, random_two_to_one, verify_oracle, Collision,
    DatabaseInstance, ElementDistinctness, PredicateCircuit,
};
use qroute_core::bench::{depth_model, width_model};
use qroute_core::datamove::{build_data_mover, Destinations};
use qroute_core::emulator::{emulate, random_logical_circuit, EmulateOptions, LogicalCircuit};
use qroute_core::fit::{ratio_trend, scale_fit};
use qroute_core::pram::{build_parallel_lookup, gather_oracle, run_lookup_cases, LookupCase};
use qroute_core::qsim::{equivalent, QGate, grover_closed_form, grover_dynamics, optimal_iterations, run_basis, QuantumCircuit};
use qroute_core::revcirc::{Gate, Lanes, ReversibleCircuit};
use qroute_core::sortnet::{bitonic_network, local_network, oets_network, verify_network};
use qroute_core::topology::{build_topology, TopologySpec};
use qroute_core::ceil_log2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Outcome;
type FamilyCase = (&'static str, fn(usize) -> TopologySpec, fn(f64) -> f64);

fn within(start: Instant, limit: Option<Duration>, pass: bool, detail: String) -> Outcome {
    let took = start.elapsed();
    let in_time = limit.is_none_or(|l| took <= l);
    let budget = limit.map_or(String::new(), |l| format!(" (limit {}s)", l.as_secs()));
    Outcome { pass: pass && in_time, detail: format!("{detail}; {:.2}s{budget}", took.as_secs_f64()) }
}

fn sorting_networks() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for t in 1..=6 {
        let net = bitonic_network(t).unwrap();
        let r = verify_network(&net);
        if !(r.sorted && r.exhaustive) || net.depth() != t * (t + 1) / 2 {
            bad.push(format!("bitonic({t})"));
        }
    }
    for n in 2..=20 {
        let r = verify_network(&oets_network(n).unwrap());
        if !(r.sorted && r.exhaustive) {
            bad.push(format!("oets({n})"));
        }
    }
    within(start, Some(Duration::from_secs(10)), bad.is_empty(), format!("25 networks, failures {bad:?}"))
}

fn data_mover() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut cases, mut failures) = (0, 0);
    for n in [4usize, 8, 16] {
        let net = bitonic_network(ceil_log2(2 * n)).unwrap();
        for d in [1usize, 4] {
            let c = build_data_mover(n, d, &net, &Destinations::Quantum).unwrap();
            let (jr, xr) = (c.register("j").unwrap(), c.register("x").unwrap());
            let a = jr.len / n;
            for _ in 0..8 {
                let mut lanes = Lanes::new(c.width());
                let mut expect = Vec::new();
                for lane in 0..Lanes::COUNT {
                    let mut perm: Vec<usize> = (0..n).collect();
                    perm.shuffle(&mut rng);
                    let x: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1u64 << d)).collect();
                    for i in 0..n {
                        lanes.set_value(lane, jr.start + i * a, a, perm[i] as u64);
                        lanes.set_value(lane, xr.start + i * d, d, x[i]);
                    }
                    expect.push((perm, x));
                }
                c.simulate_lanes(&mut lanes).unwrap();
                let dirty = c.dirty_ancilla_mask(&lanes);
                for (lane, (perm, x)) in expect.iter().enumerate() {
                    cases += 1;
                    let moved = (0..n).all(|i| lanes.get_value(lane, xr.start + i * d, d) == x[perm[i]]);
                    let j_kept = (0..n).all(|i| lanes.get_value(lane, jr.start + i * a, a) == perm[i] as u64);
                    if !moved || !j_kept || dirty >> lane & 1 == 1 {
                        failures += 1;
                    }
                }
            }
        }
    }
    within(start, Some(Duration::from_secs(60)), failures == 0, format!("{cases} cases, {failures} failures"))
}

fn parallel_lookup() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut total, mut failures) = (0, 0);
    for n in [4usize, 8, 16] {
        let net = bitonic_network(ceil_log2(2 * n)).unwrap();
        for d in [1usize, 3] {
            let c = build_parallel_lookup(n, d, &net).unwrap();
            let data = |rng: &mut ChaCha8Rng| (0..n).map(|_| rng.gen_range(0..1u64 << d)).collect::<Vec<_>>();
            let mut cases = Vec::new();
            for _ in 0..1000 {
                let j = (0..n).map(|_| rng.gen_range(0..n as u64)).collect();
                cases.push(LookupCase { j, y: data(&mut rng), x: data(&mut rng) });
            }
            for _ in 0..64 {
                let same = rng.gen_range(0..n as u64);
                let (h0, h1) = (rng.gen_range(0..n as u64), rng.gen_range(0..n as u64));
                cases.push(LookupCase { j: vec![same; n], y: data(&mut rng), x: data(&mut rng) });
                cases.push(LookupCase { j: (0..n as u64).collect(), y: data(&mut rng), x: data(&mut rng) });
                let two_hot = (0..n).map(|_| if rng.gen() { h0 } else { h1 }).collect();
                cases.push(LookupCase { j: two_hot, y: data(&mut rng), x: data(&mut rng) });
            }
            let outs = run_lookup_cases(&c, d, &cases).unwrap();
            for (case, out) in cases.iter().zip(&outs) {
                total += 1;
                let j: Vec<usize> = case.j.iter().map(|&v| v as usize).collect();
                let want = gather_oracle(&j, &case.y, &case.x).unwrap();
                if out.y != want || !out.inputs_intact || !out.clean {
                    failures += 1;
                }
            }
        }
    }
    within(start, Some(Duration::from_secs(120)), failures == 0, format!("{total} cases, {failures} failures"))
}

fn lookup_scaling() -> Outcome {
    let start = Instant::now();
    let d = 4;
    let ns = [4usize, 8, 16, 32, 64];
    let (mut widths, mut depths, mut wm, mut dm) = (vec![], vec![], vec![], vec![]);
    for &n in &ns {
        let net = bitonic_network(ceil_log2(2 * n)).unwrap();
        let m = build_parallel_lookup(n, d, &net).unwrap().metrics();
        widths.push(m.width as f64);
        depths.push(m.stage_depth as f64);
        wm.push(width_model(n, d));
        dm.push(depth_model(n, d));
    }
    let w = scale_fit(&widths, &wm).unwrap();
    let s = scale_fit(&depths, &dm).unwrap();
    within(
        start,
        None,
        w.max_residual <= 0.25 && s.max_residual <= 0.25,
        format!(
            "width c={:.2} worst residual {:.1}%, stage-depth c'={:.2} worst residual {:.1}%",
            w.c,
            100.0 * w.max_residual,
            s.c,
            100.0 * s.max_residual
        ),
    )
}

fn emulation_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let targets: Vec<_> = [TopologySpec::Line(8), TopologySpec::Hypercube(8), TopologySpec::Complete(8)]
        .into_iter()
        .map(|s| {
            let t = build_topology(s).unwrap();
            let net = local_network(&t, 2).unwrap();
            (t, net)
        })
        .collect();
    let (mut cases, mut failures) = (0, 0);
    for _ in 0..50 {
        let width = rng.gen_range(2..=8);
        let depth = rng.gen_range(1..=12);
        let c = random_logical_circuit(width, depth, &mut rng);
        for (topo, net) in &targets {
            cases += 1;
            let e = emulate(&c, topo, net, EmulateOptions::default()).unwrap();
            if !equivalent(&c.to_quantum(), &e.circuit, &e.embedding(), 1e-10).unwrap() {
                failures += 1;
            }
        }
    }
    within(start, Some(Duration::from_secs(300)), failures == 0, format!("{cases} emulations, {failures} failures"))
}

/// Per-timeslice overhead on slices pairing every node with a partner:
/// the mirror pairing `(i, N-1-i)` plus seeded random pairings. Returns
/// the overhead in stage units and in actual swap layers.
fn slice_overhead(spec: TopologySpec, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let topo = build_topology(spec).unwrap();
    let n = topo.node_count();
    let net = local_network(&topo, 2).unwrap();
    let mut slices = vec![(0..n / 2).map(|i| QGate::Cnot(i, n - 1 - i)).collect::<Vec<_>>()];
    for _ in 0..7 {
        let mut q: Vec<usize> = (0..n).collect();
        q.shuffle(rng);
        slices.push(q.chunks(2).map(|p| QGate::Cnot(p[0], p[1])).collect());
    }
    let c = LogicalCircuit::new(n, slices).unwrap();
    let opts = EmulateOptions { skip_adjacent: false, ..Default::default() };
    let m = emulate(&c, &topo, &net, opts).unwrap().metrics;
    (m.network_overhead, m.overhead)
}

fn overhead_scaling() -> Outcome {
    let start = Instant::now();
    let ns = [8usize, 16, 32, 64];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut parts = Vec::new();
    let mut pass = true;
    let families: [FamilyCase; 3] = [
        ("line", TopologySpec::Line, |n| n),
        ("hypercube", TopologySpec::Hypercube, |n| n.log2().powi(2)),
        ("complete", TopologySpec::Complete, |n| n.log2()),
    ];
    for (name, spec, model) in families {
        let (stage, swaps): (Vec<f64>, Vec<f64>) = ns.iter().map(|&n| slice_overhead(spec(n), &mut rng)).unzip();
        let ms: Vec<f64> = ns.iter().map(|&n| model(n as f64)).collect();
        let nondecreasing = stage.windows(2).all(|w| w[1] >= w[0]);
        let (ratios, bounded) = ratio_trend(&stage, &ms, 0.10);
        pass &= nondecreasing && bounded;
        let shown: Vec<String> = ns
            .iter()
            .zip(stage.iter().zip(&ratios).zip(&swaps))
            .map(|(n, ((y, r), s))| format!("N={n}:{y:.0}/{r:.2}/{s:.1}"))
            .collect();
        parts.push(format!("{name} [{}]", shown.join(" ")));
    }
    let detail = format!("stage units/ratio to model/swap layers: {}", parts.join("; "));
    within(start, None, pass, detail)
}

fn grover() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [4usize, 16, 64] {
        for m in [1usize, 2] {
            let k = optimal_iterations(n, m);
            let mut marked = vec![false; n];
            for i in 0..m {
                marked[(i * 7 + 3) % n] = true;
            }
            let g = grover_dynamics(&marked, k).unwrap();
            worst = worst.max((g.success_probability - grover_closed_form(n, m, k)).abs());
        }
    }
    within(start, None, worst <= 1e-9, format!("max |simulated - closed form| = {worst:.2e}"))
}

fn oracle_composition() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut inputs, mut bad) = (0, Vec::new());
    for n in [2usize, 4, 8, 16, 32, 64] {
        let d = 3;
        let x: Vec<u64> = (0..n).map(|_| rng.gen_range(0..8)).collect();
        let db = DatabaseInstance::new(x.clone(), d, None).unwrap();
        let alphas = [PredicateCircuit::equals_constant(d, x[n / 2]).unwrap(), PredicateCircuit::pair_equal(d).unwrap()];
        for alpha in &alphas {
            let oracle = compose_oracle(alpha, n, d).unwrap();
            let check = verify_oracle(&oracle, alpha, &db).unwrap();
            inputs += check.inputs_checked;
            if !check.passed() {
                bad.push(format!("N={n} r={}", alpha.r));
            }
        }
    }
    within(start, None, bad.is_empty(), format!("{inputs} basis inputs, failures {bad:?}"))
}

fn element_distinctness() -> Outcome {
    let start = Instant::now();
    let mut cells = Vec::new();
    let mut pass = true;
    for n in [16usize, 32, 64] {
        for s in [2usize, 4, 8] {
            let mut rng = ChaCha8Rng::seed_from_u64(9000 + (n * 10 + s) as u64);
            let ed = ElementDistinctness::new(n, s).unwrap();
            let (mut ok, mut rounds, mut searched) = (0, 0, 0);
            for _ in 0..200 {
                let (f, pair) = planted_collision(n, &mut rng);
                let run = ed.run(&f, &mut rng).unwrap();
                if run.result == Collision::Pair(pair.0, pair.1) {
                    ok += 1;
                }
                if !run.found_in_sample {
                    rounds += run.amplification_rounds;
                    searched += 1;
                }
            }
            let mean_rounds = rounds as f64 / searched.max(1) as f64;
            let product = s as f64 * mean_rounds * ed.routine_depth() as f64;
            let freq = ok as f64 / 200.0;
            pass &= freq >= 2.0 / 3.0;
            cells.push((n, s, freq, product / n as f64));
        }
    }
    // ST / N against one fitted constant, as for the resource fits.
    let c = (cells.iter().map(|c| c.3.ln()).sum::<f64>() / cells.len() as f64).exp();
    let mut parts = Vec::new();
    for &(n, s, freq, ratio) in &cells {
        let band = (n as f64).log2().powi(3);
        let rel = ratio / c;
        pass &= rel <= band && rel >= 1.0 / band;
        parts.push(format!("N={n} S={s} p={freq:.2} ST/N={ratio:.0} ({rel:.2}c)"));
    }
    within(start, None, pass, format!("c={c:.0}: {}", parts.join(", ")))
}

fn collision() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for n in [16usize, 32] {
        let mut rng = ChaCha8Rng::seed_from_u64(10 + n as u64);
        let (mut ok, mut false_alarm) = (0, 0);
        for _ in 0..200 {
            let f = random_two_to_one(n, &mut rng);
            let run = collision_finding(&f, 4, &mut rng).unwrap();
            if matches!(run.result, Collision::Pair(..)) && run.result.is_valid_for(&f) {
                ok += 1;
            }
            let mut g: Vec<usize> = (0..n).collect();
            g.shuffle(&mut rng);
            if collision_finding(&g, 4, &mut rng).unwrap().result != Collision::None {
                false_alarm += 1;
            }
        }
        let freq = ok as f64 / 200.0;
        pass &= freq >= 2.0 / 3.0 && false_alarm == 0;
        parts.push(format!("N={n} p={freq:.2} one-to-one misreports={false_alarm}"));
    }
    within(start, None, pass, parts.join(", "))
}

fn random_reversible(width: usize, gates: usize, rng: &mut ChaCha8Rng) -> ReversibleCircuit {
    let mut list = Vec::with_capacity(gates);
    for _ in 0..gates {
        let arity = rng.gen_range(1..=3.min(width));
        let mut bits: Vec<usize> = (0..width).collect();
        bits.shuffle(rng);
        let b = &bits[..arity];
        list.push(match (arity, rng.gen_bool(0.5)) {
            (1, _) => Gate::x(b[0]),
            (2, true) => Gate::cnot(b[0], b[1]),
            (2, false) => Gate::swap(b[0], b[1]),
            (_, true) => Gate::toffoli(b[0], b[1], b[2]),
            (_, false) => Gate::fredkin(b[0], b[1], b[2]),
        });
    }
    ReversibleCircuit::from_gates(width, list).unwrap()
}

fn cross_simulator() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut inputs, mut failures) = (0u64, 0u64);
    for width in 1..=12 {
        for _ in 0..3 {
            let c = random_reversible(width, 6 * width, &mut rng);
            let q = QuantumCircuit::from_reversible(&c);
            for index in 0..1usize << width {
                inputs += 1;
                let bits: Vec<bool> = (0..width).map(|i| index >> i & 1 == 1).collect();
                let out = c.simulate(&bits).unwrap();
                let want = out.iter().enumerate().fold(0usize, |a, (i, &b)| a | (b as usize) << i);
                let s = run_basis(&q, index).unwrap();
                let amps = s.amplitudes();
                let exact = amps.iter().enumerate().all(|(i, a)| {
                    let target = if i == want { 1.0 } else { 0.0 };
                    (a.re - target).abs() < 1e-12 && a.im.abs() < 1e-12
                });
                if !exact {
                    failures += 1;
                }
            }
        }
    }
    within(start, None, failures == 0, format!("{inputs} basis inputs, {failures} disagreements"))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 11] = [
        ("sorting-network correctness", sorting_networks),
        ("V_N oracle equivalence", data_mover),
        ("U_(N,N) oracle equivalence", parallel_lookup),
        ("U_(N,N) resource scaling", lookup_scaling),
        ("emulation equivalence", emulation_equivalence),
        ("overhead scaling", overhead_scaling),
        ("Grover dynamics", grover),
        ("oracle composition", oracle_composition),
        ("element distinctness", element_distinctness),
        ("collision finding", collision),
        ("cross-simulator agreement", cross_simulator),
    ];
    let outcomes: Vec<Outcome> = thread::scope(|scope| {
        let handles: Vec<_> = checks.iter().map(|(_, f)| scope.spawn(*f)).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Outcome { pass: false, detail: "panicked".into() }))
            .collect()
    });
    let mut failed = 0;
    for (i, ((name, _), o)) in checks.iter().zip(&outcomes).enumerate() {
        println!("{} criterion {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
