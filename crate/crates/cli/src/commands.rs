//! Subcommand implementations.

use anyhow::{bail, ensure, Context, Result};
use qroute_core::algorithms::{
    collision_direct, collision_finding, planted_collision, random_two_to_one, Collision, CostLedger,
    ElementDistinctness,
};
use qroute_core::bench::{bench_series, fit_series, standard_topology};
use qroute_core::datamove::{build_data_mover, Destinations};
use qroute_core::emulator::{emulate as run_emulation, random_logical_circuit, EmulateOptions, LogicalCircuit};
use qroute_core::pram::{build_parallel_lookup, build_single_lookup, gather_oracle, run_lookup_cases, LookupCase};
use qroute_core::qsim::{equivalent, grover_dynamics, grover_state, optimal_iterations, QGateJson, MAX_QUBITS};
use qroute_core::revcirc::{Lanes, ReversibleCircuit};
use qroute_core::sortnet::{
    bitonic_network, compile_reversible_sort, grid_network, local_network, oets_network, verify_network,
    ComparatorNetwork,
};
use qroute_core::topology::{build_topology, Family, Topology, TopologySpec};
use rand::seq::{index::sample, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::output::{print_csv, read_json, write_csv, write_json};
use crate::{
    BenchArgs, CollisionArgs, DistinctArgs, EmulateArgs, FamilyArg, GroverArgs, HostArgs, MoveArgs, NetKind,
    PramArgs, SelfTest, SortnetArgs, Status, TopoArgs, VERSION,
};

fn family(f: FamilyArg) -> Family {
    match f {
        FamilyArg::Line => Family::Line,
        FamilyArg::Grid => Family::Grid2d,
        FamilyArg::Hypercube => Family::Hypercube,
        FamilyArg::Complete => Family::Complete,
    }
}

fn load_topology(path: &std::path::Path) -> Result<Topology> {
    Ok(Topology::from_json(&read_json(path)?)?)
}

/// The host graph for `n` nodes.
fn host_topology(host: &HostArgs, n: usize) -> Result<Topology> {
    let topo = match &host.topo {
        Some(path) => load_topology(path)?,
        None => standard_topology(family(host.family), n)?,
    };
    ensure!(topo.node_count() == n, "topology has {} nodes, expected {n}", topo.node_count());
    Ok(topo)
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Ok
    } else {
        Status::SelfTestFailed
    }
}

pub fn topo(a: &crate::TopoArgs) -> Result<Status> {
    let TopoArgs { kind, n, rows, cols, input, out } = a;
    let topo = match (input, kind) {
        (Some(path), _) => load_topology(path)?,
        (None, Some(kind)) => {
            let need = || n.context("--n is required for this family");
            let spec = match kind {
                FamilyArg::Line => TopologySpec::Line(need()?),
                FamilyArg::Hypercube => TopologySpec::Hypercube(need()?),
                FamilyArg::Complete => TopologySpec::Complete(need()?),
                FamilyArg::Grid => TopologySpec::Grid {
                    rows: rows.context("--rows is required for a grid")?,
                    cols: cols.context("--cols is required for a grid")?,
                },
            };
            build_topology(spec)?
        }
        (None, None) => bail!("give --kind or --input"),
    };
    println!(
        "family={} nodes={} edges={} max_degree={}",
        topo.family(),
        topo.node_count(),
        topo.edges().len(),
        topo.max_degree()
    );
    if let Some(path) = out {
        write_json(path, &topo.to_json())?;
    }
    Ok(Status::Ok)
}

pub fn sortnet(a: &SortnetArgs) -> Result<Status> {
    let net: ComparatorNetwork = match (&a.input, a.kind) {
        (Some(path), _) => ComparatorNetwork::from_json(&read_json(path)?)?,
        (None, Some(NetKind::Bitonic)) => bitonic_network(a.t.context("--t is required for bitonic")?)?,
        (None, Some(NetKind::Oets)) => oets_network(a.n.context("--n is required for oets")?)?,
        (None, Some(NetKind::Grid)) => grid_network(
            a.rows.context("--rows is required for a grid")?,
            a.cols.context("--cols is required for a grid")?,
        )?,
        (None, None) => bail!("give --kind or --input"),
    };
    let mut line = format!("layers={} comparators={}", net.depth(), net.size());
    let mut ok = true;
    if a.verify {
        let report = verify_network(&net);
        ok = report.sorted;
        line.push_str(&format!(" verified={}", report.sorted));
        if !report.exhaustive {
            line.push_str(&format!(" sampled_inputs={}", report.inputs_checked));
        }
    }
    println!("{line}");
    if let Some(k) = a.key_bits {
        let c = compile_reversible_sort(&net, k, 0)?;
        let m = c.metrics();
        println!("width={} gates={} depth={} stage_depth={}", m.width, m.size, m.depth, m.stage_depth);
    }
    if let Some(path) = &a.out {
        write_json(path, &net.to_json())?;
    }
    Ok(status(ok))
}

fn print_metrics(prefix: &str, c: &ReversibleCircuit) {
    let m = c.metrics();
    println!("{prefix} stage_depth={} width={} depth={} gates={}", m.stage_depth, m.width, m.depth, m.size);
}

/// Random cases through `V_N`; returns the number of wrong outputs.
fn check_mover(c: &ReversibleCircuit, n: usize, d: usize, perm: Option<&[usize]>, cases: usize, rng: &mut ChaCha8Rng) -> Result<usize> {
    let xr = c.register("x").context("circuit has no x register")?;
    let jr = c.register("j");
    let mut failures = 0;
    let mut done = 0;
    while done < cases {
        let batch = (cases - done).min(Lanes::COUNT);
        let mut lanes = Lanes::new(c.width());
        let mut expect = Vec::with_capacity(batch);
        for lane in 0..batch {
            let p: Vec<usize> = match perm {
                Some(p) => p.to_vec(),
                None => {
                    let mut p: Vec<usize> = (0..n).collect();
                    p.shuffle(rng);
                    p
                }
            };
            let x: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1u64 << d)).collect();
            if let Some(jr) = jr {
                let a = jr.len / n;
                for (i, &v) in p.iter().enumerate() {
                    lanes.set_value(lane, jr.start + i * a, a, v as u64);
                }
            }
            for (i, &v) in x.iter().enumerate() {
                lanes.set_value(lane, xr.start + i * d, d, v);
            }
            expect.push((p, x));
        }
        c.simulate_lanes(&mut lanes)?;
        let dirty = c.dirty_ancilla_mask(&lanes);
        for (lane, (p, x)) in expect.iter().enumerate() {
            let moved = (0..n).all(|i| lanes.get_value(lane, xr.start + i * d, d) == x[p[i]]);
            if !moved || dirty >> lane & 1 == 1 {
                failures += 1;
            }
        }
        done += batch;
    }
    Ok(failures)
}

pub fn data_move(a: &MoveArgs) -> Result<Status> {
    let topo = host_topology(&a.host, a.n)?;
    let net = local_network(&topo, 2)?;
    let dest = match &a.perm {
        Some(p) => Destinations::Classical(p.clone()),
        None => Destinations::Quantum,
    };
    let c = build_data_mover(a.n, a.d, &net, &dest)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let failures = check_mover(&c, a.n, a.d, a.perm.as_deref(), a.cases, &mut rng)?;
    print_metrics(&format!("N={} d={} layers={}", a.n, a.d, net.depth()), &c);
    println!("cases={} failures={failures} seed={}", a.cases, a.seed);
    if let Some(path) = &a.out {
        write_json(path, &c.to_json())?;
    }
    Ok(status(failures == 0))
}

fn lookup_cases(n: usize, queries: usize, d: usize, test: SelfTest, count: usize, rng: &mut ChaCha8Rng) -> Vec<LookupCase> {
    let data = |len: usize, rng: &mut ChaCha8Rng| (0..len).map(|_| rng.gen_range(0..1u64 << d)).collect::<Vec<_>>();
    let mut cases = Vec::new();
    if test == SelfTest::Adversarial {
        for addr in 0..n as u64 {
            cases.push(LookupCase { j: vec![addr; queries], y: data(queries, rng), x: data(n, rng) });
        }
        cases.push(LookupCase { j: (0..queries as u64).map(|i| i % n as u64).collect(), y: data(queries, rng), x: data(n, rng) });
        for _ in 0..n {
            let (h0, h1) = (rng.gen_range(0..n as u64), rng.gen_range(0..n as u64));
            let j = (0..queries).map(|_| if rng.gen() { h0 } else { h1 }).collect();
            cases.push(LookupCase { j, y: data(queries, rng), x: data(n, rng) });
        }
    }
    for _ in 0..count {
        let j = (0..queries).map(|_| rng.gen_range(0..n as u64)).collect();
        cases.push(LookupCase { j, y: data(queries, rng), x: data(n, rng) });
    }
    cases
}

pub fn pram(a: &PramArgs) -> Result<Status> {
    let (c, queries) = if a.single {
        (build_single_lookup(a.n, a.d)?, 1)
    } else {
        let topo = host_topology(&a.host, a.n)?;
        let net = local_network(&topo, 2)?;
        (build_parallel_lookup(a.n, a.d, &net)?, a.n)
    };
    let name = if a.single { "U_(1,N)" } else { "U_(N,N)" };
    print_metrics(&format!("{name} N={} d={}", a.n, a.d), &c);
    let mut ok = true;
    if let Some(test) = a.selftest {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let cases = lookup_cases(a.n, queries, a.d, test, a.cases, &mut rng);
        let outs = run_lookup_cases(&c, a.d, &cases)?;
        let mut failures = 0;
        for (case, out) in cases.iter().zip(&outs) {
            let j: Vec<usize> = case.j.iter().map(|&v| v as usize).collect();
            let want = gather_oracle(&j, &case.y, &case.x)?;
            if out.y != want || !out.inputs_intact || !out.clean {
                failures += 1;
            }
        }
        ok = failures == 0;
        let verdict = if ok { "pass" } else { "fail" };
        let kind = if test == SelfTest::Random { "random" } else { "adversarial" };
        println!("selftest={kind} cases={} failures={failures} result={verdict} seed={}", cases.len(), a.seed);
    }
    if let Some(path) = &a.out {
        write_json(path, &c.to_json())?;
    }
    Ok(status(ok))
}

#[derive(Debug, Serialize)]
struct EmulateRow {
    seed: u64,
    version: &'static str,
    topology: String,
    nodes: usize,
    logical_width: usize,
    logical_depth: usize,
    emulated_depth: usize,
    stage_depth: usize,
    overhead: f64,
    stage_overhead: f64,
    equivalent: Option<bool>,
}

#[derive(Debug, Serialize)]
struct PhysicalCircuitJson {
    width: usize,
    gates: Vec<QGateJson>,
}

pub fn emulate(a: &EmulateArgs) -> Result<Status> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let circuit = match (&a.circuit, a.random_width) {
        (Some(path), _) => LogicalCircuit::from_json(&read_json(path)?)?,
        (None, Some(w)) => random_logical_circuit(w, a.random_depth, &mut rng),
        (None, None) => bail!("give --circuit or --random-width"),
    };
    if let Some(path) = &a.save_circuit {
        write_json(path, &circuit.to_json()?)?;
    }
    let topo = match &a.host.topo {
        Some(path) => load_topology(path)?,
        None => {
            let mut n = a.nodes.unwrap_or(circuit.width()).max(2);
            if a.host.family == FamilyArg::Hypercube {
                n = n.next_power_of_two();
            }
            standard_topology(family(a.host.family), n)?
        }
    };
    let net = local_network(&topo, 2)?;
    let opts = EmulateOptions { skip_adjacent: !a.no_skip, ..Default::default() };
    let e = run_emulation(&circuit, &topo, &net, opts)?;
    let equivalent_ok = if a.verify {
        ensure!(
            e.circuit.width <= MAX_QUBITS,
            "verification simulates {} qubits, above the {MAX_QUBITS}-qubit limit",
            e.circuit.width
        );
        Some(equivalent(&circuit.to_quantum(), &e.circuit, &e.embedding(), 1e-10)?)
    } else {
        None
    };
    let row = EmulateRow {
        seed: a.seed,
        version: VERSION,
        topology: topo.family().to_string(),
        nodes: topo.node_count(),
        logical_width: circuit.width(),
        logical_depth: e.metrics.logical_depth,
        emulated_depth: e.metrics.emulated_depth,
        stage_depth: e.metrics.network_depth,
        overhead: e.metrics.overhead,
        stage_overhead: e.metrics.network_overhead,
        equivalent: equivalent_ok,
    };
    print_csv(std::slice::from_ref(&row))?;
    if let Some(path) = &a.csv {
        write_csv(path, &[row])?;
    }
    if let Some(path) = &a.out {
        let gates = e.circuit.gates.iter().map(QGateJson::from_gate).collect::<Result<_, _>>()?;
        write_json(path, &PhysicalCircuitJson { width: e.circuit.width, gates })?;
    }
    Ok(status(equivalent_ok.unwrap_or(true)))
}

pub fn grover(a: &GroverArgs) -> Result<Status> {
    ensure!(a.n.is_power_of_two() && a.n >= 2, "--n must be a power of two, at least 2");
    ensure!(a.m <= a.n, "--m exceeds --n");
    let k = match a.iters.as_str() {
        "auto" => optimal_iterations(a.n, a.m),
        s => s.parse().with_context(|| format!("--iters must be `auto` or a count, got `{s}`"))?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut marked = vec![false; a.n];
    for i in sample(&mut rng, a.n, a.m) {
        marked[i] = true;
    }
    let g = grover_dynamics(&marked, k)?;
    println!(
        "N={} M={} iterations={k} success={:.12} closed_form={:.12} seed={}",
        a.n, a.m, g.success_probability, g.closed_form, a.seed
    );
    if a.shots > 0 {
        let state = grover_state(&marked, k)?;
        let hits = (0..a.shots).filter(|_| marked[state.sample(&mut rng)]).count();
        println!("shots={} hits={hits}", a.shots);
    }
    Ok(Status::Ok)
}

#[derive(Debug, Serialize)]
struct TrialRow {
    seed: u64,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "S")]
    s: usize,
    success: u8,
    oracle_calls: usize,
    stage_depth: usize,
    width: usize,
    version: &'static str,
}

fn trial_row(seed: u64, n: usize, s: usize, success: bool, ledger: &CostLedger) -> TrialRow {
    TrialRow {
        seed,
        n,
        s,
        success: u8::from(success),
        oracle_calls: ledger.oracle_calls,
        stage_depth: ledger.stage_depth,
        width: ledger.width,
        version: VERSION,
    }
}

fn summarize(name: &str, rows: &[TrialRow], seed: u64) {
    let trials = rows.len().max(1) as f64;
    let wins: usize = rows.iter().map(|r| r.success as usize).sum();
    let calls: usize = rows.iter().map(|r| r.oracle_calls).sum();
    let depth: usize = rows.iter().map(|r| r.stage_depth).sum();
    let (n, s) = rows.first().map_or((0, 0), |r| (r.n, r.s));
    println!(
        "{name} N={n} S={s} trials={} successes={wins} rate={:.3} mean_oracle_calls={:.2} mean_stage_depth={:.1} seed={seed}",
        rows.len(),
        wins as f64 / trials,
        calls as f64 / trials,
        depth as f64 / trials
    );
}

pub fn distinct(a: &DistinctArgs) -> Result<Status> {
    ensure!(a.n >= 2, "--n must be at least 2");
    let ed = ElementDistinctness::new(a.n, a.s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut rows = Vec::with_capacity(a.trials);
    for _ in 0..a.trials {
        let (f, planted) = if a.injective {
            let mut f: Vec<usize> = (0..a.n).collect();
            f.shuffle(&mut rng);
            (f, None)
        } else {
            let (f, pair) = planted_collision(a.n, &mut rng);
            (f, Some(pair))
        };
        let run = ed.run(&f, &mut rng)?;
        ensure!(run.result.is_valid_for(&f), "returned pair is not a collision");
        let success = match planted {
            Some((i, j)) => run.result == Collision::Pair(i, j),
            None => run.result == Collision::None,
        };
        rows.push(trial_row(a.seed, a.n, a.s, success, &run.ledger));
    }
    summarize("distinct", &rows, a.seed);
    if let Some(path) = &a.csv {
        write_csv(path, &rows)?;
    }
    Ok(Status::Ok)
}

pub fn collision(a: &CollisionArgs) -> Result<Status> {
    ensure!(a.n >= 2 && a.n.is_multiple_of(2), "--n must be even and at least 2");
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut rows = Vec::with_capacity(a.trials);
    for _ in 0..a.trials {
        let f = if a.one_to_one {
            let mut f: Vec<usize> = (0..a.n).collect();
            f.shuffle(&mut rng);
            f
        } else {
            random_two_to_one(a.n, &mut rng)
        };
        let run = if a.direct { collision_direct(&f, a.s, &mut rng)? } else { collision_finding(&f, a.s, &mut rng)? };
        ensure!(run.result.is_valid_for(&f), "returned pair is not a collision");
        let success = match run.result {
            Collision::Pair(..) => !a.one_to_one,
            Collision::None => a.one_to_one,
        };
        rows.push(trial_row(a.seed, a.n, a.s, success, &run.ledger));
    }
    summarize(if a.direct { "collision-direct" } else { "collision" }, &rows, a.seed);
    if let Some(path) = &a.csv {
        write_csv(path, &rows)?;
    }
    Ok(Status::Ok)
}

#[derive(Debug, Serialize)]
struct BenchCsvRow {
    seed: u64,
    version: &'static str,
    family: String,
    #[serde(rename = "N")]
    n: usize,
    d: usize,
    dg_layers: usize,
    vn_stage_depth: usize,
    vn_width: usize,
    unn_stage_depth: usize,
    unn_width: usize,
}

pub fn bench(a: &BenchArgs) -> Result<Status> {
    let mut out = Vec::new();
    for &f in &a.families {
        let rows = bench_series(family(f), &a.ns, a.d)?;
        for r in &rows {
            println!(
                "{} N={} D_G={} V_N_stage_depth={} V_N_width={} U_stage_depth={} U_width={}",
                r.family, r.n, r.dg_layers, r.vn_stage_depth, r.vn_width, r.unn_stage_depth, r.unn_width
            );
        }
        if rows.len() >= 2 {
            let fit = fit_series(&rows)?;
            println!(
                "{} fit: D_G ~ N^{:.2} ~ (log N)^{:.2}; V_N ~ N^{:.2} ~ (log N)^{:.2}; U stage-depth ~ (log N)^{:.2}; U width = {:.2} N(log N + d), worst residual {:.1}%",
                fit.family,
                fit.dg.exponent,
                fit.dg.log_power,
                fit.vn_stage_depth.exponent,
                fit.vn_stage_depth.log_power,
                fit.unn_stage_depth.log_power,
                fit.unn_width.c,
                100.0 * fit.unn_width.max_residual
            );
        }
        out.extend(rows.into_iter().map(|r| BenchCsvRow {
            seed: a.seed,
            version: VERSION,
            family: r.family,
            n: r.n,
            d: r.d,
            dg_layers: r.dg_layers,
            vn_stage_depth: r.vn_stage_depth,
            vn_width: r.vn_width,
            unn_stage_depth: r.unn_stage_depth,
            unn_width: r.unn_width,
        }));
    }
    if let Some(path) = &a.csv {
        write_csv(path, &out)?;
    }
    Ok(Status::Ok)
}
