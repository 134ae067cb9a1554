use proptest::prelude::*;
use qroute_core::datamove::compile_fixed_permutation;
use qroute_core::emulator::{direct_schedule, emulate, random_logical_circuit, EmulateOptions};
use qroute_core::qsim::equivalent;
use qroute_core::sortnet::{bitonic_network, grid_network, oets_network, verify_network, ComparatorNetwork};
use qroute_core::topology::{build_topology, TopologySpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn realizes(net: &ComparatorNetwork, perm: &[usize]) -> bool {
    let sched = compile_fixed_permutation(perm, net).unwrap();
    let mut v: Vec<usize> = (0..perm.len()).collect();
    sched.apply(&mut v);
    if v != perm {
        return false;
    }
    sched.inverse().apply(&mut v);
    v.iter().enumerate().all(|(i, &x)| i == x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bitonic_sorts_arbitrary_keys(keys in proptest::collection::vec(any::<u16>(), 16)) {
        let net = bitonic_network(4).unwrap();
        let mut v = keys.clone();
        net.apply(&mut v);
        let mut expect = keys;
        expect.sort_unstable();
        prop_assert_eq!(net.ranked(&v), expect);
    }

    #[test]
    fn oets_sorts_arbitrary_lengths(keys in proptest::collection::vec(any::<i32>(), 2..24)) {
        let net = oets_network(keys.len()).unwrap();
        prop_assert!(verify_network(&net).sorted);
        let mut v = keys.clone();
        net.apply(&mut v);
        let mut expect = keys;
        expect.sort_unstable();
        prop_assert_eq!(net.ranked(&v), expect);
    }

    #[test]
    fn fixed_schedules_route_every_permutation(perm in permutation(16)) {
        prop_assert!(realizes(&bitonic_network(4).unwrap(), &perm));
        prop_assert!(realizes(&oets_network(16).unwrap(), &perm));
        prop_assert!(realizes(&grid_network(4, 4).unwrap(), &perm));
    }

    #[test]
    fn direct_schedule_has_two_layers(perm in permutation(12)) {
        let s = direct_schedule(&perm);
        prop_assert!(s.depth() <= 2);
        for layer in &s.layers {
            let mut touched: Vec<usize> = layer.iter().flat_map(|&(a, b)| [a, b]).collect();
            let len = touched.len();
            touched.sort_unstable();
            touched.dedup();
            prop_assert_eq!(touched.len(), len);
        }
        let mut v: Vec<usize> = (0..12).collect();
        s.apply(&mut v);
        prop_assert_eq!(v, perm);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn emulation_preserves_the_state(seed in any::<u64>(), depth in 1usize..6, skip in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_logical_circuit(4, depth, &mut rng);
        let opts = EmulateOptions { skip_adjacent: skip, ..Default::default() };
        let hosts = [
            (build_topology(TopologySpec::Line(4)).unwrap(), oets_network(8).unwrap()),
            (build_topology(TopologySpec::Hypercube(4)).unwrap(), bitonic_network(3).unwrap()),
            (build_topology(TopologySpec::Complete(4)).unwrap(), bitonic_network(3).unwrap()),
        ];
        for (topo, net) in &hosts {
            let e = emulate(&c, topo, net, opts).unwrap();
            prop_assert!(e.metrics.emulated_depth >= c.depth());
            prop_assert!(equivalent(&c.to_quantum(), &e.circuit, &e.embedding(), 1e-9).unwrap());
        }
    }
}
