//! 0-1 principle checking.
//!
//! Up to 20 wires every binary input is pushed through the network, 64 at a
//! time as bit-planes. Wider networks are split at the longest prefix whose
//! comparator graph is disconnected; each component's reachable binary
//! outputs are enumerated recursively and combined, which stays exhaustive
//! for recursive networks such as bitonic. When the reachable sets grow too
//! large the check falls back to structured and random vectors.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Comparator, ComparatorNetwork};

const EXHAUSTIVE_WIRES: usize = 20;
const MAX_SPLIT_WIRES: usize = 128;
const DIRECT_COMPONENT: usize = 16;
const REACHABLE_CAP: usize = 1 << 20;
const RANDOM_VECTORS: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub sorted: bool,
    /// True when every binary input is covered.
    pub exhaustive: bool,
    /// Inputs (or reachable states) examined.
    pub inputs_checked: u64,
    /// A binary input left unsorted, indexed by wire.
    pub counterexample: Option<Vec<bool>>,
}

/// Checks that `net` sorts every binary input into its output order.
pub fn verify_network(net: &ComparatorNetwork) -> VerifyReport {
    let t = net.wires();
    if t <= EXHAUSTIVE_WIRES {
        return exhaustive(net);
    }
    if t <= MAX_SPLIT_WIRES {
        let wires: Vec<usize> = (0..t).collect();
        if let Some(reach) = reachable(net.layers(), &wires) {
            let mut report = VerifyReport {
                sorted: true,
                exhaustive: true,
                inputs_checked: reach.len() as u64,
                counterexample: None,
            };
            for (out, witness) in &reach {
                if !ranked_sorted_u128(*out, net.order()) {
                    report.sorted = false;
                    report.counterexample = Some((0..t).map(|w| witness >> w & 1 == 1).collect());
                    break;
                }
            }
            return report;
        }
    }
    sampled(net)
}

fn exhaustive(net: &ComparatorNetwork) -> VerifyReport {
    let t = net.wires();
    let total: u64 = 1 << t;
    const PATTERNS: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    let valid = if total >= 64 { u64::MAX } else { (1u64 << total) - 1 };
    let comps: Vec<Comparator> = net.comparators().copied().collect();
    let mut planes = vec![0u64; t];
    let mut base = 0u64;
    while base < total {
        for (w, p) in planes.iter_mut().enumerate() {
            *p = if w < 6 {
                PATTERNS[w]
            } else if base >> w & 1 == 1 {
                u64::MAX
            } else {
                0
            };
        }
        for c in &comps {
            let (a, b) = (planes[c.lo], planes[c.hi]);
            planes[c.lo] = a & b;
            planes[c.hi] = a | b;
        }
        let bad = net
            .order()
            .windows(2)
            .fold(0u64, |acc, w| acc | (planes[w[0]] & !planes[w[1]]))
            & valid;
        if bad != 0 {
            let x = base + bad.trailing_zeros() as u64;
            return VerifyReport {
                sorted: false,
                exhaustive: true,
                inputs_checked: x + 1,
                counterexample: Some((0..t).map(|w| x >> w & 1 == 1).collect()),
            };
        }
        base += 64;
    }
    VerifyReport { sorted: true, exhaustive: true, inputs_checked: total, counterexample: None }
}

fn apply_u128(layers: &[Vec<Comparator>], mut v: u128) -> u128 {
    for c in layers.iter().flatten() {
        if v >> c.lo & 1 == 1 && v >> c.hi & 1 == 0 {
            v ^= (1u128 << c.lo) | (1u128 << c.hi);
        }
    }
    v
}

fn ranked_sorted_u128(v: u128, order: &[usize]) -> bool {
    order.windows(2).all(|w| v >> w[0] & 1 <= v >> w[1] & 1)
}

/// Restricts `layers` to comparators with both ends in `member`.
fn restrict(layers: &[Vec<Comparator>], member: &[bool]) -> Vec<Vec<Comparator>> {
    layers
        .iter()
        .map(|l| l.iter().filter(|c| member[c.lo] && member[c.hi]).copied().collect())
        .collect()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Map from every reachable output on `wires` (other bits zero) to an input
/// producing it. `layers` must only touch `wires`.
fn reachable(layers: &[Vec<Comparator>], wires: &[usize]) -> Option<HashMap<u128, u128>> {
    if wires.len() <= DIRECT_COMPONENT {
        let mut out = HashMap::new();
        for x in 0u64..1 << wires.len() {
            let v = wires
                .iter()
                .enumerate()
                .fold(0u128, |acc, (i, &w)| acc | ((x >> i & 1) as u128) << w);
            out.entry(apply_u128(layers, v)).or_insert(v);
        }
        return Some(out);
    }
    let top = wires.iter().copied().max().unwrap_or(0) + 1;
    let mut parent: Vec<usize> = (0..top).collect();
    let mut components = wires.len();
    let mut split = 0;
    for (i, layer) in layers.iter().enumerate() {
        let mut merged = components;
        for c in layer {
            let (a, b) = (find(&mut parent, c.lo), find(&mut parent, c.hi));
            if a != b {
                parent[a] = b;
                merged -= 1;
            }
        }
        if merged < 2 {
            break;
        }
        components = merged;
        split = i + 1;
    }
    if split == 0 {
        return None;
    }
    // Recompute components of the prefix.
    let mut parent: Vec<usize> = (0..top).collect();
    for c in layers[..split].iter().flatten() {
        let (a, b) = (find(&mut parent, c.lo), find(&mut parent, c.hi));
        if a != b {
            parent[a] = b;
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for &w in wires {
        let r = find(&mut parent, w);
        groups.entry(r).or_default().push(w);
    }
    let mut parts = Vec::new();
    for group in groups.into_values() {
        let mut member = vec![false; top];
        for &w in &group {
            member[w] = true;
        }
        let sub = restrict(&layers[..split], &member);
        parts.push(reachable(&sub, &group)?);
    }
    let product = parts.iter().try_fold(1usize, |acc, p| acc.checked_mul(p.len()))?;
    if product > REACHABLE_CAP {
        return None;
    }
    let mut combined: Vec<(u128, u128)> = vec![(0, 0)];
    for part in &parts {
        let mut next = Vec::with_capacity(combined.len() * part.len());
        for &(o, w) in &combined {
            for (&po, &pw) in part {
                next.push((o | po, w | pw));
            }
        }
        combined = next;
    }
    let suffix = &layers[split..];
    let mut out = HashMap::with_capacity(combined.len());
    for (o, w) in combined {
        out.entry(apply_u128(suffix, o)).or_insert(w);
    }
    Some(out)
}

fn sampled(net: &ComparatorNetwork) -> VerifyReport {
    let t = net.wires();
    let mut vectors: Vec<Vec<bool>> = Vec::new();
    for k in 0..=t {
        vectors.push((0..t).map(|w| w < k).collect());
        vectors.push((0..t).map(|w| w >= k).collect());
    }
    for w in 0..t {
        vectors.push((0..t).map(|i| i == w).collect());
        vectors.push((0..t).map(|i| i != w).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for _ in 0..RANDOM_VECTORS {
        let density: f64 = rng.gen();
        vectors.push((0..t).map(|_| rng.gen_bool(density)).collect());
    }
    let checked = vectors.len() as u64;
    for v in vectors {
        let mut work = v.clone();
        net.apply(&mut work);
        let ranked = net.ranked(&work);
        if ranked.windows(2).any(|p| p[0] && !p[1]) {
            return VerifyReport {
                sorted: false,
                exhaustive: false,
                inputs_checked: checked,
                counterexample: Some(v),
            };
        }
    }
    VerifyReport { sorted: true, exhaustive: false, inputs_checked: checked, counterexample: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sortnet::{bitonic_network, grid_network, oets_network};

    fn check_counterexample(net: &ComparatorNetwork, cx: &[bool]) {
        let mut v = cx.to_vec();
        net.apply(&mut v);
        let ranked = net.ranked(&v);
        assert!(ranked.windows(2).any(|p| p[0] && !p[1]), "counterexample sorts");
    }

    #[test]
    fn bitonic_three_is_sorting() {
        let r = verify_network(&bitonic_network(3).unwrap());
        assert!(r.sorted && r.exhaustive);
        assert_eq!(r.inputs_checked, 256);
    }

    #[test]
    fn truncated_oets_fails() {
        let net = oets_network(5).unwrap();
        let broken = net.truncated(4);
        let r = verify_network(&broken);
        assert!(!r.sorted);
        check_counterexample(&broken, r.counterexample.as_ref().unwrap());
        assert!(verify_network(&oets_network(8).unwrap()).sorted);
    }

    #[test]
    fn single_wire_is_sorted() {
        let net = ComparatorNetwork::new(1, vec![]).unwrap();
        assert!(verify_network(&net).sorted);
    }

    #[test]
    fn grids_sort_in_snake_order() {
        for (r, c) in [(2, 2), (2, 3), (3, 3), (4, 4), (3, 5), (5, 4)] {
            let net = grid_network(r, c).unwrap();
            assert!(verify_network(&net).sorted, "{r}x{c}");
        }
        assert_eq!(grid_network(4, 4).unwrap().depth(), 20);
    }

    #[test]
    fn wide_bitonic_is_exhaustively_verified() {
        for t in 5..=6 {
            let net = bitonic_network(t).unwrap();
            let r = verify_network(&net);
            assert!(r.sorted && r.exhaustive, "t={t}");
        }
        let broken = bitonic_network(6).unwrap().truncated(20);
        let r = verify_network(&broken);
        assert!(!r.sorted);
        check_counterexample(&broken, r.counterexample.as_ref().unwrap());
    }

    #[test]
    fn wide_oets_falls_back_to_sampling() {
        let r = verify_network(&oets_network(40).unwrap());
        assert!(r.sorted);
        assert!(!r.exhaustive);
        let broken = oets_network(40).unwrap().truncated(39);
        assert!(!verify_network(&broken).sorted);
    }
}
