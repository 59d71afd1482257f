//! Reference implementations and fixtures shared by the integration suites.
//! Nothing here calls into the solver paths it is used to check.
#![allow(dead_code)]

use std::collections::VecDeque;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use targetflow::flow::{BoundedFlowNetwork, Capacity};
use targetflow::graph::{parse_edge_list, parse_target_set};
use targetflow::{DiGraph, LabelMap, TargetSet};

pub const CANONICAL_EDGES: &str = include_str!("../fixtures/canonical.edges");
pub const CANONICAL_TARGETS: &str = include_str!("../fixtures/canonical.targets");

pub fn canonical() -> (DiGraph, TargetSet, LabelMap) {
    let (g, labels) = parse_edge_list(CANONICAL_EDGES).unwrap();
    let s = parse_target_set(CANONICAL_TARGETS, &labels).unwrap();
    (g, s, labels)
}

pub fn relabel(paths: &[Vec<usize>], labels: &LabelMap) -> Vec<Vec<u64>> {
    paths
        .iter()
        .map(|p| p.iter().map(|&v| labels.label(v)).collect())
        .collect()
}

/// Random digraph with `n` nodes and up to `max_edges` distinct edges
/// (self-loops allowed).
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, max_edges: usize) -> DiGraph {
    let m = rng.gen_range(0..=max_edges.min(n * n));
    let edges: Vec<_> = (0..m)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
        .collect();
    DiGraph::new(n, edges).unwrap()
}

pub fn random_targets(rng: &mut ChaCha8Rng, n: usize) -> TargetSet {
    let size = rng.gen_range(1..=n);
    let picked = rand::seq::index::sample(rng, n, size).into_vec();
    TargetSet::new(n, picked).unwrap()
}

/// Minimum number of paths over all vertex-disjoint path/cycle covers of
/// `target`, floored at 1. Enumerates every edge subset with in- and
/// out-degree at most one; its components are paths and cycles. Path
/// components containing a target cost one each, uncovered targets become
/// single-node paths, cycles are free.
pub fn brute_force_min_drivers(g: &DiGraph, target: &TargetSet) -> usize {
    let n = g.node_count();
    let edges = g.edges();
    assert!(edges.len() <= 20, "exhaustive search is exponential");
    let is_target = target.mask(n);
    let mut best = usize::MAX;
    'subsets: for mask in 0u32..(1u32 << edges.len()) {
        let mut succ = vec![usize::MAX; n];
        let mut pred = vec![usize::MAX; n];
        for (k, &(i, j)) in edges.iter().enumerate() {
            if mask >> k & 1 == 1 {
                if succ[i] != usize::MAX || pred[j] != usize::MAX {
                    continue 'subsets;
                }
                succ[i] = j;
                pred[j] = i;
            }
        }
        let mut visited = vec![false; n];
        let mut paths = 0;
        // path components start at nodes without predecessor
        for start in 0..n {
            if pred[start] != usize::MAX {
                continue;
            }
            let mut v = start;
            let mut has_target = false;
            loop {
                visited[v] = true;
                has_target |= is_target[v];
                if succ[v] == usize::MAX {
                    break;
                }
                v = succ[v];
            }
            if has_target {
                paths += 1;
            }
        }
        // whatever is left lies on cycles
        debug_assert!((0..n).all(|v| visited[v] || (succ[v] != usize::MAX && pred[v] != usize::MAX)));
        best = best.min(paths);
    }
    best.max(1)
}

/// Plain Ford–Fulkerson with DFS augmenting paths on an adjacency matrix.
pub fn ford_fulkerson(n: usize, arcs: &[(usize, usize, u64)], s: usize, t: usize) -> u64 {
    let mut cap = vec![vec![0u64; n]; n];
    for &(u, v, c) in arcs {
        cap[u][v] += c;
    }
    let mut total = 0;
    loop {
        let mut parent = vec![usize::MAX; n];
        parent[s] = s;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if parent[v] == usize::MAX && cap[u][v] > 0 {
                    parent[v] = u;
                    stack.push(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            return total;
        }
        let mut bottleneck = u64::MAX;
        let mut v = t;
        while v != s {
            bottleneck = bottleneck.min(cap[parent[v]][v]);
            v = parent[v];
        }
        let mut v = t;
        while v != s {
            let u = parent[v];
            cap[u][v] -= bottleneck;
            cap[v][u] += bottleneck;
            v = u;
        }
        total += bottleneck;
    }
}

/// Random plain network: `n` nodes in 2..=12, arcs with capacities in 0..=3,
/// source 0, sink n - 1.
pub fn random_network(rng: &mut ChaCha8Rng) -> (BoundedFlowNetwork, Vec<(usize, usize, u64)>) {
    let n = rng.gen_range(2..=12);
    let m = rng.gen_range(0..=3 * n);
    let mut net = BoundedFlowNetwork::new(n, 0, n - 1).unwrap();
    let mut arcs = Vec::new();
    for _ in 0..m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        let c = rng.gen_range(0..=3);
        net.add_arc(u, v, 0, Capacity::Finite(c), None).unwrap();
        arcs.push((u, v, c));
    }
    (net, arcs)
}

/// Some feasible s-t flow value obtained by pushing random amounts along
/// random BFS paths of the residual network, stopping at a random round.
pub fn random_feasible_flow_value(
    rng: &mut ChaCha8Rng,
    n: usize,
    arcs: &[(usize, usize, u64)],
    s: usize,
    t: usize,
) -> u64 {
    let mut cap = vec![vec![0u64; n]; n];
    for &(u, v, c) in arcs {
        cap[u][v] += c;
    }
    let rounds = rng.gen_range(0..6);
    let mut total = 0;
    for _ in 0..rounds {
        let mut parent = vec![usize::MAX; n];
        parent[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            for v in order {
                if parent[v] == usize::MAX && cap[u][v] > 0 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            break;
        }
        let mut bottleneck = u64::MAX;
        let mut v = t;
        while v != s {
            bottleneck = bottleneck.min(cap[parent[v]][v]);
            v = parent[v];
        }
        let amount = rng.gen_range(1..=bottleneck);
        let mut v = t;
        while v != s {
            let u = parent[v];
            cap[u][v] -= amount;
            cap[v][u] += amount;
            v = u;
        }
        total += amount;
    }
    total
}
