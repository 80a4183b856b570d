//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use wardrop::network::{Network, OdPair, Subgraph};

/// A random single-pair DAG with at most `max_vertices` vertices and
/// `max_paths` routes, vertex ids shuffled so they are not a topological
/// order, and occasional parallel edges. Returns the network, the pair's
/// subgraph and its routes found by depth-first search.
pub fn random_dag(rng: &mut ChaCha8Rng, max_vertices: usize, max_paths: usize) -> (Network, Subgraph, Vec<Vec<usize>>) {
    loop {
        let n = rng.random_range(2..=max_vertices);
        let mut label: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            label.swap(i, rng.random_range(0..=i));
        }
        let mut ranked = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(0.5) {
                    ranked.push((i, j));
                    if rng.random_bool(0.1) {
                        ranked.push((i, j));
                    }
                }
            }
        }
        let mut from_origin = vec![false; n];
        from_origin[0] = true;
        for i in 0..n {
            if from_origin[i] {
                for &(a, b) in &ranked {
                    if a == i {
                        from_origin[b] = true;
                    }
                }
            }
        }
        let mut to_dest = vec![false; n];
        to_dest[n - 1] = true;
        for i in (0..n).rev() {
            if to_dest[i] {
                for &(a, b) in &ranked {
                    if b == i {
                        to_dest[a] = true;
                    }
                }
            }
        }
        let arcs: Vec<(usize, usize)> = ranked
            .iter()
            .filter(|&&(a, b)| from_origin[a] && to_dest[b])
            .map(|&(a, b)| (label[a], label[b]))
            .collect();
        if arcs.is_empty() {
            continue;
        }
        let net = Network::new(n, &arcs).expect("arcs within range");
        let (origin, dest) = (label[0], label[n - 1]);
        let mut paths = Vec::new();
        let mut stack = vec![(origin, Vec::new())];
        while let Some((v, path)) = stack.pop() {
            if v == dest {
                paths.push(path);
                continue;
            }
            for &e in net.out_edges(v) {
                let mut next = path.clone();
                next.push(e);
                stack.push((net.edge(e).head, next));
            }
        }
        if paths.len() > max_paths {
            continue;
        }
        let demand = rng.random_range(1.0..10.0);
        let pair = OdPair::new(0, origin, dest, demand).expect("distinct endpoints");
        let ids: Vec<usize> = (0..net.num_edges()).collect();
        let sg = Subgraph::from_edges(&net, &pair, &ids).expect("every edge lies on a route");
        return (net, sg, paths);
    }
}

