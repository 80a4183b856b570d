//! Yen's k shortest simple paths with deterministic tie-breaking.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use super::Network;

#[derive(Clone, Copy, PartialEq)]
struct Dist(f64, usize);

impl Eq for Dist {}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn tight(du: f64, w: f64, dv: f64) -> bool {
    (du - (w + dv)).abs() <= 1e-12 * du.abs().max(1.0)
}

/// Shortest `src -> dst` path avoiding banned vertices and edges. Among
/// equal-cost paths the lexicographically smallest edge-id sequence wins:
/// distances to `dst` come from a reverse Dijkstra, then the path is walked
/// forward taking the smallest tight edge at each vertex.
fn shortest_path(
    net: &Network,
    weights: &[f64],
    src: usize,
    dst: usize,
    banned_vertices: &[bool],
    banned_edges: &HashSet<usize>,
) -> Option<(f64, Vec<usize>)> {
    let n = net.num_vertices();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[dst] = 0.0;
    heap.push(Dist(0.0, dst));
    while let Some(Dist(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &e in net.in_edges(v) {
            if banned_edges.contains(&e) {
                continue;
            }
            let u = net.edge(e).tail;
            if banned_vertices[u] {
                continue;
            }
            let nd = d + weights[e];
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(Dist(nd, u));
            }
        }
    }
    if !dist[src].is_finite() {
        return None;
    }
    let mut path = Vec::new();
    let mut visited = vec![false; n];
    let mut v = src;
    visited[v] = true;
    let mut cost = 0.0;
    while v != dst {
        let next = net.out_edges(v).iter().copied().find(|&e| {
            let h = net.edge(e).head;
            !banned_edges.contains(&e)
                && !banned_vertices[h]
                && !visited[h]
                && dist[h].is_finite()
                && tight(dist[v], weights[e], dist[h])
        })?;
        path.push(next);
        cost += weights[next];
        v = net.edge(next).head;
        visited[v] = true;
    }
    Some((cost, path))
}

fn path_cost(weights: &[f64], path: &[usize]) -> f64 {
    path.iter().map(|&e| weights[e]).sum()
}

fn cmp_candidates(a: &(f64, Vec<usize>), b: &(f64, Vec<usize>)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1))
}

/// Up to `k` cheapest simple `origin -> destination` paths under nonnegative
/// edge `weights`, ordered by (cost, edge-id sequence).
pub fn k_shortest_paths(
    net: &Network,
    weights: &[f64],
    origin: usize,
    destination: usize,
    k: usize,
) -> Vec<(f64, Vec<usize>)> {
    assert_eq!(weights.len(), net.num_edges(), "one weight per edge");
    let no_vertices = vec![false; net.num_vertices()];
    let Some(first) = shortest_path(net, weights, origin, destination, &no_vertices, &HashSet::new())
    else {
        return Vec::new();
    };
    let mut accepted = vec![first];
    let mut candidates: Vec<(f64, Vec<usize>)> = Vec::new();
    while accepted.len() < k {
        let prev = accepted.last().expect("nonempty").1.clone();
        let mut spur = origin;
        let mut banned_vertices = no_vertices.clone();
        for i in 0..prev.len() {
            let root = &prev[..i];
            let banned_edges: HashSet<usize> = accepted
                .iter()
                .map(|(_, p)| p)
                .filter(|p| p.len() > i && &p[..i] == root)
                .map(|p| p[i])
                .collect();
            if let Some((_, tail)) =
                shortest_path(net, weights, spur, destination, &banned_vertices, &banned_edges)
            {
                let mut full = root.to_vec();
                full.extend(tail);
                let cost = path_cost(weights, &full);
                let known = accepted.iter().any(|(_, p)| *p == full)
                    || candidates.iter().any(|(_, p)| *p == full);
                if !known {
                    candidates.push((cost, full));
                }
            }
            banned_vertices[spur] = true;
            spur = net.edge(prev[i]).head;
        }
        let Some(best) = candidates
            .iter()
            .enumerate()
            .min_by(|a, b| cmp_candidates(a.1, b.1))
            .map(|(i, _)| i)
        else {
            break;
        };
        accepted.push(candidates.swap_remove(best));
    }
    accepted
}
