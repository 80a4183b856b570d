use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use super::yen::k_shortest_paths;
use super::{Edge, Network, NetworkError, OdPair, Result};

/// Kahn's algorithm over the vertices touched by `edges`.
///
/// The ready set is a min-heap on vertex id, so the order is unique for a
/// given edge set. On a cycle, the returned error names one back edge.
pub fn topological_order<'a, I>(edges: I) -> Result<Vec<usize>>
where
    I: IntoIterator<Item = &'a Edge>,
{
    let edges: Vec<Edge> = edges.into_iter().copied().collect();
    let mut indegree: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in &edges {
        indegree.entry(e.tail).or_insert(0);
        *indegree.entry(e.head).or_insert(0) += 1;
        out.entry(e.tail).or_default().push(e.head);
    }
    let mut ready: BinaryHeap<Reverse<usize>> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&v, _)| Reverse(v))
        .collect();
    let mut order = Vec::with_capacity(indegree.len());
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &w in out.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
            let d = indegree.get_mut(&w).expect("head registered");
            *d -= 1;
            if *d == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    if order.len() == indegree.len() {
        return Ok(order);
    }
    let placed: BTreeSet<usize> = order.into_iter().collect();
    Err(find_back_edge(&edges, &placed))
}

// Depth-first search restricted to the vertices Kahn could not place; every
// such vertex sits on or downstream of a cycle, so a back edge exists.
fn find_back_edge(edges: &[Edge], placed: &BTreeSet<usize>) -> NetworkError {
    let mut adj: BTreeMap<usize, Vec<&Edge>> = BTreeMap::new();
    for e in edges {
        if !placed.contains(&e.tail) && !placed.contains(&e.head) {
            adj.entry(e.tail).or_default().push(e);
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut color: BTreeMap<usize, u8> = BTreeMap::new();
    let starts: Vec<usize> = adj.keys().copied().collect();
    for s in starts {
        if color.get(&s).copied().unwrap_or(0) != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(s, 0)];
        color.insert(s, 1);
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            let succ = adj.get(&v).map(Vec::as_slice).unwrap_or(&[]);
            if *next < succ.len() {
                let e = succ[*next];
                *next += 1;
                match color.get(&e.head).copied().unwrap_or(0) {
                    0 => {
                        color.insert(e.head, 1);
                        stack.push((e.head, 0));
                    }
                    1 => {
                        return NetworkError::Cycle {
                            edge: e.id,
                            tail: e.tail,
                            head: e.head,
                        }
                    }
                    _ => {}
                }
            } else {
                color.insert(v, 2);
                stack.pop();
            }
        }
    }
    unreachable!("Kahn left vertices unplaced but no cycle was found")
}

/// An edge of a [`Subgraph`] in local coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubEdge {
    /// Global edge id in the parent network.
    pub edge: usize,
    /// Local index of the tail vertex (its position in topological order).
    pub tail: usize,
    pub head: usize,
}

/// The DAG a single O/D pair routes on.
///
/// Vertices are stored in topological order, so a vertex's local index is
/// its rank: the origin is local vertex 0 and the destination is the last
/// one. Local edges are sorted by global edge id, and per-vertex adjacency
/// lists inherit that order.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgraph {
    pair: usize,
    vertices: Vec<usize>,
    edges: Vec<SubEdge>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl Subgraph {
    /// Builds the subgraph of `network` spanned by `edge_ids` for `pair`.
    ///
    /// Fails if the edges contain a cycle, if the origin is not the unique
    /// source or the destination the unique sink, or if some vertex lies on
    /// no origin-destination path.
    pub fn from_edges(network: &Network, pair: &OdPair, edge_ids: &[usize]) -> Result<Self> {
        let ids: BTreeSet<usize> = edge_ids.iter().copied().collect();
        let invalid = |msg: String| NetworkError::InvalidSubgraph { pair: pair.id, msg };
        if ids.is_empty() {
            return Err(invalid("empty edge set".into()));
        }
        if let Some(&bad) = ids.iter().find(|&&e| e >= network.num_edges()) {
            return Err(invalid(format!("unknown edge {bad}")));
        }
        let global: Vec<Edge> = ids.iter().map(|&e| network.edge(e)).collect();
        let order = topological_order(&global)?;
        if order.first() != Some(&pair.origin) {
            return Err(invalid(format!(
                "origin {} is not the unique source",
                pair.origin
            )));
        }
        if order.last() != Some(&pair.destination) {
            return Err(invalid(format!(
                "destination {} is not the unique sink",
                pair.destination
            )));
        }
        let local: BTreeMap<usize, usize> =
            order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = order.len();
        let edges: Vec<SubEdge> = global
            .iter()
            .map(|e| SubEdge {
                edge: e.id,
                tail: local[&e.tail],
                head: local[&e.head],
            })
            .collect();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            out[e.tail].push(i);
            inc[e.head].push(i);
        }
        let sg = Self {
            pair: pair.id,
            vertices: order,
            edges,
            out,
            inc,
        };
        // Unique source/sink already implies every vertex is reachable from
        // the origin and reaches the destination; the check below is cheap.
        let fwd = sg.reachable_forward();
        let bwd = sg.reachable_backward();
        if let Some(v) = (0..n).find(|&v| !(fwd[v] && bwd[v])) {
            return Err(invalid(format!(
                "vertex {} lies on no origin-destination path",
                sg.vertices[v]
            )));
        }
        Ok(sg)
    }

    fn reachable_forward(&self) -> Vec<bool> {
        let mut seen = vec![false; self.vertices.len()];
        seen[0] = true;
        for v in 0..self.vertices.len() {
            if seen[v] {
                for &e in &self.out[v] {
                    seen[self.edges[e].head] = true;
                }
            }
        }
        seen
    }

    fn reachable_backward(&self) -> Vec<bool> {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        seen[n - 1] = true;
        for v in (0..n).rev() {
            if seen[v] {
                for &e in &self.inc[v] {
                    seen[self.edges[e].tail] = true;
                }
            }
        }
        seen
    }

    pub fn pair(&self) -> usize {
        self.pair
    }

    /// Global vertex ids in topological order.
    pub fn topological_order(&self) -> &[usize] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[SubEdge] {
        &self.edges
    }

    pub fn origin(&self) -> usize {
        self.vertices[0]
    }

    pub fn destination(&self) -> usize {
        self.vertices[self.vertices.len() - 1]
    }

    /// Local edge indices leaving local vertex `v`.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// Local edge indices entering local vertex `v`.
    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    /// Global edge ids of this subgraph, ascending.
    pub fn global_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().map(|e| e.edge)
    }

    /// Local index of global edge `edge`, if it belongs to the subgraph.
    pub fn local_edge(&self, edge: usize) -> Option<usize> {
        self.edges.binary_search_by_key(&edge, |e| e.edge).ok()
    }

    /// Number of edges on the longest origin-destination path.
    pub fn longest_path_len(&self) -> usize {
        let n = self.vertices.len();
        let mut depth = vec![0usize; n];
        for v in (0..n - 1).rev() {
            depth[v] = self.out[v]
                .iter()
                .map(|&e| depth[self.edges[e].head] + 1)
                .max()
                .unwrap_or(0);
        }
        depth[0]
    }
}

/// The enumerated routing paths of one pair, each a sequence of global edge
/// ids from origin to destination.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub pair: usize,
    pub paths: Vec<Vec<usize>>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// All origin-destination paths of `subgraph` in depth-first order, taking
/// outgoing edges by ascending edge id. Errors once more than `limit` paths
/// have been found.
pub fn enumerate_paths(subgraph: &Subgraph, limit: usize) -> Result<PathSet> {
    let dest = subgraph.num_vertices() - 1;
    let mut paths = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    // (vertex, next outgoing slot)
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    while let Some(&mut (v, ref mut slot)) = stack.last_mut() {
        if v == dest {
            if paths.len() == limit {
                return Err(NetworkError::PathExplosion {
                    reached: limit + 1,
                    limit,
                });
            }
            paths.push(current.clone());
            stack.pop();
            current.pop();
            continue;
        }
        let outs = subgraph.out_edges(v);
        if *slot < outs.len() {
            let e = subgraph.edges()[outs[*slot]];
            *slot += 1;
            current.push(e.edge);
            stack.push((e.head, 0));
        } else {
            stack.pop();
            current.pop();
        }
    }
    Ok(PathSet {
        pair: subgraph.pair(),
        paths,
    })
}

/// Result of [`build_od_dag`].
#[derive(Debug, Clone)]
pub struct OdDag {
    pub subgraph: Subgraph,
    /// The shortest paths whose union forms the subgraph, cheapest first.
    pub paths: Vec<Vec<usize>>,
    /// Shortest paths found but left out because adding them closed a cycle.
    pub dropped: usize,
}

/// Union of the `k` shortest simple paths of `pair` under `weights`.
///
/// Paths come from Yen's algorithm with ties broken by lexicographic edge-id
/// sequence. If the union of all `k` paths is cyclic, the longest prefix of
/// the path list whose union is acyclic is kept and a warning is logged.
pub fn build_od_dag(network: &Network, weights: &[f64], pair: &OdPair, k: usize) -> Result<OdDag> {
    if k == 0 {
        return Err(NetworkError::Validation("k must be at least 1".into()));
    }
    let found = k_shortest_paths(network, weights, pair.origin, pair.destination, k);
    if found.is_empty() {
        return Err(NetworkError::Unreachable {
            pair: pair.id,
            origin: pair.origin,
            destination: pair.destination,
        });
    }
    let paths: Vec<Vec<usize>> = found.into_iter().map(|(_, p)| p).collect();
    let mut union: BTreeSet<usize> = BTreeSet::new();
    let mut kept = 0;
    let mut subgraph = None;
    for path in &paths {
        let mut candidate = union.clone();
        candidate.extend(path.iter().copied());
        let ids: Vec<usize> = candidate.iter().copied().collect();
        match Subgraph::from_edges(network, pair, &ids) {
            Ok(sg) => {
                union = candidate;
                subgraph = Some(sg);
                kept += 1;
            }
            Err(err) => {
                log::debug!(
                    "pair {}: keeping {kept} of {} shortest paths ({err})",
                    pair.id,
                    paths.len()
                );
                break;
            }
        }
    }
    let dropped = paths.len() - kept;
    let mut paths = paths;
    paths.truncate(kept);
    Ok(OdDag {
        subgraph: subgraph.expect("a single simple path is always a valid DAG"),
        paths,
        dropped,
    })
}
