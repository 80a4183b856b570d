//! Routing networks, origin/destination demand pairs and the per-pair DAGs
//! that every learner routes on.
//!
//! Vertices and edges are dense `0..V` / `0..E` indices. Files that use other
//! labels (TNTP uses 1-based node numbers) go through a [`NodeMap`].

mod dag;
mod tntp;
mod yen;

use std::collections::HashMap;

pub use dag::{
    build_od_dag, enumerate_paths, topological_order, OdDag, PathSet, SubEdge, Subgraph,
};
pub use tntp::{parse_tntp_net, parse_tntp_trips, write_tntp_net, TntpLink, TntpNetwork};
pub use yen::k_shortest_paths;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid network: {0}")]
    Validation(String),
    #[error("pair {pair}: destination {destination} unreachable from origin {origin}")]
    Unreachable {
        pair: usize,
        origin: usize,
        destination: usize,
    },
    #[error("edge set contains a cycle through edge {edge} ({tail} -> {head})")]
    Cycle { edge: usize, tail: usize, head: usize },
    #[error("more than {limit} paths (enumeration stopped after {reached})")]
    PathExplosion { reached: usize, limit: usize },
    #[error("invalid subgraph for pair {pair}: {msg}")]
    InvalidSubgraph { pair: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, NetworkError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
}

/// A directed graph with dense vertex and edge ids.
///
/// Distinct edges may share endpoints (TNTP files occasionally list two links
/// between the same nodes); self-loops are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    num_vertices: usize,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl Network {
    /// Builds a network from `(tail, head)` pairs; edge `i` gets id `i`.
    pub fn new(num_vertices: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        let mut edges = Vec::with_capacity(arcs.len());
        let mut out_edges = vec![Vec::new(); num_vertices];
        let mut in_edges = vec![Vec::new(); num_vertices];
        for (id, &(tail, head)) in arcs.iter().enumerate() {
            if tail >= num_vertices || head >= num_vertices {
                return Err(NetworkError::Validation(format!(
                    "edge {id} references vertex {} but the network has {num_vertices} vertices",
                    tail.max(head)
                )));
            }
            if tail == head {
                return Err(NetworkError::Validation(format!(
                    "edge {id} is a self-loop on vertex {tail}"
                )));
            }
            edges.push(Edge { id, tail, head });
            out_edges[tail].push(id);
            in_edges[head].push(id);
        }
        Ok(Self {
            num_vertices,
            edges,
            out_edges,
            in_edges,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    /// Outgoing edge ids of `v`, ascending.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    /// Incoming edge ids of `v`, ascending.
    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }
}

/// One origin/destination pair with a positive traffic demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdPair {
    pub id: usize,
    pub origin: usize,
    pub destination: usize,
    pub demand: f64,
}

impl OdPair {
    pub fn new(id: usize, origin: usize, destination: usize, demand: f64) -> Result<Self> {
        if origin == destination {
            return Err(NetworkError::Validation(format!(
                "pair {id}: origin equals destination ({origin})"
            )));
        }
        if !(demand > 0.0 && demand.is_finite()) {
            return Err(NetworkError::Validation(format!(
                "pair {id}: demand must be positive and finite, got {demand}"
            )));
        }
        Ok(Self {
            id,
            origin,
            destination,
            demand,
        })
    }
}

/// Maps external node labels to dense vertex ids and back.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeMap {
    labels: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl NodeMap {
    /// Labels `1..=n` mapped to `0..n`, the TNTP convention.
    pub fn one_based(n: usize) -> Self {
        let labels: Vec<u64> = (1..=n as u64).collect();
        let index = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        Self { labels, index }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn vertex(&self, label: u64) -> Option<usize> {
        self.index.get(&label).copied()
    }

    pub fn label(&self, vertex: usize) -> u64 {
        self.labels[vertex]
    }
}
