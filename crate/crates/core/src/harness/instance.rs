use std::path::Path;

use super::HarnessError;
use crate::adalight::LocalGame;
use crate::cost::CostFunction;
use crate::flow::PathSets;
use crate::network::{
    build_od_dag, enumerate_paths, parse_tntp_net, parse_tntp_trips, Network, NetworkError, OdPair,
    Subgraph,
};
use crate::path_algos::PathGame;

/// A routing game together with the DAG each pair routes on.
#[derive(Debug, Clone)]
pub struct Instance {
    pub network: Network,
    pub fns: Vec<CostFunction>,
    pub pairs: Vec<OdPair>,
    pub subgraphs: Vec<Subgraph>,
    /// Shortest paths left out of some DAG because they closed a cycle.
    pub dropped_paths: usize,
}

impl Instance {
    pub fn from_parts(
        network: Network,
        fns: Vec<CostFunction>,
        pairs: Vec<OdPair>,
        subgraphs: Vec<Subgraph>,
    ) -> Self {
        assert_eq!(fns.len(), network.num_edges(), "one cost function per edge");
        assert_eq!(pairs.len(), subgraphs.len(), "one subgraph per pair");
        Self {
            network,
            fns,
            pairs,
            subgraphs,
            dropped_paths: 0,
        }
    }

    /// Routes `o→a→d` and `o→b→d` with latencies `x` on `o→a`, `2x` on `o→b`
    /// and zero on the last legs; demand 10.
    pub fn two_link() -> Self {
        let network =
            Network::new(4, &[(0, 1), (1, 3), (0, 2), (2, 3)]).expect("valid builtin network");
        let fns = vec![
            CostFunction::affine(0.0, 1.0).expect("valid"),
            CostFunction::affine(0.0, 0.0).expect("valid"),
            CostFunction::affine(0.0, 2.0).expect("valid"),
            CostFunction::affine(0.0, 0.0).expect("valid"),
        ];
        Self::whole_network(network, fns, 10.0)
    }

    /// `n` diamonds in series with assorted affine latencies; demand 10.
    ///
    /// Diamond `i` joins `s_i = 3i` to `s_{i+1} = 3i + 3` through `3i + 1`
    /// (edges `4i`, `4i + 1`) and `3i + 2` (edges `4i + 2`, `4i + 3`).
    pub fn diamond_series(n: usize) -> Result<Self, HarnessError> {
        if n == 0 {
            return Err(HarnessError::Config("diamond series needs at least one diamond".into()));
        }
        let mut arcs = Vec::with_capacity(4 * n);
        for i in 0..n {
            let s = 3 * i;
            arcs.extend([(s, s + 1), (s + 1, s + 3), (s, s + 2), (s + 2, s + 3)]);
        }
        let network = Network::new(3 * n + 1, &arcs)?;
        let fns = (0..4 * n)
            .map(|e| {
                CostFunction::affine((e % 3) as f64, 0.5 + 0.25 * (e % 4) as f64).expect("valid")
            })
            .collect();
        Ok(Self::whole_network(network, fns, 10.0))
    }

    fn whole_network(network: Network, fns: Vec<CostFunction>, demand: f64) -> Self {
        let dest = network.num_vertices() - 1;
        let pair = OdPair::new(0, 0, dest, demand).expect("valid builtin pair");
        let all: Vec<usize> = (0..network.num_edges()).collect();
        let sg = Subgraph::from_edges(&network, &pair, &all).expect("builtin network is a DAG");
        Self::from_parts(network, fns, vec![pair], vec![sg])
    }

    /// Loads TNTP files and builds each pair's DAG from its `k` shortest
    /// free-flow paths.
    pub fn from_tntp(net_path: &Path, trips_path: &Path, k: usize) -> Result<Self, HarnessError> {
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|source| HarnessError::Io {
                path: p.display().to_string(),
                source,
            })
        };
        Self::from_tntp_text(&read(net_path)?, &read(trips_path)?, k)
    }

    pub fn from_tntp_text(net_text: &str, trips_text: &str, k: usize) -> Result<Self, HarnessError> {
        let tntp = parse_tntp_net(net_text)?;
        let pairs = parse_tntp_trips(trips_text, &tntp.node_map)?;
        if pairs.is_empty() {
            return Err(HarnessError::Config("trips file has no demand".into()));
        }
        let weights = tntp.free_flow_times();
        let mut subgraphs = Vec::with_capacity(pairs.len());
        let mut dropped = 0;
        for pair in &pairs {
            let dag = build_od_dag(&tntp.network, &weights, pair, k)?;
            dropped += dag.dropped;
            subgraphs.push(dag.subgraph);
        }
        let fns = tntp.cost_functions();
        let mut inst = Self::from_parts(tntp.network, fns, pairs, subgraphs);
        inst.dropped_paths = dropped;
        Ok(inst)
    }

    pub fn demands(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.demand).collect()
    }

    pub fn total_demand(&self) -> f64 {
        self.pairs.iter().map(|p| p.demand).sum()
    }

    /// Enumerates every pair's routes, failing once a pair has more than
    /// `limit`.
    pub fn path_sets(&self, limit: usize) -> Result<PathSets, NetworkError> {
        let sets = self
            .subgraphs
            .iter()
            .map(|sg| enumerate_paths(sg, limit))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PathSets::new(sets, self.network.num_edges()))
    }

    pub fn path_game(&self, limit: usize) -> Result<PathGame, NetworkError> {
        Ok(PathGame::new(self.fns.clone(), self.path_sets(limit)?, self.demands()))
    }

    pub fn local_game(&self) -> LocalGame {
        LocalGame::new(self.fns.clone(), self.subgraphs.clone(), self.demands())
    }
}
