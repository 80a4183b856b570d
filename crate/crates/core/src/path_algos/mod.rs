//! Path-space learners: exponential weights, its accelerated variant and
//! the adaptive dual-extrapolation scheme. Each keeps its state in a plain
//! struct advanced one round at a time by `step`.

mod adaweight;
mod ew;
mod xlew;

pub use adaweight::{AdaWeightState, AdaWeightStep};
pub use ew::{EwRate, EwState, EwStep};
pub use xlew::{XlewState, XlewStep};

use crate::cost::{CostBounds, CostFunction, Environment, SampleKey};
use crate::flow::{self, FlowProfile, LoadProfile, PathSets, PathValues};
use crate::network::Subgraph;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum AlgoError {
    #[error("no rounds have been played yet")]
    NoRounds,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Everything a path-space learner needs to know about the game.
#[derive(Debug, Clone)]
pub struct PathGame {
    pub fns: Vec<CostFunction>,
    pub paths: PathSets,
    pub demands: Vec<f64>,
}

impl PathGame {
    pub fn new(fns: Vec<CostFunction>, paths: PathSets, demands: Vec<f64>) -> Self {
        assert_eq!(fns.len(), paths.num_edges(), "one cost function per edge");
        assert_eq!(demands.len(), paths.num_pairs(), "one demand per pair");
        Self {
            fns,
            paths,
            demands,
        }
    }

    pub fn num_pairs(&self) -> usize {
        self.demands.len()
    }

    pub fn max_demand(&self) -> f64 {
        self.demands.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_demand(&self) -> f64 {
        self.demands.iter().sum()
    }

    pub fn loads(&self, flow: &FlowProfile) -> LoadProfile {
        flow::loads_from_flow(flow, &self.paths)
    }

    pub fn potential(&self, flow: &FlowProfile) -> f64 {
        flow::bmw_potential(flow, &self.fns, &self.paths)
    }

    /// The logit image of all-zero scores.
    pub fn uniform_flow(&self) -> FlowProfile {
        flow::logit(&self.paths.zeros(), &self.demands)
    }

    /// Observed edge costs at `flow` and the matching path costs.
    pub fn sample(&self, env: &Environment, flow: &FlowProfile, key: SampleKey) -> (Vec<f64>, PathValues) {
        let loads = self.loads(flow);
        let edge = env
            .sample_costs(&self.fns, &loads.0, key)
            .expect("loads of a feasible flow are nonnegative");
        let paths = flow::path_costs(&edge, &self.paths);
        (edge, paths)
    }

    /// Edge count of the longest enumerated path.
    pub fn longest_path_len(&self) -> usize {
        self.paths
            .iter()
            .flat_map(|s| s.paths.iter().map(Vec::len))
            .max()
            .unwrap_or(0)
    }
}

/// `ℓ·L` where `ℓ` is the edge count of the longest origin-destination path
/// over all subgraphs and `L` the latency Lipschitz bound.
pub fn smoothness_modulus(subgraphs: &[Subgraph], bounds: &CostBounds) -> f64 {
    let longest = subgraphs
        .iter()
        .map(Subgraph::longest_path_len)
        .max()
        .unwrap_or(0);
    longest as f64 * bounds.lipschitz
}

/// `Σ x log(x / p)` over paths with `x > 0`.
pub fn kl_divergence(x: &FlowProfile, p: &FlowProfile) -> f64 {
    x.iter()
        .flatten()
        .zip(p.iter().flatten())
        .filter(|(xi, _)| **xi > 0.0)
        .map(|(xi, pi)| xi * (xi / pi).ln())
        .sum()
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use crate::network::PathSet;

    /// Two parallel routes with latencies `x` and `2x`, demand 10.
    pub fn two_link() -> PathGame {
        PathGame::new(
            vec![
                CostFunction::affine(0.0, 1.0).unwrap(),
                CostFunction::affine(0.0, 0.0).unwrap(),
                CostFunction::affine(0.0, 2.0).unwrap(),
                CostFunction::affine(0.0, 0.0).unwrap(),
            ],
            PathSets::new(
                vec![PathSet {
                    pair: 0,
                    paths: vec![vec![0, 1], vec![2, 3]],
                }],
                4,
            ),
            vec![10.0],
        )
    }

    pub fn flow_is_feasible(flow: &FlowProfile, demands: &[f64]) -> bool {
        flow.iter().zip(demands).all(|(f, &m)| {
            f.iter().all(|&x| x >= 0.0) && (f.iter().sum::<f64>() - m).abs() <= 1e-9 * m.max(1.0)
        })
    }
}
