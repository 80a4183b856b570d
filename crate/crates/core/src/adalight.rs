//! Edge-local adaptive learner running push-pull-match on each pair's DAG.
//!
//! Per round it touches every subgraph edge a constant number of times, so
//! the cost is linear in the subgraph sizes no matter how many routes they
//! contain.

use crate::cost::{CostFunction, Environment, SampleKey};
use crate::flow::LoadProfile;
use crate::local_flow::{
    self, AnchorLoadProfile, LocalFlowError, LocalFlowProfile, LocalValues, LocalWeightProfile,
};
use crate::network::Subgraph;

/// The game as seen by edge-local learners.
#[derive(Debug, Clone)]
pub struct LocalGame {
    pub fns: Vec<CostFunction>,
    pub subgraphs: Vec<Subgraph>,
    pub demands: Vec<f64>,
}

impl LocalGame {
    pub fn new(fns: Vec<CostFunction>, subgraphs: Vec<Subgraph>, demands: Vec<f64>) -> Self {
        assert_eq!(subgraphs.len(), demands.len(), "one demand per subgraph");
        Self {
            fns,
            subgraphs,
            demands,
        }
    }

    pub fn num_edges(&self) -> usize {
        self.fns.len()
    }

    pub fn loads(&self, flow: &LocalFlowProfile) -> LoadProfile {
        local_flow::total_loads(flow, &self.subgraphs, &self.demands, self.num_edges())
    }

    fn sample(&self, env: &Environment, loads: &LoadProfile, key: SampleKey) -> Vec<f64> {
        env.sample_costs(&self.fns, &loads.0, key)
            .expect("loads of a local flow are nonnegative")
    }
}

/// How the learning-rate increment is measured from `V − V̄`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateRule {
    /// Largest route sum of `|V_e − V̄_e|`.
    #[default]
    EdgeAbsSum,
    /// Largest `|Σ_{e∈ρ} (V_e − V̄_e)|` over routes, i.e. the sup-norm of the
    /// path-cost difference that the path-space learner uses.
    SignedPathSum,
}

/// Solver for the longest-route problem behind the rate term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RouteSolver {
    /// One pass per subgraph in topological order.
    #[default]
    TopologicalDp,
    /// Bellman-Ford on negated weights; for cross-checking only.
    BellmanFord,
}

#[derive(Debug, Clone)]
pub struct AdaLightStep {
    pub test_flow: LocalFlowProfile,
    pub flow: LocalFlowProfile,
    pub test_loads: LoadProfile,
    pub loads: LoadProfile,
    pub test_edge_costs: Vec<f64>,
    pub edge_costs: Vec<f64>,
    /// `α^t` times the route cost gap.
    pub rate_term: f64,
}

#[derive(Debug, Clone)]
pub struct AdaLightState {
    pub t: u64,
    pub weights: LocalWeightProfile,
    pub anchor: AnchorLoadProfile,
    pub eta: f64,
    pub sum_sq: f64,
    pub rule: RateRule,
    pub solver: RouteSolver,
}

impl AdaLightState {
    pub fn new(game: &LocalGame) -> Self {
        Self {
            t: 0,
            weights: LocalValues::zeros(&game.subgraphs),
            anchor: LocalValues::zeros(&game.subgraphs),
            eta: 1.0,
            sum_sq: 0.0,
            rule: RateRule::default(),
            solver: RouteSolver::default(),
        }
    }

    pub fn with_rule(mut self, rule: RateRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_solver(mut self, solver: RouteSolver) -> Self {
        self.solver = solver;
        self
    }

    pub fn step(&mut self, game: &LocalGame, env: &Environment) -> Result<AdaLightStep, LocalFlowError> {
        self.t += 1;
        let t = self.t;
        let alpha = t as f64;
        let alpha_sum = (t * (t + 1) / 2) as f64;
        let sgs = &game.subgraphs;

        let (test_flow, _) = local_flow::push_pull_match(
            &self.anchor,
            &self.weights.scaled(self.eta),
            alpha,
            alpha_sum,
            sgs,
            &game.demands,
        )?;
        let test_loads = game.loads(&test_flow);
        let test_edge_costs = game.sample(env, &test_loads, SampleKey::test(t));

        let mut lookahead = self.weights.clone();
        lookahead.add_scaled_edge_values(-alpha, &test_edge_costs, sgs);
        let (flow, anchor) = local_flow::push_pull_match(
            &self.anchor,
            &lookahead.scaled(self.eta),
            alpha,
            alpha_sum,
            sgs,
            &game.demands,
        )?;
        self.anchor = anchor;
        let loads = game.loads(&flow);
        let edge_costs = game.sample(env, &loads, SampleKey::play(t));

        self.weights.add_scaled_edge_values(-alpha, &edge_costs, sgs);
        let diff: Vec<f64> = edge_costs
            .iter()
            .zip(&test_edge_costs)
            .map(|(v, w)| v - w)
            .collect();
        let gap = match self.rule {
            RateRule::EdgeAbsSum => {
                let abs: Vec<f64> = diff.iter().map(|d| d.abs()).collect();
                match self.solver {
                    RouteSolver::TopologicalDp => max_route_cost_gap(sgs, &abs),
                    RouteSolver::BellmanFord => max_route_cost_gap_bellman_ford(sgs, &abs),
                }
            }
            RateRule::SignedPathSum => max_abs_route_sum(sgs, &diff),
        };
        let rate_term = alpha * gap;
        self.sum_sq += rate_term * rate_term;
        self.eta = 1.0 / (1.0 + self.sum_sq).sqrt();
        Ok(AdaLightStep {
            test_flow,
            flow,
            test_loads,
            loads,
            test_edge_costs,
            edge_costs,
            rate_term,
        })
    }
}

/// `(min, max)` over origin-destination routes of `Σ_{e∈ρ} d_e`, with `d`
/// indexed by global edge id.
fn route_sum_range(sg: &Subgraph, d: &[f64]) -> (f64, f64) {
    let n = sg.num_vertices();
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    for v in (0..n - 1).rev() {
        let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
        for &e in sg.out_edges(v) {
            let edge = sg.edges()[e];
            a = a.min(d[edge.edge] + lo[edge.head]);
            b = b.max(d[edge.edge] + hi[edge.head]);
        }
        lo[v] = a;
        hi[v] = b;
    }
    (lo[0], hi[0])
}

/// Largest route sum of the nonnegative per-edge `diffs` (global edge ids)
/// over every pair's subgraph.
pub fn max_route_cost_gap(subgraphs: &[Subgraph], diffs: &[f64]) -> f64 {
    debug_assert!(diffs.iter().all(|&d| d >= 0.0));
    subgraphs
        .iter()
        .map(|sg| route_sum_range(sg, diffs).1)
        .fold(0.0, f64::max)
}

/// Largest `|Σ_{e∈ρ} d_e|` over every pair's routes.
pub fn max_abs_route_sum(subgraphs: &[Subgraph], diffs: &[f64]) -> f64 {
    subgraphs
        .iter()
        .map(|sg| {
            let (lo, hi) = route_sum_range(sg, diffs);
            hi.max(-lo)
        })
        .fold(0.0, f64::max)
}

/// Same as [`max_route_cost_gap`], computed as a shortest path under
/// weights `−d_e` by Bellman-Ford relaxation.
pub fn max_route_cost_gap_bellman_ford(subgraphs: &[Subgraph], diffs: &[f64]) -> f64 {
    let mut best: f64 = 0.0;
    for sg in subgraphs {
        let n = sg.num_vertices();
        let mut dist = vec![f64::INFINITY; n];
        dist[0] = 0.0;
        for _ in 1..n {
            let mut changed = false;
            for e in sg.edges() {
                if dist[e.tail].is_finite() {
                    let nd = dist[e.tail] - diffs[e.edge];
                    if nd < dist[e.head] {
                        dist[e.head] = nd;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        best = best.max(-dist[n - 1]);
    }
    best
}
