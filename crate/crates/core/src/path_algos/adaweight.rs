use super::PathGame;
use crate::cost::{Environment, SampleKey};
use crate::flow::{self, FlowProfile, PathValues, ScoreProfile};

#[derive(Debug, Clone)]
pub struct AdaWeightStep {
    /// The averaged test point `X̄^t`.
    pub test_flow: FlowProfile,
    /// The played recommendation `x^t`.
    pub flow: FlowProfile,
    pub test_edge_costs: Vec<f64>,
    pub edge_costs: Vec<f64>,
    /// `‖α^t·(c(V^t) − c(V̄^t))‖∞` over path costs.
    pub rate_term: f64,
}

/// Adaptive dual extrapolation with weights `α^t = t`.
#[derive(Debug, Clone)]
pub struct AdaWeightState {
    pub t: u64,
    pub scores: ScoreProfile,
    /// `Σ_{s<t} α^s·X_rec^s`
    pub anchor: PathValues,
    pub eta: f64,
    pub sum_sq: f64,
}

impl AdaWeightState {
    pub fn new(game: &PathGame) -> Self {
        Self {
            t: 0,
            scores: game.paths.zeros(),
            anchor: game.paths.zeros(),
            eta: 1.0,
            sum_sq: 0.0,
        }
    }

    pub fn step(&mut self, game: &PathGame, env: &Environment) -> AdaWeightStep {
        self.t += 1;
        let t = self.t;
        let alpha = t as f64;
        let alpha_sum = (t * (t + 1) / 2) as f64;
        let inv = 1.0 / alpha_sum;

        let test_point = flow::logit(&self.scores.scaled(self.eta), &game.demands);
        let test_flow = PathValues::combine(alpha * inv, &test_point, inv, &self.anchor);
        let (test_edge_costs, test_costs) = game.sample(env, &test_flow, SampleKey::test(t));

        let mut lookahead = self.scores.clone();
        lookahead.add_scaled(-alpha, &test_costs);
        let rec_point = flow::logit(&lookahead.scaled(self.eta), &game.demands);
        let flow = PathValues::combine(alpha * inv, &rec_point, inv, &self.anchor);
        let (edge_costs, costs) = game.sample(env, &flow, SampleKey::play(t));

        self.scores.add_scaled(-alpha, &costs);
        self.anchor.add_scaled(alpha, &rec_point);
        let rate_term = alpha * costs.max_abs_diff(&test_costs);
        self.sum_sq += rate_term * rate_term;
        self.eta = 1.0 / (1.0 + self.sum_sq).sqrt();
        AdaWeightStep {
            test_flow,
            flow,
            test_edge_costs,
            edge_costs,
            rate_term,
        }
    }
}
