use super::{AlgoError, PathGame};
use crate::cost::{Environment, SampleKey};
use crate::flow::{self, FlowProfile, PathValues, ScoreProfile};

#[derive(Debug, Clone)]
pub struct XlewStep {
    /// The flow played, `x^t`.
    pub flow: FlowProfile,
    /// The logit point `p^t` of this round.
    pub pivot: FlowProfile,
    /// Where costs were measured, `x̄^t`.
    pub query: FlowProfile,
    pub edge_costs: Vec<f64>,
}

/// Accelerated exponential weights.
#[derive(Debug, Clone)]
pub struct XlewState {
    pub t: u64,
    pub scores: ScoreProfile,
    pub prev_flow: FlowProfile,
    /// `α^{t−1}`
    pub prev_alpha: f64,
    /// `γ^{t−1}`
    pub prev_gamma: f64,
    pub gamma0: f64,
    /// `K·m_max·σ` with `γ0 = 1/kappa` unless overridden.
    pub kappa: f64,
}

impl XlewState {
    /// `smoothness` is the modulus `σ` of the potential.
    pub fn new(game: &PathGame, smoothness: f64) -> Result<Self, AlgoError> {
        let kappa = game.num_pairs() as f64 * game.max_demand() * smoothness;
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(AlgoError::InvalidParameter(format!(
                "smoothness modulus must be positive, got {smoothness}"
            )));
        }
        Ok(Self {
            t: 0,
            scores: game.paths.zeros(),
            prev_flow: game.paths.zeros(),
            prev_alpha: 0.0,
            prev_gamma: 1.0 / kappa,
            gamma0: 1.0 / kappa,
            kappa,
        })
    }

    /// Replaces the tuned initial step size.
    pub fn with_gamma0(mut self, gamma0: f64) -> Result<Self, AlgoError> {
        if !(gamma0 > 0.0 && gamma0.is_finite()) {
            return Err(AlgoError::InvalidParameter(format!(
                "initial step size must be positive, got {gamma0}"
            )));
        }
        if self.t > 0 {
            return Err(AlgoError::InvalidParameter(
                "initial step size is fixed once rounds have been played".into(),
            ));
        }
        self.gamma0 = gamma0;
        self.prev_gamma = gamma0;
        Ok(self)
    }

    pub fn step(&mut self, game: &PathGame, env: &Environment) -> XlewStep {
        self.t += 1;
        let pivot = flow::logit(&self.scores, &game.demands);
        let a_prev = self.prev_alpha;
        let flow = PathValues::combine(a_prev, &self.prev_flow, 1.0 - a_prev, &pivot);
        let g_prev = self.prev_gamma;
        let g0 = self.gamma0;
        let gamma = g_prev + 0.5 * g0 + (g_prev * g0 + 0.25 * g0 * g0).sqrt();
        let alpha = g_prev / gamma;
        let query = PathValues::combine(alpha, &flow, 1.0 - alpha, &pivot);
        let (edge_costs, path_costs) = game.sample(env, &query, SampleKey::play(self.t));
        self.scores.add_scaled(-(1.0 - alpha) * gamma, &path_costs);
        self.prev_flow = flow.clone();
        self.prev_alpha = alpha;
        self.prev_gamma = gamma;
        XlewStep {
            flow,
            pivot,
            query,
            edge_costs,
        }
    }

    /// `γ^t·κ·(1−α^t)² − 1` for the latest round; zero up to rounding when
    /// `γ0 = 1/κ`.
    pub fn identity_residual(&self) -> f64 {
        let a = 1.0 - self.prev_alpha;
        self.prev_gamma * self.kappa * a * a - 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::PathValues;
    use crate::path_algos::kl_divergence;
    use crate::path_algos::testing::{flow_is_feasible, two_link};

    #[test]
    fn gamma_recurrence_example() {
        let game = two_link();
        let mut s = XlewState::new(&game, 4.0).unwrap().with_gamma0(1.0).unwrap();
        let step = s.step(&game, &Environment::static_costs());
        assert!((s.prev_gamma - (1.5 + 1.25f64.sqrt())).abs() < 1e-12);
        assert!((s.prev_gamma - 2.618034).abs() < 1e-6);
        assert_eq!(step.flow.0, vec![vec![5.0, 5.0]]);
    }

    #[test]
    fn identity_holds_and_gamma_grows() {
        let game = two_link();
        let mut s = XlewState::new(&game, 4.0).unwrap();
        let env = Environment::static_costs();
        let mut prev = s.prev_gamma;
        for _ in 0..2000 {
            let step = s.step(&game, &env);
            assert!(s.identity_residual().abs() <= 1e-10);
            assert!(s.prev_gamma > prev);
            assert!(flow_is_feasible(&step.flow, &game.demands));
            prev = s.prev_gamma;
        }
    }

    #[test]
    fn energy_decreases_on_two_link() {
        let game = two_link();
        let opt = PathValues(vec![vec![20.0 / 3.0, 10.0 / 3.0]]);
        let phi_star = 100.0 / 3.0;
        let mut s = XlewState::new(&game, 4.0).unwrap();
        let env = Environment::static_costs();
        let mut prev = f64::INFINITY;
        for _ in 0..1000 {
            let g_prev = s.prev_gamma;
            let step = s.step(&game, &env);
            let energy = g_prev * (game.potential(&step.flow) - phi_star)
                + kl_divergence(&opt, &step.pivot);
            assert!(energy <= prev + 1e-9, "{energy} > {prev}");
            prev = energy;
        }
    }
}
