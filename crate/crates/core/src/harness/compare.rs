use super::run::{build_instance, environment};
use super::{ExperimentConfig, HarnessError};
use crate::adalight::{AdaLightState, RateRule};
use crate::path_algos::AdaWeightState;

/// Route cap for lockstep comparisons.
pub const COMPARE_PATH_LIMIT: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    /// Largest `|w_e − w'_e|` over edges, rounds, and both test and played flows.
    pub max_load_diff: f64,
    pub max_eta_diff: f64,
    pub rounds: u64,
}

/// Runs the path-space and edge-local adaptive learners side by side on the
/// same noise draws and reports how far their edge loads drift apart.
///
/// The edge-local learner uses [`RateRule::SignedPathSum`] so that both
/// compute the same learning rate.
pub fn compare_path_local_iterates(cfg: &ExperimentConfig) -> Result<Comparison, HarnessError> {
    cfg.validate()?;
    let inst = build_instance(cfg)?;
    let paths = inst
        .path_sets(COMPARE_PATH_LIMIT)
        .map_err(HarnessError::from_enumeration)?;
    if paths.total_paths() > COMPARE_PATH_LIMIT {
        return Err(HarnessError::PathExplosion(format!(
            "{} routes in total, comparison is limited to {COMPARE_PATH_LIMIT}",
            paths.total_paths()
        )));
    }
    let path_game = crate::path_algos::PathGame::new(inst.fns.clone(), paths, inst.demands());
    let local_game = inst.local_game();
    let env = environment(cfg);
    let mut aw = AdaWeightState::new(&path_game);
    let mut al = AdaLightState::new(&local_game).with_rule(RateRule::SignedPathSum);
    let mut worst: f64 = 0.0;
    let mut eta_diff: f64 = 0.0;
    for _ in 0..cfg.iters {
        let a = aw.step(&path_game, &env);
        let b = al.step(&local_game, &env)?;
        worst = worst
            .max(path_game.loads(&a.test_flow).max_abs_diff(&b.test_loads))
            .max(path_game.loads(&a.flow).max_abs_diff(&b.loads));
        eta_diff = eta_diff.max((aw.eta - al.eta).abs());
    }
    Ok(Comparison {
        max_load_diff: worst,
        max_eta_diff: eta_diff,
        rounds: cfg.iters,
    })
}
