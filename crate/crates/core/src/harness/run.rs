use std::fmt::Write as _;
use std::time::Instant;

use super::config::{Algo, EwRateMode, ExperimentConfig, NetSource, RefMode};
use super::{HarnessError, Instance};
use crate::adalight::AdaLightState;
use crate::cost::{cost_bounds, Environment};
use crate::flow::{self, reference_minimum, FrankWolfeOptions, StepRule};
use crate::path_algos::{smoothness_modulus, AdaWeightState, EwRate, EwState, PathGame, XlewState};

/// Minimum potential of the builtin two-link game.
pub const TWO_LINK_MIN_POTENTIAL: f64 = 100.0 / 3.0;

/// Frank-Wolfe stops once its duality gap falls below this fraction of the
/// potential at the uniform flow.
const FW_REL_TOL: f64 = 1e-12;
const FW_MAX_ITER: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: u64,
    pub potential: f64,
    pub gap: f64,
    pub eta: Option<f64>,
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapTrace {
    pub rows: Vec<TraceRow>,
    /// The minimum potential gaps are measured against.
    pub reference: f64,
    /// False if the reference solver stopped at its iteration cap.
    pub reference_converged: bool,
}

fn fmt_f64(out: &mut String, x: f64) {
    write!(out, "{x:.16e}").expect("writing to a String cannot fail");
}

impl GapTrace {
    pub const HEADER: &'static str = "t,potential,gap,eta,wall_ms";

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(80 * (self.rows.len() + 1));
        out.push_str(Self::HEADER);
        out.push('\n');
        for r in &self.rows {
            write!(out, "{},", r.t).expect("infallible");
            fmt_f64(&mut out, r.potential);
            out.push(',');
            fmt_f64(&mut out, r.gap);
            out.push(',');
            if let Some(eta) = r.eta {
                fmt_f64(&mut out, eta);
            }
            out.push(',');
            if let Some(ms) = r.wall_ms {
                fmt_f64(&mut out, ms);
            }
            out.push('\n');
        }
        out
    }

    /// `(t, gap)` pairs.
    pub fn gaps(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.rows.iter().map(|r| (r.t, r.gap))
    }

    /// Row-wise mean of equally long traces.
    pub fn mean(traces: &[GapTrace]) -> Result<GapTrace, HarnessError> {
        let first = traces
            .first()
            .ok_or_else(|| HarnessError::Config("no traces to average".into()))?;
        if traces.iter().any(|t| t.rows.len() != first.rows.len()) {
            return Err(HarnessError::Config("traces differ in length".into()));
        }
        let n = traces.len() as f64;
        let avg = |f: &dyn Fn(&TraceRow) -> f64, i: usize| traces.iter().map(|t| f(&t.rows[i])).sum::<f64>() / n;
        let rows = (0..first.rows.len())
            .map(|i| TraceRow {
                t: first.rows[i].t,
                potential: avg(&|r| r.potential, i),
                gap: avg(&|r| r.gap, i),
                eta: first.rows[i].eta.map(|_| avg(&|r| r.eta.unwrap_or(f64::NAN), i)),
                wall_ms: first.rows[i].wall_ms.map(|_| avg(&|r| r.wall_ms.unwrap_or(f64::NAN), i)),
            })
            .collect();
        Ok(GapTrace {
            rows,
            reference: traces.iter().map(|t| t.reference).sum::<f64>() / n,
            reference_converged: traces.iter().all(|t| t.reference_converged),
        })
    }
}

pub fn build_instance(cfg: &ExperimentConfig) -> Result<Instance, HarnessError> {
    match &cfg.net {
        NetSource::TwoLink => Ok(Instance::two_link()),
        NetSource::DiamondSeries(n) => Instance::diamond_series(*n),
        NetSource::Tntp { net, trips } => {
            let inst = Instance::from_tntp(net, trips, cfg.k_paths)?;
            if inst.dropped_paths > 0 {
                log::warn!(
                    "{} shortest paths dropped to keep pair subgraphs acyclic (RUST_LOG=debug lists them)",
                    inst.dropped_paths
                );
            }
            Ok(inst)
        }
    }
}

pub fn environment(cfg: &ExperimentConfig) -> Environment {
    if cfg.noise_sigma > 0.0 {
        Environment::gaussian(cfg.noise_sigma, cfg.seed)
    } else {
        Environment {
            seed: cfg.seed,
            ..Environment::static_costs()
        }
    }
}

pub(crate) fn path_game(inst: &Instance, limit: usize) -> Result<PathGame, HarnessError> {
    inst.path_game(limit).map_err(HarnessError::from_enumeration)
}

/// Minimum potential by pairwise Frank-Wolfe, with a convergence flag.
pub fn frank_wolfe_reference(inst: &Instance, path_limit: usize) -> Result<(f64, bool), HarnessError> {
    let game = path_game(inst, path_limit)?;
    let scale = game.potential(&game.uniform_flow()).max(1.0);
    let r = reference_minimum(
        &game.fns,
        &game.paths,
        &game.demands,
        FrankWolfeOptions {
            tol: FW_REL_TOL * scale,
            max_iter: FW_MAX_ITER,
            step: StepRule::Pairwise,
        },
    );
    if !r.converged {
        log::warn!(
            "reference solver hit its iteration cap; duality gap {:e} (reference is approximate)",
            r.duality_gap
        );
    }
    Ok((r.value, r.converged))
}

fn lap(clock: &mut Instant) -> f64 {
    let ms = clock.elapsed().as_secs_f64() * 1e3;
    *clock = Instant::now();
    ms
}

/// Per-round `(potential, η, wall ms)` of the configured learner.
fn play(inst: &Instance, cfg: &ExperimentConfig) -> Result<Vec<(f64, Option<f64>, f64)>, HarnessError> {
    let env = environment(cfg);
    let mut out = Vec::with_capacity(cfg.iters as usize);
    match cfg.algo {
        Algo::Ew => {
            let game = path_game(inst, cfg.path_limit)?;
            let rate = match cfg.ew_rate {
                EwRateMode::Fixed => {
                    let bounds = cost_bounds(&game.fns, game.total_demand(), &env);
                    EwRate::tuned(&game, &bounds, cfg.iters)?
                }
                EwRateMode::InvSqrt => EwRate::InverseSqrt,
            };
            let mut s = EwState::new(&game, rate);
            let mut clock = Instant::now();
            for _ in 0..cfg.iters {
                s.step(&game, &env);
                let phi = game.potential(&s.time_average()?);
                out.push((phi, None, lap(&mut clock)));
            }
        }
        Algo::Xlew => {
            let game = path_game(inst, cfg.path_limit)?;
            let bounds = cost_bounds(&game.fns, game.total_demand(), &env);
            let mut s = XlewState::new(&game, smoothness_modulus(&inst.subgraphs, &bounds))?;
            if let Some(g0) = cfg.xlew_gamma0_override {
                s = s.with_gamma0(g0)?;
            }
            let mut clock = Instant::now();
            for _ in 0..cfg.iters {
                let step = s.step(&game, &env);
                out.push((game.potential(&step.flow), None, lap(&mut clock)));
            }
        }
        Algo::AdaWeight => {
            let game = path_game(inst, cfg.path_limit)?;
            let mut s = AdaWeightState::new(&game);
            let mut clock = Instant::now();
            for _ in 0..cfg.iters {
                let eta = s.eta;
                let step = s.step(&game, &env);
                out.push((game.potential(&step.flow), Some(eta), lap(&mut clock)));
            }
        }
        Algo::AdaLight => {
            let game = inst.local_game();
            let mut s = AdaLightState::new(&game);
            let mut clock = Instant::now();
            for _ in 0..cfg.iters {
                let eta = s.eta;
                let step = s.step(&game, &env)?;
                let phi = flow::potential_of_loads(&game.fns, &step.loads);
                out.push((phi, Some(eta), lap(&mut clock)));
            }
        }
    }
    Ok(out)
}

/// Builds the instance, runs the configured learner and records the gap of
/// every round. Writes the CSV when `cfg.out` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<GapTrace, HarnessError> {
    cfg.validate()?;
    let inst = build_instance(cfg)?;
    let fixed_ref = match cfg.reference {
        RefMode::Analytic => Some((TWO_LINK_MIN_POTENTIAL, true)),
        RefMode::FrankWolfe => Some(frank_wolfe_reference(&inst, cfg.path_limit)?),
        RefMode::BestObserved => None,
    };
    let played = play(&inst, cfg)?;
    let (reference, converged) = fixed_ref.unwrap_or_else(|| {
        (
            played.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
            true,
        )
    });
    let mut rows = Vec::with_capacity(played.len());
    for (i, (potential, eta, ms)) in played.into_iter().enumerate() {
        if !potential.is_finite() {
            return Err(HarnessError::Numeric(format!("potential is {potential} at t = {}", i + 1)));
        }
        rows.push(TraceRow {
            t: i as u64 + 1,
            potential,
            gap: flow::gap_from_potential(potential, reference)?,
            eta,
            wall_ms: cfg.timing.then_some(ms),
        });
    }
    let trace = GapTrace {
        rows,
        reference,
        reference_converged: converged,
    };
    if let Some(path) = &cfg.out {
        std::fs::write(path, trace.to_csv()).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(algo: Algo, iters: u64) -> ExperimentConfig {
        ExperimentConfig {
            algo,
            iters,
            reference: RefMode::Analytic,
            timing: false,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn short_trace_shape() {
        let trace = run_experiment(&cfg(Algo::AdaWeight, 10)).unwrap();
        assert_eq!(trace.rows.len(), 10);
        assert!(trace.rows.iter().enumerate().all(|(i, r)| r.t == i as u64 + 1 && r.gap >= 0.0));
        let csv = trace.to_csv();
        assert_eq!(csv.lines().next(), Some(GapTrace::HEADER));
        assert_eq!(csv.lines().count(), 11);
    }

    #[test]
    fn zero_iterations_rejected() {
        assert!(matches!(run_experiment(&cfg(Algo::Ew, 0)), Err(HarnessError::Config(_))));
    }

    #[test]
    fn first_row_is_uniform_potential_for_ew_and_xlew() {
        // Uniform split (5, 5): 25/2 + 25.
        for algo in [Algo::Ew, Algo::Xlew] {
            let trace = run_experiment(&cfg(algo, 1)).unwrap();
            assert!((trace.rows[0].potential - 37.5).abs() < 1e-12, "{algo:?}");
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let mut c = cfg(Algo::AdaLight, 200);
        c.noise_sigma = 3.0;
        c.seed = 9;
        c.net = NetSource::DiamondSeries(2);
        c.reference = RefMode::FrankWolfe;
        assert_eq!(run_experiment(&c).unwrap().to_csv(), run_experiment(&c).unwrap().to_csv());
    }

    #[test]
    fn best_observed_not_below_frank_wolfe() {
        for algo in [Algo::Ew, Algo::Xlew, Algo::AdaWeight, Algo::AdaLight] {
            let mut c = cfg(algo, 300);
            c.net = NetSource::DiamondSeries(3);
            c.reference = RefMode::FrankWolfe;
            let fw = run_experiment(&c).unwrap().reference;
            c.reference = RefMode::BestObserved;
            let best = run_experiment(&c).unwrap().reference;
            assert!(best >= fw - 1e-9 * fw.abs().max(1.0), "{algo:?}: {best} < {fw}");
        }
    }
}
