//! Integration tests across the learners: rate terms, reproducibility and
//! per-round cost on the SiouxFalls network.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::random_dag;
use wardrop::adalight::{max_abs_route_sum, max_route_cost_gap, AdaLightState, LocalGame};
use wardrop::cost::{Environment, SampleKey};
use wardrop::harness::{run_experiment, Algo, ExperimentConfig, Instance, NetSource};
use wardrop::path_algos::AdaWeightState;

proptest! {
    #[test]
    fn edge_abs_sum_dominates_the_path_sup_norm(seed in any::<u64>(), one_sign in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (net, sg, paths) = random_dag(&mut rng, 8, 20);
        let d: Vec<f64> = (0..net.num_edges())
            .map(|_| if one_sign { rng.random_range(0.0..5.0) } else { rng.random_range(-5.0..5.0) })
            .collect();
        let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
        let sgs = std::slice::from_ref(&sg);
        let sup = paths
            .iter()
            .map(|p| p.iter().map(|&e| d[e]).sum::<f64>().abs())
            .fold(0.0, f64::max);
        let signed = max_abs_route_sum(sgs, &d);
        let edge_abs = max_route_cost_gap(sgs, &abs);
        prop_assert!((signed - sup).abs() <= 1e-12 * sup.max(1.0));
        prop_assert!(edge_abs >= signed - 1e-12 * sup.max(1.0));
        if one_sign {
            prop_assert!((edge_abs - signed).abs() <= 1e-12 * sup.max(1.0));
        }
    }
}

fn siouxfalls(k: usize) -> Instance {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    Instance::from_tntp(&data.join("SiouxFalls_net.tntp"), &data.join("SiouxFalls_trips.tntp"), k).unwrap()
}

fn eta_trace(game: &LocalGame, env: &Environment, rounds: usize) -> Vec<f64> {
    let mut s = AdaLightState::new(game);
    (0..rounds)
        .map(|_| {
            s.step(game, env).unwrap();
            s.eta
        })
        .collect()
}

#[test]
fn adalight_eta_is_bit_reproducible() {
    let game = Instance::diamond_series(3).unwrap().local_game();
    let env = Environment::gaussian(2.0, 11);
    let a = eta_trace(&game, &env, 300);
    let b = eta_trace(&game, &env, 300);
    assert_eq!(
        a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
        b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
    );
    assert!(a.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn static_samples_do_not_depend_on_the_phase() {
    let game = Instance::diamond_series(2).unwrap().path_game(16).unwrap();
    let env = Environment::static_costs();
    let flow = game.uniform_flow();
    let (a, _) = game.sample(&env, &flow, SampleKey::test(3));
    let (b, _) = game.sample(&env, &flow, SampleKey::play(3));
    assert_eq!(a, b);
}

#[test]
fn adaweight_rate_stays_at_one_while_costs_agree() {
    // Symmetric diamond: both routes always cost the same, so test and
    // played costs coincide.
    let inst = Instance::diamond_series(1).unwrap();
    let mut fns = inst.fns.clone();
    fns[2] = fns[0];
    fns[3] = fns[1];
    let game = wardrop::path_algos::PathGame::new(fns, inst.path_sets(4).unwrap(), inst.demands());
    let mut s = AdaWeightState::new(&game);
    for _ in 0..50 {
        s.step(&game, &Environment::static_costs());
        assert_eq!(s.eta, 1.0);
    }
}

#[test]
fn adalight_round_cost_grows_slower_than_route_count() {
    let small = siouxfalls(1);
    let large = siouxfalls(10);
    let routes = |inst: &Instance| inst.path_sets(usize::MAX).unwrap().total_paths() as f64;
    let route_ratio = routes(&large) / routes(&small);
    let env = Environment::static_costs();
    let per_round = |inst: &Instance| {
        let game = inst.local_game();
        (0..3)
            .map(|_| {
                let mut s = AdaLightState::new(&game);
                let start = Instant::now();
                for _ in 0..100 {
                    s.step(&game, &env).unwrap();
                }
                start.elapsed().as_secs_f64() / 100.0
            })
            .fold(f64::INFINITY, f64::min)
    };
    let time_ratio = per_round(&large) / per_round(&small);
    assert!(route_ratio > 3.0, "route ratio {route_ratio}");
    assert!(
        time_ratio < route_ratio,
        "round time grew {time_ratio:.2}x while routes grew {route_ratio:.2}x"
    );
}

#[test]
fn siouxfalls_adalight_reduces_the_gap() {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let trace = run_experiment(&ExperimentConfig {
        net: NetSource::Tntp {
            net: data.join("SiouxFalls_net.tntp"),
            trips: data.join("SiouxFalls_trips.tntp"),
        },
        algo: Algo::AdaLight,
        iters: 200,
        k_paths: 3,
        timing: false,
        ..ExperimentConfig::default()
    })
    .unwrap();
    assert!(trace.reference_converged);
    assert!(trace.rows[199].gap < 0.05 * trace.rows[0].gap);
}
