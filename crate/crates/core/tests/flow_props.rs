//! Property tests for path flows, the potential and edge-local flows.

mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::random_dag;
use wardrop::flow::{bmw_potential, loads_from_flow, logit, path_costs, PathSets, PathValues};
use wardrop::harness::Instance;
use wardrop::local_flow::{
    local_loads, match_load, pair_loads, pull_forward_average, push_backward, push_backward_linear,
    push_pull_match, LocalValues,
};
use wardrop::network::{PathSet, Subgraph};
use wardrop::path_algos::PathGame;

fn three_diamond() -> (Instance, PathGame) {
    let inst = Instance::diamond_series(3).unwrap();
    let game = inst.path_game(16).unwrap();
    (inst, game)
}

fn random_feasible(rng: &mut ChaCha8Rng, n: usize, demand: f64) -> PathValues {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let total: f64 = raw.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    PathValues(vec![raw.iter().map(|r| demand * r / total).collect()])
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #[test]
    fn logit_is_feasible_and_shift_invariant(
        scores in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 1..8), 1..4),
        shifts in prop::collection::vec(-1e3f64..1e3, 4),
        demands in prop::collection::vec(0.1f64..100.0, 4),
    ) {
        let demands = &demands[..scores.len()];
        let y = PathValues(scores.clone());
        let f = logit(&y, demands);
        for (row, &m) in f.0.iter().zip(demands) {
            prop_assert!(row.iter().all(|&x| x >= 0.0 && x.is_finite()));
            prop_assert!(close(row.iter().sum::<f64>(), m, 1e-12));
        }
        let shifted = PathValues(
            scores.iter().zip(&shifts).map(|(r, c)| r.iter().map(|s| s + c).collect()).collect(),
        );
        let g = logit(&shifted, demands);
        prop_assert!(f.max_abs_diff(&g) <= 1e-12 * demands.iter().copied().fold(1.0, f64::max));
    }

    #[test]
    fn loads_are_linear(seed in any::<u64>(), a in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, game) = three_diamond();
        let f = random_feasible(&mut rng, 8, 10.0);
        let g = random_feasible(&mut rng, 8, 10.0);
        let mixed = game.loads(&PathValues::combine(a, &f, 1.0 - a, &g));
        let (lf, lg) = (game.loads(&f), game.loads(&g));
        for e in 0..mixed.0.len() {
            prop_assert!(close(mixed.0[e], a * lf.0[e] + (1.0 - a) * lg.0[e], 1e-14));
        }
    }

    #[test]
    fn potential_is_convex_on_segments(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, game) = three_diamond();
        let f = random_feasible(&mut rng, 8, 10.0);
        let g = random_feasible(&mut rng, 8, 10.0);
        let mid = PathValues::combine(0.5, &f, 0.5, &g);
        let phi = |x: &PathValues| bmw_potential(x, &game.fns, &game.paths);
        prop_assert!(phi(&mid) <= 0.5 * (phi(&f) + phi(&g)) + 1e-9);
    }

    #[test]
    fn potential_slope_along_the_simplex_is_a_cost_difference(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, game) = three_diamond();
        let f = random_feasible(&mut rng, 8, 10.0);
        let i = rng.random_range(0..8);
        let j = (i + rng.random_range(1..8)) % 8;
        let loads = game.loads(&f);
        let costs: Vec<f64> = game.fns.iter().zip(&loads.0).map(|(c, &w)| c.eval(w).unwrap()).collect();
        let pc = path_costs(&costs, &game.paths);
        // Move mass from route j to route i, staying feasible.
        let h = 1e-4 * f.0[0][j].min(1.0);
        prop_assume!(h > 1e-9);
        let mut up = f.clone();
        up.0[0][i] += h;
        up.0[0][j] -= h;
        let mut down = f.clone();
        down.0[0][i] -= h.min(f.0[0][i]);
        down.0[0][j] += h.min(f.0[0][i]);
        let back = h.min(f.0[0][i]);
        let fd = (game.potential(&up) - game.potential(&down)) / (h + back);
        let exact = pc.0[0][i] - pc.0[0][j];
        prop_assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0), "{fd} vs {exact}");
    }

    #[test]
    fn log_and_linear_pushing_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, sg, _) = random_dag(&mut rng, 8, 20);
        let z: Vec<f64> = (0..sg.num_edges()).map(|_| rng.random_range(-30.0..=30.0)).collect();
        let (scores, q) = push_backward(&sg, &z);
        let (lin, lin_q) = push_backward_linear(&sg, &z);
        prop_assert_eq!(scores.vertex[sg.num_vertices() - 1], 0.0);
        for (l, s) in scores.vertex.iter().zip(&lin) {
            prop_assert!((l.exp() - s).abs() <= 1e-10 * s.abs());
        }
        for (a, b) in q.iter().zip(&lin_q) {
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()));
        }
    }

    #[test]
    fn adding_a_constant_across_a_cut_keeps_the_pivot(seed in any::<u64>(), c in -20.0f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, sg, _) = random_dag(&mut rng, 8, 20);
        let z: Vec<f64> = (0..sg.num_edges()).map(|_| rng.random_range(-10.0..=10.0)).collect();
        // Local vertices are numbered in topological order, so edges from
        // {0..=k} to {k+1..} form a cut every route crosses exactly once.
        let k = rng.random_range(0..sg.num_vertices() - 1);
        let shifted: Vec<f64> = sg
            .edges()
            .iter()
            .zip(&z)
            .map(|(e, w)| if e.tail <= k && e.head > k { w + c } else { *w })
            .collect();
        let (_, q) = push_backward(&sg, &z);
        let (_, q2) = push_backward(&sg, &shifted);
        for (a, b) in q.iter().zip(&q2) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn pulled_and_matched_loads_conserve_mass(seed in any::<u64>(), t in 1u64..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, sg, _) = random_dag(&mut rng, 8, 20);
        let demand = rng.random_range(0.5..20.0);
        let z: Vec<f64> = (0..sg.num_edges()).map(|_| rng.random_range(-5.0..=5.0)).collect();
        let (_, q) = push_backward(&sg, &z);
        let alpha = t as f64;
        let prior = (t * (t - 1) / 2) as f64;
        // Any earlier anchor is a sum of conserving loads; use a scaled one.
        let uniform: Vec<f64> = sg
            .edges()
            .iter()
            .map(|e| 1.0 / sg.out_edges(e.tail).len() as f64)
            .collect();
        let (old, _) = pair_loads(&sg, &uniform, demand);
        let anchor: Vec<f64> = old.iter().map(|w| w * prior).collect();
        let pulled = pull_forward_average(&sg, &q, &anchor, alpha, prior + alpha, demand);
        check_conservation(&sg, &pulled.target, demand)?;
        let chi = match_load(&sg, &pulled.target, demand).unwrap();
        let (loads, _) = pair_loads(&sg, &chi, demand);
        check_conservation(&sg, &loads, demand)?;
        for (a, b) in loads.iter().zip(&pulled.target) {
            prop_assert!((a - b).abs() <= 1e-9 * demand);
        }
    }

    #[test]
    fn push_pull_match_with_empty_anchor_is_the_softmax(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (net, sg, paths) = random_dag(&mut rng, 8, 20);
        let demand = rng.random_range(0.5..20.0);
        let z: Vec<f64> = (0..sg.num_edges()).map(|_| rng.random_range(-5.0..=5.0)).collect();
        let sgs = [sg];
        let (flow, anchor) = push_pull_match(
            &LocalValues::zeros(&sgs),
            &LocalValues(vec![z.clone()]),
            1.0,
            1.0,
            &sgs,
            &[demand],
        )
        .unwrap();
        let loads = local_loads(&flow, &sgs, &[demand], net.num_edges()).total;
        prop_assert_eq!(&anchor.0[0], &local_loads(&flow, &sgs, &[demand], net.num_edges()).edge[0]);
        let sums: Vec<f64> = paths
            .iter()
            .map(|p| p.iter().map(|&e| z[sgs[0].local_edge(e).unwrap()]).sum())
            .collect();
        let f = logit(&PathValues(vec![sums]), &[demand]);
        let sets = PathSets::new(vec![PathSet { pair: 0, paths }], net.num_edges());
        let expected = loads_from_flow(&f, &sets);
        prop_assert!(loads.max_abs_diff(&expected) <= 1e-9 * demand);
    }
}

fn check_conservation(sg: &Subgraph, loads: &[f64], demand: f64) -> Result<(), TestCaseError> {
    let tol = 1e-9 * demand;
    for v in 0..sg.num_vertices() {
        let out: f64 = sg.out_edges(v).iter().map(|&e| loads[e]).sum();
        let inflow: f64 = sg.in_edges(v).iter().map(|&e| loads[e]).sum();
        if v == 0 {
            prop_assert!((out - demand).abs() <= tol);
        } else if v + 1 < sg.num_vertices() {
            prop_assert!((out - inflow).abs() <= tol);
        } else {
            prop_assert!((inflow - demand).abs() <= tol);
        }
    }
    Ok(())
}

#[test]
fn uniform_image_potential_on_two_link() {
    let inst = Instance::two_link();
    let game = inst.path_game(4).unwrap();
    // Loads (5, 5): 5²/2 + 5² = 37.5.
    assert_eq!(game.potential(&game.uniform_flow()), 37.5);
}
