//! Small-instance self-checks comparing the fast routines with brute force.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{compare_path_local_iterates, ExperimentConfig, Instance, NetSource};
use crate::adalight::max_route_cost_gap;
use crate::cost::Environment;
use crate::flow::{self, PathSets, PathValues};
use crate::local_flow::{self, LocalValues};
use crate::network::{enumerate_paths, Network, OdPair, PathSet, Subgraph};
use crate::path_algos::{PathGame, XlewState};

#[derive(Debug, Clone)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// A random DAG on at most `max_vertices` vertices from vertex 0 to the last
/// vertex, with at most `max_paths` routes and every vertex on some route.
pub fn random_dag(rng: &mut impl Rng, max_vertices: usize, max_paths: usize) -> (Network, Subgraph, PathSet) {
    loop {
        let n = rng.random_range(2..=max_vertices);
        let mut arcs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(0.45) {
                    arcs.push((i, j));
                }
            }
        }
        // Every inner vertex needs a way in and a way out.
        for v in 1..n - 1 {
            if !arcs.iter().any(|&(_, h)| h == v) {
                arcs.push((rng.random_range(0..v), v));
            }
            if !arcs.iter().any(|&(t, _)| t == v) {
                arcs.push((v, rng.random_range(v + 1..n)));
            }
        }
        if arcs.is_empty() {
            arcs.push((0, n - 1));
        }
        let Ok(net) = Network::new(n, &arcs) else { continue };
        let Ok(pair) = OdPair::new(0, 0, n - 1, 1.0) else { continue };
        let ids: Vec<usize> = (0..net.num_edges()).collect();
        let Ok(sg) = Subgraph::from_edges(&net, &pair, &ids) else { continue };
        if let Ok(paths) = enumerate_paths(&sg, max_paths) {
            return (net, sg, paths);
        }
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> OracleCheck {
    OracleCheck { name, passed, detail }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Runs every check with the given seed.
pub fn run_oracle_suite(seed: u64) -> Vec<OracleCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut worst_softmax: f64 = 0.0;
    let mut worst_loads: f64 = 0.0;
    let mut dp_mismatch = 0;
    for _ in 0..100 {
        let (net, sg, paths) = random_dag(&mut rng, 8, 20);
        let z: Vec<f64> = (0..sg.num_edges()).map(|_| rng.random_range(-30.0..=30.0)).collect();
        let (_, q) = local_flow::push_backward(&sg, &z);
        let scores: Vec<f64> = paths
            .paths
            .iter()
            .map(|p| p.iter().map(|&e| z[sg.local_edge(e).expect("edge")]).sum())
            .collect();
        let mut soft = vec![0.0; scores.len()];
        flow::logit_pair(&scores, 1.0, &mut soft);
        for (p, s) in paths.paths.iter().zip(&soft) {
            let prod: f64 = p.iter().map(|&e| q[sg.local_edge(e).expect("edge")]).product();
            worst_softmax = worst_softmax.max(rel_diff(prod, *s));
        }

        let chi: Vec<f64> = {
            let mut c = vec![0.0; sg.num_edges()];
            for v in 0..sg.num_vertices() {
                let outs = sg.out_edges(v);
                let w: Vec<f64> = outs.iter().map(|_| rng.random_range(0.0..1.0)).collect();
                let s: f64 = w.iter().sum();
                for (&e, wi) in outs.iter().zip(w) {
                    c[e] = wi / s;
                }
            }
            c
        };
        let demand = rng.random_range(1.0..20.0);
        let sets = PathSets::new(vec![paths.clone()], net.num_edges());
        let sgs = [sg.clone()];
        let lf = LocalValues(vec![chi]);
        let direct = local_flow::local_loads(&lf, &sgs, &[demand], net.num_edges()).total;
        let via_paths = flow::loads_from_flow(
            &local_flow::local_to_path_flow(&lf, &sgs, &sets, &[demand]),
            &sets,
        );
        worst_loads = worst_loads.max(direct.max_abs_diff(&via_paths));

        let diffs: Vec<f64> = (0..net.num_edges()).map(|_| rng.random_range(0.0..10.0)).collect();
        let brute = paths
            .paths
            .iter()
            .map(|p| p.iter().rev().fold(0.0, |acc, &e| diffs[e] + acc))
            .fold(0.0, f64::max);
        if max_route_cost_gap(&sgs, &diffs) != brute {
            dp_mismatch += 1;
        }
    }
    out.push(check(
        "path products of pivot flows equal the path softmax",
        worst_softmax <= 1e-10,
        format!("max relative error {worst_softmax:e}"),
    ));
    out.push(check(
        "local loads equal loads of the path image",
        worst_loads <= 1e-12,
        format!("max abs error {worst_loads:e}"),
    ));
    out.push(check(
        "route-gap DP equals brute force",
        dp_mismatch == 0,
        format!("{dp_mismatch} mismatches in 100 DAGs"),
    ));

    let diamond = Instance::diamond_series(1).expect("builtin");
    let sg = &diamond.subgraphs[0];
    let (scores, q) = local_flow::push_backward(sg, &[-1e6; 4]);
    let (lin, _) = local_flow::push_backward_linear(sg, &[-1e6; 4]);
    out.push(check(
        "log-domain scores stay finite where linear ones degenerate",
        scores.vertex.iter().all(|x| x.is_finite()) && q == vec![0.5, 1.0, 0.5, 1.0] && lin[0] == 0.0,
        format!("log score at origin {}, linear score {}", scores.vertex[0], lin[0]),
    ));

    let three = Instance::diamond_series(3).expect("builtin");
    let game = three.path_game(100).expect("8 routes");
    let mut worst_grad: f64 = 0.0;
    for _ in 0..20 {
        let f = PathValues(vec![(0..8).map(|_| rng.random_range(0.5..1.5)).collect()]);
        let s: f64 = f.0[0].iter().sum();
        let f = f.scaled(10.0 / s);
        worst_grad = worst_grad.max(gradient_error(&game, &f));
    }
    out.push(check(
        "finite-difference potential gradient equals path costs",
        worst_grad <= 1e-5,
        format!("max relative error {worst_grad:e}"),
    ));

    let mut worst_eq: f64 = 0.0;
    for (net, sigma, iters) in [
        (NetSource::DiamondSeries(1), 0.0, 500),
        (NetSource::DiamondSeries(3), 0.0, 500),
        (NetSource::DiamondSeries(3), 1.0, 200),
    ] {
        let cfg = ExperimentConfig {
            net,
            noise_sigma: sigma,
            seed: 7,
            iters,
            ..ExperimentConfig::default()
        };
        match compare_path_local_iterates(&cfg) {
            Ok(c) => worst_eq = worst_eq.max(c.max_load_diff),
            Err(_) => worst_eq = f64::INFINITY,
        }
    }
    out.push(check(
        "edge-local and path-space adaptive learners route the same loads",
        worst_eq <= 1e-8,
        format!("max load discrepancy {worst_eq:e}"),
    ));

    let two = Instance::two_link().path_game(10).expect("2 routes");
    let mut xlew = XlewState::new(&two, 4.0).expect("positive modulus");
    let env = Environment::static_costs();
    let mut worst_id: f64 = 0.0;
    for _ in 0..10_000 {
        xlew.step(&two, &env);
        worst_id = worst_id.max(xlew.identity_residual().abs());
    }
    out.push(check(
        "accelerated step sizes keep γ·κ·(1−α)² = 1",
        worst_id <= 1e-10,
        format!("max relative residual {worst_id:e}"),
    ));
    out
}

/// Largest relative mismatch between a central difference of the potential
/// along `e_i − e_j` and the path cost difference `c_i − c_j`, over path
/// pairs of each O/D pair.
pub fn gradient_error(game: &PathGame, f: &PathValues) -> f64 {
    let loads = game.loads(f);
    let costs: Vec<f64> = game
        .fns
        .iter()
        .zip(&loads.0)
        .map(|(c, &w)| c.eval(w).expect("nonnegative"))
        .collect();
    let pc = flow::path_costs(&costs, &game.paths);
    let mut worst: f64 = 0.0;
    for p in 0..f.0.len() {
        for i in 0..f.0[p].len() {
            for j in 0..f.0[p].len() {
                if i == j {
                    continue;
                }
                let h = 1e-4 * f.0[p][j].min(1.0);
                let mut plus = f.clone();
                plus.0[p][i] += h;
                plus.0[p][j] -= h;
                let mut minus = f.clone();
                minus.0[p][i] -= h;
                minus.0[p][j] += h;
                if minus.0[p][i] < 0.0 || plus.0[p][j] < 0.0 {
                    continue;
                }
                let fd = (game.potential(&plus) - game.potential(&minus)) / (2.0 * h);
                let exact = pc.0[p][i] - pc.0[p][j];
                let scale = pc.0[p][i].abs().max(pc.0[p][j].abs()).max(1e-12);
                worst = worst.max((fd - exact).abs() / scale);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        for c in run_oracle_suite(1) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
