//! Path-space objects: flows, scores, loads, the logit choice map, the
//! Beckmann potential and the equilibrium gap.

use crate::cost::CostFunction;
use crate::network::PathSet;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("reference minimum {reference} exceeds the potential {potential} by more than the tolerance")]
    InconsistentReference { reference: f64, potential: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, FlowError>;

/// Relative slack absorbed when flooring a gap at zero.
pub const GAP_TOLERANCE: f64 = 1e-9;

/// The routing paths of every pair plus the edge count they index into.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSets {
    sets: Vec<PathSet>,
    num_edges: usize,
}

impl PathSets {
    pub fn new(sets: Vec<PathSet>, num_edges: usize) -> Self {
        debug_assert!(sets.iter().flat_map(|s| s.paths.iter().flatten()).all(|&e| e < num_edges));
        Self { sets, num_edges }
    }

    pub fn num_pairs(&self) -> usize {
        self.sets.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn pair(&self, p: usize) -> &PathSet {
        &self.sets[p]
    }

    pub fn iter(&self) -> impl Iterator<Item = &PathSet> {
        self.sets.iter()
    }

    /// Total number of paths across pairs.
    pub fn total_paths(&self) -> usize {
        self.sets.iter().map(PathSet::len).sum()
    }

    /// A zero vector shaped like these path sets.
    pub fn zeros(&self) -> PathValues {
        PathValues(self.sets.iter().map(|s| vec![0.0; s.len()]).collect())
    }
}

/// One real per path, grouped by pair. Used for flows, scores and path costs.
#[derive(Debug, Clone, PartialEq)]
pub struct PathValues(pub Vec<Vec<f64>>);

/// Path masses; each pair's entries are nonnegative and sum to its demand.
pub type FlowProfile = PathValues;
/// Dual path scores fed to the logit map.
pub type ScoreProfile = PathValues;

impl PathValues {
    pub fn pair(&self, p: usize) -> &[f64] {
        &self.0[p]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.0.iter()
    }

    /// `self += a * x`
    pub fn add_scaled(&mut self, a: f64, x: &PathValues) {
        for (s, v) in self.0.iter_mut().zip(&x.0) {
            for (si, vi) in s.iter_mut().zip(v) {
                *si += a * vi;
            }
        }
    }

    pub fn scaled(&self, a: f64) -> PathValues {
        PathValues(
            self.0
                .iter()
                .map(|v| v.iter().map(|x| a * x).collect())
                .collect(),
        )
    }

    /// `a * x + b * y`
    pub fn combine(a: f64, x: &PathValues, b: f64, y: &PathValues) -> PathValues {
        PathValues(
            x.0.iter()
                .zip(&y.0)
                .map(|(u, v)| u.iter().zip(v).map(|(ui, vi)| a * ui + b * vi).collect())
                .collect(),
        )
    }

    /// Largest absolute entry.
    pub fn sup_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &PathValues) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()))
    }
}

/// Per-edge loads `w_e`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile(pub Vec<f64>);

impl LoadProfile {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs_diff(&self, other: &LoadProfile) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()))
    }
}

/// `w_e = Σ_ρ 1{e ∈ ρ} f_ρ`
pub fn loads_from_flow(flow: &FlowProfile, paths: &PathSets) -> LoadProfile {
    let mut w = vec![0.0; paths.num_edges()];
    for (set, f) in paths.iter().zip(flow.iter()) {
        for (path, &mass) in set.paths.iter().zip(f) {
            for &e in path {
                w[e] += mass;
            }
        }
    }
    LoadProfile(w)
}

/// `c_ρ = Σ_{e ∈ ρ} c_e`
pub fn path_costs(edge_costs: &[f64], paths: &PathSets) -> PathValues {
    PathValues(
        paths
            .iter()
            .map(|set| {
                set.paths
                    .iter()
                    .map(|p| p.iter().map(|&e| edge_costs[e]).sum())
                    .collect()
            })
            .collect(),
    )
}

/// Softmax of `scores` within one pair, scaled to `demand`.
pub fn logit_pair(scores: &[f64], demand: f64, out: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, &s) in out.iter_mut().zip(scores) {
        *o = (s - max).exp();
        total += *o;
    }
    let scale = demand / total;
    for o in out.iter_mut() {
        *o *= scale;
    }
}

/// The rescaled logit choice map, computed with a per-pair max shift.
pub fn logit(scores: &ScoreProfile, demands: &[f64]) -> FlowProfile {
    PathValues(
        scores
            .iter()
            .zip(demands)
            .map(|(s, &m)| {
                let mut out = vec![0.0; s.len()];
                logit_pair(s, m, &mut out);
                out
            })
            .collect(),
    )
}

/// `Σ_e ∫₀^{w_e} c_e`
pub fn potential_of_loads(fns: &[CostFunction], loads: &LoadProfile) -> f64 {
    fns.iter()
        .zip(&loads.0)
        .map(|(f, &w)| f.integral(w.max(0.0)))
        .sum()
}

/// The Beckmann potential of a path flow.
pub fn bmw_potential(flow: &FlowProfile, fns: &[CostFunction], paths: &PathSets) -> f64 {
    potential_of_loads(fns, &loads_from_flow(flow, paths))
}

/// `potential − reference`, floored at zero. A reference above the potential
/// by more than `GAP_TOLERANCE` (relative) is an error.
pub fn gap_from_potential(potential: f64, reference: f64) -> Result<f64> {
    let slack = GAP_TOLERANCE * reference.abs().max(1.0);
    if reference > potential + slack {
        return Err(FlowError::InconsistentReference {
            reference,
            potential,
        });
    }
    Ok((potential - reference).max(0.0))
}

pub fn equilibrium_gap(
    flow: &FlowProfile,
    reference: f64,
    fns: &[CostFunction],
    paths: &PathSets,
) -> Result<f64> {
    gap_from_potential(bmw_potential(flow, fns, paths), reference)
}

/// Step-size rule for [`reference_minimum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// Classic open-loop step `2 / (t + 2)`.
    OpenLoop,
    /// Exact line search along the Frank-Wolfe direction.
    LineSearch,
    /// Per pair, shift mass from the costliest used path to the cheapest one
    /// with an exact line search (pairwise Frank-Wolfe, block by pair).
    Pairwise,
}

#[derive(Debug, Clone, Copy)]
pub struct FrankWolfeOptions {
    /// Stop once the Frank-Wolfe duality gap is at most this value.
    pub tol: f64,
    pub max_iter: usize,
    pub step: StepRule,
}

impl Default for FrankWolfeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 100_000,
            step: StepRule::Pairwise,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceMinimum {
    /// Lowest potential seen.
    pub value: f64,
    pub flow: FlowProfile,
    /// Duality gap at the returned flow; an upper bound on `value − min Φ`.
    pub duality_gap: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit first.
    pub converged: bool,
    /// Potential after each iteration.
    pub history: Vec<f64>,
}

struct FwEval {
    potential: f64,
    duality_gap: f64,
    /// Cheapest path per pair.
    best: Vec<usize>,
}

fn fw_eval(
    flow: &FlowProfile,
    loads: &LoadProfile,
    fns: &[CostFunction],
    paths: &PathSets,
    demands: &[f64],
) -> FwEval {
    let costs: Vec<f64> = fns.iter().zip(&loads.0).map(|(f, &w)| f.value(w)).collect();
    let pc = path_costs(&costs, paths);
    let mut gap = 0.0;
    let mut best = Vec::with_capacity(paths.num_pairs());
    for ((c, f), &m) in pc.iter().zip(flow.iter()).zip(demands) {
        let (imin, cmin) = c
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, x)| if x < acc.1 { (i, x) } else { acc });
        let used: f64 = c.iter().zip(f).map(|(ci, fi)| ci * fi).sum();
        gap += used - m * cmin;
        best.push(imin);
    }
    FwEval {
        potential: potential_of_loads(fns, loads),
        duality_gap: gap.max(0.0),
        best,
    }
}

/// Minimizes a convex 1-D function on `[0, hi]` given its nondecreasing
/// derivative `d`.
fn line_search(hi: f64, d: impl Fn(f64) -> f64) -> f64 {
    if d(0.0) >= 0.0 {
        return 0.0;
    }
    if d(hi) <= 0.0 {
        return hi;
    }
    let (mut lo, mut up) = (0.0, hi);
    for _ in 0..100 {
        let mid = 0.5 * (lo + up);
        if mid <= lo || mid >= up {
            break;
        }
        if d(mid) < 0.0 {
            lo = mid;
        } else {
            up = mid;
        }
    }
    0.5 * (lo + up)
}

/// Minimum of the Beckmann potential over the path polytope by Frank-Wolfe.
///
/// Linear minimization is the per-pair cheapest path at the current loads.
/// Iterates until the duality gap drops to `opts.tol` or the cap is hit; in
/// the latter case the best flow seen is returned with `converged = false`.
pub fn reference_minimum(
    fns: &[CostFunction],
    paths: &PathSets,
    demands: &[f64],
    opts: FrankWolfeOptions,
) -> ReferenceMinimum {
    // All-or-nothing start on the free-flow cheapest paths.
    let zero = LoadProfile(vec![0.0; paths.num_edges()]);
    let start = fw_eval(&paths.zeros(), &zero, fns, paths, demands);
    let mut flow = paths.zeros();
    for (p, &i) in start.best.iter().enumerate() {
        flow.0[p][i] = demands[p];
    }
    let mut loads = loads_from_flow(&flow, paths);

    let mut best_flow = flow.clone();
    let mut best_value = f64::INFINITY;
    let mut best_gap = f64::INFINITY;
    let mut history = Vec::new();
    for t in 0..opts.max_iter {
        let eval = fw_eval(&flow, &loads, fns, paths, demands);
        if eval.potential < best_value {
            best_value = eval.potential;
            best_flow = flow.clone();
            best_gap = eval.duality_gap;
        }
        if eval.duality_gap <= opts.tol {
            return ReferenceMinimum {
                value: eval.potential,
                flow,
                duality_gap: eval.duality_gap,
                iterations: t,
                converged: true,
                history,
            };
        }
        match opts.step {
            StepRule::OpenLoop | StepRule::LineSearch => {
                let mut target = paths.zeros();
                for (p, &i) in eval.best.iter().enumerate() {
                    target.0[p][i] = demands[p];
                }
                let target_loads = loads_from_flow(&target, paths);
                let dir: Vec<f64> = target_loads
                    .0
                    .iter()
                    .zip(&loads.0)
                    .map(|(a, b)| a - b)
                    .collect();
                let step = match opts.step {
                    StepRule::OpenLoop => 2.0 / (t as f64 + 2.0),
                    _ => line_search(1.0, |g| {
                        fns.iter()
                            .zip(&loads.0)
                            .zip(&dir)
                            .map(|((f, &w), &d)| f.value((w + g * d).max(0.0)) * d)
                            .sum()
                    }),
                };
                flow = PathValues::combine(1.0 - step, &flow, step, &target);
                loads = loads_from_flow(&flow, paths);
            }
            StepRule::Pairwise => {
                for p in 0..paths.num_pairs() {
                    pairwise_shift(p, &mut flow, &mut loads, fns, paths);
                }
            }
        }
        history.push(potential_of_loads(fns, &loads));
    }
    ReferenceMinimum {
        value: best_value,
        flow: best_flow,
        duality_gap: best_gap,
        iterations: opts.max_iter,
        converged: false,
        history,
    }
}

fn pairwise_shift(
    p: usize,
    flow: &mut FlowProfile,
    loads: &mut LoadProfile,
    fns: &[CostFunction],
    paths: &PathSets,
) {
    let set = paths.pair(p);
    let cost = |path: &[usize], w: &[f64]| -> f64 { path.iter().map(|&e| fns[e].value(w[e])).sum() };
    let costs: Vec<f64> = set.paths.iter().map(|r| cost(r, &loads.0)).collect();
    let f = &flow.0[p];
    let to = (0..costs.len())
        .min_by(|&a, &b| costs[a].total_cmp(&costs[b]))
        .expect("pair has a path");
    let Some(from) = (0..costs.len())
        .filter(|&i| f[i] > 0.0 && i != to)
        .max_by(|&a, &b| costs[a].total_cmp(&costs[b]))
    else {
        return;
    };
    if costs[from] <= costs[to] {
        return;
    }
    let only_to: Vec<usize> = set.paths[to]
        .iter()
        .copied()
        .filter(|e| !set.paths[from].contains(e))
        .collect();
    let only_from: Vec<usize> = set.paths[from]
        .iter()
        .copied()
        .filter(|e| !set.paths[to].contains(e))
        .collect();
    let w = &loads.0;
    let delta = line_search(f[from], |d| {
        only_to.iter().map(|&e| fns[e].value(w[e] + d)).sum::<f64>()
            - only_from
                .iter()
                .map(|&e| fns[e].value((w[e] - d).max(0.0)))
                .sum::<f64>()
    });
    if delta <= 0.0 {
        return;
    }
    flow.0[p][from] -= delta;
    flow.0[p][to] += delta;
    for &e in &only_to {
        loads.0[e] += delta;
    }
    for &e in &only_from {
        loads.0[e] = (loads.0[e] - delta).max(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parallel(paths: usize) -> PathSets {
        PathSets::new(
            vec![PathSet {
                pair: 0,
                paths: (0..paths).map(|e| vec![e]).collect(),
            }],
            paths,
        )
    }

    fn two_link() -> (Vec<CostFunction>, PathSets) {
        (
            vec![
                CostFunction::affine(0.0, 1.0).unwrap(),
                CostFunction::affine(0.0, 2.0).unwrap(),
            ],
            parallel(2),
        )
    }

    #[test]
    fn loads_on_diamond_and_overlap() {
        let diamond = PathSets::new(
            vec![PathSet {
                pair: 0,
                paths: vec![vec![0, 1], vec![2, 3]],
            }],
            4,
        );
        let w = loads_from_flow(&PathValues(vec![vec![7.0, 3.0]]), &diamond);
        assert_eq!(w.0, vec![7.0, 7.0, 3.0, 3.0]);

        // Three paths 0-2-3, 1-2-4, 5: edge 2 is shared.
        let ps = PathSets::new(
            vec![PathSet {
                pair: 0,
                paths: vec![vec![0, 2, 3], vec![1, 2, 4], vec![5]],
            }],
            6,
        );
        let w = loads_from_flow(&PathValues(vec![vec![1.5, 2.5, 6.0]]), &ps);
        assert_eq!(w.0, vec![1.5, 2.5, 4.0, 1.5, 2.5, 6.0]);
    }

    #[test]
    fn path_cost_examples() {
        let chain = PathSets::new(
            vec![PathSet {
                pair: 0,
                paths: vec![vec![0, 1, 2]],
            }],
            3,
        );
        assert_eq!(path_costs(&[1.0, 2.0, 3.0], &chain).0, vec![vec![6.0]]);
    }

    #[test]
    fn logit_examples() {
        let f = logit(&PathValues(vec![vec![0.0; 4]]), &[8.0]);
        assert_eq!(f.0[0], vec![2.0; 4]);
        let f = logit(&PathValues(vec![vec![0.0, 3f64.ln()]]), &[4.0]);
        assert!((f.0[0][0] - 1.0).abs() < 1e-12 && (f.0[0][1] - 3.0).abs() < 1e-12);
        let f = logit(&PathValues(vec![vec![1000.0, 1000.0 + 2f64.ln()]]), &[3.0]);
        assert!((f.0[0][0] - 1.0).abs() < 1e-12 && (f.0[0][1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn potential_and_gap_on_two_link() {
        let (fns, ps) = two_link();
        let opt = PathValues(vec![vec![20.0 / 3.0, 10.0 / 3.0]]);
        let phi = bmw_potential(&opt, &fns, &ps);
        assert!((phi - 100.0 / 3.0).abs() < 1e-12);
        // Oracle: golden-section search of x²/2 + (10 − x)² on [0, 10].
        let g = |x: f64| x * x / 2.0 + (10.0 - x) * (10.0 - x);
        let (mut a, mut b) = (0.0f64, 10.0f64);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if g(c) < g(d) {
                b = d;
            } else {
                a = c;
            }
        }
        assert!((0.5 * (a + b) - 20.0 / 3.0).abs() < 1e-6);
        assert!((g(0.5 * (a + b)) - phi).abs() < 1e-9);

        let corner = PathValues(vec![vec![10.0, 0.0]]);
        let gap = equilibrium_gap(&corner, 100.0 / 3.0, &fns, &ps).unwrap();
        assert!((gap - 50.0 / 3.0).abs() < 1e-12);
        assert_eq!(equilibrium_gap(&opt, 100.0 / 3.0, &fns, &ps), Ok(0.0));
        assert!(equilibrium_gap(&opt, 40.0, &fns, &ps).is_err());
        let empty = PathValues(vec![vec![0.0, 0.0]]);
        assert_eq!(bmw_potential(&empty, &fns, &ps), 0.0);
    }

    #[test]
    fn constant_costs_give_linear_potential() {
        let fns = vec![
            CostFunction::affine(2.0, 0.0).unwrap(),
            CostFunction::affine(5.0, 0.0).unwrap(),
        ];
        let phi = bmw_potential(&PathValues(vec![vec![3.0, 4.0]]), &fns, &parallel(2));
        assert_eq!(phi, 2.0 * 3.0 + 5.0 * 4.0);
    }

    #[test]
    fn frank_wolfe_rules_agree() {
        let (fns, ps) = two_link();
        for step in [StepRule::OpenLoop, StepRule::LineSearch, StepRule::Pairwise] {
            let tol = if step == StepRule::OpenLoop { 1e-3 } else { 1e-10 };
            let r = reference_minimum(
                &fns,
                &ps,
                &[10.0],
                FrankWolfeOptions {
                    tol,
                    max_iter: 1_000_000,
                    step,
                },
            );
            assert!(r.converged, "{step:?}");
            assert!(r.value - 100.0 / 3.0 <= tol + 1e-12, "{step:?}: {}", r.value);
            assert!(r.value >= 100.0 / 3.0 - 1e-12);
            if step != StepRule::OpenLoop {
                assert!(r.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
            }
        }
    }

    #[test]
    fn pigou_and_single_path() {
        let fns = vec![
            CostFunction::affine(1.0, 0.0).unwrap(),
            CostFunction::affine(0.0, 1.0).unwrap(),
        ];
        let r = reference_minimum(&fns, &parallel(2), &[1.0], FrankWolfeOptions::default());
        assert!(r.converged);
        assert!((r.value - 0.5).abs() < 1e-9);
        assert!((r.flow.0[0][1] - 1.0).abs() < 1e-6);

        let single = reference_minimum(&fns[1..], &parallel(1), &[3.0], FrankWolfeOptions::default());
        assert_eq!(single.flow.0, vec![vec![3.0]]);
        assert_eq!(single.value, 4.5);
    }

    #[test]
    fn iteration_cap_flags_approximate() {
        let (fns, ps) = two_link();
        let r = reference_minimum(
            &fns,
            &ps,
            &[10.0],
            FrankWolfeOptions {
                tol: 0.0,
                max_iter: 1,
                step: StepRule::OpenLoop,
            },
        );
        assert!(!r.converged);
        assert!(r.value >= 100.0 / 3.0);
    }
}
