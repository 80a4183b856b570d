//! Vertex-level routing on per-pair DAGs and the push-pull-match routine.
//!
//! All per-pair vectors here are indexed by the subgraph's local edge or
//! vertex indices (see [`Subgraph`]). Vertices are in topological order, so
//! forward sweeps run over ascending local vertex index and backward sweeps
//! over descending index.

use crate::flow::{FlowProfile, LoadProfile, PathSets, PathValues};
use crate::network::Subgraph;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LocalFlowError {
    #[error("pair {pair}: loads violate conservation at vertex {vertex} by {excess}")]
    InconsistentLoads {
        pair: usize,
        vertex: usize,
        excess: f64,
    },
}

pub type Result<T> = std::result::Result<T, LocalFlowError>;

/// Relative tolerance for flow conservation of target loads.
pub const CONSERVATION_TOL: f64 = 1e-9;
/// Arrival mass below `MASS_EPS·m_p` counts as zero.
pub const MASS_EPS: f64 = 1e-12;

/// One real per local edge, grouped by pair. Used for local flows `χ`,
/// edge weights `z` and anchor loads `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalValues(pub Vec<Vec<f64>>);

/// Per pair and vertex, a distribution over the vertex's outgoing edges.
pub type LocalFlowProfile = LocalValues;
pub type LocalWeightProfile = LocalValues;
pub type AnchorLoadProfile = LocalValues;

impl LocalValues {
    pub fn zeros(subgraphs: &[Subgraph]) -> Self {
        Self(subgraphs.iter().map(|s| vec![0.0; s.num_edges()]).collect())
    }

    /// Even split at every vertex.
    pub fn uniform(subgraphs: &[Subgraph]) -> Self {
        Self(
            subgraphs
                .iter()
                .map(|sg| {
                    let mut chi = vec![0.0; sg.num_edges()];
                    for v in 0..sg.num_vertices() {
                        let outs = sg.out_edges(v);
                        for &e in outs {
                            chi[e] = 1.0 / outs.len() as f64;
                        }
                    }
                    chi
                })
                .collect(),
        )
    }

    pub fn pair(&self, p: usize) -> &[f64] {
        &self.0[p]
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self(
            self.0
                .iter()
                .map(|v| v.iter().map(|x| a * x).collect())
                .collect(),
        )
    }

    /// `self[p][e] += a · edge_values[global(e)]` for every pair.
    pub fn add_scaled_edge_values(&mut self, a: f64, edge_values: &[f64], subgraphs: &[Subgraph]) {
        for (z, sg) in self.0.iter_mut().zip(subgraphs) {
            for (zi, e) in z.iter_mut().zip(sg.edges()) {
                *zi += a * edge_values[e.edge];
            }
        }
    }
}

/// Log-domain backward scores of one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardScores {
    /// `λ_v = log S_v`, zero at the destination.
    pub vertex: Vec<f64>,
    /// `κ_e = λ_head(e) + z_e`
    pub edge: Vec<f64>,
}

/// Edge loads and vertex arrival masses of a local flow.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalLoads {
    /// Summed over pairs, indexed by global edge id.
    pub total: LoadProfile,
    /// Per pair, per local edge.
    pub edge: Vec<Vec<f64>>,
    /// Per pair, per local vertex.
    pub arrival: Vec<Vec<f64>>,
}

/// Forward pass of one pair: `(edge loads, arrival masses)`.
pub fn pair_loads(sg: &Subgraph, chi: &[f64], demand: f64) -> (Vec<f64>, Vec<f64>) {
    let mut load = vec![0.0; sg.num_edges()];
    let mut arrival = vec![0.0; sg.num_vertices()];
    arrival[0] = demand;
    for v in 0..sg.num_vertices() {
        if v > 0 {
            arrival[v] = sg.in_edges(v).iter().map(|&e| load[e]).sum();
        }
        for &e in sg.out_edges(v) {
            load[e] = chi[e] * arrival[v];
        }
    }
    (load, arrival)
}

/// Loads induced by routing each pair's demand along its local flow.
pub fn local_loads(
    flow: &LocalFlowProfile,
    subgraphs: &[Subgraph],
    demands: &[f64],
    num_edges: usize,
) -> LocalLoads {
    let mut total = vec![0.0; num_edges];
    let mut edge = Vec::with_capacity(subgraphs.len());
    let mut arrival = Vec::with_capacity(subgraphs.len());
    for ((sg, chi), &m) in subgraphs.iter().zip(&flow.0).zip(demands) {
        let (l, a) = pair_loads(sg, chi, m);
        for (le, e) in l.iter().zip(sg.edges()) {
            total[e.edge] += le;
        }
        edge.push(l);
        arrival.push(a);
    }
    LocalLoads {
        total: LoadProfile(total),
        edge,
        arrival,
    }
}

/// Total edge loads only; the same sums as [`local_loads`] without keeping
/// the per-pair vectors.
pub fn total_loads(flow: &LocalFlowProfile, subgraphs: &[Subgraph], demands: &[f64], num_edges: usize) -> LoadProfile {
    let mut total = vec![0.0; num_edges];
    for ((sg, chi), &m) in subgraphs.iter().zip(&flow.0).zip(demands) {
        let (l, _) = pair_loads(sg, chi, m);
        for (le, e) in l.iter().zip(sg.edges()) {
            total[e.edge] += le;
        }
    }
    LoadProfile(total)
}

/// Backward weight pushing in the log domain.
///
/// Returns the scores and the pivot local flow `q_e = exp(κ_e − λ_tail(e))`,
/// whose path products equal the softmax of path weight sums.
pub fn push_backward(sg: &Subgraph, weights: &[f64]) -> (BackwardScores, Vec<f64>) {
    let n = sg.num_vertices();
    let mut lambda = vec![0.0; n];
    let mut kappa = vec![0.0; sg.num_edges()];
    let mut q = vec![0.0; sg.num_edges()];
    for v in (0..n - 1).rev() {
        let outs = sg.out_edges(v);
        let mut max = f64::NEG_INFINITY;
        for &e in outs {
            kappa[e] = lambda[sg.edges()[e].head] + weights[e];
            max = max.max(kappa[e]);
        }
        let mut sum = 0.0;
        for &e in outs {
            q[e] = (kappa[e] - max).exp();
            sum += q[e];
        }
        lambda[v] = max + sum.ln();
        // Same as exp(κ_e − λ_v), without the cancellation error of
        // subtracting two large scores.
        for &e in outs {
            q[e] /= sum;
        }
    }
    (
        BackwardScores {
            vertex: lambda,
            edge: kappa,
        },
        q,
    )
}

/// Linear-domain weight pushing: `S_v = Σ exp(z_e)·S_head(e)`. Overflows or
/// underflows for large weights; kept as a reference for [`push_backward`].
pub fn push_backward_linear(sg: &Subgraph, weights: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = sg.num_vertices();
    let mut score = vec![0.0; n];
    score[n - 1] = 1.0;
    let mut q = vec![0.0; sg.num_edges()];
    for v in (0..n - 1).rev() {
        let outs = sg.out_edges(v);
        score[v] = outs
            .iter()
            .map(|&e| weights[e].exp() * score[sg.edges()[e].head])
            .sum();
        for &e in outs {
            q[e] = weights[e].exp() * score[sg.edges()[e].head] / score[v];
        }
    }
    (score, q)
}

/// Result of [`pull_forward_average`].
#[derive(Debug, Clone, PartialEq)]
pub struct PulledLoads {
    /// `(α·load(q) + A) / Σα`
    pub target: Vec<f64>,
    /// `A + α·load(q)`
    pub anchor: Vec<f64>,
}

pub fn pull_forward_average(
    sg: &Subgraph,
    pivot: &[f64],
    anchor: &[f64],
    alpha: f64,
    alpha_sum: f64,
    demand: f64,
) -> PulledLoads {
    debug_assert!(alpha > 0.0 && alpha_sum >= alpha);
    let (load, _) = pair_loads(sg, pivot, demand);
    let mut target = Vec::with_capacity(load.len());
    let mut next = Vec::with_capacity(load.len());
    for (&l, &a) in load.iter().zip(anchor) {
        let acc = a + alpha * l;
        target.push(acc / alpha_sum);
        next.push(acc);
    }
    PulledLoads {
        target,
        anchor: next,
    }
}

/// Local flow whose loads reproduce `target`. Vertices reached by less than
/// `MASS_EPS·demand` split their (empty) mass evenly.
pub fn match_load(sg: &Subgraph, target: &[f64], demand: f64) -> Result<Vec<f64>> {
    let eps = MASS_EPS * demand;
    let tol = CONSERVATION_TOL * demand.max(f64::MIN_POSITIVE);
    let mut chi = vec![0.0; sg.num_edges()];
    for v in 0..sg.num_vertices() - 1 {
        let outs = sg.out_edges(v);
        let outflow: f64 = outs.iter().map(|&e| target[e]).sum();
        let arrival = if v == 0 {
            demand
        } else {
            sg.in_edges(v).iter().map(|&e| target[e]).sum()
        };
        if (outflow - arrival).abs() > tol {
            return Err(LocalFlowError::InconsistentLoads {
                pair: sg.pair(),
                vertex: sg.topological_order()[v],
                excess: outflow - arrival,
            });
        }
        if arrival < eps {
            for &e in outs {
                chi[e] = 1.0 / outs.len() as f64;
            }
        } else {
            for &e in outs {
                chi[e] = target[e] / arrival;
            }
        }
    }
    Ok(chi)
}

/// Push backward, pull forward with anchor averaging, then match loads, for
/// every pair. Returns the local flow and the updated anchor.
pub fn push_pull_match(
    anchor: &AnchorLoadProfile,
    weights: &LocalWeightProfile,
    alpha: f64,
    alpha_sum: f64,
    subgraphs: &[Subgraph],
    demands: &[f64],
) -> Result<(LocalFlowProfile, AnchorLoadProfile)> {
    let mut flows = Vec::with_capacity(subgraphs.len());
    let mut anchors = Vec::with_capacity(subgraphs.len());
    for (p, sg) in subgraphs.iter().enumerate() {
        let (_, q) = push_backward(sg, &weights.0[p]);
        let pulled = pull_forward_average(sg, &q, &anchor.0[p], alpha, alpha_sum, demands[p]);
        flows.push(match_load(sg, &pulled.target, demands[p])?);
        anchors.push(pulled.anchor);
    }
    Ok((LocalValues(flows), LocalValues(anchors)))
}

/// Path flow `f_ρ = m_p·Π_{e∈ρ} χ_e` over the given path sets.
pub fn local_to_path_flow(
    flow: &LocalFlowProfile,
    subgraphs: &[Subgraph],
    paths: &PathSets,
    demands: &[f64],
) -> FlowProfile {
    PathValues(
        paths
            .iter()
            .enumerate()
            .map(|(p, set)| {
                let sg = &subgraphs[p];
                set.paths
                    .iter()
                    .map(|path| {
                        path.iter().fold(demands[p], |acc, &e| {
                            acc * flow.0[p][sg.local_edge(e).expect("path edge lies in the subgraph")]
                        })
                    })
                    .collect()
            })
            .collect(),
    )
}
