//! Edge latency functions and the environment that turns loads into observed
//! costs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CostError {
    #[error("load must be nonnegative, got {0}")]
    NegativeLoad(f64),
    #[error("invalid cost parameters: {0}")]
    InvalidParameters(String),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, CostError>;

/// A nondecreasing, nonnegative edge latency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostFunction {
    /// `a + b x`
    Affine { a: f64, b: f64 },
    /// Bureau of Public Roads: `fft (1 + b (x / cap)^power)`
    Bpr {
        free_flow_time: f64,
        capacity: f64,
        b: f64,
        power: f64,
    },
}

impl CostFunction {
    pub fn affine(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
            return Err(CostError::InvalidParameters(format!(
                "affine needs finite a, b >= 0 (got a={a}, b={b})"
            )));
        }
        Ok(Self::Affine { a, b })
    }

    pub fn bpr(free_flow_time: f64, capacity: f64, b: f64, power: f64) -> Result<Self> {
        let ok = free_flow_time > 0.0
            && capacity > 0.0
            && b >= 0.0
            && power >= 1.0
            && [free_flow_time, capacity, b, power].iter().all(|v| v.is_finite());
        if !ok {
            return Err(CostError::InvalidParameters(format!(
                "bpr needs fft > 0, cap > 0, b >= 0, power >= 1 \
                 (got {free_flow_time}, {capacity}, {b}, {power})"
            )));
        }
        Ok(Self::Bpr {
            free_flow_time,
            capacity,
            b,
            power,
        })
    }

    fn check(load: f64) -> Result<()> {
        if load >= 0.0 {
            Ok(())
        } else {
            Err(CostError::NegativeLoad(load))
        }
    }

    pub fn eval(&self, load: f64) -> Result<f64> {
        Self::check(load)?;
        Ok(self.value(load))
    }

    /// `∫₀^load c(s) ds` in closed form.
    pub fn antiderivative(&self, load: f64) -> Result<f64> {
        Self::check(load)?;
        Ok(self.integral(load))
    }

    pub fn derivative(&self, load: f64) -> Result<f64> {
        Self::check(load)?;
        Ok(self.slope(load))
    }

    #[inline]
    pub(crate) fn value(&self, x: f64) -> f64 {
        match *self {
            Self::Affine { a, b } => a + b * x,
            Self::Bpr {
                free_flow_time,
                capacity,
                b,
                power,
            } => free_flow_time * (1.0 + b * (x / capacity).powf(power)),
        }
    }

    #[inline]
    pub(crate) fn integral(&self, x: f64) -> f64 {
        match *self {
            Self::Affine { a, b } => a * x + 0.5 * b * x * x,
            Self::Bpr {
                free_flow_time,
                capacity,
                b,
                power,
            } => {
                free_flow_time * x
                    + free_flow_time * b * capacity / (power + 1.0) * (x / capacity).powf(power + 1.0)
            }
        }
    }

    #[inline]
    pub(crate) fn slope(&self, x: f64) -> f64 {
        match *self {
            Self::Affine { b, .. } => b,
            Self::Bpr {
                free_flow_time,
                capacity,
                b,
                power,
            } => free_flow_time * b * power * (x / capacity).powf(power - 1.0) / capacity,
        }
    }
}

/// Standard deviation of the additive noise, shared or per edge.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseScale {
    Global(f64),
    PerEdge(Vec<f64>),
}

impl NoiseScale {
    fn get(&self, edge: usize) -> f64 {
        match self {
            Self::Global(s) => *s,
            Self::PerEdge(v) => v[edge],
        }
    }

    fn max(&self) -> f64 {
        match self {
            Self::Global(s) => *s,
            Self::PerEdge(v) => v.iter().copied().fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Noise {
    Static,
    /// Observed cost `max(0, c_e(w_e) + ξ_e)` with `ξ_e ~ N(0, σ_e²)`.
    AdditiveGaussian(NoiseScale),
}

/// Which query inside an iteration a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// The flow that is actually routed.
    Play,
    /// The extrapolated test point of the two-phase learners.
    Test,
}

/// Identifies one draw of the cost state: iteration `t` and `phase`.
///
/// Every `(seed, t, phase)` maps to its own ChaCha stream and edge `e` always
/// takes the `e`-th normal variate of that stream, so two learners that query
/// the same key see the same noise regardless of their internal order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SampleKey {
    pub t: u64,
    pub phase: Phase,
}

impl SampleKey {
    pub fn play(t: u64) -> Self {
        Self {
            t,
            phase: Phase::Play,
        }
    }

    pub fn test(t: u64) -> Self {
        Self {
            t,
            phase: Phase::Test,
        }
    }

    fn stream(self) -> u64 {
        let phase = match self.phase {
            Phase::Play => 0,
            Phase::Test => 1,
        };
        self.t.wrapping_mul(2).wrapping_add(phase)
    }
}

/// How observed costs relate to the deterministic latencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub noise: Noise,
    pub seed: u64,
    /// Reported randomness bound; defaults to `4 × max σ_e`.
    pub sigma_bound: Option<f64>,
}

impl Environment {
    pub fn static_costs() -> Self {
        Self {
            noise: Noise::Static,
            seed: 0,
            sigma_bound: None,
        }
    }

    pub fn gaussian(sigma: f64, seed: u64) -> Self {
        Self {
            noise: Noise::AdditiveGaussian(NoiseScale::Global(sigma)),
            seed,
            sigma_bound: None,
        }
    }

    pub fn is_static(&self) -> bool {
        matches!(self.noise, Noise::Static)
    }

    /// The randomness level reported alongside a run. Zero iff static.
    pub fn sigma(&self) -> f64 {
        match &self.noise {
            Noise::Static => 0.0,
            Noise::AdditiveGaussian(scale) => self.sigma_bound.unwrap_or(4.0 * scale.max()),
        }
    }

    /// Observed per-edge costs at `loads` for draw `key`.
    pub fn sample_costs(
        &self,
        fns: &[CostFunction],
        loads: &[f64],
        key: SampleKey,
    ) -> Result<Vec<f64>> {
        let mut out = vec![0.0; fns.len()];
        self.sample_costs_into(fns, loads, key, &mut out)?;
        Ok(out)
    }

    pub fn sample_costs_into(
        &self,
        fns: &[CostFunction],
        loads: &[f64],
        key: SampleKey,
        out: &mut [f64],
    ) -> Result<()> {
        if loads.len() != fns.len() {
            return Err(CostError::LengthMismatch {
                expected: fns.len(),
                got: loads.len(),
            });
        }
        for ((o, f), &w) in out.iter_mut().zip(fns).zip(loads) {
            *o = f.eval(w)?;
        }
        if let Noise::AdditiveGaussian(scale) = &self.noise {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(key.stream());
            for (e, o) in out.iter_mut().enumerate() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *o = (*o + scale.get(e) * z).max(0.0);
            }
        }
        Ok(())
    }
}

/// Bounds on the latencies over the feasible load range `[0, m_sum]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBounds {
    /// `max_e c_e(m_sum)`
    pub max_cost: f64,
    /// `max_e c_e'(m_sum)`; every latency here has a nondecreasing slope.
    pub lipschitz: f64,
    pub sigma: f64,
}

pub fn cost_bounds(fns: &[CostFunction], total_demand: f64, env: &Environment) -> CostBounds {
    assert!(total_demand > 0.0, "total demand must be positive");
    let max_cost = fns
        .iter()
        .map(|f| f.value(total_demand))
        .fold(0.0, f64::max);
    let lipschitz = fns
        .iter()
        .map(|f| f.slope(total_demand))
        .fold(0.0, f64::max);
    CostBounds {
        max_cost,
        lipschitz,
        sigma: env.sigma(),
    }
}
