//! Experiment runner: configuration, builtin and TNTP instances, gap traces,
//! slope fits, lockstep comparisons and the oracle self-check.

mod compare;
mod config;
mod fit;
mod instance;
pub mod oracle;
mod run;

pub use compare::{compare_path_local_iterates, Comparison, COMPARE_PATH_LIMIT};
pub use config::{Algo, EwRateMode, ExperimentConfig, NetSource, RefMode};
pub use fit::{fit_loglog_slope, RateFit, MIN_FIT_POINTS};
pub use instance::Instance;
pub use run::{
    build_instance, environment, frank_wolfe_reference, run_experiment, GapTrace, TraceRow,
    TWO_LINK_MIN_POTENTIAL,
};

use crate::flow::FlowError;
use crate::local_flow::LocalFlowError;
use crate::network::NetworkError;
use crate::path_algos::AlgoError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("{0}; path-space algorithms need enumerable routes, use algo=adalight on large networks")]
    PathExplosion(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    LocalFlow(#[from] LocalFlowError),
    #[error(transparent)]
    Algo(#[from] AlgoError),
    #[error("numeric: {0}")]
    Numeric(String),
}

impl HarnessError {
    pub(crate) fn from_enumeration(err: NetworkError) -> Self {
        match err {
            NetworkError::PathExplosion { .. } => Self::PathExplosion(err.to_string()),
            other => Self::Network(other),
        }
    }

    /// Process exit code: 2 config, 3 I/O, 4 parse or network data,
    /// 5 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Algo(AlgoError::InvalidParameter(_)) => 2,
            Self::Io { .. } => 3,
            Self::Network(_) | Self::PathExplosion(_) => 4,
            Self::Flow(_) | Self::LocalFlow(_) | Self::Algo(_) | Self::Numeric(_) => 5,
        }
    }
}
