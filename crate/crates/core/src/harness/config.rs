use std::path::PathBuf;
use std::str::FromStr;

use super::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub enum NetSource {
    TwoLink,
    DiamondSeries(usize),
    Tntp { net: PathBuf, trips: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Ew,
    Xlew,
    AdaWeight,
    AdaLight,
}

impl FromStr for Algo {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ew" => Ok(Self::Ew),
            "xlew" => Ok(Self::Xlew),
            "adaweight" => Ok(Self::AdaWeight),
            "adalight" => Ok(Self::AdaLight),
            _ => Err(HarnessError::Config(format!(
                "unknown algo `{s}` (expected ew, xlew, adaweight or adalight)"
            ))),
        }
    }
}

/// Where the minimum potential used for gaps comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefMode {
    /// Closed form; only known for the builtin two-link game.
    Analytic,
    FrankWolfe,
    /// Smallest potential seen during the run.
    BestObserved,
}

impl FromStr for RefMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "frank-wolfe" => Ok(Self::FrankWolfe),
            "best-observed" => Ok(Self::BestObserved),
            _ => Err(HarnessError::Config(format!(
                "unknown ref mode `{s}` (expected analytic, frank-wolfe or best-observed)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EwRateMode {
    /// Tuned to the run length.
    Fixed,
    InvSqrt,
}

impl FromStr for EwRateMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed" => Ok(Self::Fixed),
            "inv_sqrt" => Ok(Self::InvSqrt),
            _ => Err(HarnessError::Config(format!(
                "unknown ew_rate `{s}` (expected fixed or inv_sqrt)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub net: NetSource,
    pub algo: Algo,
    pub iters: u64,
    pub seed: u64,
    /// Standard deviation of the additive Gaussian edge noise; 0 is static.
    pub noise_sigma: f64,
    pub k_paths: usize,
    pub reference: RefMode,
    pub out: Option<PathBuf>,
    pub ew_rate: EwRateMode,
    pub xlew_gamma0_override: Option<f64>,
    /// Per-pair route cap for path-space algorithms.
    pub path_limit: usize,
    /// Record per-iteration wall time; off makes traces byte-reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            net: NetSource::TwoLink,
            algo: Algo::AdaWeight,
            iters: 1000,
            seed: 0,
            noise_sigma: 0.0,
            k_paths: 10,
            reference: RefMode::FrankWolfe,
            out: None,
            ew_rate: EwRateMode::Fixed,
            xlew_gamma0_override: None,
            path_limit: 10_000,
            timing: true,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, HarnessError> {
    value
        .parse()
        .map_err(|_| HarnessError::Config(format!("{key}: cannot parse `{value}`")))
}

impl ExperimentConfig {
    /// Reads a flat `key = value` file body. Blank lines and lines starting
    /// with `#` are skipped.
    pub fn from_kv(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = Self::default();
        let mut trips = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected key = value", i + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key == "trips" {
                trips = Some(PathBuf::from(value));
            } else {
                cfg.set(key, value)?;
            }
        }
        if let Some(t) = trips {
            cfg.set_trips(t)?;
        }
        Ok(cfg)
    }

    /// Applies one setting. `net` takes `builtin:two-link`,
    /// `builtin:diamond-series:N` or a TNTP network path; the trips path is
    /// set separately with [`set_trips`](Self::set_trips).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        match key {
            "net" => self.net = parse_net(value, &self.net)?,
            "algo" => self.algo = value.parse()?,
            "iters" => self.iters = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "noise_sigma" => self.noise_sigma = parse_num(key, value)?,
            "k_paths" => self.k_paths = parse_num(key, value)?,
            "ref" => self.reference = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "ew_rate" => self.ew_rate = value.parse()?,
            "xlew_gamma0_override" => self.xlew_gamma0_override = Some(parse_num(key, value)?),
            "path_limit" => self.path_limit = parse_num(key, value)?,
            "timing" => self.timing = parse_num(key, value)?,
            _ => return Err(HarnessError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn set_trips(&mut self, trips: PathBuf) -> Result<(), HarnessError> {
        match &mut self.net {
            NetSource::Tntp { trips: t, .. } => {
                *t = trips;
                Ok(())
            }
            _ => Err(HarnessError::Config(
                "trips given without a TNTP network file".into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.into()));
        if self.iters == 0 {
            return bad("iters must be at least 1");
        }
        if self.k_paths == 0 {
            return bad("k_paths must be at least 1");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma must be a finite nonnegative number");
        }
        if self.path_limit == 0 {
            return bad("path_limit must be at least 1");
        }
        if let NetSource::Tntp { trips, .. } = &self.net {
            if trips.as_os_str().is_empty() {
                return bad("a TNTP network needs a trips file");
            }
        }
        if self.reference == RefMode::Analytic && self.net != NetSource::TwoLink {
            return bad("the analytic reference is only available for builtin:two-link");
        }
        Ok(())
    }
}

fn parse_net(value: &str, current: &NetSource) -> Result<NetSource, HarnessError> {
    if let Some(name) = value.strip_prefix("builtin:") {
        if name == "two-link" {
            return Ok(NetSource::TwoLink);
        }
        if let Some(n) = name.strip_prefix("diamond-series:") {
            return Ok(NetSource::DiamondSeries(parse_num("net", n)?));
        }
        return Err(HarnessError::Config(format!("unknown builtin network `{name}`")));
    }
    let trips = match current {
        NetSource::Tntp { trips, .. } => trips.clone(),
        _ => PathBuf::new(),
    };
    Ok(NetSource::Tntp {
        net: PathBuf::from(value),
        trips,
    })
}
