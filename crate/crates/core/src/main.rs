use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use wardrop::harness::{
    compare_path_local_iterates, fit_loglog_slope, oracle, run_experiment, ExperimentConfig,
    HarnessError,
};

/// Learn Wardrop equilibria and record equilibrium-gap traces.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// key = value file; flags below override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// builtin:two-link, builtin:diamond-series:N or a TNTP network file.
    #[arg(long)]
    net: Option<String>,
    /// TNTP trips file (with a TNTP network).
    #[arg(long)]
    trips: Option<PathBuf>,
    /// ew, xlew, adaweight or adalight.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    iters: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Standard deviation of additive Gaussian edge noise.
    #[arg(long)]
    noise_sigma: Option<f64>,
    /// Shortest paths per pair used to build TNTP pair subgraphs.
    #[arg(long)]
    k_paths: Option<usize>,
    /// analytic, frank-wolfe or best-observed.
    #[arg(long = "ref")]
    reference: Option<String>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// fixed or inv_sqrt.
    #[arg(long)]
    ew_rate: Option<String>,
    #[arg(long)]
    xlew_gamma0: Option<f64>,
    /// Leave the wall_ms column empty so traces are byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    /// After the run, fit the log-log gap slope over T_LO..=T_HI.
    #[arg(long, num_args = 2, value_names = ["T_LO", "T_HI"])]
    fit: Option<Vec<u64>>,
    /// Run the path-space and edge-local adaptive learners in lockstep and
    /// report their largest load discrepancy instead of a trace.
    #[arg(long)]
    compare: bool,
    /// Run the small-instance oracle suite and exit.
    #[arg(long)]
    check_oracle: bool,
}

fn config(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
                path: path.display().to_string(),
                source,
            })?;
            ExperimentConfig::from_kv(&text)?
        }
        None => ExperimentConfig::default(),
    };
    let strings = [
        ("net", cli.net.clone()),
        ("algo", cli.algo.clone()),
        ("iters", cli.iters.map(|v| v.to_string())),
        ("seed", cli.seed.map(|v| v.to_string())),
        ("noise_sigma", cli.noise_sigma.map(|v| v.to_string())),
        ("k_paths", cli.k_paths.map(|v| v.to_string())),
        ("ref", cli.reference.clone()),
        ("ew_rate", cli.ew_rate.clone()),
        ("xlew_gamma0_override", cli.xlew_gamma0.map(|v| v.to_string())),
    ];
    for (key, value) in strings {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    if let Some(t) = &cli.trips {
        cfg.set_trips(t.clone())?;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    if cli.no_timing {
        cfg.timing = false;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool, HarnessError> {
    if cli.check_oracle {
        let mut ok = true;
        for c in oracle::run_oracle_suite(cli.seed.unwrap_or(1)) {
            println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            ok &= c.passed;
        }
        return Ok(ok);
    }
    let cfg = config(cli)?;
    if cli.compare {
        let c = compare_path_local_iterates(&cfg)?;
        println!(
            "rounds {}: max load discrepancy {:e}, max learning-rate discrepancy {:e}",
            c.rounds, c.max_load_diff, c.max_eta_diff
        );
        return Ok(true);
    }
    let trace = run_experiment(&cfg)?;
    if cfg.out.is_none() {
        print!("{}", trace.to_csv());
    }
    if let Some(w) = &cli.fit {
        let f = fit_loglog_slope(&trace, w[0], w[1])?;
        eprintln!(
            "slope {:.4} over [{}, {}] ({} points, rms residual {:.3e})",
            f.slope, f.t_lo, f.t_hi, f.points, f.residual
        );
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
