use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hermite_qv::estimators::{
    estimate_hurst, estimate_intensity_fn, estimate_order_known_sigma, estimate_order_unknown_sigma,
    estimate_sigma2,
};
use hermite_qv::{
    simulate_hermite, solve_sde, Drift, GridSpec, HermitePathRequest, HermiteParams, IntensityFn,
    RngSeed, SamplePath, SdeSpec,
};
use hermite_harness::{run_experiment, ExperimentConfig};
use serde_json::json;

#[derive(Parser)]
#[command(name = "hermite-qv", version, about = "Hermite process simulation and QV estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimModel {
    Hermite,
    Sde,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    #[value(name = "H")]
    H,
    #[value(name = "sigma2")]
    Sigma2,
    #[value(name = "f")]
    F,
    #[value(name = "order")]
    Order,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one path and write it as `t,value` CSV.
    Simulate {
        #[arg(long, value_enum, default_value = "hermite")]
        model: SimModel,
        #[arg(long = "H")]
        hurst: f64,
        #[arg(long, default_value_t = 1)]
        q: u32,
        #[arg(long)]
        n: usize,
        #[arg(long = "Kn", default_value_t = 1)]
        kn: usize,
        #[arg(long = "T", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Internal steps per output step.
        #[arg(long = "M", default_value_t = 1)]
        oversampling: usize,
        /// Constant noise intensity.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Drift for `--model sde`: zero, linear:L, cubic:A or logistic:R:K.
        #[arg(long, default_value = "zero")]
        drift: String,
        #[arg(long, default_value_t = 0.0)]
        y0: f64,
        /// Attest that a drift outside the catalog guarantees is admissible.
        #[arg(long)]
        attest: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run estimators on a `t,value` CSV path and print JSON.
    Estimate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        which: Which,
        /// Known constant intensity for order estimation.
        #[arg(long)]
        sigma: Option<f64>,
        /// Block exponent for unknown-sigma order estimation.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0)]
        block: usize,
        /// Number of blocks for `--which f` (default: divisor of n nearest sqrt(n)).
        #[arg(long = "Kn")]
        kn: Option<usize>,
    },
    /// Run a Monte Carlo experiment from a JSON config.
    Mc {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the worker count of the config.
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn parse_drift(s: &str) -> Result<Drift> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| -> Result<f64> {
        parts.get(i).with_context(|| format!("drift `{s}` is missing a parameter"))?.parse::<f64>().map_err(Into::into)
    };
    Ok(match parts[0] {
        "zero" => Drift::Zero,
        "linear" => Drift::Linear { lambda: num(1)? },
        "cubic" => Drift::Cubic { a: num(1)? },
        "logistic" => Drift::Logistic { rate: num(1)?, capacity: num(2)? },
        other => bail!("unknown drift `{other}`"),
    })
}

fn read_path(p: &PathBuf) -> Result<SamplePath> {
    let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
    Ok(SamplePath::read_csv(BufReader::new(f))?)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Simulate {
            model,
            hurst,
            q,
            n,
            kn,
            horizon,
            seed,
            oversampling,
            sigma,
            drift,
            y0,
            attest,
            out,
        } => {
            let params = HermiteParams::new(hurst, q)?;
            let grid = GridSpec::new(horizon, n, kn)?;
            let req = HermitePathRequest::new(params, grid, oversampling, RngSeed::new(seed));
            for w in req.warnings() {
                log::warn!("{w}");
            }
            let z = simulate_hermite(&req)?;
            let path = match model {
                SimModel::Hermite => z.scaled(sigma)?,
                SimModel::Sde => {
                    let mut spec = SdeSpec::new(parse_drift(&drift)?, IntensityFn::constant(sigma), y0);
                    if attest {
                        spec = spec.attest(true, true);
                    }
                    solve_sde(&spec, &z)?
                }
            };
            let w = BufWriter::new(File::create(&out).with_context(|| format!("creating {}", out.display()))?);
            path.write_csv(w)?;
        }
        Command::Estimate { input, which, sigma, alpha, block, kn } => {
            let path = read_path(&input)?;
            let h = estimate_hurst(&path)?;
            let value = match which {
                Which::H => json!({ "H_hat": h }),
                Which::Sigma2 => json!({ "H_hat": h, "sigma2_hat": estimate_sigma2(&path, h)? }),
                Which::F => {
                    let g = path.grid();
                    let grid = match kn {
                        Some(k) => GridSpec::new(g.horizon(), g.fine(), k)?,
                        None => GridSpec::with_sqrt_blocks(g.horizon(), g.fine())?,
                    };
                    json!({ "H_hat": h, "Kn": grid.blocks(), "f_hat": estimate_intensity_fn(&path, h, &grid)? })
                }
                Which::Order => {
                    let est = match (sigma, alpha) {
                        (Some(s), _) => estimate_order_known_sigma(&path, s)?,
                        (None, Some(a)) => {
                            let g = path.grid();
                            let grid = GridSpec::with_block_exponent(g.horizon(), g.fine(), a)?;
                            estimate_order_unknown_sigma(&path, &grid, block)?
                        }
                        (None, None) => bail!("order estimation needs --sigma or --alpha"),
                    };
                    serde_json::to_value(est)?
                }
            };
            println!("{}", serde_json::to_string_pretty(&value)?);
        }
        Command::Mc { config, out, workers } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let result = run_experiment(&cfg)?;
            for w in &result.warnings {
                log::warn!("{w}");
            }
            result.write_dir(&out)?;
            for s in &result.summaries {
                let h = &s.estimators[0];
                println!(
                    "n={} Kn={} completed={} rejected={} H_hat mean={:.4} sd={:.4} ({:.1}s)",
                    s.n, s.kn, s.completed, s.rejected, h.mean, h.sd, s.wall_clock_secs
                );
            }
        }
    }
    Ok(())
}
