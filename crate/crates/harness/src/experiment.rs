//! Monte Carlo replication over a sequence of grids.

use std::fs::{self, File};
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use hermite_qv::estimators::{
    estimate_hurst, estimate_order_known_sigma, estimate_order_unknown_sigma, estimate_sigma2,
    OrderEstimate,
};
use hermite_qv::stats::{mean, quantile, std_dev};
use hermite_qv::{
    solve_sde, wiener_integral, GridSpec, HermiteGenerator, IntensityFn, RngSeed, SamplePath, SdeSpec,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, GridPoint, Model, OrderConfig};

/// One line of `replications.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub n: usize,
    #[serde(rename = "Kn")]
    pub kn: usize,
    pub seed: u64,
    #[serde(rename = "H_hat")]
    pub h_hat: Option<f64>,
    pub sigma2_hat: Option<f64>,
    #[serde(rename = "Hp_hat")]
    pub hp_hat: Option<f64>,
    pub q_raw: Option<f64>,
    pub q_hat: Option<u32>,
    pub status: String,
}

impl ReplicationRow {
    pub fn is_rejected(&self) -> bool {
        self.status.starts_with("rejected")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: String,
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

impl EstimatorSummary {
    fn from_values(name: &str, values: &[f64]) -> Self {
        let nan = f64::NAN;
        if values.is_empty() {
            return Self { estimator: name.into(), count: 0, mean: nan, sd: nan, q05: nan, q50: nan, q95: nan };
        }
        Self {
            estimator: name.into(),
            count: values.len(),
            mean: mean(values),
            sd: if values.len() > 1 { std_dev(values) } else { 0.0 },
            q05: quantile(values, 0.05),
            q50: quantile(values, 0.5),
            q95: quantile(values, 0.95),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub n: usize,
    #[serde(rename = "Kn")]
    pub kn: usize,
    pub replications: usize,
    pub completed: usize,
    pub rejected: usize,
    /// Completed replications whose order estimate was undefined.
    pub order_undefined: usize,
    /// Fraction of completed replications with `q̂` equal to the configured order.
    pub q_correct_fraction: Option<f64>,
    pub estimators: Vec<EstimatorSummary>,
    pub wall_clock_secs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
    pub summaries: Vec<McSummary>,
    #[serde(skip)]
    pub rows: Vec<ReplicationRow>,
}

/// Seed of replication `r` at grid index `g`.
pub fn replication_seed(base_seed: u64, grid_index: usize, r: usize) -> RngSeed {
    let s = RngSeed::new(base_seed).derive(grid_index as u64).derive(r as u64);
    RngSeed::new(s.seed)
}

struct Simulator<'a> {
    cfg: &'a ExperimentConfig,
    f: IntensityFn,
    sde: Option<SdeSpec>,
}

impl Simulator<'_> {
    fn path(&self, gen: &HermiteGenerator, seed: RngSeed) -> Result<SamplePath> {
        let z = gen.generate(seed);
        Ok(match self.cfg.model {
            Model::Hermite => {
                let sigma = self.f.as_constant().expect("validated constant intensity");
                z.scaled(sigma)?
            }
            Model::WienerIntegral => wiener_integral(&self.f, &z)?.path,
            Model::Sde => solve_sde(self.sde.as_ref().expect("validated sde section"), &z)?,
        })
    }

    fn order(&self, path: &SamplePath) -> Option<hermite_qv::Result<OrderEstimate>> {
        match self.cfg.order {
            OrderConfig::None => None,
            OrderConfig::KnownSigma { sigma } => Some(estimate_order_known_sigma(path, sigma)),
            OrderConfig::UnknownSigma { alpha, block } => {
                let g = path.grid();
                Some(
                    GridSpec::with_block_exponent(g.horizon(), g.fine(), alpha)
                        .and_then(|bg| estimate_order_unknown_sigma(path, &bg, block)),
                )
            }
        }
    }
}

fn replicate(model: &Simulator, gen: &HermiteGenerator, point: GridPoint, seed: RngSeed) -> ReplicationRow {
    let mut row = ReplicationRow {
        n: point.n,
        kn: point.kn,
        seed: seed.seed,
        h_hat: None,
        sigma2_hat: None,
        hp_hat: None,
        q_raw: None,
        q_hat: None,
        status: "ok".into(),
    };
    let path = match model.path(gen, seed) {
        Ok(p) => p,
        Err(e) => {
            row.status = format!("rejected: {e}");
            return row;
        }
    };
    let h = match estimate_hurst(&path) {
        Ok(h) => h,
        Err(e) => {
            row.status = format!("rejected: {e}");
            return row;
        }
    };
    row.h_hat = Some(h);
    match estimate_sigma2(&path, h) {
        Ok(s) => row.sigma2_hat = Some(s),
        Err(e) => {
            row.status = format!("rejected: {e}");
            return row;
        }
    }
    match model.order(&path) {
        None => {}
        Some(Ok(o)) => {
            row.hp_hat = Some(o.h_prime_hat);
            row.q_raw = Some(o.q_raw);
            row.q_hat = o.q_hat;
            if !o.warnings.is_empty() {
                row.status = format!("warn: {}", o.warnings.join("; "));
            }
        }
        Some(Err(e)) => row.status = format!("warn: order estimate rejected: {e}"),
    }
    row
}

/// Aggregates the rows of one grid point. Wall-clock time is left at zero.
pub fn summarize(point: GridPoint, rows: &[ReplicationRow], true_order: u32) -> McSummary {
    let done: Vec<&ReplicationRow> = rows.iter().filter(|r| !r.is_rejected()).collect();
    let pick = |f: &dyn Fn(&ReplicationRow) -> Option<f64>| -> Vec<f64> {
        done.iter().filter_map(|r| f(r)).filter(|v| v.is_finite()).collect()
    };
    let estimators = vec![
        EstimatorSummary::from_values("H_hat", &pick(&|r| r.h_hat)),
        EstimatorSummary::from_values("sigma2_hat", &pick(&|r| r.sigma2_hat)),
        EstimatorSummary::from_values("Hp_hat", &pick(&|r| r.hp_hat)),
        EstimatorSummary::from_values("q_raw", &pick(&|r| r.q_raw)),
    ];
    let with_order = done.iter().any(|r| r.hp_hat.is_some() || r.status.contains("order"));
    let order_undefined = done.iter().filter(|r| with_order && r.q_hat.is_none()).count();
    let q_correct_fraction = (with_order && !done.is_empty()).then(|| {
        done.iter().filter(|r| r.q_hat == Some(true_order)).count() as f64 / done.len() as f64
    });
    McSummary {
        n: point.n,
        kn: point.kn,
        replications: rows.len(),
        completed: done.len(),
        rejected: rows.len() - done.len(),
        order_undefined,
        q_correct_fraction,
        estimators,
        wall_clock_secs: 0.0,
    }
}

/// Runs every grid point of `cfg`. Failing replications are recorded in
/// their rows and never stop the sweep.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let params = cfg.params()?;
    let model = Simulator { cfg, f: cfg.intensity_fn()?, sde: cfg.sde_spec()? };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .context("building worker pool")?;
    let mut rows = Vec::with_capacity(cfg.grids.len() * cfg.replications);
    let mut summaries = Vec::new();
    for (gi, &point) in cfg.grids.iter().enumerate() {
        let start = Instant::now();
        let grid = cfg.grid(point)?;
        let gen = HermiteGenerator::new(params, grid, cfg.oversampling)?;
        let batch: Vec<ReplicationRow> = pool.install(|| {
            (0..cfg.replications)
                .into_par_iter()
                .map(|r| replicate(&model, &gen, point, replication_seed(cfg.base_seed, gi, r)))
                .collect()
        });
        let mut summary = summarize(point, &batch, cfg.q);
        summary.wall_clock_secs = start.elapsed().as_secs_f64();
        log::info!(
            "n = {} done: {} completed, {} rejected in {:.2}s",
            point.n,
            summary.completed,
            summary.rejected,
            summary.wall_clock_secs
        );
        summaries.push(summary);
        rows.extend(batch);
    }
    Ok(ExperimentOutput { config: cfg.clone(), warnings: cfg.regime_warnings(), summaries, rows })
}

pub const SUMMARY_CSV_HEADER: [&str; 14] = [
    "n", "Kn", "estimator", "count", "mean", "sd", "q05", "q50", "q95", "replications", "completed",
    "rejected", "q_correct_fraction", "wall_clock_secs",
];

impl ExperimentOutput {
    pub fn write_replications<W: std::io::Write>(&self, w: W) -> Result<()> {
        write_rows(&self.rows, w)
    }

    pub fn write_summary_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(SUMMARY_CSV_HEADER)?;
        for s in &self.summaries {
            for e in &s.estimators {
                out.write_record([
                    s.n.to_string(),
                    s.kn.to_string(),
                    e.estimator.clone(),
                    e.count.to_string(),
                    e.mean.to_string(),
                    e.sd.to_string(),
                    e.q05.to_string(),
                    e.q50.to_string(),
                    e.q95.to_string(),
                    s.replications.to_string(),
                    s.completed.to_string(),
                    s.rejected.to_string(),
                    s.q_correct_fraction.map(|v| v.to_string()).unwrap_or_default(),
                    s.wall_clock_secs.to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Writes `replications.csv`, `summary.csv` and `summary.json` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        self.write_replications(File::create(dir.join("replications.csv"))?)?;
        self.write_summary_csv(File::create(dir.join("summary.csv"))?)?;
        let json = serde_json::to_string_pretty(self)?;
        fs::write(dir.join("summary.json"), json + "\n")?;
        Ok(())
    }
}

pub fn write_rows<W: std::io::Write>(rows: &[ReplicationRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(r: R) -> Result<Vec<ReplicationRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

/// Rebuilds the summaries (without wall-clock times) from replication rows.
pub fn summaries_from_rows(cfg: &ExperimentConfig, rows: &[ReplicationRow]) -> Vec<McSummary> {
    cfg.grids
        .iter()
        .map(|&p| {
            let sub: Vec<ReplicationRow> = rows.iter().filter(|r| r.n == p.n).cloned().collect();
            summarize(p, &sub, cfg.q)
        })
        .collect()
}
