//! Distributional check of the rescaled QV error against its second-chaos
//! limit `d_{H',q} ∫ f^2 dZ^{2H'-1,2}`.

use anyhow::{bail, ensure, Context, Result};
use hermite_qv::qvar::qv_error;
use hermite_qv::stats::{ks_two_sample, second_moment};
use hermite_qv::{wiener_integral, GridSpec, HermiteGenerator, HermiteParams, IntensityFn, RngSeed};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Model};
use crate::experiment::replication_seed;

#[derive(Debug, Clone)]
pub struct LimitLawOptions {
    /// Offsets added to the exponent `2H' - 2` of `δ`.
    pub exponent_offsets: Vec<f64>,
    /// Grid used to simulate the limit variable.
    pub limit_steps: usize,
    pub limit_oversampling: usize,
}

impl Default for LimitLawOptions {
    fn default() -> Self {
        Self { exponent_offsets: vec![0.0], limit_steps: 256, limit_oversampling: 16 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitLawReport {
    pub n: usize,
    pub exponent: f64,
    pub exponent_offset: f64,
    pub replications: usize,
    pub second_moment_statistic: f64,
    pub second_moment_limit: f64,
    /// `None` when the limit sample is identically zero.
    pub ratio: Option<f64>,
    pub ks: f64,
    #[serde(skip)]
    pub statistic: Vec<f64>,
    #[serde(skip)]
    pub limit: Vec<f64>,
}

fn squared(f: &IntensityFn) -> Result<IntensityFn> {
    if let Some(c) = f.as_constant() {
        return Ok(IntensityFn::constant(c * c));
    }
    let g = f.clone();
    Ok(IntensityFn::custom(
        "f^2",
        move |t| {
            let v = g.eval(t);
            v * v
        },
        f.holder_exponent(),
        f.breakpoints().to_vec(),
        f.sup_norm() * f.sup_norm(),
    )?)
}

/// Simulates `δ^{2H'-2+offset} 𝒱_n(f)` at the largest grid of `cfg` and an
/// independent sample of the limit, for every offset in `opts`.
pub fn limit_law_check(cfg: &ExperimentConfig, opts: &LimitLawOptions) -> Result<Vec<LimitLawReport>> {
    cfg.validate()?;
    let params = cfg.params()?;
    if !params.in_limit_regime() {
        bail!("limit law needs q >= 2 or H > 3/4 (got q = {}, H = {})", params.order, params.hurst);
    }
    ensure!(cfg.model != Model::Sde, "limit law check applies to driftless models");
    let f = cfg.intensity_fn()?;
    let point = *cfg.grids.last().expect("validated non-empty grid list");
    let grid = cfg.grid(point)?;
    let gen = HermiteGenerator::new(params, grid, cfg.oversampling)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build().context("worker pool")?;

    let errors: Vec<f64> = pool.install(|| {
        (0..cfg.replications)
            .into_par_iter()
            .map(|r| {
                let z = gen.generate(replication_seed(cfg.base_seed, 0, r));
                wiener_integral(&f, &z).map(|x| qv_error(&x, params.hurst))
            })
            .collect::<hermite_qv::Result<Vec<f64>>>()
    })?;

    let limit_params = HermiteParams::new(params.limit_hurst(), 2)?;
    let limit_grid = GridSpec::new(cfg.horizon, opts.limit_steps, 1)?;
    let limit_gen = HermiteGenerator::new(limit_params, limit_grid, opts.limit_oversampling)?;
    let f2 = squared(&f)?;
    let limit_seed = RngSeed::new(cfg.base_seed).derive(u64::MAX);
    let limit: Vec<f64> = pool.install(|| {
        (0..cfg.replications)
            .into_par_iter()
            .map(|r| {
                let z = limit_gen.generate(RngSeed::new(limit_seed.derive(r as u64).seed));
                wiener_integral(&f2, &z).map(|x| params.d * x.path.terminal())
            })
            .collect::<hermite_qv::Result<Vec<f64>>>()
    })?;
    let limit_m2 = second_moment(&limit);

    Ok(opts
        .exponent_offsets
        .iter()
        .map(|&off| {
            let exponent = 2.0 * params.h_prime - 2.0 + off;
            let scale = grid.delta().powf(exponent);
            let statistic: Vec<f64> = errors.iter().map(|e| scale * e).collect();
            let m2 = second_moment(&statistic);
            LimitLawReport {
                n: grid.fine(),
                exponent,
                exponent_offset: off,
                replications: cfg.replications,
                second_moment_statistic: m2,
                second_moment_limit: limit_m2,
                ratio: (limit_m2 > 0.0).then(|| m2 / limit_m2),
                ks: ks_two_sample(&statistic, &limit),
                statistic,
                limit: limit.clone(),
            }
        })
        .collect())
}
