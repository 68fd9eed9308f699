//! Discrete quadratic variation on the fine grid and per block.

use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fgn::RngSeed;
use crate::grid::GridSpec;
use crate::hermite::HermiteGenerator;
use crate::integrator::{wiener_integral, WienerIntegralPath};
use crate::intensity::IntensityFn;
use crate::numeric::sum_sq_increments;
use crate::params::HermiteParams;
use crate::path::SamplePath;

/// `V_n(X)_{[s,t]} = Σ (X_{t_{i+1}} - X_{t_i})^2` over fine nodes in `[s, t]`.
pub fn qv(path: &SamplePath, s: f64, t: f64) -> Result<f64> {
    let g = path.grid();
    let lo = g.node_index(s)?;
    let hi = g.node_index(t)?;
    if lo > hi {
        return invalid(format!("qv interval [{s}, {t}] is reversed"));
    }
    Ok(sum_sq_increments(path.values(), lo, hi, 1))
}

/// Quadratic variation over `[0, T]` using every `step`-th node.
pub fn qv_total(path: &SamplePath, step: usize) -> f64 {
    let n = path.grid().fine();
    sum_sq_increments(path.values(), 0, n - n % step, step)
}

/// Block quadratic variations over the blocks of `grid`, which must share
/// the fine size of the path.
pub fn block_qv(path: &SamplePath, grid: &GridSpec) -> Result<Vec<f64>> {
    check_same_fine(path, grid)?;
    Ok((0..grid.blocks())
        .map(|j| {
            let (lo, hi) = grid.block_range(j);
            sum_sq_increments(path.values(), lo, hi, 1)
        })
        .collect())
}

pub(crate) fn check_same_fine(path: &SamplePath, grid: &GridSpec) -> Result<()> {
    let pg = path.grid();
    if pg.fine() != grid.fine() || (pg.horizon() - grid.horizon()).abs() > 1e-12 * grid.horizon() {
        return invalid(format!(
            "grid mismatch: path has n={} T={}, blocks use n={} T={}",
            pg.fine(),
            pg.horizon(),
            grid.fine(),
            grid.horizon()
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockQv {
    pub block_index: usize,
    pub t_left: f64,
    pub t_right: f64,
    pub qv_raw: f64,
    /// `δ^{1-2H} V_block`.
    pub qv_normalized: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QvReport {
    pub grid: GridSpec,
    pub hurst: f64,
    pub total: f64,
    pub blocks: Vec<BlockQv>,
}

impl QvReport {
    pub fn new(path: &SamplePath, hurst: f64) -> Self {
        let grid = *path.grid();
        let norm = grid.delta().powf(1.0 - 2.0 * hurst);
        let raw = block_qv(path, &grid).expect("path grid matches itself");
        let blocks = raw
            .into_iter()
            .enumerate()
            .map(|(j, v)| BlockQv {
                block_index: j,
                t_left: j as f64 * grid.block_width(),
                t_right: (j + 1) as f64 * grid.block_width(),
                qv_raw: v,
                qv_normalized: norm * v,
            })
            .collect();
        Self { grid, hurst, total: qv_total(path, 1), blocks }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "block_index,T_left,T_right,qv_raw,qv_normalized")?;
        for b in &self.blocks {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                b.block_index, b.t_left, b.t_right, b.qv_raw, b.qv_normalized
            )?;
        }
        Ok(())
    }
}

/// `Σ_j | δ^{1-2H} V_n(X)_{[T_j, T_{j+1}]} - ∫_{T_j}^{T_{j+1}} f^2 |`.
pub fn weighted_qv_error(x: &WienerIntegralPath, hurst: f64) -> f64 {
    let grid = x.path.grid();
    let norm = grid.delta().powf(1.0 - 2.0 * hurst);
    let raw = block_qv(&x.path, grid).expect("path grid matches itself");
    raw.iter()
        .enumerate()
        .map(|(j, v)| {
            let a = j as f64 * grid.block_width();
            let b = (j + 1) as f64 * grid.block_width();
            (norm * v - x.integrand.l2_sq(a, b)).abs()
        })
        .sum()
}

/// Signed error `δ^{1-2H} V_n(X)_{[0,T]} - ∫_0^T f^2`.
pub fn qv_error(x: &WienerIntegralPath, hurst: f64) -> f64 {
    let grid = x.path.grid();
    grid.delta().powf(1.0 - 2.0 * hurst) * qv_total(&x.path, 1)
        - x.integrand.l2_sq(0.0, grid.horizon())
}

/// Monte Carlo ratio `E V_n(X) / (δ^{2H-1} ||f||_{L^2}^2)` for
/// `X = ∫ f dZ`, with `Z` from the Hermite generator.
pub fn qv_moment_bound_check(
    f: &IntensityFn,
    params: HermiteParams,
    grid: GridSpec,
    oversampling: usize,
    replications: usize,
    seed: RngSeed,
) -> Result<f64> {
    if replications < 100 {
        return invalid(format!("need at least 100 replications, got {replications}"));
    }
    let l2 = f.l2_sq(0.0, grid.horizon());
    if !(l2 > 0.0) {
        return invalid("integrand has zero L2 norm");
    }
    let gen = HermiteGenerator::new(params, grid, oversampling)?;
    let scale = grid.delta().powf(2.0 * params.hurst - 1.0) * l2;
    let mut acc = 0.0;
    for r in 0..replications {
        let z = gen.generate(seed.derive(r as u64));
        let x = wiener_integral(f, &z)?;
        acc += qv_total(&x.path, 1) / scale;
    }
    Ok(acc / replications as f64)
}
