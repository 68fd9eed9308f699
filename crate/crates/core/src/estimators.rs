//! Quadratic-variation estimators of `H`, `||f||_{L^2}`, the block values of
//! `|f|`, and the Hermite order `q`.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::GridSpec;
use crate::intensity::IntensityFn;
use crate::path::{Provenance, SamplePath};
use crate::quad;
use crate::qvar::{block_qv, check_same_fine, qv_total};

/// Threshold on `Δ^{2-2H'} log(1/δ)` above which the block order estimate is
/// flagged as outside its asymptotic regime.
pub const BLOCK_REGIME_THRESHOLD: f64 = 0.5;

fn positive(v: f64, what: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::DegeneratePath(format!("{what} = {v}")))
    }
}

fn hurst_from(v_full: f64, v_half: f64) -> f64 {
    0.5 - (v_full.ln() - v_half.ln()) / (2.0 * LN_2)
}

/// `Ĥ = 1/2 - (log V_n - log V_{n/2}) / (2 log 2)`, where `V_{n/2}` uses the
/// even nodes only.
pub fn estimate_hurst(path: &SamplePath) -> Result<f64> {
    let n = path.grid().fine();
    if n < 2 || !n.is_multiple_of(2) {
        return invalid(format!("Hurst estimate needs an even n >= 2, got {n}"));
    }
    let v_full = positive(qv_total(path, 1), "V_n")?;
    let v_half = positive(qv_total(path, 2), "V_{n/2}")?;
    Ok(hurst_from(v_full, v_half))
}

/// `σ̂_2 = exp((Ĥ - 1/2) log(1/δ) + log(V_n)/2)`, an estimate of
/// `(∫_0^T f^2)^{1/2}`.
pub fn estimate_sigma2(path: &SamplePath, hurst_hat: f64) -> Result<f64> {
    let v = positive(qv_total(path, 1), "V_n")?;
    let delta = path.grid().delta();
    Ok(((hurst_hat - 0.5) * (1.0 / delta).ln() + 0.5 * v.ln()).exp())
}

/// Block values `( δ^{1-2Ĥ} V_n(X)_{[T_j,T_{j+1}]} / Δ )^{1/2}` of the
/// piecewise-constant estimate of `|f|`.
pub fn estimate_intensity_fn(path: &SamplePath, hurst_hat: f64, grid: &GridSpec) -> Result<Vec<f64>> {
    let raw = block_qv(path, grid)?;
    let norm = grid.delta().powf(1.0 - 2.0 * hurst_hat);
    let width = grid.block_width();
    Ok(raw.into_iter().map(|v| (norm * v / width).sqrt()).collect())
}

/// `|| f̂ - |f| ||_{L^2[0,T]}` for block values on `grid`.
pub fn intensity_l2_error(blocks: &[f64], grid: &GridSpec, f: &IntensityFn) -> f64 {
    let w = grid.block_width();
    let mut acc = 0.0;
    for (j, &b) in blocks.iter().enumerate() {
        let (lo, hi) = (j as f64 * w, (j + 1) as f64 * w);
        acc += quad::integrate_with_breaks(
            |t| {
                let d = b - f.eval(t).abs();
                d * d
            },
            lo,
            hi,
            f.breakpoints(),
            1e-12,
        );
    }
    acc.sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderEstimate {
    pub hurst_hat: f64,
    pub h_prime_hat: f64,
    pub q_raw: f64,
    /// `None` when `Ĥ' >= 1` or the ratio does not round to a positive order.
    pub q_hat: Option<u32>,
    pub warnings: Vec<String>,
}

impl OrderEstimate {
    /// `q_raw = (Ĥ - 1) / (Ĥ' - 1)`, rounded when `Ĥ' < 1`.
    pub fn new(hurst_hat: f64, h_prime_hat: f64) -> Self {
        Self::from_parts(hurst_hat, h_prime_hat, Vec::new())
    }

    fn from_parts(hurst_hat: f64, h_prime_hat: f64, mut warnings: Vec<String>) -> Self {
        let q_raw = (hurst_hat - 1.0) / (h_prime_hat - 1.0);
        let q_hat = if h_prime_hat < 1.0 && q_raw.is_finite() && q_raw.round() >= 1.0 {
            Some(q_raw.round() as u32)
        } else {
            warnings.push(format!("order undefined: H' estimate {h_prime_hat:.4}, ratio {q_raw:.4}"));
            None
        };
        Self { hurst_hat, h_prime_hat, q_raw, q_hat, warnings }
    }
}

fn nonzero_log_abs(v: f64, what: &str) -> Result<f64> {
    if v == 0.0 || !v.is_finite() {
        return Err(Error::OrderUndefined(format!("{what} = {v}")));
    }
    Ok(v.abs().ln())
}

fn check_quarter(n: usize) -> Result<()> {
    if n < 8 || !n.is_multiple_of(4) {
        return invalid(format!("order estimation needs n divisible by 4 and >= 8, got {n}"));
    }
    Ok(())
}

/// Order estimate when `f ≡ σ` is known.
///
/// `F_n = (2Ĥ_n - 1) log(1/δ) + log V_n - log(T σ^2)` is computed on the fine
/// path and on the path decimated by two (with its own `Ĥ` and mesh), and
/// `Ĥ' = 1 + (log log(1/(2δ)) - log log(1/δ) + log|F_n| - log|F_{n/2}|) / (2 log 2)`.
pub fn estimate_order_known_sigma(path: &SamplePath, sigma: f64) -> Result<OrderEstimate> {
    let g = path.grid();
    check_quarter(g.fine())?;
    if !(sigma > 0.0) {
        return invalid(format!("sigma must be positive, got {sigma}"));
    }
    let delta = g.delta();
    if 2.0 * delta >= 1.0 {
        return invalid("order estimation needs 2δ < 1");
    }
    let t_sigma = (g.horizon() * sigma * sigma).ln();
    let v1 = positive(qv_total(path, 1), "V_n")?;
    let v2 = positive(qv_total(path, 2), "V_{n/2}")?;
    let v4 = positive(qv_total(path, 4), "V_{n/4}")?;
    let h_full = hurst_from(v1, v2);
    let h_half = hurst_from(v2, v4);
    let l1 = (1.0 / delta).ln();
    let l2 = (1.0 / (2.0 * delta)).ln();
    let f_full = (2.0 * h_full - 1.0) * l1 + v1.ln() - t_sigma;
    let f_half = (2.0 * h_half - 1.0) * l2 + v2.ln() - t_sigma;
    let hp = 1.0
        + (l2.ln() - l1.ln() + nonzero_log_abs(f_full, "F_n")? - nonzero_log_abs(f_half, "F_{n/2}")?)
            / (2.0 * LN_2);
    Ok(OrderEstimate::from_parts(h_full, hp, Vec::new()))
}

/// `Δ^{2-2H'} log(1/δ)` for the blocks of `grid`.
pub fn block_regime_statistic(grid: &GridSpec, h_prime: f64) -> f64 {
    grid.block_width().powf(2.0 - 2.0 * h_prime) * (1.0 / grid.delta()).ln()
}

/// Order estimate from one block with `σ` unknown.
///
/// `F_{n,j} = (2Ĥ_n - 1) log(1/δ) + log V_n(X)_{[T_j,T_{j+1}]} - log(Δ σ̂^2)`
/// on the fine path and on the path decimated by two, where `σ̂ = σ̂_2 / √T`
/// is computed from the whole path at the matching resolution, and
/// `Ĥ' = 1 + (log|F_{n,j}| - log|F_{n/2,j}|) / (2 log 2)`.
pub fn estimate_order_unknown_sigma(
    path: &SamplePath,
    grid: &GridSpec,
    block: usize,
) -> Result<OrderEstimate> {
    let half = path.decimated(2)?;
    let h_full = estimate_hurst(path)?;
    let h_half = estimate_hurst(&half)?;
    // σ̂_2 estimates σ √T; the block statistic needs σ itself.
    let t = path.grid().horizon();
    let s_full = estimate_sigma2(path, h_full)?;
    let s_half = estimate_sigma2(&half, h_half)?;
    block_order_estimate(path, grid, block, s_full * s_full / t, s_half * s_half / t)
}

/// Block order estimate with the estimates of `σ^2` used on the fine and
/// decimated paths supplied by the caller.
pub fn block_order_estimate(
    path: &SamplePath,
    grid: &GridSpec,
    block: usize,
    sigma_sq_full: f64,
    sigma_sq_half: f64,
) -> Result<OrderEstimate> {
    check_same_fine(path, grid)?;
    check_quarter(grid.fine())?;
    if block >= grid.blocks() {
        return invalid(format!("block {block} out of range 0..{}", grid.blocks()));
    }
    let half_len = grid.fine() / 2;
    if !half_len.is_multiple_of(grid.blocks()) {
        return Err(Error::NonDivisibleGrid { fine: half_len, blocks: grid.blocks() });
    }
    let delta = grid.delta();
    let width = grid.block_width();
    let v = path.values();
    let (lo, hi) = grid.block_range(block);
    let vb_full = positive(crate::numeric::sum_sq_increments(v, lo, hi, 1), "block V_n")?;
    let vb_half = positive(crate::numeric::sum_sq_increments(v, lo, hi, 2), "block V_{n/2}")?;
    let v1 = positive(qv_total(path, 1), "V_n")?;
    let v2 = positive(qv_total(path, 2), "V_{n/2}")?;
    let v4 = positive(qv_total(path, 4), "V_{n/4}")?;
    let h_full = hurst_from(v1, v2);
    let h_half = hurst_from(v2, v4);
    let f_full = (2.0 * h_full - 1.0) * (1.0 / delta).ln() + vb_full.ln()
        - (width * positive(sigma_sq_full, "sigma^2")?).ln();
    let f_half = (2.0 * h_half - 1.0) * (1.0 / (2.0 * delta)).ln() + vb_half.ln()
        - (width * positive(sigma_sq_half, "sigma^2")?).ln();
    let hp = 1.0
        + (nonzero_log_abs(f_full, "F_n")? - nonzero_log_abs(f_half, "F_{n/2}")?) / (2.0 * LN_2);
    let mut warnings = Vec::new();
    if hp > 0.5 && hp < 1.0 {
        let stat = block_regime_statistic(grid, hp);
        if stat > BLOCK_REGIME_THRESHOLD {
            warnings.push(format!(
                "block regime statistic Δ^(2-2H') log(1/δ) = {stat:.3} exceeds {BLOCK_REGIME_THRESHOLD}"
            ));
        }
    }
    Ok(OrderEstimate::from_parts(h_full, hp, warnings))
}

/// How the order estimate is formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum OrderMethod {
    KnownSigma { sigma: f64 },
    UnknownSigma { block: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimationReport {
    pub horizon: f64,
    pub n: usize,
    pub blocks: usize,
    pub v_n: f64,
    pub v_half: f64,
    pub hurst_hat: f64,
    pub sigma2_hat: f64,
    pub intensity_blocks: Vec<f64>,
    pub order: Option<OrderEstimate>,
    pub order_method: Option<OrderMethod>,
    pub warnings: Vec<String>,
}

impl EstimationReport {
    /// Runs all estimators on `path` with blocks from `grid`. Order estimation
    /// failures are recorded as warnings.
    pub fn compute(path: &SamplePath, grid: &GridSpec, order: Option<OrderMethod>) -> Result<Self> {
        check_same_fine(path, grid)?;
        let hurst_hat = estimate_hurst(path)?;
        let sigma2_hat = estimate_sigma2(path, hurst_hat)?;
        let intensity_blocks = estimate_intensity_fn(path, hurst_hat, grid)?;
        let mut warnings = Vec::new();
        let order_est = match order {
            None => None,
            Some(m) => {
                let r = match m {
                    OrderMethod::KnownSigma { sigma } => estimate_order_known_sigma(path, sigma),
                    OrderMethod::UnknownSigma { block } => {
                        estimate_order_unknown_sigma(path, grid, block)
                    }
                };
                match r {
                    Ok(o) => {
                        warnings.extend(o.warnings.iter().cloned());
                        Some(o)
                    }
                    Err(e) => {
                        warnings.push(format!("order estimate rejected: {e}"));
                        None
                    }
                }
            }
        };
        Ok(Self {
            horizon: grid.horizon(),
            n: grid.fine(),
            blocks: grid.blocks(),
            v_n: qv_total(path, 1),
            v_half: qv_total(path, 2),
            hurst_hat,
            sigma2_hat,
            intensity_blocks,
            order: order_est,
            order_method: order,
            warnings,
        })
    }

    pub fn csv_header() -> &'static str {
        "n,Kn,H_hat,sigma2_hat,Hp_hat,q_raw,q_hat,status"
    }

    pub fn csv_row(&self) -> String {
        let (hp, qr, qh) = match &self.order {
            Some(o) => (
                format!("{:.10}", o.h_prime_hat),
                format!("{:.10}", o.q_raw),
                o.q_hat.map(|q| q.to_string()).unwrap_or_default(),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        let status = if self.warnings.is_empty() { "ok" } else { "warn" };
        format!(
            "{},{},{:.10},{:.10},{},{},{},{}",
            self.n, self.blocks, self.hurst_hat, self.sigma2_hat, hp, qr, qh, status
        )
    }
}

/// A path whose quadratic variations scale exactly:
/// `V_n = Σ_j σ_j^2 Δ δ^{2H-1}` and every pair of fine increments has
/// squared sum `(2δ)^{2H}` times the local `σ_j^2`. Both estimators of `H`
/// and `σ` recover their targets up to rounding.
pub fn exact_scaling_path(grid: GridSpec, hurst: f64, block_sigmas: &[f64]) -> Result<SamplePath> {
    if block_sigmas.len() != grid.blocks() {
        return invalid("need one sigma per block");
    }
    if !grid.block_len().is_multiple_of(2) {
        return invalid("blocks must hold an even number of fine steps");
    }
    let d = grid.delta().powf(hurst);
    // a + b = 2^H d, a^2 + b^2 = 2 d^2
    let s = 2f64.powf(hurst) * d;
    let r = (4.0 * d * d - s * s).max(0.0).sqrt();
    let (a, b) = ((s + r) / 2.0, (s - r) / 2.0);
    let mut values = Vec::with_capacity(grid.fine() + 1);
    let mut x = 0.0;
    values.push(x);
    for i in 0..grid.fine() / 2 {
        let sig = block_sigmas[2 * i / grid.block_len()];
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        x += sign * sig * a;
        values.push(x);
        x += sign * sig * b;
        values.push(x);
    }
    SamplePath::new(grid, values, Provenance::Constructed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_scaling_recovers_h_and_sigma() {
        for (h, sigma) in [(0.6, 1.0), (0.7, 2.5), (0.9, 0.3)] {
            let grid = GridSpec::new(1.0, 1024, 32).unwrap();
            let p = exact_scaling_path(grid, h, &vec![sigma; 32]).unwrap();
            let hh = estimate_hurst(&p).unwrap();
            assert!((hh - h).abs() < 1e-12, "{hh}");
            let s = estimate_sigma2(&p, hh).unwrap();
            assert!((s - sigma).abs() < 1e-10 * sigma, "{s}");
            for b in estimate_intensity_fn(&p, hh, &grid).unwrap() {
                assert!((b - sigma).abs() < 1e-10 * sigma);
            }
        }
    }

    #[test]
    fn horizon_enters_sigma2() {
        let grid = GridSpec::new(4.0, 512, 4).unwrap();
        let p = exact_scaling_path(grid, 0.7, &[1.0; 4]).unwrap();
        let hh = estimate_hurst(&p).unwrap();
        assert!((estimate_sigma2(&p, hh).unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn constant_path_is_degenerate() {
        let grid = GridSpec::new(1.0, 16, 1).unwrap();
        let p = SamplePath::new(grid, vec![1.0; 17], Provenance::Constructed).unwrap();
        assert!(matches!(estimate_hurst(&p), Err(Error::DegeneratePath(_))));
    }

    #[test]
    fn exact_scaling_makes_known_sigma_order_undefined() {
        let grid = GridSpec::new(1.0, 1024, 1).unwrap();
        let p = exact_scaling_path(grid, 0.7, &[1.0]).unwrap();
        let r = estimate_order_known_sigma(&p, 1.0);
        assert!(r.is_err() || r.unwrap().q_hat.is_none());
    }
}
