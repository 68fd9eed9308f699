//! Hermite-process sample paths.
//!
//! The production generator applies the Hermite polynomial `He_q` to a
//! long-memory Gaussian sequence and takes normalised partial sums (the
//! Hermite-rank construction). The Gaussian input has autocovariance
//! `fgn_H(k)^{1/q}`, so `E He_q(X_i) He_q(X_j) = q! fgn_H(i - j)` and the
//! partial-sum path has exactly the covariance
//! `(s^{2H} + t^{2H} - |t-s|^{2H}) / 2` on the output grid, for every
//! oversampling factor. Only the higher-order structure is approximate.
//!
//! The kernel oracle discretises the multiple Wiener–Itô integral
//! `Z_t = I_q(L_t)` directly on a small grid and is used to validate the
//! generator for `q <= 2`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fgn::{AcvSpec, CirculantSampler, RngSeed};
use crate::grid::GridSpec;
use crate::numeric::CompensatedSum;
use crate::params::HermiteParams;
use crate::path::{Provenance, SamplePath};
use crate::quad;

use rand_distr::{Distribution, StandardNormal};

/// Oversampling below this is allowed but reported.
pub const MIN_RECOMMENDED_OVERSAMPLING: usize = 8;
/// Largest fine grid (`n * M`) the kernel oracle accepts.
pub const ORACLE_MAX_CELLS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    HermiteRank,
    KernelOracle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitePathRequest {
    pub params: HermiteParams,
    pub grid: GridSpec,
    /// Internal fine steps per output step.
    pub oversampling: usize,
    pub seed: RngSeed,
    pub method: Method,
}

impl HermitePathRequest {
    pub fn new(params: HermiteParams, grid: GridSpec, oversampling: usize, seed: RngSeed) -> Self {
        Self { params, grid, oversampling, seed, method: Method::HermiteRank }
    }

    pub fn kernel_oracle(mut self) -> Self {
        self.method = Method::KernelOracle;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.oversampling == 0 {
            return invalid("oversampling factor must be at least 1");
        }
        if self.method == Method::KernelOracle {
            if self.params.order > 2 {
                return invalid("kernel oracle supports q <= 2 only");
            }
            if self.grid.fine() * self.oversampling > ORACLE_MAX_CELLS {
                return invalid(format!(
                    "kernel oracle needs n*M <= {ORACLE_MAX_CELLS}, got {}",
                    self.grid.fine() * self.oversampling
                ));
            }
        }
        Ok(())
    }

    /// Non-fatal diagnostics for this request.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.method == Method::HermiteRank
            && self.params.order >= 2
            && self.oversampling < MIN_RECOMMENDED_OVERSAMPLING
        {
            w.push(format!(
                "oversampling {} < {MIN_RECOMMENDED_OVERSAMPLING}: higher-order structure at the grid scale is coarse",
                self.oversampling
            ));
        }
        w
    }

    /// Runs whichever method the request names.
    pub fn run(&self) -> Result<SamplePath> {
        match self.method {
            Method::HermiteRank => simulate_hermite(self),
            Method::KernelOracle => kernel_oracle_path(self),
        }
    }
}

/// Probabilists' Hermite polynomial `He_q(x)`.
pub fn hermite_poly(order: u32, x: f64) -> f64 {
    match order {
        0 => 1.0,
        1 => x,
        2 => x * x - 1.0,
        _ => {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..order {
                let p2 = x * p1 - k as f64 * p0;
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}

/// `E Z_s Z_t = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2`, the same for every order.
pub fn hermite_covariance(s: f64, t: f64, hurst: f64) -> f64 {
    let a = 2.0 * hurst;
    0.5 * (s.abs().powf(a) + t.abs().powf(a) - (t - s).abs().powf(a))
}

/// Hermite-rank generator with the circulant embedding and normalisation
/// precomputed, for drawing many paths on the same grid.
#[derive(Debug, Clone)]
pub struct HermiteGenerator {
    params: HermiteParams,
    grid: GridSpec,
    oversampling: usize,
    sampler: CirculantSampler,
    scale: f64,
}

impl HermiteGenerator {
    pub fn new(params: HermiteParams, grid: GridSpec, oversampling: usize) -> Result<Self> {
        if oversampling == 0 {
            return invalid("oversampling factor must be at least 1");
        }
        let total = grid.fine() * oversampling;
        let spec = AcvSpec::HermiteRoot { hurst: params.hurst, order: params.order };
        let sampler = CirculantSampler::new(spec, total)?;
        let var = partial_sum_variance(spec, params.order, total);
        let scale = grid.horizon().powf(params.hurst) / var.sqrt();
        Ok(Self { params, grid, oversampling, sampler, scale })
    }

    pub fn params(&self) -> &HermiteParams {
        &self.params
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    pub fn generate(&self, seed: RngSeed) -> SamplePath {
        let x = self.sampler.sample(seed);
        let q = self.params.order;
        let m = self.oversampling;
        let mut values = Vec::with_capacity(self.grid.fine() + 1);
        values.push(0.0);
        let mut acc = CompensatedSum::new();
        for (i, xi) in x.iter().enumerate() {
            acc.add(hermite_poly(q, *xi));
            if (i + 1) % m == 0 {
                values.push(self.scale * acc.value());
            }
        }
        let provenance = Provenance::Simulated { generator: "hermite-rank".into(), seed };
        SamplePath::new(self.grid, values, provenance).expect("generator output is finite")
    }
}

/// `Var(sum_{i<N} He_q(X_i)) = q! sum_{|k|<N} (N - |k|) r(k)^q`.
fn partial_sum_variance(spec: AcvSpec, order: u32, total: usize) -> f64 {
    let fact: f64 = (1..=order).map(f64::from).product();
    let mut acc = CompensatedSum::new();
    acc.add(total as f64 * spec.eval(0).powi(order as i32));
    for k in 1..total {
        acc.add(2.0 * (total - k) as f64 * spec.eval(k).powi(order as i32));
    }
    fact * acc.value()
}

/// Approximate Hermite path `Z^{H,q}` with `Z_0 = 0` on `req.grid`.
pub fn simulate_hermite(req: &HermitePathRequest) -> Result<SamplePath> {
    req.validate()?;
    if req.method != Method::HermiteRank {
        return invalid("simulate_hermite runs the hermite-rank method only");
    }
    for w in req.warnings() {
        log::warn!("{w}");
    }
    Ok(HermiteGenerator::new(req.params, req.grid, req.oversampling)?.generate(req.seed))
}

/// Kernel discretisation of `Z_t = I_q(L_t)` for `q <= 2`.
///
/// The Wiener increments live on `N` cells of width `h`. The kernel is
/// replaced by its average over cells (the L2 projection onto step
/// kernels), which factorises through
/// `K_i(u) = ∫_{cell i, x < u} (u/x)^a (u - x)^{-b} dx`:
///
/// * `q = 1`: `Z_t = c ∫_0^t G(u) du`,
/// * `q = 2`: `Z_t = c ∫_0^t (G(u)^2 - Σ_i K_i(u)^2 / h) du`,
///
/// with `G(u) = Σ_i K_i(u) ΔW_i / h`. The subtracted term is the Itô
/// correction on diagonal cells, `I_2(1_{A×A}) = W(A)^2 - |A|`.
///
/// The projection keeps only part of the variance when `nM` is small (the
/// kernel is singular on the diagonal), so paths are rescaled by the exact
/// constant that makes `Var Z_T = T^{2H}`; the unscaled variance is
/// available from [`KernelOracle::discretized_variance`].
#[derive(Debug, Clone)]
pub struct KernelOracle {
    params: HermiteParams,
    grid: GridSpec,
    cells: usize,
    cell_width: f64,
    nodes_per_cell: usize,
    /// Row-major `[u node][cell]`; zero for cells at or after the node's cell.
    k: Vec<f64>,
    weights: Vec<f64>,
    diag: Vec<f64>,
    scale: f64,
}

impl KernelOracle {
    pub fn new(params: HermiteParams, grid: GridSpec, oversampling: usize) -> Result<Self> {
        let req = HermitePathRequest::new(params, grid, oversampling, RngSeed::new(0)).kernel_oracle();
        req.validate()?;
        Self::with_nodes(params, grid, oversampling, 8)
    }

    fn with_nodes(
        params: HermiteParams,
        grid: GridSpec,
        oversampling: usize,
        nodes_per_cell: usize,
    ) -> Result<Self> {
        let cells = grid.fine() * oversampling;
        let h = grid.horizon() / cells as f64;
        let (a, b) = params.kernel_exponents();
        let (gx, gw) = quad::gauss_legendre(nodes_per_cell);
        let (fx, fw) = quad::gauss_legendre(8);

        // u = x_l + h s^2 clusters nodes at the cell's left edge where K has
        // a (u - x_l)^{1-b} onset.
        let s: Vec<f64> = gx.iter().map(|x| 0.5 * (x + 1.0)).collect();
        let nu = cells * nodes_per_cell;
        let mut k = vec![0.0; nu * cells];
        let mut weights = vec![0.0; nu];
        let mut diag = vec![0.0; nu];
        for j in 0..cells {
            let xl = j as f64 * h;
            for (p, (&sp, &wp)) in s.iter().zip(&gw).enumerate() {
                let u = xl + h * sp * sp;
                let du = u - xl;
                let row = j * nodes_per_cell + p;
                weights[row] = h * 2.0 * sp * 0.5 * wp;
                let ua = u.powf(a);
                let out = &mut k[row * cells..(row + 1) * cells];
                for (i, slot) in out.iter_mut().enumerate().take(j + 1) {
                    let lo = i as f64 * h;
                    let val = if i == j {
                        // [x_l, u], singular at u (and at 0 when i = 0)
                        if i == 0 {
                            quad::integrate_singular(|_, _, _| 1.0, 0.0, u, a, b, 1e-10)
                        } else {
                            quad::integrate_singular(|x, _, _| x.powf(-a), lo, u, 0.0, b, 1e-10)
                        }
                    } else {
                        // whole cell, u beyond its right edge by gap
                        let gap = (j - i - 1) as f64 * h + du;
                        if i == 0 {
                            quad::integrate_singular(|_, _, db| (gap + db).powf(-b), 0.0, h, a, 0.0, 1e-10)
                        } else if j - i >= 2 {
                            let c = lo + 0.5 * h;
                            fx.iter()
                                .zip(&fw)
                                .map(|(x, w)| {
                                    let xx = c + 0.5 * h * x;
                                    let dist = gap + 0.5 * h * (1.0 - x);
                                    0.5 * h * w * xx.powf(-a) * dist.powf(-b)
                                })
                                .sum()
                        } else {
                            quad::integrate_singular(
                                |x, _, db| x.powf(-a) * (gap + db).powf(-b),
                                lo,
                                lo + h,
                                0.0,
                                0.0,
                                1e-10,
                            )
                        }
                    };
                    *slot = ua * val;
                }
                diag[row] = out.iter().map(|v| v * v).sum::<f64>() / h;
            }
        }
        let mut oracle =
            Self { params, grid, cells, cell_width: h, nodes_per_cell, k, weights, diag, scale: 1.0 };
        let target = grid.horizon().powf(2.0 * params.hurst);
        oracle.scale = (target / oracle.discretized_variance(grid.fine())).sqrt();
        Ok(oracle)
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Exact variance of the discretised `Z_t` at output node `idx`
    /// (`q = 1`: `h Σ L_i^2`, `q = 2`: `2 h^2 Σ L_ij^2`).
    pub fn discretized_variance(&self, idx: usize) -> f64 {
        let h = self.cell_width;
        let c = self.params.c_hq;
        let m = self.cells / self.grid.fine();
        let rows = idx * m * self.nodes_per_cell;
        let n = self.cells;
        if self.params.order == 1 {
            let mut l = vec![0.0; n];
            for r in 0..rows {
                let w = self.weights[r] * c / h;
                for (li, kv) in l.iter_mut().zip(&self.k[r * n..(r + 1) * n]) {
                    *li += w * kv;
                }
            }
            h * l.iter().map(|v| v * v).sum::<f64>()
        } else {
            let mut l = vec![0.0; n * n];
            for r in 0..rows {
                let w = self.weights[r] * c / (h * h);
                let kr = &self.k[r * n..(r + 1) * n];
                for i in 0..n {
                    if kr[i] == 0.0 {
                        continue;
                    }
                    let wi = w * kr[i];
                    for jj in 0..n {
                        l[i * n + jj] += wi * kr[jj];
                    }
                }
            }
            2.0 * h * h * l.iter().map(|v| v * v).sum::<f64>()
        }
    }

    /// Factor applied to paths so that `Var Z_T = T^{2H}`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn path(&self, seed: RngSeed) -> SamplePath {
        let mut rng = seed.rng();
        let h = self.cell_width;
        let sd = h.sqrt();
        let dw: Vec<f64> = (0..self.cells)
            .map(|_| { let z: f64 = StandardNormal.sample(&mut rng); sd * z })
            .collect();
        let n = self.cells;
        let m = n / self.grid.fine();
        let c = self.params.c_hq * self.scale;
        let mut values = Vec::with_capacity(self.grid.fine() + 1);
        values.push(0.0);
        let mut acc = CompensatedSum::new();
        for j in 0..n {
            for p in 0..self.nodes_per_cell {
                let r = j * self.nodes_per_cell + p;
                let row = &self.k[r * n..r * n + j + 1];
                let g: f64 = row.iter().zip(&dw).map(|(k, w)| k * w).sum::<f64>() / h;
                let integrand = if self.params.order == 1 { g } else { g * g - self.diag[r] };
                acc.add(self.weights[r] * integrand);
            }
            if (j + 1) % m == 0 {
                values.push(c * acc.value());
            }
        }
        let provenance = Provenance::Simulated { generator: "kernel-oracle".into(), seed };
        SamplePath::new(self.grid, values, provenance).expect("oracle output is finite")
    }
}

/// Path of `I_q(L_t)` discretised on `n * M` cells (`q <= 2`, `n*M <= 512`).
pub fn kernel_oracle_path(req: &HermitePathRequest) -> Result<SamplePath> {
    let req = HermitePathRequest { method: Method::KernelOracle, ..*req };
    req.validate()?;
    Ok(KernelOracle::new(req.params, req.grid, req.oversampling)?.path(req.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgn::fgn_sample;

    #[test]
    fn hermite_polynomials() {
        assert_eq!(hermite_poly(3, 2.0), 8.0 - 6.0);
        assert_eq!(hermite_poly(4, 1.0), 1.0 - 6.0 + 3.0);
    }

    #[test]
    fn covariance_examples() {
        assert_eq!(hermite_covariance(1.0, 1.0, 0.7), 1.0);
        assert_eq!(hermite_covariance(0.0, 0.3, 0.7), 0.0);
        assert!((hermite_covariance(0.5, 1.0, 0.7) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn order_one_is_fgn_partial_sums() {
        let p = HermiteParams::new(0.7, 1).unwrap();
        let g = GridSpec::new(1.0, 64, 1).unwrap();
        let seed = RngSeed::new(11);
        let path = simulate_hermite(&HermitePathRequest::new(p, g, 4, seed)).unwrap();
        let noise = fgn_sample(0.7, 256, seed).unwrap();
        let scale = 256f64.powf(-0.7);
        let mut s = 0.0;
        for (i, x) in noise.iter().enumerate() {
            s += x;
            if (i + 1) % 4 == 0 {
                let v = path.values()[(i + 1) / 4];
                assert!((v - scale * s).abs() < 1e-12, "node {}", (i + 1) / 4);
            }
        }
    }

    #[test]
    fn normalisation_is_exact_power_law() {
        for q in 1..=3 {
            let spec = AcvSpec::HermiteRoot { hurst: 0.7, order: q };
            let fact: f64 = (1..=q).map(f64::from).product();
            let v = partial_sum_variance(spec, q, 1000);
            assert!((v / (fact * 1000f64.powf(1.4)) - 1.0).abs() < 1e-9, "q={q}");
        }
    }

    #[test]
    fn oracle_rejects_large_or_high_order() {
        let p2 = HermiteParams::new(0.7, 2).unwrap();
        let p3 = HermiteParams::new(0.7, 3).unwrap();
        let g = GridSpec::new(1.0, 64, 1).unwrap();
        let s = RngSeed::new(1);
        assert!(kernel_oracle_path(&HermitePathRequest::new(p2, g, 16, s)).is_err());
        assert!(kernel_oracle_path(&HermitePathRequest::new(p3, g, 2, s)).is_err());
    }

    #[test]
    fn oracle_starts_at_zero() {
        let p = HermiteParams::new(0.7, 2).unwrap();
        let g = GridSpec::new(1.0, 4, 1).unwrap();
        let z = kernel_oracle_path(&HermitePathRequest::new(p, g, 8, RngSeed::new(2))).unwrap();
        assert_eq!(z.values()[0], 0.0);
    }

    #[test]
    fn low_oversampling_warns() {
        let p = HermiteParams::new(0.7, 2).unwrap();
        let g = GridSpec::new(1.0, 4, 1).unwrap();
        assert_eq!(HermitePathRequest::new(p, g, 4, RngSeed::new(0)).warnings().len(), 1);
        assert!(HermitePathRequest::new(p, g, 8, RngSeed::new(0)).warnings().is_empty());
    }
}
