//! Stationary Gaussian sequences by circulant embedding.
//!
//! A stationary autocovariance `r` is embedded in a symmetric circulant of
//! length `L >= 2m`; its eigenvalues come from one FFT, and a sample is the
//! real part of the FFT of eigenvalue-weighted complex white noise.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Seed plus stream id. The same `(seed, stream)` always yields the same
/// random numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub const fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub const fn with_stream(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Counter-based child seed: depends only on `(self, counter)`.
    pub fn derive(&self, counter: u64) -> RngSeed {
        let mixed = splitmix64(self.seed ^ splitmix64(counter.wrapping_add(0x5851_f42d_4c95_7f2d)));
        RngSeed { seed: mixed, stream: self.stream }
    }
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Autocovariance families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AcvSpec {
    /// `r(k) = 1{k = 0}`.
    WhiteNoise,
    /// Fractional Gaussian noise,
    /// `r(k) = ((k+1)^{2H} + |k-1|^{2H} - 2k^{2H}) / 2`.
    Fgn { hurst: f64 },
    /// `r(k) = (1 + k)^{-exponent}`.
    PowerLaw { exponent: f64 },
    /// `r(k) = fgn_H(k)^{1/q}`: then `E He_q(X_i) He_q(X_j) = q! fgn_H(i - j)`
    /// exactly, which is what the Hermite-rank generator needs.
    HermiteRoot { hurst: f64, order: u32 },
}

impl AcvSpec {
    pub fn eval(&self, k: usize) -> f64 {
        match *self {
            AcvSpec::WhiteNoise => f64::from(u8::from(k == 0)),
            AcvSpec::Fgn { hurst } => fgn_autocovariance(hurst, k),
            AcvSpec::PowerLaw { exponent } => (1.0 + k as f64).powf(-exponent),
            AcvSpec::HermiteRoot { hurst, order } => {
                let r = fgn_autocovariance(hurst, k);
                if order == 1 {
                    r
                } else {
                    r.powf(1.0 / order as f64)
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            AcvSpec::WhiteNoise => "white".into(),
            AcvSpec::Fgn { hurst } => format!("fGn({hurst})"),
            AcvSpec::PowerLaw { exponent } => format!("power-law({exponent})"),
            AcvSpec::HermiteRoot { hurst, order } => format!("fGn({hurst})^(1/{order})"),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            AcvSpec::Fgn { hurst } | AcvSpec::HermiteRoot { hurst, .. }
                if !(hurst > 0.5 && hurst < 1.0) =>
            {
                invalid(format!("fGn Hurst index must lie in (1/2, 1), got {hurst}"))
            }
            AcvSpec::HermiteRoot { order: 0, .. } => invalid("order must be positive"),
            AcvSpec::PowerLaw { exponent } if !(exponent > 0.0) => {
                invalid("power-law exponent must be positive")
            }
            _ => Ok(()),
        }
    }
}

/// Autocovariance of unit-variance fractional Gaussian noise at lag `k`.
///
/// For large lags the second difference is evaluated from its binomial
/// series to avoid the `k^2 * eps` cancellation of the direct formula.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let a = 2.0 * hurst;
    if k == 0 {
        return 1.0;
    }
    let kf = k as f64;
    if k < 64 {
        return 0.5 * ((kf + 1.0).powf(a) + (kf - 1.0).abs().powf(a) - 2.0 * kf.powf(a));
    }
    // (1+x)^a + (1-x)^a - 2 = 2 sum_{j>=1} C(a, 2j) x^{2j}
    let x2 = 1.0 / (kf * kf);
    let mut coef = 1.0;
    let mut pow = 1.0;
    let mut sum = 0.0;
    for j in 1..=6 {
        let m = (2 * j) as f64;
        coef *= (a - m + 2.0) * (a - m + 1.0) / ((m - 1.0) * m);
        pow *= x2;
        sum += coef * pow;
    }
    kf.powf(a) * sum
}

const MAX_DOUBLINGS: u32 = 3;

/// Reusable circulant-embedding sampler for a fixed `(spec, m)`.
#[derive(Clone)]
pub struct CirculantSampler {
    spec: AcvSpec,
    len: usize,
    variance: f64,
    sqrt_eig: Arc<Vec<f64>>,
    fft: Option<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for CirculantSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantSampler")
            .field("spec", &self.spec)
            .field("len", &self.len)
            .field("embedding", &self.sqrt_eig.len())
            .finish()
    }
}

impl CirculantSampler {
    pub fn new(spec: AcvSpec, len: usize) -> Result<Self> {
        spec.validate()?;
        if len == 0 {
            return invalid("sample length must be positive");
        }
        let variance = spec.eval(0);
        if !(variance > 0.0) {
            return invalid("autocovariance must have r(0) > 0");
        }
        if len == 1 {
            return Ok(Self { spec, len, variance, sqrt_eig: Arc::new(Vec::new()), fft: None });
        }

        let mut planner = FftPlanner::<f64>::new();
        let mut half = len.next_power_of_two();
        let mut last_min = 0.0;
        for _ in 0..=MAX_DOUBLINGS {
            let size = 2 * half;
            let fft = planner.plan_fft_forward(size);
            let mut buf: Vec<Complex<f64>> = (0..size)
                .map(|i| {
                    let k = if i <= half { i } else { size - i };
                    Complex::new(spec.eval(k) / variance, 0.0)
                })
                .collect();
            fft.process(&mut buf);
            let max = buf.iter().fold(0.0f64, |m, c| m.max(c.re));
            let min = buf.iter().fold(f64::INFINITY, |m, c| m.min(c.re));
            last_min = min;
            if min >= -1e-10 * max {
                let scale = 1.0 / size as f64;
                let sqrt_eig = buf.iter().map(|c| (c.re.max(0.0) * scale).sqrt()).collect();
                return Ok(Self { spec, len, variance, sqrt_eig: Arc::new(sqrt_eig), fft: Some(fft) });
            }
            log::debug!("embedding of {} at size {size} has min eigenvalue {min}; doubling", spec.label());
            half *= 2;
        }
        Err(Error::EmbeddingFailed { size: half, min_eigenvalue: last_min })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spec(&self) -> AcvSpec {
        self.spec
    }

    /// Size of the circulant actually used.
    pub fn embedding_size(&self) -> usize {
        self.sqrt_eig.len()
    }

    pub fn sample(&self, seed: RngSeed) -> Vec<f64> {
        let mut rng = seed.rng();
        let sd = self.variance.sqrt();
        let Some(fft) = &self.fft else {
            let z: f64 = StandardNormal.sample(&mut rng);
            return vec![sd * z];
        };
        let mut buf: Vec<Complex<f64>> = self
            .sqrt_eig
            .iter()
            .map(|&s| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex::new(s * re, s * im)
            })
            .collect();
        fft.process(&mut buf);
        buf.truncate(self.len);
        buf.into_iter().map(|c| sd * c.re).collect()
    }
}

/// Stationary zero-mean Gaussian sequence of length `m` with autocovariance
/// `spec`.
pub fn stationary_gaussian_sample(spec: AcvSpec, m: usize, seed: RngSeed) -> Result<Vec<f64>> {
    Ok(CirculantSampler::new(spec, m)?.sample(seed))
}

/// Unit-variance fractional Gaussian noise of length `m`. Its partial sums
/// times `m^{-H}` are fractional Brownian motion on `{i/m}`.
pub fn fgn_sample(hurst: f64, m: usize, seed: RngSeed) -> Result<Vec<f64>> {
    stationary_gaussian_sample(AcvSpec::Fgn { hurst }, m, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;

    #[test]
    fn fgn_series_matches_direct_formula_where_both_are_accurate() {
        for h in [0.55, 0.7, 0.95] {
            for k in [64usize, 100, 1000] {
                let kf = k as f64;
                let a = 2.0 * h;
                let direct = 0.5 * ((kf + 1.0).powf(a) + (kf - 1.0).powf(a) - 2.0 * kf.powf(a));
                let series = fgn_autocovariance(h, k);
                assert!((direct - series).abs() < 1e-9 * series, "H={h} k={k}");
            }
        }
    }

    #[test]
    fn fgn_lag_one() {
        for h in [0.6, 0.7, 0.9] {
            let expect = 2f64.powf(2.0 * h - 1.0) - 1.0;
            assert!((fgn_autocovariance(h, 1) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_boundary_hurst() {
        assert!(fgn_sample(0.5, 16, RngSeed::new(1)).is_err());
        assert!(fgn_sample(1.0, 16, RngSeed::new(1)).is_err());
    }

    #[test]
    fn single_draw() {
        let a = stationary_gaussian_sample(AcvSpec::WhiteNoise, 1, RngSeed::new(3)).unwrap();
        assert_eq!(a.len(), 1);
        assert!(a[0].is_finite());
    }

    #[test]
    fn deterministic_and_stream_sensitive() {
        let a = fgn_sample(0.7, 1000, RngSeed::new(9)).unwrap();
        let b = fgn_sample(0.7, 1000, RngSeed::new(9)).unwrap();
        let c = fgn_sample(0.7, 1000, RngSeed::with_stream(9, 1)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn hermite_root_embeddings_are_nonnegative() {
        for h in [0.51, 0.6, 0.7, 0.8, 0.9, 0.99] {
            for q in 1..=4 {
                let s = CirculantSampler::new(AcvSpec::HermiteRoot { hurst: h, order: q }, 1 << 12).unwrap();
                assert_eq!(s.embedding_size(), 1 << 13, "H={h} q={q}");
            }
        }
    }

    #[test]
    fn white_noise_autocorrelation() {
        let m = 1 << 14;
        let x = stationary_gaussian_sample(AcvSpec::WhiteNoise, m, RngSeed::new(5)).unwrap();
        let bound = 3.0 / (m as f64).sqrt();
        for lag in 1..=10 {
            assert!(stats::autocovariance_zero_mean(&x, lag).abs() < bound, "lag {lag}");
        }
    }
}
