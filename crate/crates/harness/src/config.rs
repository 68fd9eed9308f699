//! JSON experiment configuration.

use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use hermite_qv::{Drift, GridSpec, HermiteParams, IntensityFn, SdeSpec};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// `X = σ Z` with constant `σ` taken from the intensity.
    Hermite,
    WienerIntegral,
    Sde,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IntensityConfig {
    Constant { sigma: f64 },
    Step { breaks: Vec<f64>, levels: Vec<f64> },
    Indicator { a: f64, b: f64 },
    Linear { intercept: f64, slope: f64 },
}

impl IntensityConfig {
    pub fn build(&self, horizon: f64) -> Result<IntensityFn> {
        Ok(match self {
            IntensityConfig::Constant { sigma } => IntensityFn::constant(*sigma),
            IntensityConfig::Step { breaks, levels } => {
                IntensityFn::step(breaks.clone(), levels.clone())?
            }
            IntensityConfig::Indicator { a, b } => IntensityFn::indicator(*a, *b)?,
            IntensityConfig::Linear { intercept, slope } => {
                IntensityFn::linear(*intercept, *slope, horizon)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DriftConfig {
    Zero,
    Linear { lambda: f64 },
    Cubic { a: f64 },
    Logistic { rate: f64, capacity: f64 },
}

impl DriftConfig {
    pub fn build(&self) -> Drift {
        match *self {
            DriftConfig::Zero => Drift::Zero,
            DriftConfig::Linear { lambda } => Drift::Linear { lambda },
            DriftConfig::Cubic { a } => Drift::Cubic { a },
            DriftConfig::Logistic { rate, capacity } => Drift::Logistic { rate, capacity },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    pub drift: DriftConfig,
    #[serde(default)]
    pub y0: f64,
    /// Overrides the catalog attestation as `[locally_lipschitz, lyapunov]`.
    #[serde(default)]
    pub attest: Option<[bool; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: usize,
    #[serde(rename = "Kn")]
    pub kn: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum OrderConfig {
    None,
    KnownSigma { sigma: f64 },
    /// Block `block` of a grid with `Δ = δ^alpha`.
    UnknownSigma { alpha: f64, block: usize },
}

fn default_horizon() -> f64 {
    1.0
}
fn default_oversampling() -> usize {
    1
}
fn default_workers() -> usize {
    1
}
fn default_order() -> OrderConfig {
    OrderConfig::None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model: Model,
    #[serde(rename = "H")]
    pub hurst: f64,
    pub q: u32,
    #[serde(default = "default_horizon", rename = "T")]
    pub horizon: f64,
    pub intensity: IntensityConfig,
    #[serde(default)]
    pub sde: Option<SdeConfig>,
    pub grids: Vec<GridPoint>,
    pub replications: usize,
    pub base_seed: u64,
    #[serde(default = "default_oversampling")]
    pub oversampling: usize,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_order")]
    pub order: OrderConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("parsing experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.schema_version == SCHEMA_VERSION,
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            self.schema_version
        );
        self.params()?;
        ensure!(self.replications >= 1, "replications must be at least 1");
        ensure!(self.oversampling >= 1, "oversampling must be at least 1");
        ensure!(self.workers >= 1, "workers must be at least 1");
        ensure!(!self.grids.is_empty(), "grid sequence is empty");
        for w in self.grids.windows(2) {
            ensure!(w[0].n < w[1].n, "grid sequence must be strictly increasing in n");
        }
        for g in &self.grids {
            GridSpec::new(self.horizon, g.n, g.kn)?;
        }
        let f = self.intensity.build(self.horizon)?;
        match self.model {
            Model::Hermite => {
                if f.as_constant().is_none() {
                    bail!("model `hermite` needs a constant intensity");
                }
            }
            Model::Sde => {
                if self.sde.is_none() {
                    bail!("model `sde` needs an `sde` section");
                }
            }
            Model::WienerIntegral => {}
        }
        if let OrderConfig::UnknownSigma { alpha, .. } = self.order {
            ensure!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
        }
        Ok(())
    }

    pub fn params(&self) -> Result<HermiteParams> {
        Ok(HermiteParams::new(self.hurst, self.q)?)
    }

    pub fn intensity_fn(&self) -> Result<IntensityFn> {
        self.intensity.build(self.horizon)
    }

    pub fn sde_spec(&self) -> Result<Option<SdeSpec>> {
        let Some(s) = &self.sde else { return Ok(None) };
        let mut spec = SdeSpec::new(s.drift.build(), self.intensity_fn()?, s.y0);
        if let Some([lip, lyap]) = s.attest {
            spec = spec.attest(lip, lyap);
        }
        Ok(Some(spec))
    }

    pub fn grid(&self, point: GridPoint) -> Result<GridSpec> {
        Ok(GridSpec::new(self.horizon, point.n, point.kn)?)
    }

    /// Regime notes that do not stop the run.
    pub fn regime_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Ok(p) = self.params() {
            if !p.in_limit_regime() {
                out.push(format!(
                    "q = 1 with H = {} <= 3/4: outside the regime of the QV limit theorem and order estimation",
                    p.hurst
                ));
            }
            if p.order >= 2 && self.oversampling < hermite_qv::hermite::MIN_RECOMMENDED_OVERSAMPLING {
                out.push(format!(
                    "oversampling {} < {}: higher-order structure at the grid scale is coarse",
                    self.oversampling,
                    hermite_qv::hermite::MIN_RECOMMENDED_OVERSAMPLING
                ));
            }
        }
        if self.model == Model::Sde && matches!(self.order, OrderConfig::UnknownSigma { .. }) {
            out.push("unknown-sigma order estimation assumes a driftless model".into());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> &'static str {
        r#"{
            "schema_version": 1,
            "model": "wiener-integral",
            "H": 0.7, "q": 2,
            "intensity": {"kind": "step", "breaks": [0.5], "levels": [1.0, 3.0]},
            "grids": [{"n": 1024, "Kn": 32}, {"n": 4096, "Kn": 64}],
            "replications": 4,
            "base_seed": 11,
            "order": {"variant": "unknown-sigma", "alpha": 0.5, "block": 0}
        }"#
    }

    #[test]
    fn parses_and_validates() {
        let cfg = ExperimentConfig::from_json(sample()).unwrap();
        assert_eq!(cfg.horizon, 1.0);
        assert_eq!(cfg.grids[1].kn, 64);
        let back = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&back).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = sample().replace("\"n\": 4096", "\"n\": 512");
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let bad = sample().replace("\"replications\": 4", "\"replications\": 0");
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let bad = sample().replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let bad = sample().replace("\"Kn\": 32", "\"Kn\": 33");
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let bad = sample().replace("\"kind\": \"step\"", "\"kind\": \"wavelet\"");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn low_hurst_fbm_warns() {
        let cfg = sample().replace("\"q\": 2", "\"q\": 1").replace("0.7", "0.6");
        let cfg = ExperimentConfig::from_json(&cfg).unwrap();
        assert!(cfg.regime_warnings().iter().any(|w| w.contains("3/4")));
    }
}
