//! Delta-method utility: compares `a_n (g(X_n) - g(θ))` with
//! `g'(θ) a_n (X_n - θ)` sample by sample.

use anyhow::{bail, ensure, Result};
use hermite_qv::stats::{ols_slope, quantile};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaFn {
    Identity,
    Log,
    /// `x ↦ exp(x / 2)`.
    HalfExp,
}

impl DeltaFn {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "identity" | "id" => DeltaFn::Identity,
            "log" => DeltaFn::Log,
            "exp-half" | "half-exp" | "exp(x/2)" => DeltaFn::HalfExp,
            other => bail!("unknown delta-method function `{other}`"),
        })
    }

    fn in_domain(self, x: f64) -> bool {
        match self {
            DeltaFn::Log => x > 0.0 && x.is_finite(),
            _ => x.is_finite(),
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            DeltaFn::Identity => x,
            DeltaFn::Log => x.ln(),
            DeltaFn::HalfExp => (0.5 * x).exp(),
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            DeltaFn::Identity => 1.0,
            DeltaFn::Log => 1.0 / x,
            DeltaFn::HalfExp => 0.5 * (0.5 * x).exp(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaReport {
    pub g: DeltaFn,
    pub theta: f64,
    pub a_n: f64,
    pub median_deviation: f64,
    pub q95_deviation: f64,
    pub max_deviation: f64,
}

/// Pairwise deviations `|a_n (g(X_i) - g(θ)) - g'(θ) a_n (X_i - θ)|`.
pub fn delta_method_check(samples: &[f64], g: DeltaFn, theta: f64, a_n: f64) -> Result<DeltaReport> {
    ensure!(!samples.is_empty(), "no samples");
    ensure!(g.in_domain(theta), "theta = {theta} is outside the domain of {g:?}");
    ensure!(a_n > 0.0 && a_n.is_finite(), "a_n must be positive");
    let gt = g.eval(theta);
    let dg = g.derivative(theta);
    let mut dev = Vec::with_capacity(samples.len());
    for &x in samples {
        ensure!(g.in_domain(x), "sample {x} is outside the domain of {g:?}");
        dev.push((a_n * (g.eval(x) - gt) - dg * a_n * (x - theta)).abs());
    }
    Ok(DeltaReport {
        g,
        theta,
        a_n,
        median_deviation: quantile(&dev, 0.5),
        q95_deviation: quantile(&dev, 0.95),
        max_deviation: dev.iter().copied().fold(0.0, f64::max),
    })
}

/// Runs the check on `X = θ + z / a` for each `a` and returns the log-log
/// slope of the median deviation against `a` with the individual reports.
pub fn delta_method_slope(
    g: DeltaFn,
    theta: f64,
    rates: &[f64],
    z: &[f64],
) -> Result<(f64, Vec<DeltaReport>)> {
    ensure!(rates.len() >= 2, "need at least two rates");
    let reports = rates
        .iter()
        .map(|&a| {
            let xs: Vec<f64> = z.iter().map(|v| theta + v / a).collect();
            delta_method_check(&xs, g, theta, a)
        })
        .collect::<Result<Vec<_>>>()?;
    let lx: Vec<f64> = rates.iter().map(|a| a.ln()).collect();
    let ly: Vec<f64> = reports.iter().map(|r| r.median_deviation.ln()).collect();
    Ok((ols_slope(&lx, &ly), reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_no_deviation() {
        let r = delta_method_check(&[0.5, 1.5, -2.0], DeltaFn::Identity, 0.3, 100.0).unwrap();
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn log_at_zero_rejected() {
        assert!(delta_method_check(&[1.0], DeltaFn::Log, 0.0, 10.0).is_err());
        assert!(delta_method_check(&[-1.0], DeltaFn::Log, 1.0, 10.0).is_err());
        assert!(DeltaFn::parse("sqrt").is_err());
    }

    #[test]
    fn quadratic_remainder() {
        // a (log(1 + z/a) - 0) - z = -z^2 / (2a) + O(a^-2)
        let r = delta_method_check(&[1.0 + 1.0 / 1e4], DeltaFn::Log, 1.0, 1e4).unwrap();
        assert!((r.max_deviation - 0.5e-4).abs() < 1e-7);
        let (slope, _) = delta_method_slope(DeltaFn::HalfExp, 0.2, &[1e2, 1e3, 1e4], &[0.3, -1.1, 0.7]).unwrap();
        assert!((slope + 1.0).abs() < 0.01, "{slope}");
    }
}
