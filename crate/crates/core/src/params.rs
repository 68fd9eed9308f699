//! Hurst index / Hermite order pairs and the constants derived from them.

use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::factorial::ln_factorial;

use crate::error::{invalid, Result};

/// `(H, q)` together with `H' = 1 + (H - 1)/q`, the kernel normalisation
/// `c_{H,q}` and the limit constants `d_{H',q}` and `d~_{H',q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiteParams {
    pub hurst: f64,
    pub order: u32,
    pub h_prime: f64,
    pub c_hq: f64,
    pub d: f64,
    pub d_tilde: f64,
}

impl HermiteParams {
    pub fn new(hurst: f64, order: u32) -> Result<Self> {
        if !(hurst > 0.5 && hurst < 1.0) {
            return invalid(format!("Hurst index must lie in (1/2, 1), got {hurst}"));
        }
        if order == 0 {
            return invalid("Hermite order must be at least 1");
        }
        let h_prime = h_prime(hurst, order);
        let d = limit_constant(h_prime, order);
        Ok(Self {
            hurst,
            order,
            h_prime,
            c_hq: kernel_constant(hurst, order),
            d,
            d_tilde: second_moment_constant(h_prime, order),
        })
    }

    /// Whether the non-central limit for the variation error applies:
    /// `q >= 2`, or `q = 1` with `H > 3/4`.
    pub fn in_limit_regime(&self) -> bool {
        self.order >= 2 || self.hurst > 0.75
    }

    /// Rate exponent `2 - 2H'` of the variation error.
    pub fn rate_exponent(&self) -> f64 {
        2.0 - 2.0 * self.h_prime
    }

    /// Hurst index `2H' - 1` of the Rosenblatt process in the limit.
    pub fn limit_hurst(&self) -> f64 {
        2.0 * self.h_prime - 1.0
    }

    /// Exponents `(1/2 - (1-H)/q, 1/2 + (1-H)/q)` of the kernel factor
    /// `(u/x)^a (u - x)^{-b}`.
    pub fn kernel_exponents(&self) -> (f64, f64) {
        let s = (1.0 - self.hurst) / self.order as f64;
        (0.5 - s, 0.5 + s)
    }
}

pub fn derive_params(hurst: f64, order: u32) -> Result<HermiteParams> {
    HermiteParams::new(hurst, order)
}

pub fn h_prime(hurst: f64, order: u32) -> f64 {
    1.0 + (hurst - 1.0) / order as f64
}

/// `c_{H,q} = ( H(2H-1) / (q! B(1/2 - (1-H)/q, 2(1-H)/q)^q) )^{1/2}`,
/// evaluated through log-Beta so that `B^q` cannot overflow as `H -> 1`.
pub fn kernel_constant(hurst: f64, order: u32) -> f64 {
    let q = order as f64;
    let a = 0.5 - (1.0 - hurst) / q;
    let b = 2.0 * (1.0 - hurst) / q;
    let ln_c2 = (hurst * (2.0 * hurst - 1.0)).ln() - ln_factorial(order as u64) - q * ln_beta(a, b);
    (0.5 * ln_c2).exp()
}

/// `d_{H',q}` of the non-central limit of the variation error.
pub fn limit_constant(h_prime: f64, order: u32) -> f64 {
    let q = order as f64;
    let num = 2f64.sqrt() * q * ((2.0 * h_prime - 2.0) * q + 1.0) * ((h_prime - 1.0) * q + 1.0);
    let den = ((4.0 * h_prime - 3.0) * (2.0 * h_prime - 1.0)).sqrt()
        * ((2.0 * h_prime - 2.0) * (q - 1.0) + 1.0)
        * ((h_prime - 1.0) * (q - 1.0) + 1.0);
    num / den
}

/// `d~_{H',q}`, the constant of the limiting second moment
/// `d~ ∬ f_u^2 f_v^2 |u-v|^{4H'-4}`. Equal to `d^2 (2H'-1)(4H'-3)`, the
/// isometry of the Rosenblatt integral at Hurst `2H'-1`.
pub fn second_moment_constant(h_prime: f64, order: u32) -> f64 {
    let d = limit_constant(h_prime, order);
    d * d * (2.0 * h_prime - 1.0) * (4.0 * h_prime - 3.0)
}
