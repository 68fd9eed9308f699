//! Simulation of Hermite processes, Wiener integrals against them, and
//! quadratic-variation estimators of the Hurst index, the volatility, and the
//! Hermite order.

pub mod error;
pub mod estimators;
pub mod fgn;
pub mod grid;
pub mod hermite;
pub mod integrator;
pub mod intensity;
pub mod numeric;
pub mod params;
pub mod path;
pub mod qvar;
pub mod quad;
pub mod stats;

pub use error::{Error, Result};
pub use fgn::RngSeed;
pub use grid::GridSpec;
pub use hermite::{simulate_hermite, HermiteGenerator, HermitePathRequest, KernelOracle};
pub use integrator::{solve_sde, wiener_integral, Drift, SdeSpec, WienerIntegralPath};
pub use intensity::IntensityFn;
pub use params::{derive_params, HermiteParams};
pub use path::{Provenance, SamplePath};
