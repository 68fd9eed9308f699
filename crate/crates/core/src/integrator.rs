//! Wiener integrals against a sampled noise path, the `D_H` inner product,
//! and the Euler scheme for `dY = g(Y) dt + f(t) dZ`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta;

use crate::error::{invalid, Error, Result};
use crate::intensity::IntensityFn;
use crate::path::{Provenance, SamplePath};
use crate::quad;
use crate::stats::ols_slope;

/// `X_t = ∫_0^t f dZ` on the grid of `Z`, kept together with its inputs.
#[derive(Debug, Clone)]
pub struct WienerIntegralPath {
    pub noise: SamplePath,
    pub integrand: IntensityFn,
    pub path: SamplePath,
}

/// Left-point sum `X_{t_k} = Σ_{i<k} f(t_i) (Z_{t_{i+1}} - Z_{t_i})`.
///
/// Runs of equal integrand values are summed by telescoping, so the result
/// is exact for step integrands anchored on the grid.
pub fn wiener_integral(f: &IntensityFn, z: &SamplePath) -> Result<WienerIntegralPath> {
    let grid = *z.grid();
    let zv = z.values();
    let n = grid.fine();
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut anchor = 0usize;
    let mut anchor_value = 0.0;
    let mut level = f.eval(grid.node(0));
    for i in 0..n {
        let fi = f.eval(grid.node(i));
        if fi.is_nan() {
            return Err(Error::NonFinite(format!("integrand at t = {}", grid.node(i))));
        }
        if fi != level {
            anchor = i;
            anchor_value = out[i];
            level = fi;
        }
        out.push(anchor_value + level * (zv[i + 1] - zv[anchor]));
    }
    let path = SamplePath::new(grid, out, Provenance::Integrated)?;
    Ok(WienerIntegralPath { noise: z.clone(), integrand: f.clone(), path })
}

/// `<f, g>_{D_H} = H(2H-1) ∫_0^T ∫_0^T f(u) g(v) |u-v|^{2H-2} du dv`.
///
/// With `w = |u - v|` this is `H(2H-1) ∫_0^T w^{2H-2} Φ(w) dw` where
/// `Φ(w) = ∫_0^{T-w} (f(u) g(u+w) + g(u) f(u+w)) du`; the `w^{2H-2}`
/// singularity is removed by the power substitution of
/// [`quad::integrate_singular`].
pub fn dh_inner(f: &IntensityFn, g: &IntensityFn, hurst: f64, horizon: f64) -> Result<f64> {
    if !(hurst > 0.5 && hurst < 1.0) {
        return invalid(format!("Hurst index must lie in (1/2, 1), got {hurst}"));
    }
    let tol = 1e-10;
    let mut breaks: Vec<f64> = f.breakpoints().iter().chain(g.breakpoints()).copied().collect();
    breaks.retain(|b| *b > 0.0 && *b < horizon);
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();

    let phi = |w: f64| -> f64 {
        let mut inner: Vec<f64> = breaks.clone();
        inner.extend(breaks.iter().map(|b| b - w));
        quad::integrate_with_breaks(
            |u| f.eval(u) * g.eval(u + w) + g.eval(u) * f.eval(u + w),
            0.0,
            horizon - w,
            &inner,
            tol,
        )
    };

    // Φ has kinks where w hits a difference of breakpoints.
    let mut kinks: Vec<f64> = Vec::new();
    let mut pts = vec![0.0, horizon];
    pts.extend_from_slice(&breaks);
    for a in &pts {
        for b in &pts {
            let d = (a - b).abs();
            if d > 0.0 && d < horizon {
                kinks.push(d);
            }
        }
    }
    kinks.sort_by(|a, b| a.total_cmp(b));
    kinks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

    let p = 2.0 - 2.0 * hurst;
    let first = kinks.first().copied().unwrap_or(horizon);
    let mut total = quad::integrate_singular(|w, _, _| phi(w), 0.0, first, p, 0.0, tol);
    let mut lo = first;
    for &k in kinks.iter().skip(1).chain(std::iter::once(&horizon)) {
        if k > lo {
            total += quad::integrate(|w| w.powf(-p) * phi(w), lo, k, tol);
            lo = k;
        }
    }
    Ok(hurst * (2.0 * hurst - 1.0) * total)
}

/// `||f||^2_{D_H}`-style inner product on `[0, horizon]`.
pub fn dh_norm(f: &IntensityFn, g: &IntensityFn, hurst: f64, horizon: f64) -> Result<f64> {
    dh_inner(f, g, hurst, horizon)
}

/// Both sides of
/// `(uv)^α ∫_0^{u∧v} x^{-2α} (u-x)^{α-1} (v-x)^{α-1} dx = B(α, 1-2α) |u-v|^{2α-1}`.
pub fn beta_identity_check(alpha: f64, u: f64, v: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return invalid(format!("alpha must lie in (0, 1/2), got {alpha}"));
    }
    if !(u > 0.0 && v > 0.0) || u == v {
        return invalid("the identity needs distinct positive u, v");
    }
    let (lo, hi) = if u < v { (u, v) } else { (v, u) };
    let gap = hi - lo;
    let integral = quad::integrate_singular(
        |_, _, db| (gap + db).powf(alpha - 1.0),
        0.0,
        lo,
        2.0 * alpha,
        1.0 - alpha,
        1e-13,
    );
    let lhs = (u * v).powf(alpha) * integral;
    let rhs = beta(alpha, 1.0 - 2.0 * alpha) * gap.powf(2.0 * alpha - 1.0);
    Ok((lhs, rhs))
}

type DriftFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Drift `g` of the SDE.
#[derive(Clone)]
pub enum Drift {
    Zero,
    /// `g(y) = -λ y`.
    Linear { lambda: f64 },
    /// `g(y) = -y^3 + a y`.
    Cubic { a: f64 },
    /// `g(y) = r y (1 - y / K)`.
    Logistic { rate: f64, capacity: f64 },
    Custom { name: String, g: DriftFn },
}

impl fmt::Debug for Drift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Drift::Zero => write!(f, "Zero"),
            Drift::Linear { lambda } => write!(f, "Linear(λ={lambda})"),
            Drift::Cubic { a } => write!(f, "Cubic(a={a})"),
            Drift::Logistic { rate, capacity } => write!(f, "Logistic(r={rate}, K={capacity})"),
            Drift::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl Drift {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Drift::Zero => 0.0,
            Drift::Linear { lambda } => -lambda * y,
            Drift::Cubic { a } => -y * y * y + a * y,
            Drift::Logistic { rate, capacity } => rate * y * (1.0 - y / capacity),
            Drift::Custom { g, .. } => g(y),
        }
    }

    /// Attestation that goes with a catalog drift. Custom drifts start
    /// unattested.
    fn default_attestation(&self) -> Attestation {
        match self {
            Drift::Zero | Drift::Linear { .. } | Drift::Cubic { .. } => {
                Attestation { locally_lipschitz: true, lyapunov: true }
            }
            // Locally Lipschitz, but y ↦ -y^2 growth defeats a quadratic
            // Lyapunov function on the whole line.
            Drift::Logistic { .. } => Attestation { locally_lipschitz: true, lyapunov: false },
            Drift::Custom { .. } => Attestation::default(),
        }
    }
}

/// User statements about the drift. The solver checks that both are set; it
/// does not verify them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attestation {
    pub locally_lipschitz: bool,
    pub lyapunov: bool,
}

#[derive(Debug, Clone)]
pub struct SdeSpec {
    pub drift: Drift,
    pub intensity: IntensityFn,
    pub y0: f64,
    pub attestation: Attestation,
}

impl SdeSpec {
    pub fn new(drift: Drift, intensity: IntensityFn, y0: f64) -> Self {
        let attestation = drift.default_attestation();
        Self { drift, intensity, y0, attestation }
    }

    pub fn attest(mut self, locally_lipschitz: bool, lyapunov: bool) -> Self {
        self.attestation = Attestation { locally_lipschitz, lyapunov };
        self
    }
}

const BLOW_UP: f64 = 1e12;

/// Explicit Euler:
/// `Y_{i+1} = Y_i + g(Y_i) δ + f(t_i) (Z_{t_{i+1}} - Z_{t_i})`.
pub fn solve_sde(spec: &SdeSpec, z: &SamplePath) -> Result<SamplePath> {
    let att = spec.attestation;
    if !att.locally_lipschitz {
        return Err(Error::NotAttested("drift not attested locally Lipschitz".into()));
    }
    if !att.lyapunov {
        return Err(Error::NotAttested("drift not attested to have a Lyapunov function".into()));
    }
    let grid = *z.grid();
    let dt = grid.delta();
    let zv = z.values();
    let mut y = Vec::with_capacity(zv.len());
    y.push(spec.y0);
    let mut cur = spec.y0;
    for i in 0..grid.fine() {
        let f = spec.intensity.eval(grid.node(i));
        cur = cur + spec.drift.eval(cur) * dt + f * (zv[i + 1] - zv[i]);
        if !cur.is_finite() || cur.abs() > BLOW_UP {
            return Err(Error::BlowUp { index: i + 1 });
        }
        y.push(cur);
    }
    SamplePath::new(grid, y, Provenance::Solved)
}

/// Empirical Hölder exponent: slope of `log max_i |X_{i+s} - X_i|` against
/// `log(s δ)` over dyadic lags `s <= sqrt(n)`.
/// A constant path returns `f64::INFINITY`.
pub fn holder_estimate(path: &SamplePath) -> Result<f64> {
    let n = path.grid().fine();
    if n < 16 {
        return invalid(format!("Hölder estimate needs n >= 16, got {n}"));
    }
    let v = path.values();
    let dt = path.grid().delta();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut lag = 1;
    while lag * lag <= n {
        let m = (0..=n - lag).map(|i| (v[i + lag] - v[i]).abs()).fold(0.0f64, f64::max);
        if m > 0.0 {
            xs.push((lag as f64 * dt).ln());
            ys.push(m.ln());
        }
        lag *= 2;
    }
    if xs.len() < 2 {
        return Ok(f64::INFINITY);
    }
    Ok(ols_slope(&xs, &ys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn path(values: Vec<f64>) -> SamplePath {
        let n = values.len() - 1;
        SamplePath::new(GridSpec::new(1.0, n, 1).unwrap(), values, Provenance::Constructed).unwrap()
    }

    fn wiggly(n: usize) -> SamplePath {
        path((0..=n).map(|i| ((i * 7919) % 101) as f64 / 17.0 - 2.0).collect())
    }

    #[test]
    fn unit_integrand_telescopes() {
        let z = wiggly(64);
        let x = wiener_integral(&IntensityFn::constant(1.0), &z).unwrap();
        for (xv, zv) in x.path.values().iter().zip(z.values()) {
            assert_eq!(*xv, zv - z.values()[0]);
        }
    }

    #[test]
    fn constant_integrand_scales() {
        let mut vals = wiggly(64).into_values();
        vals[0] = 0.0;
        let z = path(vals);
        let x = wiener_integral(&IntensityFn::constant(2.5), &z).unwrap();
        for (xv, zv) in x.path.values().iter().zip(z.values()) {
            assert_eq!(*xv, 2.5 * zv);
        }
    }

    #[test]
    fn half_indicator_stops_at_midpoint() {
        let mut vals = wiggly(64).into_values();
        vals[0] = 0.0;
        let z = path(vals);
        let f = IntensityFn::indicator(0.0, 0.5).unwrap();
        let x = wiener_integral(&f, &z).unwrap();
        assert_eq!(x.path.terminal(), z.values()[32]);
    }

    #[test]
    fn nan_integrand_rejected() {
        let f = IntensityFn::custom("nan", |_| f64::NAN, 1.0, vec![], 0.0).unwrap();
        assert!(wiener_integral(&f, &wiggly(16)).is_err());
    }

    #[test]
    fn dh_norm_of_unit_is_one() {
        for h in [0.55, 0.7, 0.9] {
            let one = IntensityFn::constant(1.0);
            let v = dh_norm(&one, &one, h, 1.0).unwrap();
            assert!((v - 1.0).abs() < 1e-8, "H={h}: {v}");
            let s = IntensityFn::constant(3.0);
            let v = dh_norm(&s, &s, h, 1.0).unwrap();
            assert!((v - 9.0).abs() < 1e-7);
        }
    }

    #[test]
    fn dh_norm_of_indicator_is_power() {
        // ||1_{[0,a)}||^2 = a^{2H}
        let f = IntensityFn::indicator(0.0, 0.5).unwrap();
        let v = dh_norm(&f, &f, 0.7, 1.0).unwrap();
        assert!((v - 0.5f64.powf(1.4)).abs() < 1e-8, "{v}");
        // <1_{[0,s)}, 1_{[0,t)}> = covariance of Z_s, Z_t
        let g = IntensityFn::indicator(0.0, 0.75).unwrap();
        let v = dh_norm(&f, &g, 0.7, 1.0).unwrap();
        let cov = crate::hermite::hermite_covariance(0.5, 0.75, 0.7);
        assert!((v - cov).abs() < 1e-8, "{v} vs {cov}");
    }

    #[test]
    fn beta_identity_examples() {
        for (a, u, v) in [(0.25, 1.0, 2.0), (0.1, 0.3, 0.9), (0.45, 2.0, 0.1)] {
            let (l, r) = beta_identity_check(a, u, v).unwrap();
            assert!((l - r).abs() / r < 1e-6, "α={a}: {l} vs {r}");
        }
        assert!(beta_identity_check(0.25, 1.0, 1.0).is_err());
        assert!(beta_identity_check(0.5, 1.0, 2.0).is_err());
    }

    #[test]
    fn driftless_sde_is_scaled_noise() {
        let mut vals = wiggly(32).into_values();
        vals[0] = 0.0;
        let z = path(vals);
        let spec = SdeSpec::new(Drift::Zero, IntensityFn::constant(0.5), 1.0);
        let y = solve_sde(&spec, &z).unwrap();
        for (yv, zv) in y.values().iter().zip(z.values()) {
            assert!((yv - (1.0 + 0.5 * zv)).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_drift_without_noise_is_geometric() {
        let z = path(vec![0.0; 17]);
        let spec = SdeSpec::new(Drift::Linear { lambda: 2.0 }, IntensityFn::constant(1.0), 3.0);
        let y = solve_sde(&spec, &z).unwrap();
        let dt: f64 = 1.0 / 16.0;
        for (i, yv) in y.values().iter().enumerate() {
            let expect = 3.0 * (1.0 - 2.0 * dt).powi(i as i32);
            assert!((yv - expect).abs() < 1e-13 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn unattested_and_blow_up() {
        let z = path(vec![0.0; 17]);
        let spec = SdeSpec::new(
            Drift::Logistic { rate: 1.0, capacity: 1.0 },
            IntensityFn::constant(1.0),
            0.5,
        );
        assert!(matches!(solve_sde(&spec, &z), Err(Error::NotAttested(_))));
        let explode = SdeSpec::new(
            Drift::Custom { name: "cube".into(), g: Arc::new(|y| y * y * y) },
            IntensityFn::constant(0.0),
            10.0,
        )
        .attest(true, true);
        assert!(matches!(solve_sde(&explode, &z), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn holder_of_line_and_constant() {
        let line = path((0..=256).map(|i| i as f64 / 256.0).collect());
        assert!((holder_estimate(&line).unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(holder_estimate(&path(vec![2.0; 65])).unwrap(), f64::INFINITY);
        assert!(holder_estimate(&path(vec![0.0; 9])).is_err());
    }
}
