//! Deterministic noise-intensity functions `f: [0, T] -> R`.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::quad;

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Constant(f64),
    /// `levels[k]` on `[breaks[k-1], breaks[k])`.
    Step { breaks: Vec<f64>, levels: Vec<f64> },
    Linear { intercept: f64, slope: f64 },
    Custom { name: String, eval: Evaluator },
}

/// A bounded, piecewise Hölder intensity with its declared regularity.
#[derive(Clone)]
pub struct IntensityFn {
    kind: Kind,
    holder: f64,
    breakpoints: Vec<f64>,
    sup_norm: f64,
}

impl fmt::Debug for IntensityFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match &self.kind {
            Kind::Constant(c) => format!("constant({c})"),
            Kind::Step { breaks, levels } => format!("step({breaks:?}, {levels:?})"),
            Kind::Linear { intercept, slope } => format!("linear({intercept} + {slope} t)"),
            Kind::Custom { name, .. } => format!("custom({name})"),
        };
        f.debug_struct("IntensityFn")
            .field("kind", &label)
            .field("holder", &self.holder)
            .field("breakpoints", &self.breakpoints)
            .field("sup_norm", &self.sup_norm)
            .finish()
    }
}

impl IntensityFn {
    pub fn constant(sigma: f64) -> Self {
        Self {
            kind: Kind::Constant(sigma),
            holder: 1.0,
            breakpoints: Vec::new(),
            sup_norm: sigma.abs(),
        }
    }

    /// Piecewise constant: `levels[0]` before `breaks[0]`, `levels[k]` on
    /// `[breaks[k-1], breaks[k])`, and the last level after the last break.
    pub fn step(breaks: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if levels.len() != breaks.len() + 1 {
            return invalid("step intensity needs one more level than breaks");
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("step breaks must be strictly increasing");
        }
        if levels.iter().chain(&breaks).any(|x| !x.is_finite()) {
            return invalid("step intensity must be finite");
        }
        let sup_norm = levels.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        Ok(Self {
            breakpoints: breaks.clone(),
            kind: Kind::Step { breaks, levels },
            holder: 1.0,
            sup_norm,
        })
    }

    /// `1_{[a, b)}`.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::step(vec![a, b], vec![0.0, 1.0, 0.0])
    }

    /// `intercept + slope * t` on `[0, horizon]`.
    pub fn linear(intercept: f64, slope: f64, horizon: f64) -> Self {
        Self {
            kind: Kind::Linear { intercept, slope },
            holder: 1.0,
            breakpoints: Vec::new(),
            sup_norm: intercept.abs().max((intercept + slope * horizon).abs()),
        }
    }

    /// An arbitrary evaluator with declared Hölder exponent, discontinuities
    /// and sup-norm bound.
    pub fn custom<F>(
        name: impl Into<String>,
        eval: F,
        holder: f64,
        breakpoints: Vec<f64>,
        sup_norm: f64,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(holder > 0.0) {
            return invalid("Hölder exponent must be positive");
        }
        Ok(Self {
            kind: Kind::Custom { name: name.into(), eval: Arc::new(eval) },
            holder,
            breakpoints,
            sup_norm,
        })
    }

    /// `a f + b g`.
    pub fn combine(a: f64, f: &IntensityFn, b: f64, g: &IntensityFn) -> Self {
        let (f2, g2) = (f.clone(), g.clone());
        let mut breaks = f.breakpoints.clone();
        breaks.extend_from_slice(&g.breakpoints);
        breaks.sort_by(|x, y| x.total_cmp(y));
        breaks.dedup();
        Self {
            kind: Kind::Custom {
                name: "combination".into(),
                eval: Arc::new(move |t| a * f2.eval(t) + b * g2.eval(t)),
            },
            holder: f.holder.min(g.holder),
            breakpoints: breaks,
            sup_norm: a.abs() * f.sup_norm + b.abs() * g.sup_norm,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Constant(c) => *c,
            Kind::Step { breaks, levels } => levels[breaks.partition_point(|&b| b <= t)],
            Kind::Linear { intercept, slope } => intercept + slope * t,
            Kind::Custom { eval, .. } => eval(t),
        }
    }

    pub fn holder_exponent(&self) -> f64 {
        self.holder
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// The constant value, if `f` is constant.
    pub fn as_constant(&self) -> Option<f64> {
        match self.kind {
            Kind::Constant(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            Kind::Constant(c) => *c == 0.0,
            Kind::Step { levels, .. } => levels.iter().all(|l| *l == 0.0),
            Kind::Linear { intercept, slope } => *intercept == 0.0 && *slope == 0.0,
            Kind::Custom { .. } => false,
        }
    }

    /// `∫_a^b f(s)^2 ds` by adaptive quadrature split at the breakpoints.
    pub fn l2_sq(&self, a: f64, b: f64) -> f64 {
        quad::integrate_with_breaks(|s| self.eval(s).powi(2), a, b, &self.breakpoints, 1e-12)
    }

    /// `∫_a^b |f(s)|^p ds`.
    pub fn lp_pow(&self, p: f64, a: f64, b: f64) -> f64 {
        quad::integrate_with_breaks(|s| self.eval(s).abs().powf(p), a, b, &self.breakpoints, 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_evaluation_is_left_closed() {
        let f = IntensityFn::step(vec![0.5], vec![1.0, 3.0]).unwrap();
        assert_eq!(f.eval(0.0), 1.0);
        assert_eq!(f.eval(0.4999), 1.0);
        assert_eq!(f.eval(0.5), 3.0);
        assert_eq!(f.sup_norm(), 3.0);
        assert!((f.l2_sq(0.0, 1.0) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn indicator_and_linear() {
        let f = IntensityFn::indicator(0.0, 0.5).unwrap();
        assert_eq!(f.eval(0.25), 1.0);
        assert_eq!(f.eval(0.75), 0.0);
        let g = IntensityFn::linear(0.0, 1.0, 1.0);
        assert!((g.l2_sq(0.0, 1.0) - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn combination_tracks_breaks() {
        let f = IntensityFn::step(vec![0.5], vec![1.0, 3.0]).unwrap();
        let g = IntensityFn::linear(1.0, 1.0, 1.0);
        let h = IntensityFn::combine(2.0, &f, -1.0, &g);
        assert_eq!(h.breakpoints(), &[0.5]);
        assert!((h.eval(0.75) - (6.0 - 1.75)).abs() < 1e-15);
    }
}
