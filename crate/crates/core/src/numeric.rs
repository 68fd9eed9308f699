//! Summation helpers shared by the variation sweeps and Monte Carlo reductions.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Deterministic pairwise summation. The result depends only on the slice
/// contents and their order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sum of `(values[i + step] - values[i])^2` over `i = 0, step, 2*step, ...`
/// for `i` in `[lo, hi)`, compensated.
pub(crate) fn sum_sq_increments(values: &[f64], lo: usize, hi: usize, step: usize) -> f64 {
    let mut acc = CompensatedSum::new();
    let mut i = lo;
    while i < hi {
        let d = values[i + step] - values[i];
        acc.add(d * d);
        i += step;
    }
    acc.value()
}
