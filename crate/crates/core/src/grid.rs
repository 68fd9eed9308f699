//! Nested equidistant partitions of `[0, T]`: a fine grid of `n` steps and a
//! coarse grid of `K_n` blocks whose nodes are fine-grid nodes.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    horizon: f64,
    fine: usize,
    blocks: usize,
}

impl GridSpec {
    pub fn new(horizon: f64, fine: usize, blocks: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return invalid(format!("horizon must be positive, got {horizon}"));
        }
        if fine == 0 || blocks == 0 {
            return invalid("grid sizes must be positive");
        }
        if !fine.is_multiple_of(blocks) {
            return Err(Error::NonDivisibleGrid { fine, blocks });
        }
        Ok(Self { horizon, fine, blocks })
    }

    /// Grid whose block width is close to `delta^alpha`: `K_n` is the divisor
    /// of `n` nearest to `T / delta^alpha` on a log scale.
    pub fn with_block_exponent(horizon: f64, fine: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return invalid(format!("block exponent must be in (0,1), got {alpha}"));
        }
        let delta = horizon / fine as f64;
        let target = horizon / delta.powf(alpha);
        let blocks = nearest_divisor(fine, target);
        Self::new(horizon, fine, blocks)
    }

    /// Grid with `K_n` the divisor of `n` closest to `sqrt(n)`.
    pub fn with_sqrt_blocks(horizon: f64, fine: usize) -> Result<Self> {
        Self::new(horizon, fine, nearest_divisor(fine, (fine as f64).sqrt()))
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of fine steps `n`.
    pub fn fine(&self) -> usize {
        self.fine
    }

    /// Number of coarse blocks `K_n`.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// Fine mesh `delta_n = T / n`.
    pub fn delta(&self) -> f64 {
        self.horizon / self.fine as f64
    }

    /// Coarse mesh `Delta_n = T / K_n`.
    pub fn block_width(&self) -> f64 {
        self.horizon / self.blocks as f64
    }

    /// Fine steps per block `D_n = n / K_n`.
    pub fn block_len(&self) -> usize {
        self.fine / self.blocks
    }

    pub fn node(&self, i: usize) -> f64 {
        self.horizon * (i as f64 / self.fine as f64)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.fine).map(|i| self.node(i))
    }

    /// Index of the fine node equal to `t`.
    pub fn node_index(&self, t: f64) -> Result<usize> {
        let x = t / self.delta();
        let i = x.round();
        if !(0.0..=self.fine as f64).contains(&i) || (x - i).abs() > 1e-9 * i.max(1.0) {
            return Err(Error::NotANode { value: t, mesh: self.delta() });
        }
        Ok(i as usize)
    }

    /// Fine-index range `[lo, hi)` of left endpoints in block `j`.
    pub fn block_range(&self, j: usize) -> (usize, usize) {
        let d = self.block_len();
        (j * d, (j + 1) * d)
    }

    /// Coarsened grid keeping every `step`-th node. Blocks are kept when
    /// they still divide the coarse size, otherwise collapsed to one.
    pub fn coarsened(&self, step: usize) -> Result<Self> {
        if step == 0 || !self.fine.is_multiple_of(step) {
            return invalid(format!("cannot coarsen n={} by {step}", self.fine));
        }
        let fine = self.fine / step;
        let blocks = if fine.is_multiple_of(self.blocks) { self.blocks } else { 1 };
        Self::new(self.horizon, fine, blocks)
    }

    pub fn with_blocks(&self, blocks: usize) -> Result<Self> {
        Self::new(self.horizon, self.fine, blocks)
    }
}

fn nearest_divisor(n: usize, target: f64) -> usize {
    (1..=n)
        .filter(|k| n.is_multiple_of(*k))
        .min_by(|a, b| {
            let da = ((*a as f64).ln() - target.ln()).abs();
            let db = ((*b as f64).ln() - target.ln()).abs();
            da.total_cmp(&db)
        })
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_meshes() {
        let g = GridSpec::new(1.0, 8, 2).unwrap();
        assert_eq!(g.delta(), 0.125);
        assert_eq!(g.block_width(), 0.5);
        assert_eq!(g.block_len(), 4);

        let g = GridSpec::new(2.0, 4, 4).unwrap();
        assert_eq!(g.delta(), 0.5);
        assert_eq!(g.block_width(), 0.5);
        assert_eq!(g.block_len(), 1);
    }

    #[test]
    fn rejects_non_divisible() {
        assert_eq!(
            GridSpec::new(1.0, 6, 4),
            Err(Error::NonDivisibleGrid { fine: 6, blocks: 4 })
        );
        assert!(GridSpec::new(0.0, 4, 2).is_err());
    }

    #[test]
    fn dyadic_grids_are_exact() {
        for p in 0..20 {
            let n = 1usize << p;
            let g = GridSpec::new(1.0, n, 1).unwrap();
            assert_eq!(g.delta() * n as f64, 1.0);
            for i in [0, n / 3, n / 2, n] {
                assert_eq!(g.node_index(g.node(i)).unwrap(), i);
            }
        }
    }

    #[test]
    fn node_lookup_rejects_off_grid() {
        let g = GridSpec::new(1.0, 4, 1).unwrap();
        assert_eq!(g.node_index(0.5).unwrap(), 2);
        assert!(g.node_index(0.3).is_err());
        assert!(g.node_index(1.25).is_err());
    }

    #[test]
    fn block_exponent_and_sqrt() {
        let g = GridSpec::with_block_exponent(1.0, 1 << 16, 0.5).unwrap();
        assert_eq!(g.blocks(), 256);
        let g = GridSpec::with_sqrt_blocks(1.0, 1 << 14).unwrap();
        assert_eq!(g.blocks(), 128);
        let g = GridSpec::with_sqrt_blocks(1.0, 1 << 17).unwrap();
        assert!(g.blocks() == 256 || g.blocks() == 512);
    }
}
