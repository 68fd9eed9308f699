use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fgn::RngSeed;
use crate::grid::GridSpec;

/// Where a path came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    /// Drawn by one of the generators.
    Simulated { generator: String, seed: RngSeed },
    /// Euler solution of an SDE.
    Solved,
    /// Wiener integral of a deterministic integrand.
    Integrated,
    /// Read from a file.
    Ingested,
    /// Built directly from values (tests, synthetic inputs).
    Constructed,
}

/// Values of a process on the fine nodes of a grid. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    grid: GridSpec,
    values: Vec<f64>,
    provenance: Provenance,
}

impl SamplePath {
    pub fn new(grid: GridSpec, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if values.len() != grid.fine() + 1 {
            return invalid(format!(
                "path has {} values, grid needs {}",
                values.len(),
                grid.fine() + 1
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("path value at index {i}")));
        }
        Ok(Self { grid, values, provenance })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn initial(&self) -> f64 {
        self.values[0]
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.windows(2).map(|w| w[1] - w[0])
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.grid,
            self.values.iter().map(|v| c * v).collect(),
            self.provenance.clone(),
        )
    }

    /// The path observed at every `step`-th node.
    pub fn decimated(&self, step: usize) -> Result<Self> {
        let grid = self.grid.coarsened(step)?;
        let values = self.values.iter().step_by(step).copied().collect();
        Self::new(grid, values, self.provenance.clone())
    }

    /// Same values on a grid with a different block count.
    pub fn with_blocks(&self, blocks: usize) -> Result<Self> {
        Ok(Self { grid: self.grid.with_blocks(blocks)?, ..self.clone() })
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// CSV with header `t,value` and 17 significant digits per number.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e}", self.grid.node(i), v)?;
        }
        Ok(())
    }

    /// Reads the `t,value` format back. The times must be equidistant from
    /// zero; the grid gets a single block.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('t')) {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("bad CSV line {}", lineno + 1)))
            };
            ts.push(parse(parts.next())?);
            vs.push(parse(parts.next())?);
        }
        if vs.len() < 2 {
            return invalid("path file needs at least two rows");
        }
        let n = vs.len() - 1;
        let grid = GridSpec::new(ts[n], n, 1)?;
        for (i, &t) in ts.iter().enumerate() {
            if (t - grid.node(i)).abs() > 1e-9 * grid.horizon() {
                return invalid(format!("row {i}: time {t} is not on an equidistant grid"));
            }
        }
        Self::new(grid, vs, Provenance::Ingested)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length_and_nan() {
        let g = GridSpec::new(1.0, 4, 1).unwrap();
        assert!(SamplePath::new(g, vec![0.0; 4], Provenance::Constructed).is_err());
        assert!(SamplePath::new(g, vec![0.0, 1.0, f64::NAN, 0.0, 0.0], Provenance::Constructed).is_err());
    }

    #[test]
    fn decimation_keeps_even_nodes() {
        let g = GridSpec::new(1.0, 8, 2).unwrap();
        let p = SamplePath::new(g, (0..9).map(f64::from).collect(), Provenance::Constructed).unwrap();
        let d = p.decimated(2).unwrap();
        assert_eq!(d.values(), &[0.0, 2.0, 4.0, 6.0, 8.0]);
        assert_eq!(d.grid().fine(), 4);
        assert_eq!(d.grid().blocks(), 2);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let g = GridSpec::new(1.0, 4, 1).unwrap();
        let vals = vec![0.0, 0.1, -1.0 / 3.0, 2.5e-7, std::f64::consts::PI];
        let p = SamplePath::new(g, vals, Provenance::Constructed).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,value\n"));
        let q = SamplePath::read_csv(&buf[..]).unwrap();
        assert_eq!(q.values(), p.values());
        assert_eq!(q.grid().fine(), 4);
    }
}
