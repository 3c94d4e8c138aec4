//! Dense scans of the relaxation length over the unit square.
//!
//! Cell `(row, col)` of an `R x R` grid holds `L(p, q)` sampled at the
//! cell center `p = (2 col + 1) / 2R`, `q = (2 row + 1) / 2R`. Centers
//! avoid the rational lines where the length jumps, and they are exact
//! grid points, so the scan inherits the mirror symmetry of the length
//! cell for cell.

use std::io::{self, Write};

use num_rational::Ratio;
use rayon::prelude::*;

use crate::config::PointConfig;
use crate::coord::Coord;
use crate::relax::relax;

/// Row-major matrix of relaxation lengths; `0` marks cells whose
/// relaxation tripped the sweep guard.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RasterGrid {
    resolution: u32,
    values: Vec<u32>,
}

/// Scans every cell center of an `R x R` grid. Diagonal cells have
/// `p = q`; the duplicate grain is dropped there (the toppling operator
/// is idempotent, so the length is unaffected).
pub fn scan(resolution: u32, max_sweeps: u64) -> RasterGrid {
    assert!(resolution >= 2, "resolution must be at least 2");
    let r = resolution as u64;
    let den = 2 * r;
    let values: Vec<u32> = (0..r * r)
        .into_par_iter()
        .map(|cell| {
            let (row, col) = (cell / r, cell % r);
            let p = Coord::new(2 * col + 1, den);
            let q = Coord::new(2 * row + 1, den);
            let cfg = if row == col {
                PointConfig::new(vec![p])
            } else {
                PointConfig::new(vec![p, q])
            }
            .expect("cell centers are interior and distinct");
            match relax(&cfg, max_sweeps) {
                Ok(res) => res.sweeps.min(u32::MAX as u64) as u32,
                Err(_) => 0,
            }
        })
        .collect();
    RasterGrid { resolution, values }
}

impl RasterGrid {
    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn value(&self, row: u32, col: u32) -> u32 {
        self.values[(row as usize) * (self.resolution as usize) + col as usize]
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Cells whose relaxation tripped the guard, as `(row, col)`.
    pub fn guard_tripped(&self) -> Vec<(u32, u32)> {
        let r = self.resolution;
        self.values
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v == 0)
            .map(|(k, _)| (k as u32 / r, k as u32 % r))
            .collect()
    }

    /// Fraction of cells with the given length: the pixel-count estimate
    /// of the locus area.
    pub fn area_estimate(&self, length: u32) -> Ratio<u64> {
        let count = self.values.iter().filter(|&&v| v == length).count() as u64;
        let cells = self.values.len() as u64;
        Ratio::new(count, cells)
    }

    /// Binary PGM (P5, maxval 255); lengths saturate at 255.
    pub fn write_pgm(&self, mut w: impl Write) -> io::Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.resolution, self.resolution)?;
        let bytes: Vec<u8> = self.values.iter().map(|&v| v.min(255) as u8).collect();
        w.write_all(&bytes)
    }

    /// One CSV row per grid row, comma-separated full length values.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        for row in self.values.chunks(self.resolution as usize) {
            let mut first = true;
            for v in row {
                if !first {
                    write!(w, ",")?;
                }
                write!(w, "{}", v)?;
                first = false;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
