//! Field snapshots on the physical grid.
//!
//! Binary layout (little endian): the 8 bytes `TFSNAP01`, `n` as `u64`,
//! `t` as `f64`, then the `u`, `v` and `p` grids, each `n * n` `f64`
//! values in row-major order (index `j * n + i`, `x` varying fastest).
//!
//! The CSV form has the header `n,t,i,j,u,v,p` and one row per grid point
//! in the same order.

use std::io::{Read, Write};

use crate::error::SpectralError;
use crate::field::{ScalarField, VelocityField};
use crate::grid::Grid;

const MAGIC: &[u8; 8] = b"TFSNAP01";

/// Physical samples of one flow state.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub n: usize,
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
}

impl Snapshot {
    pub fn new(grid: &Grid, t: f64, velocity: &VelocityField, pressure: &ScalarField) -> Self {
        let (u, v) = velocity.to_physical(grid);
        Self {
            n: grid.n(),
            t,
            u,
            v,
            p: pressure.to_physical(grid),
        }
    }

    pub fn write_binary(&self, mut out: impl Write) -> Result<(), SpectralError> {
        out.write_all(MAGIC)?;
        out.write_all(&(self.n as u64).to_le_bytes())?;
        out.write_all(&self.t.to_le_bytes())?;
        for grid in [&self.u, &self.v, &self.p] {
            for x in grid {
                out.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary(mut input: impl Read) -> Result<Self, SpectralError> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(SpectralError::BadSnapshot("unknown header".into()));
        }
        let mut word = [0u8; 8];
        input.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        if n == 0 || n > 1 << 14 {
            return Err(SpectralError::BadSnapshot(format!("implausible size {n}")));
        }
        input.read_exact(&mut word)?;
        let t = f64::from_le_bytes(word);
        let mut read_grid = || -> Result<Vec<f64>, SpectralError> {
            (0..n * n)
                .map(|_| {
                    input.read_exact(&mut word)?;
                    Ok(f64::from_le_bytes(word))
                })
                .collect()
        };
        let u = read_grid()?;
        let v = read_grid()?;
        let p = read_grid()?;
        Ok(Self { n, t, u, v, p })
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<(), SpectralError> {
        writeln!(out, "n,t,i,j,u,v,p")?;
        for idx in 0..self.n * self.n {
            writeln!(
                out,
                "{},{:e},{},{},{:e},{:e},{:e}",
                self.n,
                self.t,
                idx % self.n,
                idx / self.n,
                self.u[idx],
                self.v[idx],
                self.p[idx]
            )?;
        }
        Ok(())
    }
}
