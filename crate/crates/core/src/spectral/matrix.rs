//! Dense symmetric matrices of the linearized operators.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{LabError, LabResult};
use crate::grid::{DistributionField, VelocityGrid};
use crate::operators::{linearized_matrix, CollisionPlan, LinearizedSweep, OperatorKind};

const MAGIC: &[u8; 4] = b"GZLM";

/// Asymmetry above which an assembled matrix is flagged.
pub const ASYMMETRY_FLAG: f64 = 1e-3;

/// Relative threshold `|lambda| <= NULL_TOLERANCE * |M|` for the null count.
pub const NULL_TOLERANCE: f64 = 1e-4;

/// `L^eps` or `L^L` on a lattice, `<L f, g> = h^3 sum (M f)_b g_b`.
#[derive(Debug, Clone)]
pub struct LinearOperatorMatrix {
    grid: VelocityGrid,
    kind: OperatorKind,
    matrix: DMatrix<f64>,
    asymmetry: f64,
}

impl LinearOperatorMatrix {
    /// Symmetrizes `m` and records `|M - M^T| / |M|` in the max norm.
    pub fn from_matrix(grid: VelocityGrid, kind: OperatorKind, m: DMatrix<f64>) -> LabResult<Self> {
        if m.nrows() != grid.len() || m.ncols() != grid.len() {
            return Err(LabError::GridMismatch(format!(
                "{}x{} matrix for {} nodes",
                m.nrows(),
                m.ncols(),
                grid.len()
            )));
        }
        let scale = m.amax();
        let t = m.transpose();
        let asymmetry = if scale > 0.0 {
            (&m - &t).amax() / scale
        } else {
            0.0
        };
        let matrix = (m + t) * 0.5;
        Ok(Self {
            grid,
            kind,
            matrix,
            asymmetry,
        })
    }

    pub fn assemble(plan: &CollisionPlan) -> LabResult<Self> {
        Self::from_matrix(*plan.grid(), *plan.kind(), linearized_matrix(plan)?)
    }

    pub fn from_sweep(sweep: &LinearizedSweep, kind: OperatorKind) -> LabResult<Self> {
        Self::from_matrix(*sweep.grid(), kind, sweep.matrix(&kind)?)
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn flagged(&self) -> bool {
        self.asymmetry > ASYMMETRY_FLAG
    }

    pub fn apply(&self, f: &DistributionField) -> LabResult<DistributionField> {
        self.grid.same_as(f.grid())?;
        let x = DVector::from_column_slice(f.values());
        f.like((&self.matrix * x).as_slice().to_vec())
    }

    /// `<L f, f>`.
    pub fn quadratic_form(&self, f: &DistributionField) -> LabResult<f64> {
        let lf = self.apply(f)?;
        lf.inner(f)
    }

    /// Ascending eigenvalues by dense symmetric tridiagonalization.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        e.sort_by(|a, b| a.total_cmp(b));
        e
    }

    pub fn write_binary(&self, path: &Path) -> LabResult<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        let kind = serde_json::to_vec(&self.kind).map_err(|e| LabError::Format(e.to_string()))?;
        w.write_all(MAGIC)?;
        w.write_all(&self.grid.half_width().to_le_bytes())?;
        w.write_all(&(self.grid.n() as u32).to_le_bytes())?;
        w.write_all(&(self.grid.len() as u64).to_le_bytes())?;
        w.write_all(&self.asymmetry.to_le_bytes())?;
        w.write_all(&(kind.len() as u32).to_le_bytes())?;
        w.write_all(&kind)?;
        let n = self.grid.len();
        for i in 0..n {
            for j in 0..n {
                w.write_all(&self.matrix[(i, j)].to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> LabResult<Self> {
        let mut r = BufReader::new(std::fs::File::open(path)?);
        let truncated = |_| LabError::Format("truncated matrix file".into());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(LabError::Format("bad matrix magic".into()));
        }
        let mut b8 = [0u8; 8];
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b8).map_err(truncated)?;
        let half_width = f64::from_le_bytes(b8);
        r.read_exact(&mut b4).map_err(truncated)?;
        let grid = VelocityGrid::new(half_width, u32::from_le_bytes(b4) as usize)?;
        r.read_exact(&mut b8).map_err(truncated)?;
        let n = u64::from_le_bytes(b8) as usize;
        if n != grid.len() {
            return Err(LabError::Format(format!(
                "dimension {n} does not match the grid"
            )));
        }
        r.read_exact(&mut b8).map_err(truncated)?;
        let asymmetry = f64::from_le_bytes(b8);
        r.read_exact(&mut b4).map_err(truncated)?;
        let mut kind = vec![0u8; u32::from_le_bytes(b4) as usize];
        r.read_exact(&mut kind).map_err(truncated)?;
        let kind: OperatorKind =
            serde_json::from_slice(&kind).map_err(|e| LabError::Format(e.to_string()))?;
        let mut data = vec![0.0; n * n];
        for x in data.iter_mut() {
            r.read_exact(&mut b8).map_err(truncated)?;
            *x = f64::from_le_bytes(b8);
        }
        if r.read(&mut b4)? != 0 {
            return Err(LabError::Format(
                "trailing bytes after matrix payload".into(),
            ));
        }
        Ok(Self {
            grid,
            kind,
            matrix: DMatrix::from_row_slice(n, n, &data),
            asymmetry,
        })
    }
}

/// `|M| = max |lambda|` of an ascending spectrum.
pub fn spectral_norm(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Number of eigenvalues with `|lambda| <= NULL_TOLERANCE * |M|`.
pub fn null_count(eigenvalues: &[f64]) -> usize {
    let cut = NULL_TOLERANCE * spectral_norm(eigenvalues);
    eigenvalues.iter().filter(|x| x.abs() <= cut).count()
}

pub fn write_spectrum_csv(eigenvalues: &[f64], path: &Path) -> LabResult<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "index,eigenvalue")?;
    for (i, x) in eigenvalues.iter().enumerate() {
        writeln!(w, "{i},{x:e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_spectrum_csv(path: &Path) -> LabResult<Vec<f64>> {
    let r = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if k == 0 {
            if line.trim() != "index,eigenvalue" {
                return Err(LabError::Format(format!("unexpected CSV header `{line}`")));
            }
            continue;
        }
        let (i, x) = line
            .split_once(',')
            .ok_or_else(|| LabError::Format(format!("line {}: expected 2 columns", k + 1)))?;
        if i.trim().parse::<usize>().ok() != Some(out.len()) {
            return Err(LabError::Format(format!(
                "line {}: index out of order",
                k + 1
            )));
        }
        out.push(
            x.trim()
                .parse()
                .map_err(|e| LabError::Format(format!("line {}: {e}", k + 1)))?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelParams;

    fn toy() -> LinearOperatorMatrix {
        let g = VelocityGrid::new(3.0, 8).unwrap();
        let n = g.len();
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                (i % 7) as f64
            } else if i + 1 == j {
                0.25
            } else if j + 1 == i {
                0.25 + 1e-6
            } else {
                0.0
            }
        });
        let kind = OperatorKind::Boltzmann(KernelParams::coulomb(1e-2).unwrap());
        LinearOperatorMatrix::from_matrix(g, kind, m).unwrap()
    }

    #[test]
    fn symmetrization_records_asymmetry() {
        let m = toy();
        assert_eq!(m.matrix(), &m.matrix().transpose());
        assert!((m.asymmetry() - 1e-6 / 6.0).abs() < 1e-12);
        assert!(!m.flagged());
    }

    #[test]
    fn binary_round_trip() {
        let m = toy();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.bin");
        m.write_binary(&p).unwrap();
        let r = LinearOperatorMatrix::read_binary(&p).unwrap();
        assert_eq!(r.matrix(), m.matrix());
        assert_eq!(r.kind(), m.kind());
        assert_eq!(r.asymmetry(), m.asymmetry());
        let mut bytes = std::fs::read(&p).unwrap();
        bytes.pop();
        std::fs::write(&p, &bytes).unwrap();
        assert!(matches!(
            LinearOperatorMatrix::read_binary(&p),
            Err(LabError::Format(_))
        ));
    }

    #[test]
    fn spectrum_csv_round_trip_and_null_count() {
        let e = vec![-1e-9, 0.0, 3e-5, 0.5, 1.0];
        assert_eq!(null_count(&e), 3);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_spectrum_csv(&e, &p).unwrap();
        assert_eq!(read_spectrum_csv(&p).unwrap(), e);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let g = VelocityGrid::new(3.0, 8).unwrap();
        let kind = OperatorKind::Boltzmann(KernelParams::coulomb(1e-2).unwrap());
        assert!(LinearOperatorMatrix::from_matrix(g, kind, DMatrix::zeros(3, 3)).is_err());
    }
}
