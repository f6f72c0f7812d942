use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::VelocityGrid;
use crate::error::{LabError, LabResult};
use crate::kernel::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldRole {
    Density,
    Perturbation,
    Basis,
    Weight,
}

impl FieldRole {
    fn tag(self) -> u8 {
        match self {
            FieldRole::Density => 0,
            FieldRole::Perturbation => 1,
            FieldRole::Basis => 2,
            FieldRole::Weight => 3,
        }
    }

    fn from_tag(t: u8) -> LabResult<Self> {
        Ok(match t {
            0 => FieldRole::Density,
            1 => FieldRole::Perturbation,
            2 => FieldRole::Basis,
            3 => FieldRole::Weight,
            _ => return Err(LabError::Format(format!("unknown role tag {t}"))),
        })
    }
}

impl fmt::Display for FieldRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FieldRole::Density => "density",
            FieldRole::Perturbation => "perturbation",
            FieldRole::Basis => "basis",
            FieldRole::Weight => "weight",
        };
        f.write_str(s)
    }
}

/// Node values of a function on a [`VelocityGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField {
    grid: VelocityGrid,
    values: Vec<f64>,
    role: FieldRole,
}

const MAGIC: &[u8; 4] = b"GRZF";

impl DistributionField {
    pub fn new(grid: VelocityGrid, values: Vec<f64>, role: FieldRole) -> LabResult<Self> {
        if values.len() != grid.len() {
            return Err(LabError::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::Numerical(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values, role })
    }

    pub fn zeros(grid: VelocityGrid, role: FieldRole) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            role,
        }
    }

    pub fn from_fn(grid: VelocityGrid, role: FieldRole, f: impl Fn(&Vec3) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.node(i))).collect();
        Self { grid, values, role }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn role(&self) -> FieldRole {
        self.role
    }

    pub fn with_role(mut self, role: FieldRole) -> Self {
        self.role = role;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Same grid and role, new values.
    pub fn like(&self, values: Vec<f64>) -> LabResult<Self> {
        Self::new(self.grid, values, self.role)
    }

    pub fn map(&self, f: impl Fn(&Vec3, f64) -> f64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &x)| f(&self.grid.node(i), x))
            .collect();
        Self {
            grid: self.grid,
            values,
            role: self.role,
        }
    }

    /// Discrete `L^2` inner product `sum f g h^3`.
    pub fn inner(&self, other: &DistributionField) -> LabResult<f64> {
        self.grid.same_as(&other.grid)?;
        Ok(dot(&self.values, &other.values) * self.grid.cell_volume())
    }

    pub fn l2_norm(&self) -> f64 {
        (dot(&self.values, &self.values) * self.grid.cell_volume()).sqrt()
    }

    /// `sum f h^3`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// `sum phi(v) f(v) h^3`.
    pub fn moment(&self, phi: impl Fn(&Vec3) -> f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &x)| phi(&self.grid.node(i)) * x)
            .sum::<f64>()
            * self.grid.cell_volume()
    }

    pub fn write_binary(&self, path: &Path) -> LabResult<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&self.grid.half_width().to_le_bytes())?;
        w.write_all(&(self.grid.n() as u32).to_le_bytes())?;
        w.write_all(&[self.role.tag()])?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> LabResult<Self> {
        let mut r = BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(LabError::Format("bad field magic".into()));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let half_width = f64::from_le_bytes(b8);
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4) as usize;
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag)?;
        let role = FieldRole::from_tag(tag[0])?;
        let grid = VelocityGrid::new(half_width, n)?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            r.read_exact(&mut b8)
                .map_err(|_| LabError::Format("truncated field payload".into()))?;
            values.push(f64::from_le_bytes(b8));
        }
        if r.read(&mut tag)? != 0 {
            return Err(LabError::Format(
                "trailing bytes after field payload".into(),
            ));
        }
        Self::new(grid, values, role)
    }

    /// CSV with columns `vx,vy,vz,value`.
    pub fn write_csv(&self, path: &Path) -> LabResult<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "vx,vy,vz,value")?;
        for (i, v) in self.values.iter().enumerate() {
            let p = self.grid.node(i);
            writeln!(w, "{:e},{:e},{:e},{:e}", p[0], p[1], p[2], v)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a CSV written by [`write_csv`](Self::write_csv) back onto `grid`.
    pub fn read_csv(path: &Path, grid: VelocityGrid, role: FieldRole) -> LabResult<Self> {
        let r = BufReader::new(std::fs::File::open(path)?);
        let mut values = Vec::with_capacity(grid.len());
        for (k, line) in r.lines().enumerate() {
            let line = line?;
            if k == 0 {
                if line.trim() != "vx,vy,vz,value" {
                    return Err(LabError::Format(format!("unexpected CSV header `{line}`")));
                }
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(LabError::Format(format!(
                    "line {}: expected 4 columns",
                    k + 1
                )));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| LabError::Format(format!("line {}: {e}", k + 1)))
            };
            let idx = values.len();
            if idx >= grid.len() {
                return Err(LabError::GridMismatch("too many CSV rows".into()));
            }
            let node = grid.node(idx);
            for a in 0..3 {
                if (parse(cols[a])? - node[a]).abs() > 1e-9 * (1.0 + node[a].abs()) {
                    return Err(LabError::GridMismatch(format!(
                        "row {} is off-lattice",
                        k + 1
                    )));
                }
            }
            values.push(parse(cols[3])?);
        }
        Self::new(grid, values, role)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Global Maxwellian `mu(v) = (2 pi)^{-3/2} exp(-|v|^2 / 2)` on the lattice.
pub fn maxwellian(grid: &VelocityGrid) -> DistributionField {
    DistributionField::from_fn(*grid, FieldRole::Density, maxwellian_at)
}

#[inline]
pub fn maxwellian_at(v: &Vec3) -> f64 {
    (2.0 * std::f64::consts::PI).powf(-1.5) * (-0.5 * v.norm_squared()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maxwellian_moments() {
        let g = VelocityGrid::new(6.0, 16).unwrap();
        let mu = maxwellian(&g);
        assert!((maxwellian_at(&Vec3::zeros()) - 0.063494).abs() < 1e-6);
        let m = mu.integral();
        assert!(m <= 1.0 && m > 1.0 - 1e-6);
        assert!((mu.moment(|v| v.norm_squared()) - 3.0).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_values() {
        let g = VelocityGrid::new(6.0, 8).unwrap();
        assert!(DistributionField::new(g, vec![0.0; 10], FieldRole::Density).is_err());
        let mut v = vec![0.0; g.len()];
        v[3] = f64::NAN;
        assert!(DistributionField::new(g, v, FieldRole::Density).is_err());
    }

    #[test]
    fn io_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let g = VelocityGrid::new(4.0, 8).unwrap();
        let f =
            DistributionField::from_fn(g, FieldRole::Perturbation, |v| v[0] - 0.3 * v[2] * v[1]);
        let bin = dir.path().join("f.bin");
        f.write_binary(&bin).unwrap();
        assert_eq!(DistributionField::read_binary(&bin).unwrap(), f);
        let csv = dir.path().join("f.csv");
        f.write_csv(&csv).unwrap();
        let back = DistributionField::read_csv(&csv, g, FieldRole::Perturbation).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).abs() <= 1e-15 * (1.0 + b.abs()));
        }
    }
}
