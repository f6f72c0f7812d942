//! Kernel-adapted quadrature of the collision integral on the lattice.
//!
//! For a relative velocity `u` the deviation vector is written in the frame
//! of `u/|u|` through `t = sin(theta/2)` and an azimuth `phi`:
//! `d = |u| t (sqrt(1 - t^2) e(phi) - t u/|u|)`, so that `v' = v + d` and
//! `v'_* = v_* - d`. In these variables
//! `b^eps dsigma = 4 |ln eps|^{-1} t^{-2} ds dphi` with `s = ln t`, which is
//! integrated by Gauss–Legendre panels in `s` and a uniform azimuth rule.
//!
//! Collisions with `t` below a grazing cutoff `t_c` are not resolved by
//! nodes: their contribution is replaced by its second-order expansion in
//! `t`, which is exactly the Landau operator of the same scheme. This gives
//! the split
//!
//! `Op^eps = |ln eps|^{-1} Op_U(eps)` for `eps >= t_c`, and
//! `Op^eps = (1 - |ln t_c| / |ln eps|) Op^L + |ln eps|^{-1} Op_U(t_c)` otherwise,
//!
//! where `Op_U(t_lo)` is the resolved part over `t in [t_lo, t_max]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::grid::interp::keys_reach;
use crate::grid::VelocityGrid;
use crate::kernel::KernelParams;
use crate::quad::gauss_legendre_on;

/// Resolution of the collision quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionQuadrature {
    /// Uniform azimuth nodes (even).
    pub azimuths: usize,
    /// Gauss–Legendre nodes on the panel reaching `t_max`.
    pub top_nodes: usize,
    /// Gauss–Legendre nodes on each lower panel (one panel per decade of `t`).
    pub decade_nodes: usize,
    /// Grazing cutoff `t_c` below which the Landau expansion is used.
    pub grazing_cutoff: f64,
}

impl Default for CollisionQuadrature {
    fn default() -> Self {
        Self {
            azimuths: 8,
            top_nodes: 8,
            decade_nodes: 3,
            grazing_cutoff: 1e-4,
        }
    }
}

impl CollisionQuadrature {
    pub fn validate(&self) -> LabResult<()> {
        if self.azimuths < 2 || !self.azimuths.is_multiple_of(2) {
            return Err(LabError::param(
                "azimuths",
                format!("{} must be even and >= 2", self.azimuths),
            ));
        }
        if self.top_nodes == 0 || self.decade_nodes == 0 {
            return Err(LabError::param(
                "nodes",
                "panel node counts must be positive",
            ));
        }
        if !(self.grazing_cutoff > 0.0 && self.grazing_cutoff < 0.1) {
            return Err(LabError::param(
                "grazing_cutoff",
                format!("{} not in (0, 0.1)", self.grazing_cutoff),
            ));
        }
        Ok(())
    }

    /// Panel breakpoints in `t`, descending from `t_max` to `t_lo`: every
    /// decade `10^{-k}` and every extra cut strictly inside the range.
    pub fn breakpoints(&self, t_lo: f64, t_max: f64, extra_cuts: &[f64]) -> Vec<f64> {
        let mut b = vec![t_max, t_lo];
        let mut p = 0.1;
        while p > t_lo * (1.0 + 1e-12) {
            if p < t_max * (1.0 - 1e-12) {
                b.push(p);
            }
            p *= 0.1;
        }
        for &c in extra_cuts {
            if c > t_lo * (1.0 + 1e-12) && c < t_max * (1.0 - 1e-12) {
                b.push(c);
            }
        }
        b.sort_by(|x, y| y.total_cmp(x));
        b.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        b
    }

    /// Nodes `(t, weight of t^{-2} ds, panel)` on `[t_lo, t_max]`.
    pub fn t_nodes(
        &self,
        t_lo: f64,
        t_max: f64,
        extra_cuts: &[f64],
    ) -> (Vec<(f64, f64, u16)>, Vec<f64>) {
        let b = self.breakpoints(t_lo, t_max, extra_cuts);
        let mut out = Vec::new();
        for (p, w) in b.windows(2).enumerate() {
            let (hi, lo) = (w[0], w[1]);
            let k = if hi > 0.1 * (1.0 + 1e-12) {
                self.top_nodes
            } else {
                self.decade_nodes
            };
            for (s, ws) in gauss_legendre_on(k, lo.ln(), hi.ln()) {
                let t = s.exp();
                out.push((t, ws / (t * t), p as u16));
            }
        }
        (out, b)
    }
}

/// Which collision operator a plan evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OperatorKind {
    Boltzmann(KernelParams),
    /// Grazing limit; uses `gamma`, `eta` and `k_const` of the parameters.
    Landau(KernelParams),
}

impl OperatorKind {
    pub fn params(&self) -> &KernelParams {
        match self {
            OperatorKind::Boltzmann(p) | OperatorKind::Landau(p) => p,
        }
    }

    pub fn is_landau(&self) -> bool {
        matches!(self, OperatorKind::Landau(_))
    }

    /// `(t_lo, coefficient of Op_U, coefficient of Op^L)`.
    pub fn split(&self, quad: &CollisionQuadrature) -> (f64, f64, f64) {
        match self {
            OperatorKind::Landau(p) => (quad.grazing_cutoff, 0.0, p.k_const),
            OperatorKind::Boltzmann(p) => {
                let l = p.log_inv_eps();
                let tc = quad.grazing_cutoff;
                if p.epsilon >= tc {
                    (p.epsilon, 1.0 / l, 0.0)
                } else {
                    (tc, 1.0 / l, 1.0 + tc.ln() / l)
                }
            }
        }
    }
}

/// One resolved deviation: weight (without the split coefficient),
/// displacement in lattice units, Keys stencil reach and panel index.
#[derive(Debug, Clone, Copy)]
pub struct SigmaNode {
    pub w: f64,
    pub d: [f64; 3],
    pub lo: [i8; 3],
    pub hi: [i8; 3],
    pub panel: u16,
}

/// One grazing direction: weight and unit vector `e` orthogonal to `u`.
#[derive(Debug, Clone, Copy)]
pub struct AzimuthNode {
    pub w: f64,
    pub e: [f64; 3],
}

#[derive(Debug, Clone, Default)]
pub struct PairEntry {
    /// `|u| / h`.
    pub r: f64,
    pub uhat: [f64; 3],
    pub sigma: std::ops::Range<usize>,
    pub grazing: std::ops::Range<usize>,
}

/// Orthonormal frame `(u/|u|, e1, e2)` with `frame(-u) = -frame(u)` exactly.
pub fn antisymmetric_frame(u: [f64; 3]) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let flip = u
        .iter()
        .find(|x| **x != 0.0)
        .map(|x| *x < 0.0)
        .unwrap_or(false);
    let c = if flip { [-u[0], -u[1], -u[2]] } else { u };
    let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    let ch = [c[0] / r, c[1] / r, c[2] / r];
    let mut a = 0;
    for k in 1..3 {
        if ch[k].abs() < ch[a].abs() {
            a = k;
        }
    }
    let mut ax = [0.0; 3];
    ax[a] = 1.0;
    let cross = |x: [f64; 3], y: [f64; 3]| {
        [
            x[1] * y[2] - x[2] * y[1],
            x[2] * y[0] - x[0] * y[2],
            x[0] * y[1] - x[1] * y[0],
        ]
    };
    let e1 = cross(ax, ch);
    let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    let e1 = [e1[0] / n1, e1[1] / n1, e1[2] / n1];
    let e2 = cross(ch, e1);
    if flip {
        let neg = |x: [f64; 3]| [-x[0], -x[1], -x[2]];
        (neg(ch), neg(e1), neg(e2))
    } else {
        (ch, e1, e2)
    }
}

/// Precomputed collision geometry for every lattice offset `i - j`.
#[derive(Debug, Clone)]
pub struct CollisionPlan {
    pub(crate) grid: VelocityGrid,
    pub(crate) kind: OperatorKind,
    pub(crate) quad: CollisionQuadrature,
    pub(crate) u_coeff: f64,
    pub(crate) landau_coeff: f64,
    pub(crate) breakpoints: Vec<f64>,
    pub(crate) entries: Vec<PairEntry>,
    pub(crate) sigma: Vec<SigmaNode>,
    pub(crate) grazing: Vec<AzimuthNode>,
}

impl CollisionPlan {
    pub fn new(
        grid: &VelocityGrid,
        kind: OperatorKind,
        quad: &CollisionQuadrature,
    ) -> LabResult<Self> {
        let (t_lo, u_coeff, landau_coeff) = kind.split(quad);
        Self::build(grid, kind, quad, t_lo, u_coeff, landau_coeff, &[])
    }

    /// Plan holding both pieces with unit coefficients, resolved down to
    /// `t_lo`, with extra panel cuts. Used to assemble a whole epsilon sweep
    /// in one pass.
    pub fn raw(
        grid: &VelocityGrid,
        params: &KernelParams,
        quad: &CollisionQuadrature,
        t_lo: f64,
        extra_cuts: &[f64],
    ) -> LabResult<Self> {
        Self::build(
            grid,
            OperatorKind::Boltzmann(*params),
            quad,
            t_lo,
            1.0,
            1.0,
            extra_cuts,
        )
    }

    fn build(
        grid: &VelocityGrid,
        kind: OperatorKind,
        quad: &CollisionQuadrature,
        t_lo: f64,
        u_coeff: f64,
        landau_coeff: f64,
        extra_cuts: &[f64],
    ) -> LabResult<Self> {
        quad.validate()?;
        let params = *kind.params();
        let n = grid.n() as i64;
        let h = grid.spacing();
        let side = (2 * n - 1) as usize;
        let t_max = params.t_max();
        let (tn, breakpoints) = if u_coeff != 0.0 {
            quad.t_nodes(t_lo, t_max, extra_cuts)
        } else {
            (Vec::new(), Vec::new())
        };
        let m = quad.azimuths;
        let dphi = 2.0 * PI / m as f64;
        let azi: Vec<(f64, f64)> = (0..m)
            .map(|k| {
                let phi = dphi * (k as f64 + 0.5);
                (phi.cos(), phi.sin())
            })
            .collect();
        let cell = grid.cell_volume();
        let mut entries = vec![PairEntry::default(); side * side * side];
        let mut sigma = Vec::new();
        let mut grazing = Vec::new();
        for dx in -(n - 1)..n {
            for dy in -(n - 1)..n {
                for dz in -(n - 1)..n {
                    if dx == 0 && dy == 0 && dz == 0 {
                        continue;
                    }
                    let u = [dx as f64 * h, dy as f64 * h, dz as f64 * h];
                    let umag = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
                    if umag < params.eta {
                        continue;
                    }
                    let (uh, e1, e2) = antisymmetric_frame(u);
                    let kin = umag.powf(params.gamma);
                    let r = umag / h;
                    let s0 = sigma.len();
                    if u_coeff != 0.0 {
                        for &(t, wt, panel) in &tn {
                            let st = (1.0 - t * t).sqrt();
                            for &(c, s) in &azi {
                                let mut d = [0.0; 3];
                                let mut lo = [0i8; 3];
                                let mut hi = [0i8; 3];
                                for a in 0..3 {
                                    let e = c * e1[a] + s * e2[a];
                                    d[a] = r * t * (st * e - t * uh[a]);
                                    let (l, u) = keys_reach(d[a]);
                                    lo[a] = l as i8;
                                    hi[a] = u as i8;
                                }
                                sigma.push(SigmaNode {
                                    w: kin * 4.0 * wt * dphi * cell,
                                    d,
                                    lo,
                                    hi,
                                    panel,
                                });
                            }
                        }
                    }
                    let g0 = grazing.len();
                    if landau_coeff != 0.0 {
                        for &(c, s) in &azi {
                            let e = [
                                c * e1[0] + s * e2[0],
                                c * e1[1] + s * e2[1],
                                c * e1[2] + s * e2[2],
                            ];
                            grazing.push(AzimuthNode {
                                w: kin * 4.0 * dphi * cell,
                                e,
                            });
                        }
                    }
                    let key = offset_key(n, [dx, dy, dz]);
                    entries[key] = PairEntry {
                        r,
                        uhat: uh,
                        sigma: s0..sigma.len(),
                        grazing: g0..grazing.len(),
                    };
                }
            }
        }
        Ok(Self {
            grid: *grid,
            kind,
            quad: *quad,
            u_coeff,
            landau_coeff,
            breakpoints,
            entries,
            sigma,
            grazing,
        })
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn quadrature(&self) -> &CollisionQuadrature {
        &self.quad
    }

    /// Coefficients multiplying the resolved and grazing pieces.
    pub fn coefficients(&self) -> (f64, f64) {
        (self.u_coeff, self.landau_coeff)
    }

    /// Panel breakpoints of the resolved part (descending).
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn sigma_nodes_per_pair(&self) -> usize {
        self.entries
            .iter()
            .map(|e| e.sigma.len())
            .max()
            .unwrap_or(0)
    }

    #[inline]
    pub(crate) fn entry(&self, xi: [usize; 3], xj: [usize; 3]) -> &PairEntry {
        let n = self.grid.n() as i64;
        let key = offset_key(
            n,
            [
                xi[0] as i64 - xj[0] as i64,
                xi[1] as i64 - xj[1] as i64,
                xi[2] as i64 - xj[2] as i64,
            ],
        );
        &self.entries[key]
    }
}

impl CollisionPlan {
    /// Geometry for the relative offset `i - j` (lattice units).
    #[inline]
    pub(crate) fn entry_for_offset(&self, u: [i64; 3]) -> &PairEntry {
        &self.entries[offset_key(self.grid.n() as i64, u)]
    }
}

#[inline]
fn offset_key(n: i64, d: [i64; 3]) -> usize {
    let side = 2 * n - 1;
    (((d[0] + n - 1) * side + (d[1] + n - 1)) * side + (d[2] + n - 1)) as usize
}

/// Pairwise-symmetric admissibility: the Keys stencils of `v_i + d` and of
/// `v_j - d` lie on the lattice even after reflecting `d`. The reach is taken
/// symmetric so that an azimuth and its opposite are admitted together near a
/// face; otherwise the first-order jumps stop cancelling and the resolved part
/// grows like `1/t_lo`. For small `d` this is exactly [`grazing_fits`].
#[inline]
pub(crate) fn sigma_fits(n: usize, xi: [usize; 3], xj: [usize; 3], s: &SigmaNode) -> bool {
    let n = n as i64;
    (0..3).all(|a| {
        let r = (-(s.lo[a] as i64)).max(s.hi[a] as i64);
        let (i, j) = (xi[a] as i64, xj[a] as i64);
        i >= r && i + r < n && j >= r && j + r < n
    })
}

/// Both nodes at least two cells from every face; the grazing stencils then
/// fit on the lattice.
#[inline]
pub(crate) fn grazing_fits(n: usize, xi: [usize; 3], xj: [usize; 3]) -> bool {
    (0..3).all(|a| xi[a] >= 2 && xi[a] + 2 < n && xj[a] >= 2 && xj[a] + 2 < n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_is_orthonormal_and_antisymmetric() {
        for u in [
            [1.0, 0.0, 0.0],
            [0.0, -2.0, 1.5],
            [0.75, 0.75, -0.75],
            [-3.0, 1.0, 2.0],
        ] {
            let (a, b, c) = antisymmetric_frame(u);
            let (a2, b2, c2) = antisymmetric_frame([-u[0], -u[1], -u[2]]);
            for k in 0..3 {
                assert_eq!(a[k], -a2[k]);
                assert_eq!(b[k], -b2[k]);
                assert_eq!(c[k], -c2[k]);
            }
            let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
            assert!((dot(a, a) - 1.0).abs() < 1e-15 && (dot(b, b) - 1.0).abs() < 1e-15);
            assert!(dot(a, b).abs() < 1e-15 && dot(a, c).abs() < 1e-15 && dot(b, c).abs() < 1e-15);
        }
    }

    #[test]
    fn t_nodes_integrate_the_angular_moments() {
        // sum over nodes of 4 t^{-2} ds dphi * sin^2(theta/2) reproduces the
        // closed-form k = 2 moment
        let q = CollisionQuadrature::default();
        let p = KernelParams::coulomb(1e-3).unwrap();
        let (nodes, _) = q.t_nodes(p.epsilon, p.t_max(), &[]);
        let s: f64 =
            nodes.iter().map(|(t, w, _)| 4.0 * w * t * t).sum::<f64>() * 2.0 * PI / p.log_inv_eps();
        let exact = crate::kernel::angular_moment(&p, 2).unwrap();
        assert!((s - exact).abs() < 1e-12 * exact);
        let s1: f64 =
            nodes.iter().map(|(t, w, _)| 4.0 * w * t).sum::<f64>() * 2.0 * PI / p.log_inv_eps();
        let exact1 = crate::kernel::angular_moment(&p, 1).unwrap();
        // three nodes per decade resolve the t^{-1} integrand to a few 1e-4
        assert!((s1 - exact1).abs() < 2e-3 * exact1, "{s1} vs {exact1}");
    }

    #[test]
    fn breakpoints_include_cuts() {
        let q = CollisionQuadrature::default();
        let b = q.breakpoints(1e-4, std::f64::consts::FRAC_1_SQRT_2, &[2e-3, 1e-2]);
        assert_eq!(b.len(), 6);
        assert!(b.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn split_is_continuous_at_the_cutoff() {
        let q = CollisionQuadrature::default();
        let tc = q.grazing_cutoff;
        let a = OperatorKind::Boltzmann(KernelParams::coulomb(tc).unwrap()).split(&q);
        let b =
            OperatorKind::Boltzmann(KernelParams::coulomb(tc * (1.0 - 1e-12)).unwrap()).split(&q);
        assert!((a.1 - b.1).abs() < 1e-12 && b.2.abs() < 1e-11);
    }
}
