//! Off-lattice interpolation kernels.
//!
//! Three families are provided:
//! * Keys cubic convolution (`a = -1/2`): a C^1 kernel that reproduces
//!   quadratics, used by the scatter-form collision operators;
//! * corrected trilinear: trilinear plus an axis-wise second-difference
//!   correction, quadratic-exact on a 14-node stencil, used by the
//!   linearized operator;
//! * plain trilinear, used to sample fields on spherical shells.

use super::{DistributionField, VelocityGrid};
use crate::kernel::Vec3;

/// One-dimensional Keys stencil: four lattice offsets, the interpolation
/// weights, and the weights minus the identity (`w - [offset == 0]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeysStencil {
    pub offsets: [i32; 4],
    pub w: [f64; 4],
    pub dw: [f64; 4],
}

#[inline]
fn keys_positive(delta: f64) -> KeysStencil {
    let k = delta.floor();
    let s = delta - k;
    let k = k as i32;
    let om = 1.0 - s;
    let w = [
        -0.5 * s * om * om,
        1.0 + 0.5 * s * s * (3.0 * s - 5.0),
        0.5 * s * (1.0 + 4.0 * s - 3.0 * s * s),
        0.5 * s * s * (s - 1.0),
    ];
    let offsets = [k - 1, k, k + 1, k + 2];
    let mut dw = w;
    if k == 0 {
        // w0 - 1 written without cancellation
        dw[1] = 0.5 * s * s * (3.0 * s - 5.0);
    } else if k == 1 {
        dw[0] -= 1.0;
    }
    KeysStencil { offsets, w, dw }
}

/// Keys stencil for a displacement of `delta` lattice spacings.
///
/// Negative displacements use the mirror image of the positive stencil, so
/// the weights for `-delta` are exactly the reflected weights for `delta`.
#[inline]
pub fn keys_stencil(delta: f64) -> KeysStencil {
    if delta >= 0.0 {
        keys_positive(delta)
    } else {
        let mut st = keys_positive(-delta);
        for o in st.offsets.iter_mut() {
            *o = -*o;
        }
        st
    }
}

/// Visits the 64 nodes of the tensor Keys stencil for a displacement
/// `delta` (in lattice units) and passes `(offset, weight, weight - identity)`.
///
/// The difference is formed by telescoping the tensor product, so it stays
/// accurate when the displacement is tiny.
#[inline]
pub fn keys3_visit(delta: [f64; 3], mut f: impl FnMut([i32; 3], f64, f64)) {
    let sx = keys_stencil(delta[0]);
    let sy = keys_stencil(delta[1]);
    let sz = keys_stencil(delta[2]);
    for a in 0..4 {
        let ex = (sx.offsets[a] == 0) as i32 as f64;
        for b in 0..4 {
            let ey = (sy.offsets[b] == 0) as i32 as f64;
            let wxy = sx.w[a] * sy.w[b];
            let dxy = sx.dw[a] * sy.w[b] + ex * sy.dw[b];
            let exy = ex * ey;
            for c in 0..4 {
                let w = wxy * sz.w[c];
                let d = dxy * sz.w[c] + exy * sz.dw[c];
                f([sx.offsets[a], sy.offsets[b], sz.offsets[c]], w, d);
            }
        }
    }
}

/// Largest |offset| a Keys stencil reaches for a displacement `delta`.
#[inline]
pub fn keys_reach(delta: f64) -> (i32, i32) {
    let st = keys_stencil(delta);
    (
        st.offsets[0].min(st.offsets[3]),
        st.offsets[0].max(st.offsets[3]),
    )
}

/// Placement of a cell along one axis, which decides how the second
/// difference of the correction term is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellEdge {
    /// Both neighbours `lo - 1` and `lo + 2` exist: average of the second
    /// differences at `lo` and `lo + 1`.
    Interior,
    /// The cell touches the lower face: twice the second difference at `lo + 1`.
    Lower,
    /// The cell touches the upper face: twice the second difference at `lo`.
    Upper,
}

impl CellEdge {
    /// Placement of the cell with base `lo` on a lattice of side `n`.
    #[inline]
    pub fn of(lo: i64, n: i64) -> Self {
        if lo == 0 {
            CellEdge::Lower
        } else if lo == n - 2 {
            CellEdge::Upper
        } else {
            CellEdge::Interior
        }
    }
}

/// Corrected-trilinear stencil at fractional lattice position `x`
/// (node `i` at `x = i`). Returns 14 `(node, weight)` pairs, or `None` when
/// the point lies outside the lattice hull. Cells on the faces use one-sided
/// second differences, so the stencil never leaves the lattice.
pub fn corrected_trilinear(grid: &VelocityGrid, x: [f64; 3]) -> Option<[([usize; 3], f64); 14]> {
    let n = grid.n() as i64;
    let mut lo = [0i64; 3];
    let mut s = [0.0; 3];
    let mut edge = [CellEdge::Interior; 3];
    for a in 0..3 {
        if !(x[a] >= 0.0 && x[a] <= (n - 1) as f64) {
            return None;
        }
        let f = x[a].floor().min((n - 2) as f64);
        lo[a] = f as i64;
        s[a] = x[a] - f;
        edge[a] = CellEdge::of(lo[a], n);
    }
    Some(
        corrected_trilinear_weights(lo, s, [0.0; 3], false, edge)
            .map(|(i, w)| ([i[0] as usize, i[1] as usize, i[2] as usize], w)),
    )
}

/// Trilinear corner weights (corner `k` has bits `cx cy cz`) and the
/// per-axis correction coefficients of the corrected trilinear stencil at
/// local coordinates `s`, or their derivatives along `ds`.
pub(crate) fn trilinear_parts(s: [f64; 3], ds: [f64; 3], derivative: bool) -> ([f64; 8], [f64; 3]) {
    let lin = |a: usize, c: usize| if c == 0 { 1.0 - s[a] } else { s[a] };
    let dlin = |a: usize, c: usize| if c == 0 { -ds[a] } else { ds[a] };
    let mut tri = [0.0; 8];
    for (k, t) in tri.iter_mut().enumerate() {
        let (cx, cy, cz) = (k >> 2, (k >> 1) & 1, k & 1);
        *t = if derivative {
            dlin(0, cx) * lin(1, cy) * lin(2, cz)
                + lin(0, cx) * dlin(1, cy) * lin(2, cz)
                + lin(0, cx) * lin(1, cy) * dlin(2, cz)
        } else {
            lin(0, cx) * lin(1, cy) * lin(2, cz)
        };
    }
    let mut corr = [0.0; 3];
    for a in 0..3 {
        corr[a] = if derivative {
            0.25 * (1.0 - 2.0 * s[a]) * ds[a]
        } else {
            0.25 * s[a] * (1.0 - s[a])
        };
    }
    (tri, corr)
}

/// Node pattern multiplying the correction coefficient of one axis, as
/// `(offset from lo along the axis, weight)`. Offsets 0 and 1 lie on the
/// cell edge through corner 0; the last entry of the one-sided patterns is
/// a zero-weight filler.
pub(crate) fn correction_pattern(edge: CellEdge) -> [(i64, f64); 4] {
    match edge {
        // -(F(lo-1) - F(lo) - F(lo+1) + F(lo+2))
        CellEdge::Interior => [(-1, -1.0), (2, -1.0), (0, 1.0), (1, 1.0)],
        // -(2 F(lo) - 4 F(lo+1) + 2 F(lo+2))
        CellEdge::Lower => [(2, -2.0), (2, 0.0), (0, -2.0), (1, 4.0)],
        // -(2 F(lo-1) - 4 F(lo) + 2 F(lo+1))
        CellEdge::Upper => [(-1, -2.0), (-1, 0.0), (0, 4.0), (1, -2.0)],
    }
}

/// Weights of the corrected trilinear stencil on the cell with base corner
/// `lo` at local coordinates `s`. With `derivative = true` the weights are
/// differentiated along the direction `ds` (rates of change of `s`).
/// Unused slots repeat a stencil node with weight zero.
pub(crate) fn corrected_trilinear_weights(
    lo: [i64; 3],
    s: [f64; 3],
    ds: [f64; 3],
    derivative: bool,
    edge: [CellEdge; 3],
) -> [([i64; 3], f64); 14] {
    let (tri, corr) = trilinear_parts(s, ds, derivative);
    let mut out = [([0i64; 3], 0.0); 14];
    for k in 0..8 {
        let c = [(k >> 2) as i64, ((k >> 1) & 1) as i64, (k & 1) as i64];
        out[k] = ([lo[0] + c[0], lo[1] + c[1], lo[2] + c[2]], tri[k]);
    }
    for a in 0..3 {
        // corner along axis a only
        let idx = 4 >> a;
        let [e0, e1, p0, p1] = correction_pattern(edge[a]);
        for (slot, (o, w)) in [(8 + 2 * a, e0), (9 + 2 * a, e1)] {
            let mut node = lo;
            node[a] += o;
            out[slot] = (node, corr[a] * w);
        }
        out[0].1 += corr[a] * p0.1;
        out[idx].1 += corr[a] * p1.1;
    }
    out
}

/// Keys interpolation of a field at an arbitrary point, `None` outside the
/// stencil-covered region.
pub fn keys_eval(field: &DistributionField, p: &Vec3) -> Option<f64> {
    let g = field.grid();
    let n = g.n() as i32;
    let x = [g.fractional(p[0]), g.fractional(p[1]), g.fractional(p[2])];
    let base = [
        x[0].floor() as i32,
        x[1].floor() as i32,
        x[2].floor() as i32,
    ];
    let d = [
        x[0] - base[0] as f64,
        x[1] - base[1] as f64,
        x[2] - base[2] as f64,
    ];
    for a in 0..3 {
        if base[a] - 1 < 0 || base[a] + 2 > n - 1 {
            return None;
        }
    }
    let vals = field.values();
    let mut acc = 0.0;
    keys3_visit(d, |o, w, _| {
        let idx = g.index(
            (base[0] + o[0]) as usize,
            (base[1] + o[1]) as usize,
            (base[2] + o[2]) as usize,
        );
        acc += w * vals[idx];
    });
    Some(acc)
}

/// Trilinear interpolation with zero extension outside the lattice.
pub fn trilinear_eval(field: &DistributionField, p: &Vec3) -> f64 {
    let g = field.grid();
    let n = g.n() as i64;
    let x = [g.fractional(p[0]), g.fractional(p[1]), g.fractional(p[2])];
    let lo = [
        x[0].floor() as i64,
        x[1].floor() as i64,
        x[2].floor() as i64,
    ];
    let s = [
        x[0] - lo[0] as f64,
        x[1] - lo[1] as f64,
        x[2] - lo[2] as f64,
    ];
    let vals = field.values();
    let mut acc = 0.0;
    for cx in 0..2i64 {
        for cy in 0..2i64 {
            for cz in 0..2i64 {
                let (ix, iy, iz) = (lo[0] + cx, lo[1] + cy, lo[2] + cz);
                if ix < 0 || iy < 0 || iz < 0 || ix >= n || iy >= n || iz >= n {
                    continue;
                }
                let w = if cx == 0 { 1.0 - s[0] } else { s[0] }
                    * if cy == 0 { 1.0 - s[1] } else { s[1] }
                    * if cz == 0 { 1.0 - s[2] } else { s[2] };
                acc += w * vals[g.index(ix as usize, iy as usize, iz as usize)];
            }
        }
    }
    acc
}

/// Corrected-trilinear interpolation, `None` outside the stencil region.
pub fn corrected_trilinear_eval(field: &DistributionField, p: &Vec3) -> Option<f64> {
    let g = field.grid();
    let x = [g.fractional(p[0]), g.fractional(p[1]), g.fractional(p[2])];
    let st = corrected_trilinear(g, x)?;
    let vals = field.values();
    Some(
        st.iter()
            .map(|(i, w)| w * vals[g.index(i[0], i[1], i[2])])
            .sum(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FieldRole;

    fn quad_fn(v: &Vec3) -> f64 {
        1.5 - 0.3 * v[0] + 0.7 * v[1] * v[2] + 0.2 * v[0] * v[0] - 0.45 * v[2] * v[2] + v[1] * v[1]
    }

    #[test]
    fn keys_partition_and_difference() {
        for &d in &[0.0, 1e-9, -1e-9, 0.3, -0.3, 0.999, 1.2, -1.7, 2.5] {
            let st = keys_stencil(d);
            let sum: f64 = st.w.iter().sum();
            assert!((sum - 1.0).abs() < 1e-14);
            let first: f64 =
                st.w.iter()
                    .zip(&st.offsets)
                    .map(|(w, &o)| w * o as f64)
                    .sum();
            assert!((first - d).abs() < 1e-13);
            let second: f64 =
                st.w.iter()
                    .zip(&st.offsets)
                    .map(|(w, &o)| w * (o * o) as f64)
                    .sum();
            assert!((second - d * d).abs() < 1e-12);
            for k in 0..4 {
                let e = (st.offsets[k] == 0) as i32 as f64;
                assert!((st.dw[k] - (st.w[k] - e)).abs() < 1e-15);
            }
        }
        let a = keys_stencil(0.37);
        let b = keys_stencil(-0.37);
        for k in 0..4 {
            assert_eq!(a.offsets[k], -b.offsets[k]);
            assert_eq!(a.w[k], b.w[k]);
        }
    }

    #[test]
    fn keys3_difference_is_small_for_small_shift() {
        let mut total = 0.0f64;
        keys3_visit([1e-12, -2e-12, 3e-12], |_, _, d| total = total.max(d.abs()));
        assert!(total < 1e-11);
    }

    #[test]
    fn interpolants_reproduce_quadratics() {
        let g = VelocityGrid::new(4.0, 12).unwrap();
        let f = DistributionField::from_fn(g, FieldRole::Basis, quad_fn);
        for p in [
            Vec3::new(0.13, -0.77, 1.21),
            Vec3::new(-1.9, 0.4, 0.05),
            Vec3::new(0.0, 0.0, 0.0),
        ] {
            let k = keys_eval(&f, &p).unwrap();
            assert!((k - quad_fn(&p)).abs() < 1e-12);
            let c = corrected_trilinear_eval(&f, &p).unwrap();
            assert!((c - quad_fn(&p)).abs() < 1e-12, "{c} vs {}", quad_fn(&p));
        }
        let affine = DistributionField::from_fn(g, FieldRole::Basis, |v| 2.0 + v[0] - 3.0 * v[2]);
        let p = Vec3::new(0.31, 2.2, -1.4);
        assert!((trilinear_eval(&affine, &p) - (2.0 + p[0] - 3.0 * p[2])).abs() < 1e-12);
        assert!(keys_eval(&f, &Vec3::new(3.9, 0.0, 0.0)).is_none());
    }

    #[test]
    fn corrected_trilinear_derivative_matches_difference_quotient() {
        let lo = [3i64, 4, 5];
        let s = [0.2, 0.7, 0.45];
        let ds = [0.3, -0.5, 0.8];
        let h = 1e-6;
        for edge in [
            [CellEdge::Interior; 3],
            [CellEdge::Lower, CellEdge::Upper, CellEdge::Interior],
        ] {
            let w0 = corrected_trilinear_weights(lo, s, ds, false, edge);
            let w1 = corrected_trilinear_weights(
                lo,
                [s[0] + h * ds[0], s[1] + h * ds[1], s[2] + h * ds[2]],
                ds,
                false,
                edge,
            );
            let dw = corrected_trilinear_weights(lo, s, ds, true, edge);
            for k in 0..14 {
                assert_eq!(w0[k].0, dw[k].0);
                assert!(((w1[k].1 - w0[k].1) / h - dw[k].1).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn face_cells_reproduce_quadratics() {
        let g = VelocityGrid::new(4.0, 8).unwrap();
        let f = DistributionField::from_fn(g, FieldRole::Basis, quad_fn);
        for p in [
            Vec3::new(-3.4, 3.3, 0.1),
            Vec3::new(3.45, -3.45, -3.2),
            Vec3::new(-3.5, -3.5, 3.5),
        ] {
            let c = corrected_trilinear_eval(&f, &p).unwrap();
            assert!((c - quad_fn(&p)).abs() < 1e-12, "{c} vs {}", quad_fn(&p));
        }
        assert!(corrected_trilinear_eval(&f, &Vec3::new(3.6, 0.0, 0.0)).is_none());
    }
}
