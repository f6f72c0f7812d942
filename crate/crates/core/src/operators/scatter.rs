//! Scatter (weak-form) evaluation shared by the bilinear operators.
//!
//! A collision of the pair `(v_i, v_j)` with deviation `d` moves the mass
//! `W g_j h_i` from `v_i` to `v_i + d`, where it is spread over the lattice
//! with the Keys stencil. Pairing `(i, j, d)` with `(j, i, -d)` and using a
//! quadratic-exact kernel conserves mass, momentum and energy exactly.

use super::quadrature::{grazing_fits, sigma_fits, CollisionPlan, SigmaNode};
use crate::grid::interp::keys3_visit;
use crate::par;

/// Number of source chunks; fixed so that results do not depend on the
/// thread count.
pub(crate) const CHUNKS: usize = 64;

/// Grazing (second-order) stencil around a node for one direction `e`
/// orthogonal to `u`: `-r grad c . uhat + r^2/2 e^T H e`, with the Keys
/// second derivatives taken on the side `e` points to.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GrazingStencil {
    pub len: usize,
    pub offsets: [[i32; 3]; 25],
    pub coef: [f64; 25],
}

impl GrazingStencil {
    fn push(&mut self, o: [i32; 3], c: f64) {
        for k in 0..self.len {
            if self.offsets[k] == o {
                self.coef[k] += c;
                return;
            }
        }
        self.offsets[self.len] = o;
        self.coef[self.len] = c;
        self.len += 1;
    }
}

pub(crate) fn grazing_stencil(r: f64, uhat: &[f64; 3], e: &[f64; 3]) -> GrazingStencil {
    let mut st = GrazingStencil {
        len: 0,
        offsets: [[0; 3]; 25],
        coef: [0.0; 25],
    };
    st.push([0, 0, 0], 0.0);
    let half_r2 = 0.5 * r * r;
    for a in 0..3 {
        let mut o = [0i32; 3];
        // first derivative: central
        o[a] = 1;
        st.push(o, -r * 0.5 * uhat[a]);
        o[a] = -1;
        st.push(o, r * 0.5 * uhat[a]);
        // second derivative: one-sided Keys
        let sgn = if e[a] >= 0.0 { 1 } else { -1 };
        let ee = half_r2 * e[a] * e[a];
        for (k, c) in [(-1, 2.0), (0, -5.0), (1, 4.0), (2, -1.0)] {
            let mut o = [0i32; 3];
            o[a] = sgn * k;
            st.push(o, ee * c);
        }
    }
    for a in 0..3 {
        for b in a + 1..3 {
            let c = r * r * e[a] * e[b] * 0.25;
            for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let mut o = [0i32; 3];
                o[a] = sa;
                o[b] = sb;
                st.push(o, c * (sa * sb) as f64);
            }
        }
    }
    st
}

/// Whether the Keys stencil of a node contains the source node itself; if
/// not, the removal of mass at the source is a separate contribution.
#[inline]
pub(crate) fn covers_origin(s: &SigmaNode) -> bool {
    (0..3).all(|a| s.lo[a] <= 0 && s.hi[a] >= 0)
}

#[inline]
pub(crate) fn linear_offset(n: usize, o: [i32; 3]) -> isize {
    let n = n as isize;
    (o[0] as isize * n + o[1] as isize) * n + o[2] as isize
}

/// Visits every admissible collision. For each one, `visit(i, j, m, amp, w, dw)`
/// receives the destination node `m`, the amplitude `W g_j h_i` (split
/// coefficient included), and the interpolation weight `w` and
/// `w - [m == i]` of `m`. Grazing collisions pass their second-order
/// coefficient as both `w` and `dw`.
///
/// Sources are processed in fixed chunks, each with its own accumulator,
/// and the chunk results are summed in order.
pub(crate) fn scatter<V>(plan: &CollisionPlan, g: &[f64], h: &[f64], visit: V) -> Vec<f64>
where
    V: Fn(&mut [f64], usize, usize, usize, f64, f64, f64) + Sync + Send,
{
    let grid = plan.grid;
    let n = grid.n();
    let len = grid.len();
    let chunk = len.div_ceil(CHUNKS);
    let parts = par::map_indexed(CHUNKS, |c| {
        let mut buf = vec![0.0; len];
        let lo = (c * chunk).min(len);
        let hi = ((c + 1) * chunk).min(len);
        for i in lo..hi {
            if h[i] == 0.0 {
                continue;
            }
            let xi = grid.unravel(i);
            for j in 0..len {
                if j == i || g[j] == 0.0 {
                    continue;
                }
                let xj = grid.unravel(j);
                let entry = plan.entry(xi, xj);
                let amp = g[j] * h[i];
                if plan.u_coeff != 0.0 {
                    for s in &plan.sigma[entry.sigma.clone()] {
                        if !sigma_fits(n, xi, xj, s) {
                            continue;
                        }
                        let a = amp * s.w * plan.u_coeff;
                        keys3_visit(s.d, |o, w, dw| {
                            let m = (i as isize + linear_offset(n, o)) as usize;
                            visit(&mut buf, i, j, m, a, w, dw);
                        });
                        if !covers_origin(s) {
                            visit(&mut buf, i, j, i, a, 0.0, -1.0);
                        }
                    }
                }
                if plan.landau_coeff != 0.0 && !entry.grazing.is_empty() && grazing_fits(n, xi, xj)
                {
                    for az in &plan.grazing[entry.grazing.clone()] {
                        let st = grazing_stencil(entry.r, &entry.uhat, &az.e);
                        let a = amp * az.w * plan.landau_coeff;
                        for k in 0..st.len {
                            let m = (i as isize + linear_offset(n, st.offsets[k])) as usize;
                            visit(&mut buf, i, j, m, a, st.coef[k], st.coef[k]);
                        }
                    }
                }
            }
        }
        buf
    });
    let mut out = vec![0.0; len];
    for p in parts {
        for (o, x) in out.iter_mut().zip(p) {
            *o += x;
        }
    }
    out
}

/// Visits every admissible collision and sums `term(i, j, amp, stencil)`.
/// `stencil` lists the destination nodes with their `w - [m == i]` weights
/// (grazing collisions: second-order coefficients) and `first` carries the
/// first-order grazing coefficients used by the dissipation functional.
pub(crate) fn gather_sum<T>(plan: &CollisionPlan, g: &[f64], h_mask: &[f64], term: T) -> f64
where
    T: Fn(usize, usize, f64, &[(usize, f64)], bool) -> f64 + Sync + Send,
{
    let grid = plan.grid;
    let n = grid.n();
    let len = grid.len();
    let chunk = len.div_ceil(CHUNKS);
    let parts = par::map_indexed(CHUNKS, |c| {
        let mut acc = 0.0;
        let mut list: Vec<(usize, f64)> = Vec::with_capacity(64);
        let lo = (c * chunk).min(len);
        let hi = ((c + 1) * chunk).min(len);
        for i in lo..hi {
            if h_mask[i] == 0.0 {
                continue;
            }
            let xi = grid.unravel(i);
            for j in 0..len {
                if j == i || g[j] == 0.0 {
                    continue;
                }
                let xj = grid.unravel(j);
                let entry = plan.entry(xi, xj);
                if plan.u_coeff != 0.0 {
                    for s in &plan.sigma[entry.sigma.clone()] {
                        if !sigma_fits(n, xi, xj, s) {
                            continue;
                        }
                        list.clear();
                        keys3_visit(s.d, |o, _, dw| {
                            list.push(((i as isize + linear_offset(n, o)) as usize, dw));
                        });
                        if !covers_origin(s) {
                            list.push((i, -1.0));
                        }
                        acc += term(i, j, s.w * plan.u_coeff, &list, false);
                    }
                }
                if plan.landau_coeff != 0.0 && !entry.grazing.is_empty() && grazing_fits(n, xi, xj)
                {
                    for az in &plan.grazing[entry.grazing.clone()] {
                        list.clear();
                        // first-order (directional) coefficients r * grad c . e
                        for a in 0..3 {
                            let mut o = [0i32; 3];
                            o[a] = 1;
                            list.push((
                                (i as isize + linear_offset(n, o)) as usize,
                                0.5 * entry.r * az.e[a],
                            ));
                            o[a] = -1;
                            list.push((
                                (i as isize + linear_offset(n, o)) as usize,
                                -0.5 * entry.r * az.e[a],
                            ));
                        }
                        acc += term(i, j, az.w * plan.landau_coeff, &list, true);
                    }
                }
            }
        }
        acc
    });
    parts.iter().sum()
}
