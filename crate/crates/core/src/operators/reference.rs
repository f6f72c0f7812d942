//! Unoptimized reference evaluations.
//!
//! Every pair of nodes is visited explicitly, the collision geometry is
//! rebuilt from the kernel for each pair, and the interpolation weights are
//! evaluated from the closed-form Keys kernel. Nothing here is fast; these
//! functions exist to check the production paths on small lattices.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Vector3};

use super::landau::gradient4;
use super::quadrature::{antisymmetric_frame, CollisionPlan, OperatorKind};
use crate::grid::interp::{corrected_trilinear_weights, CellEdge};
use crate::grid::{maxwellian, VelocityGrid};
use crate::kernel::landau_matrix;

/// Keys kernel (`a = -1/2`) weight of lattice offset `o` for a point at
/// displacement `d`, i.e. `K(o - d)`.
///
/// The polynomial pieces `(x - 1)(3x^2/2 - x - 1)` and `-(x - 1)(x - 2)^2/2`
/// are evaluated from the exact fractional part of `d`, so weights stay
/// accurate for tiny displacements.
fn keys_weight(o: i64, d: f64) -> f64 {
    if d < 0.0 {
        return keys_weight(-o, -d);
    }
    let k = d.floor();
    let s = d - k;
    match o - k as i64 {
        -1 => -0.5 * s * (s - 1.0) * (s - 1.0),
        0 => (s - 1.0) * (1.5 * s * s - s - 1.0),
        1 => -s * (1.5 * (1.0 - s) * (1.0 - s) - (1.0 - s) - 1.0),
        2 => -0.5 * (1.0 - s) * s * s,
        _ => 0.0,
    }
}

/// `K(-d) - 1`, without cancellation when `|d| < 1`.
fn keys_weight_minus_one(d: f64) -> f64 {
    let x = d.abs();
    if x < 1.0 {
        x * x * (1.5 * x - 2.5)
    } else {
        keys_weight(0, d) - 1.0
    }
}

/// Four lattice offsets covered by the Keys stencil of a displacement.
fn keys_offsets(d: f64) -> [i64; 4] {
    if d >= 0.0 {
        let k = d.floor() as i64;
        [k - 1, k, k + 1, k + 2]
    } else {
        let k = (-d).floor() as i64;
        [-k + 1, -k, -k - 1, -k - 2]
    }
}

/// One collision of the pair `(i, j)` as seen from `i`.
enum Event {
    /// Resolved deviation `d` (lattice units) with weight.
    Resolved { d: [f64; 3], w: f64 },
    /// Grazing direction `e` with weight, at lattice distance `r` along `uhat`.
    Grazing {
        r: f64,
        uhat: [f64; 3],
        e: [f64; 3],
        w: f64,
    },
}

/// Calls `visit(i, j, event)` for every collision node of every ordered
/// pair. Weights include the split coefficients.
fn for_each_collision(plan: &CollisionPlan, mut visit: impl FnMut(usize, usize, &Event)) {
    let grid = plan.grid();
    let kind = plan.kind();
    let params = kind.params();
    let quad = plan.quadrature();
    let (u_coeff, l_coeff) = plan.coefficients();
    let t_lo = match kind {
        OperatorKind::Landau(_) => quad.grazing_cutoff,
        OperatorKind::Boltzmann(p) => p.epsilon.max(quad.grazing_cutoff),
    };
    let (tn, _) = if u_coeff != 0.0 {
        quad.t_nodes(t_lo, params.t_max(), &[])
    } else {
        (Vec::new(), Vec::new())
    };
    let h = grid.spacing();
    let cell = grid.cell_volume();
    let m = quad.azimuths;
    let dphi = 2.0 * PI / m as f64;
    for i in 0..grid.len() {
        let vi = grid.node(i);
        for j in 0..grid.len() {
            if i == j {
                continue;
            }
            let u = vi - grid.node(j);
            let umag = u.norm();
            if umag < params.eta {
                continue;
            }
            let (uh, e1, e2) = antisymmetric_frame([u[0], u[1], u[2]]);
            let kin = umag.powf(params.gamma);
            let r = umag / h;
            for k in 0..m {
                let phi = dphi * (k as f64 + 0.5);
                let e = [
                    phi.cos() * e1[0] + phi.sin() * e2[0],
                    phi.cos() * e1[1] + phi.sin() * e2[1],
                    phi.cos() * e1[2] + phi.sin() * e2[2],
                ];
                for &(t, wt, _) in &tn {
                    let st = (1.0 - t * t).sqrt();
                    let d = [
                        r * t * (st * e[0] - t * uh[0]),
                        r * t * (st * e[1] - t * uh[1]),
                        r * t * (st * e[2] - t * uh[2]),
                    ];
                    let w = kin * 4.0 * wt * dphi * cell * u_coeff;
                    visit(i, j, &Event::Resolved { d, w });
                }
                if l_coeff != 0.0 {
                    let w = kin * 4.0 * dphi * cell * l_coeff;
                    visit(i, j, &Event::Grazing { r, uhat: uh, e, w });
                }
            }
        }
    }
}

/// Destinations of one collision: `(node, w, w - [node == i])`, or `None`
/// when a stencil leaves the lattice.
fn destinations(
    grid: &VelocityGrid,
    i: usize,
    j: usize,
    ev: &Event,
) -> Option<Vec<(usize, f64, f64)>> {
    let n = grid.n() as i64;
    let xi = grid.unravel(i).map(|x| x as i64);
    let xj = grid.unravel(j).map(|x| x as i64);
    let inside = |x: i64| (0..n).contains(&x);
    match ev {
        Event::Resolved { d, .. } => {
            for a in 0..3 {
                let reach = keys_offsets(d[a]).iter().map(|o| o.abs()).max().unwrap();
                let fits = |x: i64| inside(x - reach) && inside(x + reach);
                if !fits(xi[a]) || !fits(xj[a]) {
                    return None;
                }
            }
            let offs = [keys_offsets(d[0]), keys_offsets(d[1]), keys_offsets(d[2])];
            let mut out = Vec::with_capacity(64);
            for &ox in &offs[0] {
                for &oy in &offs[1] {
                    for &oz in &offs[2] {
                        let o = [ox, oy, oz];
                        let k = [
                            keys_weight(o[0], d[0]),
                            keys_weight(o[1], d[1]),
                            keys_weight(o[2], d[2]),
                        ];
                        let w = k[0] * k[1] * k[2];
                        let dw = if o == [0, 0, 0] {
                            let km = [
                                keys_weight_minus_one(d[0]),
                                keys_weight_minus_one(d[1]),
                                keys_weight_minus_one(d[2]),
                            ];
                            km[0] * k[1] * k[2] + km[1] * k[2] + km[2]
                        } else {
                            w
                        };
                        let node = grid.index(
                            (xi[0] + o[0]) as usize,
                            (xi[1] + o[1]) as usize,
                            (xi[2] + o[2]) as usize,
                        );
                        out.push((node, w, dw));
                    }
                }
            }
            if !offs.iter().all(|o| o.contains(&0)) {
                out.push((i, 0.0, -1.0));
            }
            Some(out)
        }
        Event::Grazing { r, uhat, e, .. } => {
            if !(0..3).all(|a| xi[a] >= 2 && xi[a] + 2 < n && xj[a] >= 2 && xj[a] + 2 < n) {
                return None;
            }
            let mut coef = std::collections::BTreeMap::<[i64; 3], f64>::new();
            let mut add = |o: [i64; 3], c: f64| *coef.entry(o).or_insert(0.0) += c;
            for a in 0..3 {
                // -r (grad c . uhat), central differences
                let mut o = [0; 3];
                o[a] = 1;
                add(o, -0.5 * r * uhat[a]);
                o[a] = -1;
                add(o, 0.5 * r * uhat[a]);
                // r^2/2 e_a^2 c_aa, one-sided second difference towards e
                let s = if e[a] >= 0.0 { 1 } else { -1 };
                for (k, c) in [(-1, 2.0), (0, -5.0), (1, 4.0), (2, -1.0)] {
                    let mut o = [0; 3];
                    o[a] = s * k;
                    add(o, 0.5 * r * r * e[a] * e[a] * c);
                }
                // r^2 e_a e_b c_ab, central mixed difference
                for b in a + 1..3 {
                    for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                        let mut o = [0; 3];
                        o[a] = sa;
                        o[b] = sb;
                        add(o, 0.25 * r * r * e[a] * e[b] * (sa * sb) as f64);
                    }
                }
            }
            Some(
                coef.into_iter()
                    .map(|(o, c)| {
                        let node = grid.index(
                            (xi[0] + o[0]) as usize,
                            (xi[1] + o[1]) as usize,
                            (xi[2] + o[2]) as usize,
                        );
                        (node, c, c)
                    })
                    .collect(),
            )
        }
    }
}

fn event_weight(ev: &Event) -> f64 {
    match ev {
        Event::Resolved { w, .. } | Event::Grazing { w, .. } => *w,
    }
}

/// Reference `Q(g, h)`.
pub fn collision(plan: &CollisionPlan, g: &[f64], h: &[f64]) -> Vec<f64> {
    let grid = *plan.grid();
    let mut out = vec![0.0; grid.len()];
    for_each_collision(plan, |i, j, ev| {
        let amp = g[j] * h[i] * event_weight(ev);
        if amp == 0.0 {
            return;
        }
        if let Some(dest) = destinations(&grid, i, j, ev) {
            for (m, _, dw) in dest {
                out[m] += amp * dw;
            }
        }
    });
    out
}

fn sqrt_mu(grid: &VelocityGrid) -> Vec<f64> {
    maxwellian(grid).values().iter().map(|x| x.sqrt()).collect()
}

/// Reference `Gamma(g, h)`.
pub fn gamma(plan: &CollisionPlan, g: &[f64], h: &[f64]) -> Vec<f64> {
    let sm = sqrt_mu(plan.grid());
    let gg: Vec<f64> = g.iter().zip(&sm).map(|(a, s)| a * s).collect();
    let hh: Vec<f64> = h.iter().zip(&sm).map(|(a, s)| a * s).collect();
    collision(plan, &gg, &hh)
        .iter()
        .zip(&sm)
        .map(|(q, s)| if *s > 1e-300 { q / s } else { 0.0 })
        .collect()
}

/// Reference remainder `I(g, h)`.
pub fn remainder(plan: &CollisionPlan, g: &[f64], h: &[f64]) -> Vec<f64> {
    let grid = *plan.grid();
    let sm = sqrt_mu(&grid);
    let mut out = vec![0.0; grid.len()];
    for_each_collision(plan, |i, j, ev| {
        let amp = g[j] * h[i] * event_weight(ev);
        if amp == 0.0 {
            return;
        }
        if let Some(dest) = destinations(&grid, i, j, ev) {
            for (m, w, _) in dest {
                if sm[m] > 1e-300 {
                    out[m] += amp * w * (sm[i] * sm[j] / sm[m] - sm[j]);
                }
            }
        }
    });
    out
}

/// Reference dissipation functional `N(g, h)`.
pub fn dissipation(plan: &CollisionPlan, g: &[f64], h: &[f64]) -> f64 {
    let grid = *plan.grid();
    let mut total = 0.0;
    for_each_collision(plan, |i, j, ev| {
        if g[j] == 0.0 {
            return;
        }
        let dh = match ev {
            Event::Resolved { .. } => match destinations(&grid, i, j, ev) {
                Some(dest) => dest.iter().map(|(m, _, dw)| dw * h[*m]).sum::<f64>(),
                None => return,
            },
            Event::Grazing { r, e, .. } => {
                if destinations(&grid, i, j, ev).is_none() {
                    return;
                }
                let x = grid.unravel(i);
                let mut s = 0.0;
                for a in 0..3 {
                    let mut up = x;
                    let mut down = x;
                    up[a] += 1;
                    down[a] -= 1;
                    s += 0.5
                        * r
                        * e[a]
                        * (h[grid.index(up[0], up[1], up[2])]
                            - h[grid.index(down[0], down[1], down[2])]);
                }
                s
            }
        };
        total += event_weight(ev) * g[j] * g[j] * dh * dh;
    });
    total * grid.cell_volume()
}

/// Reference Landau flux by a plain double loop with the matrix `a(z)`.
pub fn landau_flux(grid: &VelocityGrid, g: &[f64], h: &[f64], k_const: f64) -> [Vec<f64>; 3] {
    let mu = maxwellian(grid);
    let grad = |f: &[f64]| -> Vec<Vector3<f64>> {
        let ratio: Vec<f64> = f.iter().zip(mu.values()).map(|(a, m)| a / m).collect();
        let d: Vec<Vec<f64>> = (0..3).map(|a| gradient4(grid, &ratio, a)).collect();
        (0..f.len())
            .map(|i| {
                let v = grid.node(i);
                Vector3::new(d[0][i], d[1][i], d[2][i]) * mu.values()[i] - v * f[i]
            })
            .collect()
    };
    let dg = grad(g);
    let dh = grad(h);
    let mut out = [
        vec![0.0; grid.len()],
        vec![0.0; grid.len()],
        vec![0.0; grid.len()],
    ];
    for i in 0..grid.len() {
        let mut u = Vector3::zeros();
        for j in 0..grid.len() {
            if i == j {
                continue;
            }
            let a = landau_matrix(&(grid.node(i) - grid.node(j)), k_const).expect("distinct nodes");
            u += a * (dh[i] * g[j] - dg[j] * h[i]);
        }
        for a in 0..3 {
            out[a][i] = u[a] * grid.cell_volume();
        }
    }
    out
}

/// Corrected-trilinear weights on the cell with base `lo` at local
/// coordinates `s`, or `None` if the cell is not on the lattice.
fn cell_weights(
    n: i64,
    lo: [i64; 3],
    s: [f64; 3],
    ds: [f64; 3],
    deriv: bool,
) -> Option<Vec<([i64; 3], f64)>> {
    if lo.iter().any(|&l| l < 0 || l > n - 2) {
        return None;
    }
    let edge = lo.map(|l| CellEdge::of(l, n));
    Some(corrected_trilinear_weights(lo, s, ds, deriv, edge).to_vec())
}

/// Cell base and local coordinates of a fractional lattice point.
fn locate(x: [f64; 3]) -> ([i64; 3], [f64; 3]) {
    let lo = x.map(|c| c.floor() as i64);
    (
        lo,
        [
            x[0] - lo[0] as f64,
            x[1] - lo[1] as f64,
            x[2] - lo[2] as f64,
        ],
    )
}

/// Reference matrix of the Dirichlet-form linearized operator, summed over
/// unordered pairs node by node.
pub fn linearized_matrix(plan: &CollisionPlan) -> DMatrix<f64> {
    let grid = *plan.grid();
    let n = grid.n() as i64;
    let len = grid.len();
    let mu = maxwellian(&grid);
    let mu = mu.values();
    let mut k = DMatrix::<f64>::zeros(len, len);
    let lin = |o: [i64; 3]| ((o[0] * n + o[1]) * n + o[2]) as usize;
    for_each_collision(plan, |i, j, ev| {
        // each unordered pair once
        if i < j {
            return;
        }
        let xi = grid.unravel(i).map(|x| x as i64);
        let xj = grid.unravel(j).map(|x| x as i64);
        let mut r: Vec<(usize, f64)> = Vec::with_capacity(30);
        match ev {
            Event::Resolved { d, .. } => {
                let (la, sa) = locate([
                    xi[0] as f64 + d[0],
                    xi[1] as f64 + d[1],
                    xi[2] as f64 + d[2],
                ]);
                let (lb, sb) = locate([
                    xj[0] as f64 - d[0],
                    xj[1] as f64 - d[1],
                    xj[2] as f64 - d[2],
                ]);
                let (Some(a), Some(b)) = (
                    cell_weights(n, la, sa, [0.0; 3], false),
                    cell_weights(n, lb, sb, [0.0; 3], false),
                ) else {
                    return;
                };
                r.extend(a.iter().chain(&b).map(|(o, w)| (lin(*o), *w)));
                r.push((i, -1.0));
                r.push((j, -1.0));
            }
            Event::Grazing { r: len_r, e, .. } => {
                // one-sided derivatives: the node is the corner of the cell
                // lying on the side the direction points to
                let mut la = xi;
                let mut lb = xj;
                let mut sa = [0.0; 3];
                let mut sb = [0.0; 3];
                for a in 0..3 {
                    if e[a] < 0.0 {
                        la[a] -= 1;
                        sa[a] = 1.0;
                    }
                    if e[a] > 0.0 {
                        lb[a] -= 1;
                        sb[a] = 1.0;
                    }
                }
                let da = e.map(|x| len_r * x);
                let db = e.map(|x| -len_r * x);
                let (Some(a), Some(b)) = (
                    cell_weights(n, la, sa, da, true),
                    cell_weights(n, lb, sb, db, true),
                ) else {
                    return;
                };
                r.extend(a.iter().chain(&b).map(|(o, w)| (lin(*o), *w)));
            }
        }
        let c = 0.5 * event_weight(ev) * mu[i] * mu[j];
        for &(p, x) in &r {
            for &(q, y) in &r {
                k[(p, q)] += c * x * y;
            }
        }
    });
    let sm: Vec<f64> = mu.iter().map(|x| x.sqrt()).collect();
    for a in 0..len {
        for b in 0..len {
            k[(a, b)] /= sm[a] * sm[b];
        }
    }
    k
}
