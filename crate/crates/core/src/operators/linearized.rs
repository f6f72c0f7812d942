//! Linearized operators as Dirichlet forms.
//!
//! With `F = f / mu^{1/2}` the quadratic form of the linearized Boltzmann
//! operator is
//!
//! `<L f, f> = 1/4 sum W mu_i mu_j (F(v_i + d) + F(v_j - d) - F_i - F_j)^2`,
//!
//! summed over ordered pairs and collision nodes, with the off-lattice
//! values taken from the corrected trilinear interpolant. The grazing part
//! uses `|u| (e . grad F_i - e . grad F_j)` instead, with one-sided
//! directional derivatives of the same interpolant. Both reproduce
//! quadratics, so the five collision invariants are exact null vectors and
//! the assembled matrix is symmetric positive semidefinite by construction.
//!
//! The sum is organised by relative offset `u = i - j`: all collision nodes
//! of one offset whose interpolation stencils fall on the same cells share a
//! local support, and their rank-one terms are added into one small dense
//! block before being spread over every admissible pair.

use std::collections::HashMap;

use nalgebra::DMatrix;

use super::bilinear::sqrt_maxwellian;
use super::quadrature::{CollisionPlan, CollisionQuadrature, OperatorKind};
use crate::error::{LabError, LabResult};
use crate::grid::interp::{correction_pattern, trilinear_parts, CellEdge};
use crate::grid::{DistributionField, VelocityGrid};
use crate::kernel::KernelParams;
use crate::par;

/// Largest lattice side accepted by dense assembly.
pub const MAX_ASSEMBLY_N: usize = 24;

/// Default memory cap for dense assembly, in bytes.
pub const DEFAULT_MEMORY_CAP: usize = 3 << 30;

/// Rank-one terms of one offset sharing a support.
struct Group {
    /// `None` for the grazing part, else the panel index.
    panel: Option<u16>,
    /// Support offsets relative to `i`.
    support: Vec<[i64; 3]>,
    /// `sum w r r^T` over the group, `support.len()` squared, row-major.
    psi: Vec<f64>,
    /// Boxes of source nodes `i` (inclusive bounds) using this block.
    boxes: Vec<([i64; 3], [i64; 3])>,
}

/// Number of per-node coefficients: trilinear weights of both cells, the
/// removal at `i` and `j`, and the axis corrections of both cells.
const NCOEF: usize = 23;

type Key = ([i64; 3], [i64; 3], Option<u16>);
type Variant = ([CellEdge; 3], [CellEdge; 3]);

/// Coefficient vector of one collision node. The interpolation residual is
/// linear in it, with a node map that depends only on the cell placements.
fn coefficients(
    sa: [f64; 3],
    sb: [f64; 3],
    da: [f64; 3],
    db: [f64; 3],
    deriv: bool,
) -> [f64; NCOEF] {
    let (ta, ca) = trilinear_parts(sa, da, deriv);
    let (tb, cb) = trilinear_parts(sb, db, deriv);
    let mut x = [0.0; NCOEF];
    x[..8].copy_from_slice(&ta);
    x[8..16].copy_from_slice(&tb);
    x[16] = if deriv { 0.0 } else { 1.0 };
    x[17..20].copy_from_slice(&ca);
    x[20..23].copy_from_slice(&cb);
    x
}

/// Accumulated second moments `sum w x x^T` of the nodes sharing a key.
struct Moments {
    s: [[f64; NCOEF]; NCOEF],
}

impl Moments {
    fn new() -> Self {
        Self {
            s: [[0.0; NCOEF]; NCOEF],
        }
    }

    fn add(&mut self, w: f64, x: &[f64; NCOEF]) {
        for p in 0..NCOEF {
            let wp = w * x[p];
            if wp == 0.0 {
                continue;
            }
            for q in 0..NCOEF {
                self.s[p][q] += wp * x[q];
            }
        }
    }
}

fn slot(support: &mut Vec<[i64; 3]>, o: [i64; 3]) -> usize {
    match support.iter().position(|x| *x == o) {
        Some(k) => k,
        None => {
            support.push(o);
            support.len() - 1
        }
    }
}

fn build_group(key: &Key, variant: &Variant, u: [i64; 3], mom: &Moments) -> Group {
    let (fa, fb, panel) = *key;
    let mut support = Vec::with_capacity(30);
    // map[p] lists (support slot, weight) for coefficient p
    let mut map: Vec<Vec<(usize, f64)>> = vec![Vec::new(); NCOEF];
    for (cell, base, edges) in [(0usize, fa, variant.0), (1, fb, variant.1)] {
        for k in 0..8 {
            let c = [(k >> 2) as i64, ((k >> 1) & 1) as i64, (k & 1) as i64];
            let node = [base[0] + c[0], base[1] + c[1], base[2] + c[2]];
            map[8 * cell + k].push((slot(&mut support, node), 1.0));
        }
        for a in 0..3 {
            for (o, w) in correction_pattern(edges[a]) {
                if w == 0.0 {
                    continue;
                }
                let mut node = base;
                node[a] += o;
                map[17 + 3 * cell + a].push((slot(&mut support, node), w));
            }
        }
    }
    map[16].push((slot(&mut support, [0, 0, 0]), -1.0));
    map[16].push((slot(&mut support, [-u[0], -u[1], -u[2]]), -1.0));
    let m = support.len();
    let mut b = vec![0.0; m * NCOEF];
    for (p, list) in map.iter().enumerate() {
        for &(k, w) in list {
            b[k * NCOEF + p] += w;
        }
    }
    // psi = B S B^T
    let mut bs = vec![0.0; m * NCOEF];
    for k in 0..m {
        for p in 0..NCOEF {
            let x = b[k * NCOEF + p];
            if x == 0.0 {
                continue;
            }
            for q in 0..NCOEF {
                bs[k * NCOEF + q] += x * mom.s[p][q];
            }
        }
    }
    let mut psi = vec![0.0; m * m];
    for k in 0..m {
        for l in 0..m {
            let mut acc = 0.0;
            for q in 0..NCOEF {
                acc += bs[k * NCOEF + q] * b[l * NCOEF + q];
            }
            psi[k * m + l] = acc;
        }
    }
    Group {
        panel,
        support,
        psi,
        boxes: Vec::new(),
    }
}

/// Ranges of `i` along one axis with constant cell placement, as
/// `(first, last, edge of the alpha cell, edge of the beta cell)`.
fn axis_segments(n: i64, u: i64, fa: i64, fb: i64) -> Vec<(i64, i64, CellEdge, CellEdge)> {
    let lo = 0.max(u).max(-fa).max(-fb);
    let hi = (n - 1).min(n - 1 + u).min(n - 2 - fa).min(n - 2 - fb);
    if lo > hi {
        return Vec::new();
    }
    let mut cuts = vec![lo, hi + 1];
    for x in [-fa, n - 2 - fa, -fb, n - 2 - fb] {
        for c in [x, x + 1] {
            if c > lo && c <= hi {
                cuts.push(c);
            }
        }
    }
    cuts.sort_unstable();
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            (
                w[0],
                w[1] - 1,
                CellEdge::of(w[0] + fa, n),
                CellEdge::of(w[0] + fb, n),
            )
        })
        .collect()
}

/// Groups for the offset `u` (lexicographically positive).
fn groups_for(plan: &CollisionPlan, u: [i64; 3]) -> Vec<Group> {
    let n = plan.grid.n() as i64;
    let entry = plan.entry_for_offset(u);
    let mut keyed: Vec<(Key, Moments)> = Vec::new();
    let mut index: HashMap<Key, usize> = HashMap::new();
    let mut push = |key: Key, w: f64, x: [f64; NCOEF]| {
        let k = *index.entry(key).or_insert_with(|| {
            keyed.push((key, Moments::new()));
            keyed.len() - 1
        });
        keyed[k].1.add(w, &x);
    };
    if plan.u_coeff != 0.0 {
        for s in &plan.sigma[entry.sigma.clone()] {
            let mut fa = [0i64; 3];
            let mut sa = [0.0; 3];
            let mut fb = [0i64; 3];
            let mut sb = [0.0; 3];
            for a in 0..3 {
                let x = s.d[a].floor();
                fa[a] = x as i64;
                sa[a] = s.d[a] - x;
                let y = (-s.d[a]).floor();
                fb[a] = y as i64 - u[a];
                sb[a] = -s.d[a] - y;
            }
            push(
                (fa, fb, Some(s.panel)),
                s.w,
                coefficients(sa, sb, [0.0; 3], [0.0; 3], false),
            );
        }
    }
    if plan.landau_coeff != 0.0 {
        for az in &plan.grazing[entry.grazing.clone()] {
            let mut fa = [0i64; 3];
            let mut sa = [0.0; 3];
            let mut fb = [0i64; 3];
            let mut sb = [0.0; 3];
            let mut da = [0.0; 3];
            let mut db = [0.0; 3];
            for a in 0..3 {
                let e = az.e[a];
                if e < 0.0 {
                    fa[a] = -1;
                    sa[a] = 1.0;
                }
                fb[a] = -u[a];
                if e > 0.0 {
                    fb[a] -= 1;
                    sb[a] = 1.0;
                }
                da[a] = entry.r * e;
                db[a] = -entry.r * e;
            }
            push((fa, fb, None), az.w, coefficients(sa, sb, da, db, true));
        }
    }
    let mut out: Vec<Group> = Vec::new();
    for (key, mom) in &keyed {
        let segs: Vec<_> = (0..3)
            .map(|a| axis_segments(n, u[a], key.0[a], key.1[a]))
            .collect();
        let mut made: Vec<(Variant, usize)> = Vec::new();
        for x in &segs[0] {
            for y in &segs[1] {
                for z in &segs[2] {
                    let variant = ([x.2, y.2, z.2], [x.3, y.3, z.3]);
                    let gi = match made.iter().find(|(v, _)| *v == variant) {
                        Some((_, gi)) => *gi,
                        None => {
                            out.push(build_group(key, &variant, u, mom));
                            made.push((variant, out.len() - 1));
                            out.len() - 1
                        }
                    };
                    out[gi].boxes.push(([x.0, y.0, z.0], [x.1, y.1, z.1]));
                }
            }
        }
    }
    out
}

fn half_offsets(n: i64) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    for dx in -(n - 1)..n {
        for dy in -(n - 1)..n {
            for dz in -(n - 1)..n {
                if dx > 0 || (dx == 0 && (dy > 0 || (dy == 0 && dz > 0))) {
                    out.push([dx, dy, dz]);
                }
            }
        }
    }
    out
}

fn check_size(grid: &VelocityGrid, slots: usize, cap: usize) -> LabResult<()> {
    if grid.n() > MAX_ASSEMBLY_N {
        return Err(LabError::Resource(format!(
            "dense assembly needs n <= {MAX_ASSEMBLY_N}, got {}",
            grid.n()
        )));
    }
    let bytes = grid.len() * grid.len() * slots * std::mem::size_of::<f64>();
    if bytes > cap {
        return Err(LabError::Resource(format!(
            "dense assembly needs {bytes} bytes, cap is {cap}"
        )));
    }
    Ok(())
}

/// Assembles `slots` dense matrices. `route(panel)` gives the slot and the
/// coefficient of each group (`None` skips it).
fn assemble_slots<R>(
    plan: &CollisionPlan,
    slots: usize,
    cap: usize,
    route: R,
) -> LabResult<Vec<DMatrix<f64>>>
where
    R: Fn(Option<u16>) -> Option<(usize, f64)> + Sync,
{
    let grid = plan.grid;
    check_size(&grid, slots, cap)?;
    let n = grid.n() as i64;
    let nn = grid.len();
    let plane = (n * n) as usize;
    let mu: Vec<f64> = crate::grid::maxwellian(&grid).into_values();
    let mut data: Vec<Vec<f64>> = (0..slots).map(|_| vec![0.0; nn * nn]).collect();
    {
        // one task per x-plane of rows, holding that plane in every slot
        let mut blocks: Vec<Vec<&mut [f64]>> =
            (0..n as usize).map(|_| Vec::with_capacity(slots)).collect();
        for d in data.iter_mut() {
            for (b, chunk) in d.chunks_mut(plane * nn).enumerate() {
                blocks[b].push(chunk);
            }
        }
        let lin = |o: &[i64; 3]| (o[0] * n + o[1]) * n + o[2];
        for u in half_offsets(n) {
            let groups = groups_for(plan, u);
            if groups.is_empty() {
                continue;
            }
            let ulin = lin(&u);
            par::for_each_mut(&mut blocks, |x, block| {
                let x = x as i64;
                let mut offs = [0i64; 32];
                let mut cols: Vec<(i64, f64)> = Vec::with_capacity(32);
                for g in &groups {
                    let Some((slot, coef)) = route(g.panel) else {
                        continue;
                    };
                    let m = g.support.len();
                    for (o, s) in offs.iter_mut().zip(&g.support) {
                        *o = lin(s);
                    }
                    let out = &mut *block[slot];
                    for k in 0..m {
                        let ix = x - g.support[k][0];
                        if !g.boxes.iter().any(|(lo, hi)| ix >= lo[0] && ix <= hi[0]) {
                            continue;
                        }
                        cols.clear();
                        for l in 0..m {
                            let p = g.psi[k * m + l];
                            if offs[l] >= offs[k] && p != 0.0 {
                                cols.push((offs[l], 0.5 * coef * p));
                            }
                        }
                        for (lo, hi) in &g.boxes {
                            if ix < lo[0] || ix > hi[0] {
                                continue;
                            }
                            for iy in lo[1]..=hi[1] {
                                for iz in lo[2]..=hi[2] {
                                    let i = (ix * n + iy) * n + iz;
                                    let c = mu[i as usize] * mu[(i - ulin) as usize];
                                    let row = (i + offs[k]) as usize - x as usize * plane;
                                    let base = row * nn;
                                    for &(off, p) in &cols {
                                        out[base + (i + off) as usize] += c * p;
                                    }
                                }
                            }
                        }
                    }
                }
            });
        }
    }
    let sm = sqrt_maxwellian(plan);
    Ok(data
        .into_iter()
        .map(|mut k| {
            for a in 0..nn {
                for b in a + 1..nn {
                    k[b * nn + a] = k[a * nn + b];
                }
            }
            for a in 0..nn {
                for b in 0..nn {
                    k[a * nn + b] /= sm[a] * sm[b];
                }
            }
            DMatrix::from_vec(nn, nn, k)
        })
        .collect())
}

/// Dense matrix of the linearized operator described by `plan`, in the
/// convention `<L f, g> = h^3 sum_b (M f)_b g_b`.
pub fn linearized_matrix(plan: &CollisionPlan) -> LabResult<DMatrix<f64>> {
    linearized_matrix_capped(plan, DEFAULT_MEMORY_CAP)
}

pub fn linearized_matrix_capped(plan: &CollisionPlan, cap: usize) -> LabResult<DMatrix<f64>> {
    let (uc, lc) = (plan.u_coeff, plan.landau_coeff);
    let mut v = assemble_slots(plan, 1, cap, |p| match p {
        Some(_) => Some((0, uc)),
        None => Some((0, lc)),
    })?;
    Ok(v.pop().expect("one slot"))
}

/// `L f` evaluated matrix-free from the same Dirichlet form.
pub fn linearized_apply(
    plan: &CollisionPlan,
    f: &DistributionField,
) -> LabResult<DistributionField> {
    plan.grid.same_as(f.grid())?;
    let grid = plan.grid;
    let n = grid.n() as i64;
    let nn = grid.len();
    let mu: Vec<f64> = crate::grid::maxwellian(&grid).into_values();
    let sm = sqrt_maxwellian(plan);
    let fv: Vec<f64> = f.values().iter().zip(&sm).map(|(a, s)| a / s).collect();
    let offsets = half_offsets(n);
    let chunk = offsets.len().div_ceil(super::scatter::CHUNKS);
    let lin = |o: &[i64; 3]| (o[0] * n + o[1]) * n + o[2];
    let parts = par::map_indexed(super::scatter::CHUNKS, |c| {
        let mut out = vec![0.0; nn];
        let lo_u = (c * chunk).min(offsets.len());
        let hi_u = ((c + 1) * chunk).min(offsets.len());
        for u in &offsets[lo_u..hi_u] {
            let ulin = lin(u);
            for g in groups_for(plan, *u) {
                let coef = if g.panel.is_some() {
                    plan.u_coeff
                } else {
                    plan.landau_coeff
                };
                let m = g.support.len();
                let mut offs = [0i64; 32];
                for (o, s) in offs.iter_mut().zip(&g.support) {
                    *o = lin(s);
                }
                for (lo, hi) in &g.boxes {
                    for ix in lo[0]..=hi[0] {
                        for iy in lo[1]..=hi[1] {
                            for iz in lo[2]..=hi[2] {
                                let i = (ix * n + iy) * n + iz;
                                let c = 0.5 * coef * mu[i as usize] * mu[(i - ulin) as usize];
                                for k in 0..m {
                                    let mut y = 0.0;
                                    for l in 0..m {
                                        y += g.psi[k * m + l] * fv[(i + offs[l]) as usize];
                                    }
                                    out[(i + offs[k]) as usize] += c * y;
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    });
    let mut out = vec![0.0; nn];
    for p in parts {
        for (o, x) in out.iter_mut().zip(p) {
            *o += x;
        }
    }
    for (o, s) in out.iter_mut().zip(&sm) {
        *o /= s;
    }
    f.like(out)
}

/// Per-panel pieces of the linearized operator for a whole epsilon sweep,
/// assembled in one pass. Any `L^eps` with `eps` among the sweep values, and
/// the Landau operator, is a linear combination of the pieces.
#[derive(Debug, Clone)]
pub struct LinearizedSweep {
    grid: VelocityGrid,
    params: KernelParams,
    quad: CollisionQuadrature,
    breakpoints: Vec<f64>,
    panels: Vec<DMatrix<f64>>,
    landau: Option<DMatrix<f64>>,
}

impl LinearizedSweep {
    /// `params` supplies `gamma`, `eta` and `k_const`; its `epsilon` is
    /// ignored in favour of `epsilons`.
    pub fn assemble(
        grid: &VelocityGrid,
        params: &KernelParams,
        quad: &CollisionQuadrature,
        epsilons: &[f64],
        landau: bool,
    ) -> LabResult<Self> {
        Self::assemble_capped(grid, params, quad, epsilons, landau, DEFAULT_MEMORY_CAP)
    }

    pub fn assemble_capped(
        grid: &VelocityGrid,
        params: &KernelParams,
        quad: &CollisionQuadrature,
        epsilons: &[f64],
        landau: bool,
        cap: usize,
    ) -> LabResult<Self> {
        quad.validate()?;
        for &e in epsilons {
            KernelParams::new(
                e,
                params.gamma,
                params.eta,
                params.k_const,
                params.symmetrized,
            )?;
        }
        let tc = quad.grazing_cutoff;
        let need_landau = landau || epsilons.iter().any(|&e| e < tc);
        let t_lo = epsilons
            .iter()
            .fold(f64::INFINITY, |a, &e| a.min(e))
            .max(tc);
        let t_lo = if t_lo.is_finite() { t_lo } else { tc };
        let cuts: Vec<f64> = epsilons.iter().copied().filter(|&e| e > tc).collect();
        let mut plan = CollisionPlan::raw(grid, params, quad, t_lo, &cuts)?;
        if !need_landau {
            plan.landau_coeff = 0.0;
        }
        let np = plan.breakpoints.len().saturating_sub(1);
        let slots = np + need_landau as usize;
        let mut mats = assemble_slots(&plan, slots, cap, |p| match p {
            Some(k) => Some((k as usize, 1.0)),
            None => Some((np, 1.0)),
        })?;
        let landau_m = if need_landau { mats.pop() } else { None };
        Ok(Self {
            grid: *grid,
            params: *params,
            quad: *quad,
            breakpoints: plan.breakpoints.clone(),
            panels: mats,
            landau: landau_m,
        })
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// The combination for one operator.
    pub fn matrix(&self, kind: &OperatorKind) -> LabResult<DMatrix<f64>> {
        let p = kind.params();
        if p.gamma != self.params.gamma || p.eta != self.params.eta {
            return Err(LabError::param(
                "kind",
                "kernel exponent or truncation differs from the sweep",
            ));
        }
        let (t_lo, uc, lc) = kind.split(&self.quad);
        let nn = self.grid.len();
        let mut m = DMatrix::zeros(nn, nn);
        if lc != 0.0 {
            let l = self.landau.as_ref().ok_or_else(|| {
                LabError::param("kind", "sweep was assembled without the grazing part")
            })?;
            let scale = if kind.is_landau() {
                lc
            } else {
                lc * self.params.k_const.recip() * p.k_const
            };
            m += l * scale;
        }
        if uc != 0.0 {
            let tol = 1e-9 * t_lo;
            if !self.breakpoints.iter().any(|b| (b - t_lo).abs() <= tol) {
                return Err(LabError::param(
                    "kind",
                    format!("cutoff {t_lo} is not a panel breakpoint of the sweep"),
                ));
            }
            let scale = uc * p.k_const / self.params.k_const;
            for (k, w) in self.breakpoints.windows(2).enumerate() {
                if w[1] >= t_lo - tol {
                    m += &self.panels[k] * scale;
                }
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FieldRole;
    use crate::kernel::Vec3;

    fn grid() -> VelocityGrid {
        VelocityGrid::new(4.5, 8).unwrap()
    }

    fn invariants(g: &VelocityGrid) -> Vec<DistributionField> {
        let sm = |v: &Vec3| crate::grid::maxwellian_at(v).sqrt();
        vec![
            DistributionField::from_fn(*g, FieldRole::Basis, sm),
            DistributionField::from_fn(*g, FieldRole::Basis, move |v| v[0] * sm(v)),
            DistributionField::from_fn(*g, FieldRole::Basis, move |v| v[1] * sm(v)),
            DistributionField::from_fn(*g, FieldRole::Basis, move |v| v[2] * sm(v)),
            DistributionField::from_fn(*g, FieldRole::Basis, move |v| v.norm_squared() * sm(v)),
        ]
    }

    fn smooth(g: &VelocityGrid) -> DistributionField {
        DistributionField::from_fn(*g, FieldRole::Perturbation, |v| {
            (0.3 + v[0] * v[1] - 0.4 * v[2].powi(3) + 0.2 * v[0])
                * crate::grid::maxwellian_at(v).sqrt()
        })
    }

    fn check_structure(m: &DMatrix<f64>, g: &VelocityGrid) {
        let norm = m.norm();
        assert!(norm > 0.0);
        assert_eq!((m - m.transpose()).norm(), 0.0);
        for e in invariants(g) {
            let v = nalgebra::DVector::from_column_slice(e.values());
            let r = (m * &v).norm() / (norm * v.norm());
            // the blocks are formed from second moments of the node
            // coefficients, which costs a digit or two against direct sums
            assert!(r < 1e-11, "null residual {r}");
        }
        let ev = m.clone().symmetric_eigenvalues();
        let min = ev.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > -1e-12 * norm, "min eigenvalue {min}");
    }

    #[test]
    fn boltzmann_matrix_is_symmetric_psd_with_invariant_kernel() {
        let g = grid();
        for eps in [1e-2, 1e-5] {
            let plan = CollisionPlan::new(
                &g,
                OperatorKind::Boltzmann(KernelParams::coulomb(eps).unwrap()),
                &CollisionQuadrature::default(),
            )
            .unwrap();
            let m = linearized_matrix(&plan).unwrap();
            check_structure(&m, &g);
            let f = smooth(&g);
            let direct = linearized_apply(&plan, &f).unwrap();
            let via = &m * nalgebra::DVector::from_column_slice(f.values());
            for (a, b) in direct.values().iter().zip(via.iter()) {
                assert!((a - b).abs() <= 1e-11 * via.amax());
            }
        }
    }

    #[test]
    fn landau_matrix_structure() {
        let g = grid();
        let plan = CollisionPlan::new(
            &g,
            OperatorKind::Landau(KernelParams::coulomb(1e-2).unwrap()),
            &CollisionQuadrature::default(),
        )
        .unwrap();
        check_structure(&linearized_matrix(&plan).unwrap(), &g);
    }

    #[test]
    fn sweep_combination_matches_direct_assembly() {
        let g = grid();
        let q = CollisionQuadrature::default();
        let base = KernelParams::coulomb(1e-2).unwrap();
        let eps = [1e-2, 1e-3, 1e-5];
        let sweep = LinearizedSweep::assemble(&g, &base, &q, &eps, true).unwrap();
        let mut kinds: Vec<OperatorKind> = eps
            .iter()
            .map(|&e| OperatorKind::Boltzmann(KernelParams::coulomb(e).unwrap()))
            .collect();
        kinds.push(OperatorKind::Landau(base));
        for kind in kinds {
            let a = sweep.matrix(&kind).unwrap();
            let b = linearized_matrix(&CollisionPlan::new(&g, kind, &q).unwrap()).unwrap();
            assert!((&a - &b).norm() <= 1e-12 * b.norm(), "{kind:?}");
        }
        let off = OperatorKind::Boltzmann(KernelParams::coulomb(2e-3).unwrap());
        assert!(sweep.matrix(&off).is_err());
    }

    #[test]
    fn resource_guard() {
        let g = grid();
        let plan = CollisionPlan::new(
            &g,
            OperatorKind::Boltzmann(KernelParams::coulomb(1e-2).unwrap()),
            &CollisionQuadrature::default(),
        )
        .unwrap();
        assert!(matches!(
            linearized_matrix_capped(&plan, 1000),
            Err(LabError::Resource(_))
        ));
    }
}
