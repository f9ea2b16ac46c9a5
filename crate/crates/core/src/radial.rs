//! Radial profiles on `(0, 1]`: graded grids, piecewise-linear profiles,
//! singular-weight quadrature and the weighted norms built on it.
//!
//! A [`Profile`] holds one value per grid node. Between nodes it is linear;
//! on the first cell `(0, r_1)` it is constant, equal to its value at `r_1`.
//! Every piecewise-linear profile with `u(1) = 0` is an honest member of the
//! weighted space, so quantities computed on it are exact up to quadrature.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::math::{self, powf};
use crate::params::ParamSet;
use crate::quad::GaussLegendre;
use crate::{Error, Result};

/// Gauss points per cell used by every profile integral.
pub const CELL_POINTS: usize = 4;

/// Cells with `r_k < NEAR_ORIGIN * (r_{k+1} - r_k)` use exact moments in
/// [`weighted_integral`].
const NEAR_ORIGIN: f64 = 16.0;

/// Smallest accepted node count.
pub const MIN_NODES: usize = 2;

/// Nodes `r_i = (i/M)^gamma`, `i = 1..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    gamma: f64,
}

impl Grid {
    pub fn new(m: usize, gamma: f64) -> Result<Self> {
        if m < MIN_NODES {
            return Err(Error::Domain("grid needs at least 2 nodes"));
        }
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(Error::Domain("grid grading exponent must be >= 1"));
        }
        let mf = m as f64;
        let mut nodes: Vec<f64> = (1..=m).map(|i| powf(i as f64 / mf, gamma)).collect();
        nodes[m - 1] = 1.0;
        Ok(Self { nodes, gamma })
    }

    /// A grid from explicit nodes; they must increase strictly and end at 1.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < MIN_NODES {
            return Err(Error::Domain("grid needs at least 2 nodes"));
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(
                "grid nodes must increase strictly from r_1 > 0",
            ));
        }
        if (nodes[nodes.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::Domain("last grid node must be 1"));
        }
        let mut nodes = nodes;
        let last = nodes.len() - 1;
        nodes[last] = 1.0;
        Ok(Self {
            nodes,
            gamma: f64::NAN,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Grading exponent; NaN for grids built from explicit nodes.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    /// Interior cells `(r_k, r_{k+1})`, excluding the first cell `(0, r_1)`.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }

    /// Index of the cell `(r_k, r_{k+1})` containing `r`; `None` below `r_1`.
    pub fn locate(&self, r: f64) -> Option<usize> {
        if r < self.nodes[0] {
            return None;
        }
        let k = self.nodes.partition_point(|&x| x <= r);
        Some(k.saturating_sub(1).min(self.nodes.len() - 2))
    }
}

/// Builds `M` nodes graded toward the origin with exponent `gamma`.
pub fn make_grid(m: usize, gamma: f64) -> Result<Grid> {
    Grid::new(m, gamma)
}

/// `int_a^b r^w dr` for `0 <= a < b`, `w > -1`, without cancellation for thin cells.
pub fn power_moment(a: f64, b: f64, w: f64) -> f64 {
    let k = w + 1.0;
    if a <= 0.0 {
        return powf(b, k) / k;
    }
    // a^k (exp(k ln(b/a)) - 1) / k
    powf(a, k) * libm::expm1(k * math::ln_1p((b - a) / a)) / k
}

/// A radial function sampled at the nodes of a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: Arc<Grid>,
    values: Vec<f64>,
    origin: f64,
}

impl Profile {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain("profile length does not match grid"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("profile values must be finite"));
        }
        let origin = values[0];
        Ok(Self {
            grid,
            values,
            origin,
        })
    }

    pub fn from_fn<F: FnMut(f64) -> f64>(grid: Arc<Grid>, mut f: F) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn zero(grid: Arc<Grid>) -> Self {
        let values = alloc::vec![0.0; grid.len()];
        Self {
            grid,
            values,
            origin: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value shown at `r = 0`. Defaults to `u(r_1)`.
    pub fn value_at_origin(&self) -> f64 {
        self.origin
    }

    pub fn with_origin(mut self, origin: f64) -> Self {
        self.origin = origin;
        self
    }

    /// Sets `u(1) = 0`.
    pub fn with_zero_boundary(mut self) -> Self {
        let last = self.values.len() - 1;
        self.values[last] = 0.0;
        self
    }

    pub fn boundary_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            origin: self.origin * c,
        }
    }

    /// `self + c * other` on the same grid.
    pub fn axpy(&self, c: f64, other: &Profile) -> Self {
        debug_assert_eq!(self.values.len(), other.values.len());
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
            origin: self.origin + c * other.origin,
        }
    }

    pub fn map_values<F: FnMut(f64) -> f64>(&self, f: F) -> Self {
        let values: Vec<f64> = self.values.iter().copied().map(f).collect();
        let origin = values[0];
        Self {
            grid: self.grid.clone(),
            values,
            origin,
        }
    }

    /// Piecewise-linear evaluation.
    pub fn value_at(&self, r: f64) -> f64 {
        match self.grid.locate(r) {
            None => self.values[0],
            Some(k) => {
                let (a, b) = (self.grid.nodes[k], self.grid.nodes[k + 1]);
                let t = ((r - a) / (b - a)).clamp(0.0, 1.0);
                self.values[k] + t * (self.values[k + 1] - self.values[k])
            }
        }
    }

    /// Per-cell slopes of the interior cells.
    pub fn slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid
            .nodes
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(r, v)| (v[1] - v[0]) / (r[1] - r[0]))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Quadrature over a profile: first cell with the constant value at `r_1`,
/// interior cells with [`CELL_POINTS`] Gauss points and linear interpolation.
///
/// `f(r, u)` is integrated against `r^w dr`.
pub fn profile_integral<F: FnMut(f64, f64) -> f64>(u: &Profile, w: f64, mut f: F) -> f64 {
    let gl = GaussLegendre::new(CELL_POINTS);
    profile_integral_with(&gl, u, w, &mut f)
}

pub(crate) fn profile_integral_with<F: FnMut(f64, f64) -> f64>(
    gl: &GaussLegendre,
    u: &Profile,
    w: f64,
    f: &mut F,
) -> f64 {
    let nodes = u.grid.nodes();
    let vals = u.values();
    let r1 = nodes[0];
    let mut total = power_moment(0.0, r1, w) * f(r1, vals[0]);
    for k in 0..nodes.len() - 1 {
        let (a, b) = (nodes[k], nodes[k + 1]);
        let (ua, ub) = (vals[k], vals[k + 1]);
        let h = b - a;
        let mut cell = 0.0;
        for (t, wt) in gl.unit() {
            let r = a + t * h;
            let uu = ua + t * (ub - ua);
            cell += wt * powf(r, w) * f(r, uu);
        }
        total += cell * h;
    }
    total
}

/// `int_0^1 r^w f dr` for nodal values `f`, linear between nodes and equal to
/// `f(r_1)` on `(0, r_1)`.
pub fn weighted_integral(grid: &Grid, f: &[f64], w: f64) -> Result<f64> {
    if w <= -1.0 {
        return Err(Error::Domain("weight exponent must exceed -1"));
    }
    if f.len() != grid.len() {
        return Err(Error::Domain("nodal values do not match grid"));
    }
    let gl = GaussLegendre::new(CELL_POINTS);
    let nodes = grid.nodes();
    let mut total = power_moment(0.0, nodes[0], w) * f[0];
    for k in 0..nodes.len() - 1 {
        let (a, b) = (nodes[k], nodes[k + 1]);
        let h = b - a;
        if a < NEAR_ORIGIN * h {
            // Exact moments where the weight varies fastest across the cell.
            let m0 = power_moment(a, b, w);
            let m1 = power_moment(a, b, w + 1.0);
            total += f[k] * m0 + (f[k + 1] - f[k]) * (m1 - a * m0) / h;
            continue;
        }
        let cell: f64 = gl
            .unit()
            .map(|(t, wt)| wt * powf(a + t * h, w) * (f[k] + t * (f[k + 1] - f[k])))
            .sum();
        total += cell * h;
    }
    Ok(total)
}

/// Same cell layout as [`weighted_integral`] but with `f` evaluated at the
/// Gauss points instead of interpolated.
pub fn weighted_integral_fn<F: FnMut(f64) -> f64>(grid: &Grid, mut f: F, w: f64) -> Result<f64> {
    if w <= -1.0 {
        return Err(Error::Domain("weight exponent must exceed -1"));
    }
    let gl = GaussLegendre::new(CELL_POINTS);
    let nodes = grid.nodes();
    let mut total = power_moment(0.0, nodes[0], w) * f(nodes[0]);
    for (a, b) in grid.cells() {
        total += gl.integrate(a, b, |r| powf(r, w) * f(r));
    }
    Ok(total)
}

/// `int_0^1 r^alpha1 |u'|^p dr`, exact for piecewise-linear profiles.
pub fn dirichlet_energy(u: &Profile, ps: &ParamSet) -> f64 {
    let p = ps.p();
    let a1 = ps.alpha1();
    u.grid
        .cells()
        .zip(u.slopes())
        .map(|((a, b), s)| {
            if s == 0.0 {
                0.0
            } else {
                power_moment(a, b, a1) * powf(s.abs(), p)
            }
        })
        .sum()
}

/// `||u|| = (int_0^1 r^alpha1 |u'|^p dr)^(1/p)`.
pub fn dirichlet_norm(u: &Profile, ps: &ParamSet) -> f64 {
    powf(dirichlet_energy(u, ps), 1.0 / ps.p())
}

/// `int_rho^1 r^alpha1 |u'|^p dr`, splitting the cell that contains `rho`.
pub fn dirichlet_tail(u: &Profile, ps: &ParamSet, rho: f64) -> f64 {
    let p = ps.p();
    let a1 = ps.alpha1();
    u.grid
        .cells()
        .zip(u.slopes())
        .filter(|((_, b), _)| *b > rho)
        .map(|((a, b), s)| power_moment(a.max(rho), b, a1) * powf(s.abs(), p))
        .sum()
}

/// `int_0^1 r^w f(r, u, v) dr` for two profiles on the same grid, using the
/// same cell layout as [`profile_integral`].
pub fn profile_pair_integral<F: FnMut(f64, f64, f64) -> f64>(
    u: &Profile,
    v: &Profile,
    w: f64,
    mut f: F,
) -> f64 {
    debug_assert_eq!(u.values.len(), v.values.len());
    let gl = GaussLegendre::new(CELL_POINTS);
    let nodes = u.grid.nodes();
    let (uv, vv) = (u.values(), v.values());
    let r1 = nodes[0];
    let mut total = power_moment(0.0, r1, w) * f(r1, uv[0], vv[0]);
    for k in 0..nodes.len() - 1 {
        let (a, b) = (nodes[k], nodes[k + 1]);
        let h = b - a;
        let mut cell = 0.0;
        for (t, wt) in gl.unit() {
            let r = a + t * h;
            let uu = uv[k] + t * (uv[k + 1] - uv[k]);
            let vvv = vv[k] + t * (vv[k + 1] - vv[k]);
            cell += wt * powf(r, w) * f(r, uu, vvv);
        }
        total += cell * h;
    }
    total
}

/// Gradient of `u -> profile_integral(u, w, f)` with respect to the nodal
/// values, given `df(r, u) = d f / d u`.
pub fn profile_integral_gradient<F: FnMut(f64, f64) -> f64>(
    u: &Profile,
    w: f64,
    mut df: F,
) -> Vec<f64> {
    let gl = GaussLegendre::new(CELL_POINTS);
    let nodes = u.grid.nodes();
    let vals = u.values();
    let mut grad = alloc::vec![0.0; vals.len()];
    grad[0] = power_moment(0.0, nodes[0], w) * df(nodes[0], vals[0]);
    for k in 0..nodes.len() - 1 {
        let (a, b) = (nodes[k], nodes[k + 1]);
        let h = b - a;
        for (t, wt) in gl.unit() {
            let r = a + t * h;
            let uu = vals[k] + t * (vals[k + 1] - vals[k]);
            let g = wt * h * powf(r, w) * df(r, uu);
            grad[k] += (1.0 - t) * g;
            grad[k + 1] += t * g;
        }
    }
    grad
}

/// `int_0^1 r^alpha1 |u'|^{p-2} u' v' dr`, exact for piecewise-linear profiles.
pub fn dirichlet_pairing(u: &Profile, v: &Profile, ps: &ParamSet) -> f64 {
    let p = ps.p();
    let a1 = ps.alpha1();
    u.grid
        .cells()
        .zip(u.slopes().zip(v.slopes()))
        .map(|((a, b), (su, sv))| {
            if su == 0.0 {
                0.0
            } else {
                power_moment(a, b, a1) * math::signed_pow(su, p - 1.0) * sv
            }
        })
        .sum()
}

/// Gradient of [`dirichlet_energy`] with respect to the nodal values.
pub fn dirichlet_gradient(u: &Profile, ps: &ParamSet) -> Vec<f64> {
    let p = ps.p();
    let a1 = ps.alpha1();
    let nodes = u.grid.nodes();
    let mut grad = alloc::vec![0.0; nodes.len()];
    for (k, s) in u.slopes().enumerate() {
        if s == 0.0 {
            continue;
        }
        let (a, b) = (nodes[k], nodes[k + 1]);
        let c = p * power_moment(a, b, a1) * math::signed_pow(s, p - 1.0) / (b - a);
        grad[k] -= c;
        grad[k + 1] += c;
    }
    grad
}

/// Quadrature points of [`profile_integral`] with the geometry precomputed,
/// for repeated evaluation over the same grid.
///
/// Point `i` interpolates `u` as `(1 - t_i) u[k_i] + t_i u[k_i + 1]`; the
/// first-cell point has `t = 0`.
#[derive(Debug, Clone)]
pub struct QuadPoints {
    pub cell: Vec<usize>,
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    /// Quadrature weight times `r^w`.
    pub weight: Vec<f64>,
}

impl QuadPoints {
    pub fn new(grid: &Grid, w: f64) -> Self {
        let gl = GaussLegendre::new(CELL_POINTS);
        let nodes = grid.nodes();
        let n = 1 + (nodes.len() - 1) * CELL_POINTS;
        let mut out = Self {
            cell: Vec::with_capacity(n),
            t: Vec::with_capacity(n),
            r: Vec::with_capacity(n),
            weight: Vec::with_capacity(n),
        };
        out.cell.push(0);
        out.t.push(0.0);
        out.r.push(nodes[0]);
        out.weight.push(power_moment(0.0, nodes[0], w));
        for k in 0..nodes.len() - 1 {
            let (a, b) = (nodes[k], nodes[k + 1]);
            let h = b - a;
            for (t, wt) in gl.unit() {
                let r = a + t * h;
                out.cell.push(k);
                out.t.push(t);
                out.r.push(r);
                out.weight.push(wt * h * powf(r, w));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    #[inline]
    pub fn value(&self, vals: &[f64], i: usize) -> f64 {
        let k = self.cell[i];
        let t = self.t[i];
        if t == 0.0 {
            vals[k]
        } else {
            vals[k] + t * (vals[k + 1] - vals[k])
        }
    }

    /// Adds `g` to the nodal gradient at the nodes point `i` interpolates from.
    #[inline]
    pub fn scatter(&self, grad: &mut [f64], i: usize, g: f64) {
        let k = self.cell[i];
        let t = self.t[i];
        if t == 0.0 {
            grad[k] += g;
        } else {
            grad[k] += (1.0 - t) * g;
            grad[k + 1] += t * g;
        }
    }
}

/// Weighted Lebesgue norm `(int_0^1 r^w |u|^q dr)^(1/q)`.
pub fn lq_norm(u: &Profile, q: f64, w: f64) -> Result<f64> {
    if q < 1.0 {
        return Err(Error::Domain("Lebesgue exponent must be >= 1"));
    }
    if w <= -1.0 {
        return Err(Error::Domain("weight exponent must exceed -1"));
    }
    let integral = profile_integral(u, w, |_, v| powf(v.abs(), q));
    Ok(powf(integral, 1.0 / q))
}

/// Returns `u / ||u||`.
pub fn normalize(u: &Profile, ps: &ParamSet) -> Result<Profile> {
    let norm = dirichlet_norm(u, ps);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Domain(
            "cannot normalize a profile with zero Dirichlet norm",
        ));
    }
    Ok(u.scaled(1.0 / norm))
}

/// Worst node of the pointwise estimate `|u(r)| <= C(r) ||u|| r^{-(alpha1-p+1)/p}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointwiseReport {
    /// Smallest `bound - |u|` over all nodes.
    pub min_slack: f64,
    pub worst_node: usize,
    pub pass: bool,
}

/// Allowed negative slack in [`pointwise_bound_check`].
pub const POINTWISE_TOL: f64 = 1e-12;

/// The sharp radial bound valid for every member of the space vanishing at `r = 1`:
/// `[((p-1)/(alpha1-p+1)) (1 - r^{(alpha1-p+1)/(p-1)})]^{(p-1)/p} ||u|| r^{-(alpha1-p+1)/p}`.
pub fn pointwise_bound(r: f64, norm: f64, ps: &ParamSet) -> f64 {
    let p = ps.p();
    let gap = ps.sobolev_gap();
    let one_minus = -libm::expm1(gap / (p - 1.0) * math::ln(r));
    let base = ((p - 1.0) / gap) * one_minus.max(0.0);
    powf(base, (p - 1.0) / p) * norm * powf(r, -gap / p)
}

pub fn pointwise_bound_check(u: &Profile, ps: &ParamSet) -> PointwiseReport {
    let norm = dirichlet_norm(u, ps);
    let mut min_slack = f64::INFINITY;
    let mut worst_node = 0;
    for (i, (&r, &v)) in u.grid.nodes().iter().zip(u.values()).enumerate() {
        let slack = pointwise_bound(r, norm, ps) - v.abs();
        if slack < min_slack {
            min_slack = slack;
            worst_node = i;
        }
    }
    PointwiseReport {
        min_slack,
        worst_node,
        pass: min_slack >= -POINTWISE_TOL,
    }
}
