//! Constrained maximization of `J` on the Dirichlet sphere, asymptotic rate
//! fits, concentration checks, the Nehari-type scalar equation along a ray and
//! the mountain-pass level of the bubble path.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::bliss::{self, BubbleSpec, ConstantsReport};
use crate::functionals::{self, JEvaluator, LogParams, Primitive};
use crate::math::{self, ln, powf};
use crate::params::{DerivedConstants, ParamSet};
use crate::radial::{self, Grid, Profile};
use crate::{Error, Result};

/// Regression model for `value(eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateModel {
    /// `value = C eps^k`.
    PurePower,
    /// `value = C eps^k ln|ln eps|`.
    PowerTimesLogLog,
}

impl RateModel {
    pub fn name(self) -> &'static str {
        match self {
            RateModel::PurePower => "pure-power",
            RateModel::PowerTimesLogLog => "power-times-loglog",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub abscissae: Vec<f64>,
    pub ordinates: Vec<f64>,
    pub fitted_exponent: f64,
    /// Root-mean-square residual of the log-space fit.
    pub fit_residual: f64,
    pub model: RateModel,
}

/// Least-squares slope of the log-transformed values against `ln eps`.
pub fn rate_fit(eps: &[f64], values: &[f64], model: RateModel) -> Result<RateTable> {
    if eps.len() != values.len() {
        return Err(Error::Domain("rate table columns differ in length"));
    }
    if eps.len() < 4 {
        return Err(Error::Domain("rate fit needs at least 4 points"));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) || eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Domain(
            "abscissae must be positive and strictly decreasing",
        ));
    }
    if values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("rate fit needs positive values"));
    }
    if model == RateModel::PowerTimesLogLog && eps.iter().any(|&e| !(e < math::exp(-1.0))) {
        return Err(Error::Domain("log-log model needs eps < 1/e"));
    }
    let xs: Vec<f64> = eps.iter().map(|&e| ln(e)).collect();
    let ys: Vec<f64> = eps
        .iter()
        .zip(values)
        .map(|(&e, &v)| match model {
            RateModel::PurePower => ln(v),
            RateModel::PowerTimesLogLog => ln(v) - ln(bliss::loglog(e)),
        })
        .collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (icpt + slope * x);
            r * r
        })
        .sum();
    Ok(RateTable {
        abscissae: eps.to_vec(),
        ordinates: values.to_vec(),
        fitted_exponent: slope,
        fit_residual: math::sqrt(rss / n),
        model,
    })
}

/// What the maximizer climbs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// The log-perturbed `J`.
    Log(LogParams),
    /// The unperturbed `J0`.
    Sobolev,
}

impl Objective {
    pub fn value(&self, u: &Profile, ps: &ParamSet) -> f64 {
        match self {
            Objective::Log(lp) => functionals::j_functional(u, lp, ps),
            Objective::Sobolev => functionals::sobolev_j0(u, ps),
        }
    }

    pub fn gradient(&self, u: &Profile, ps: &ParamSet) -> Vec<f64> {
        match self {
            Objective::Log(lp) => functionals::j_gradient(u, lp, ps),
            Objective::Sobolev => functionals::sobolev_j0_gradient(u, ps),
        }
    }

    /// A reusable evaluator on `grid`.
    pub fn evaluator(&self, grid: &Grid, ps: &ParamSet) -> JEvaluator {
        match self {
            Objective::Log(lp) => JEvaluator::new(grid, Some(lp), ps),
            Objective::Sobolev => JEvaluator::new(grid, None, ps),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximizeOptions {
    pub max_iter: usize,
    /// Stop once an accepted step changes the value by less than this, relatively.
    pub rel_tol: f64,
    /// Bubble scales tried as starting points.
    pub seed_eps: Vec<f64>,
    /// Number of best seeds that are actually climbed from.
    pub starts: usize,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            rel_tol: 1e-10,
            seed_eps: default_eps_scan(),
            starts: 3,
        }
    }
}

/// `1e-2, 3e-3, 1e-3, ..., 1e-6`.
pub fn default_eps_scan() -> Vec<f64> {
    let mut out = Vec::new();
    let mut e = 1e-2;
    while e >= 0.99e-6 {
        out.push(e);
        out.push(e * 0.3);
        e *= 0.1;
    }
    out.pop();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximizeResult {
    /// Nonnegative, unit Dirichlet norm, zero at `r = 1`.
    pub profile: Profile,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Bubble scale of the start that produced the result.
    pub seed_eps: f64,
}

/// Tridiagonal `p = 2` stiffness `int r^alpha1 phi_i' phi_j'` on all nodes but
/// the last, which is held at zero.
struct Stiffness {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Stiffness {
    fn new(grid: &Grid, alpha1: f64) -> Self {
        let nodes = grid.nodes();
        let n = nodes.len() - 1;
        let mut diag = alloc::vec![0.0; n];
        let mut off = alloc::vec![0.0; n.saturating_sub(1)];
        for k in 0..n {
            let (a, b) = (nodes[k], nodes[k + 1]);
            let c = radial::power_moment(a, b, alpha1) / ((b - a) * (b - a));
            diag[k] += c;
            if k + 1 < n {
                diag[k + 1] += c;
                off[k] -= c;
            }
        }
        Self { diag, off }
    }

    /// Solves `K x = g` for the free nodes; the last entry of the result is 0.
    fn solve(&self, g: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut c = alloc::vec![0.0; n];
        let mut d = alloc::vec![0.0; n];
        let mut x = alloc::vec![0.0; n + 1];
        c[0] = if n > 1 {
            self.off[0] / self.diag[0]
        } else {
            0.0
        };
        d[0] = g[0] / self.diag[0];
        for i in 1..n {
            let den = self.diag[i] - self.off[i - 1] * c[i - 1];
            c[i] = if i + 1 < n { self.off[i] / den } else { 0.0 };
            d[i] = (g[i] - self.off[i - 1] * d[i - 1]) / den;
        }
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let n = self.diag.len();
        let mut e = 0.0;
        for i in 0..n {
            e += self.diag[i] * x[i] * x[i];
            if i + 1 < n {
                e += 2.0 * self.off[i] * x[i] * x[i + 1];
            }
        }
        e
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dirichlet energy on a fixed grid with the cell moments precomputed.
struct Sphere {
    moment: Vec<f64>,
    inv_h: Vec<f64>,
    p: f64,
}

impl Sphere {
    fn new(grid: &Grid, ps: &ParamSet) -> Self {
        let (moment, inv_h) = grid
            .cells()
            .map(|(a, b)| (radial::power_moment(a, b, ps.alpha1()), 1.0 / (b - a)))
            .unzip();
        Self {
            moment,
            inv_h,
            p: ps.p(),
        }
    }

    fn energy(&self, u: &[f64]) -> f64 {
        let mut e = 0.0;
        for k in 0..self.moment.len() {
            let s = (u[k + 1] - u[k]) * self.inv_h[k];
            if s != 0.0 {
                e += self.moment[k] * powf(s.abs(), self.p);
            }
        }
        e
    }

    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut g = alloc::vec![0.0; u.len()];
        for k in 0..self.moment.len() {
            let s = (u[k + 1] - u[k]) * self.inv_h[k];
            if s != 0.0 {
                let d = (self.moment[k] * self.p * powf(s.abs(), self.p - 1.0) * self.inv_h[k])
                    .copysign(s);
                g[k + 1] += d;
                g[k] -= d;
            }
        }
        g
    }

    /// Clips at zero, pins the boundary and rescales to unit norm.
    fn project(&self, u: &[f64]) -> Option<Vec<f64>> {
        let mut v: Vec<f64> = u.iter().map(|x| x.max(0.0)).collect();
        let last = v.len() - 1;
        v[last] = 0.0;
        let e = self.energy(&v);
        if !(e > 0.0) || !e.is_finite() {
            return None;
        }
        let c = 1.0 / powf(e, 1.0 / self.p);
        v.iter_mut().for_each(|x| *x *= c);
        Some(v)
    }
}

/// Projected ascent on the unit Dirichlet sphere from one start.
///
/// Search directions are gradients in the `p = 2` weighted energy inner
/// product, made tangent to the sphere; steps use Armijo backtracking and
/// each iterate is clipped at zero and renormalized.
pub fn ascend(
    start: &Profile,
    objective: &Objective,
    ps: &ParamSet,
    opts: &MaximizeOptions,
) -> Result<MaximizeResult> {
    let grid = start.grid().clone();
    let eval = objective.evaluator(&grid, ps);
    ascend_with(start, &eval, ps, opts)
}

fn ascend_with(
    start: &Profile,
    eval: &JEvaluator,
    ps: &ParamSet,
    opts: &MaximizeOptions,
) -> Result<MaximizeResult> {
    let grid = start.grid().clone();
    let k = Stiffness::new(&grid, ps.alpha1());
    let sphere = Sphere::new(&grid, ps);
    let mut u = sphere
        .project(start.values())
        .ok_or(Error::Domain("start profile has zero norm"))?;
    let mut value = eval.value(&u);
    let mut step_scale = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let gj = eval.gradient(&u);
        let gd = sphere.gradient(&u);
        let dj = k.solve(&gj);
        let dd = k.solve(&gd);
        let denom = dot(&gd, &dd);
        let lam = if denom > 0.0 {
            dot(&gd, &dj) / denom
        } else {
            0.0
        };
        let mut dir: Vec<f64> = dj.iter().zip(&dd).map(|(a, b)| a - lam * b).collect();
        let last = dir.len() - 1;
        dir[last] = 0.0;
        let slope = dot(&gj, &dir);
        let len = math::sqrt(k.energy(&dir));
        if !(slope > 0.0) || !(len > 0.0) {
            converged = true;
            break;
        }
        let mut step = step_scale * 0.1 / len;
        let mut accepted = None;
        let mut trial = alloc::vec![0.0; u.len()];
        for _ in 0..60 {
            for (t, (a, d)) in trial.iter_mut().zip(u.iter().zip(&dir)) {
                *t = a + step * d;
            }
            if let Some(cand) = sphere.project(&trial) {
                let v = eval.value(&cand);
                if v >= value + 1e-4 * step * slope {
                    accepted = Some((cand, v));
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            None => {
                converged = true;
                break;
            }
            Some((cand, v)) => {
                let rel = (v - value).abs() / value.abs().max(1e-300);
                step_scale = (step * len / 0.1 * 2.0).min(1e3);
                u = cand;
                value = v;
                if rel < opts.rel_tol {
                    converged = true;
                    break;
                }
            }
        }
    }
    Ok(MaximizeResult {
        profile: Profile::new(grid, u)?,
        value,
        iterations,
        converged,
        seed_eps: f64::NAN,
    })
}

/// One normalized bubble on the grid and its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleSample {
    pub eps: f64,
    pub value: f64,
    pub profile: Profile,
}

/// Normalized bubbles `u_eps / ||u_eps||` on the grid, skipping scales the
/// grid cannot resolve.
pub fn normalized_bubbles(
    eps_list: &[f64],
    grid: &Arc<Grid>,
    dc: &DerivedConstants,
    consts: &ConstantsReport,
) -> Result<Vec<(f64, Profile)>> {
    let ps = dc.params;
    let mut out = Vec::new();
    for &eps in eps_list {
        let spec = BubbleSpec::normalized(eps, consts, &ps)?;
        match bliss::bubble_profile(&spec, grid, dc) {
            Ok(u) => out.push((eps, radial::normalize(&u, &ps)?)),
            Err(Error::GridTooCoarse { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BubbleBound {
    /// Every resolvable scale, in input order.
    pub samples: Vec<BubbleSample>,
    pub best_value: f64,
    pub best_eps: f64,
}

impl BubbleBound {
    pub fn best(&self) -> &BubbleSample {
        self.samples
            .iter()
            .find(|s| s.eps == self.best_eps)
            .expect("best sample present")
    }
}

fn better(a: (f64, f64), b: (f64, f64)) -> bool {
    // Highest value first, then smallest eps.
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// `max_eps J(u_eps / ||u_eps||)` over the scan.
pub fn bubble_lower_bound_with(
    objective: &Objective,
    eps_list: &[f64],
    grid: &Arc<Grid>,
    dc: &DerivedConstants,
    consts: &ConstantsReport,
) -> Result<BubbleBound> {
    let eval = objective.evaluator(grid, &dc.params);
    let samples: Vec<BubbleSample> = normalized_bubbles(eps_list, grid, dc, consts)?
        .into_iter()
        .map(|(eps, profile)| BubbleSample {
            eps,
            value: eval.value(profile.values()),
            profile,
        })
        .collect();
    let (best_value, best_eps) = samples
        .iter()
        .map(|s| (s.value, s.eps))
        .reduce(|a, b| if better(b, a) { b } else { a })
        .ok_or(Error::GridTooCoarse {
            first_node: grid.first(),
            required: eps_list.iter().fold(0.0, |m: f64, &e| m.max(e)) / 10.0,
        })?;
    Ok(BubbleBound {
        samples,
        best_value,
        best_eps,
    })
}

pub fn bubble_lower_bound(
    ps: &ParamSet,
    lp: &LogParams,
    eps_list: &[f64],
    grid: &Arc<Grid>,
) -> Result<BubbleBound> {
    let dc = ps.derived();
    let consts = bliss::compute_s(&dc)?;
    bubble_lower_bound_with(&Objective::Log(*lp), eps_list, grid, &dc, &consts)
}

/// Multi-start ascent from the best bubbles of `opts.seed_eps`.
pub fn maximize_objective(
    ps: &ParamSet,
    objective: &Objective,
    grid: &Arc<Grid>,
    opts: &MaximizeOptions,
) -> Result<MaximizeResult> {
    let dc = ps.derived();
    let consts = bliss::compute_s(&dc)?;
    let bound = bubble_lower_bound_with(objective, &opts.seed_eps, grid, &dc, &consts)?;
    let mut seeds: Vec<&BubbleSample> = bound.samples.iter().collect();
    seeds.sort_by(|a, b| {
        b.value
            .partial_cmp(&a.value)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(
                a.eps
                    .partial_cmp(&b.eps)
                    .unwrap_or(core::cmp::Ordering::Equal),
            )
    });
    let eval = objective.evaluator(grid, ps);
    let mut best: Option<MaximizeResult> = None;
    for seed in seeds.into_iter().take(opts.starts.max(1)) {
        let mut res = ascend_with(&seed.profile, &eval, ps, opts)?;
        res.seed_eps = seed.eps;
        let replace = match &best {
            None => true,
            Some(b) => better((res.value, res.seed_eps), (b.value, b.seed_eps)),
        };
        if replace {
            best = Some(res);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Maximizes `J` over nonnegative unit-norm profiles on `grid`.
pub fn maximize_f(
    ps: &ParamSet,
    lp: &LogParams,
    grid: &Arc<Grid>,
    opts: &MaximizeOptions,
) -> Result<MaximizeResult> {
    maximize_objective(ps, &Objective::Log(*lp), grid, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaRow {
    pub beta: f64,
    pub f_hat: f64,
    pub gap_to_sigma: f64,
    pub converged: bool,
    pub profile: Profile,
}

/// [`maximize_f`] for each `beta`, reporting `|F_hat - Sigma_p|`.
pub fn beta_sweep(
    ps: &ParamSet,
    tau: f64,
    betas: &[f64],
    grid: &Arc<Grid>,
    opts: &MaximizeOptions,
) -> Result<Vec<BetaRow>> {
    if betas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("beta values must increase"));
    }
    let sigma = bliss::compute_s(&ps.derived())?.sigma_p;
    betas
        .iter()
        .map(|&beta| {
            let lp = LogParams::new(tau, beta)?;
            let r = maximize_f(ps, &lp, grid, opts)?;
            Ok(BetaRow {
                beta,
                f_hat: r.value,
                gap_to_sigma: (r.value - sigma).abs(),
                converged: r.converged,
                profile: r.profile,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NcsReport {
    /// Largest `| ||u_j|| - 1 |`.
    pub norm_error: f64,
    pub normalized: bool,
    /// `tails[i][j] = int_{r0_i}^1 r^alpha1 |u_j'|^p dr`.
    pub tails: Vec<Vec<f64>>,
    pub tails_vanish: bool,
    /// Weighted `L^p_theta` norms of the profiles.
    pub lp_norms: Vec<f64>,
    pub lp_vanish: bool,
    pub is_ncs: bool,
}

pub const NCS_NORM_TOL: f64 = 1e-8;

/// Checks that a sequence is normalized and concentrates at the origin.
pub fn ncs_check(
    profiles: &[Profile],
    ps: &ParamSet,
    r0_list: &[f64],
    tail_tol: f64,
) -> Result<NcsReport> {
    if profiles.len() < 3 {
        return Err(Error::Domain("NCS check needs at least 3 profiles"));
    }
    let norm_error = profiles
        .iter()
        .map(|u| (radial::dirichlet_norm(u, ps) - 1.0).abs())
        .fold(0.0, f64::max);
    let normalized = norm_error <= NCS_NORM_TOL;
    let tails: Vec<Vec<f64>> = r0_list
        .iter()
        .map(|&r0| {
            profiles
                .iter()
                .map(|u| radial::dirichlet_tail(u, ps, r0))
                .collect()
        })
        .collect();
    let decreasing = |xs: &[f64]| xs.windows(2).all(|w| w[1] < w[0]);
    let tails_vanish = tails
        .iter()
        .all(|t| decreasing(t) && *t.last().unwrap() < tail_tol);
    let lp_norms: Vec<f64> = profiles
        .iter()
        .map(|u| radial::lq_norm(u, ps.p(), ps.theta()))
        .collect::<Result<_>>()?;
    let lp_vanish = decreasing(&lp_norms) && lp_norms[lp_norms.len() - 1] < 0.5 * lp_norms[0];
    Ok(NcsReport {
        norm_error,
        normalized,
        tails,
        tails_vanish,
        lp_norms,
        lp_vanish,
        is_ncs: normalized && tails_vanish && lp_vanish,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    /// `false` when the family is not a normalized concentrating sequence.
    pub applicable: bool,
    pub j_values: Vec<f64>,
    pub max_j: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Compares `J` along a concentrating family with `Sigma_p + tol`.
pub fn concentration_level_check(
    profiles: &[Profile],
    lp: &LogParams,
    ps: &ParamSet,
    sigma_p: f64,
    tol: f64,
    ncs: &NcsReport,
) -> LevelReport {
    if !ncs.is_ncs {
        return LevelReport {
            applicable: false,
            j_values: Vec::new(),
            max_j: f64::NAN,
            bound: sigma_p + tol,
            pass: false,
        };
    }
    let j_values: Vec<f64> = profiles
        .iter()
        .map(|u| functionals::j_functional(u, lp, ps))
        .collect();
    let max_j = j_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    LevelReport {
        applicable: true,
        pass: max_j <= sigma_p + tol,
        j_values,
        max_j,
        bound: sigma_p + tol,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TEps {
    pub t: f64,
    pub residual: f64,
}

pub const T_EPS_TOL: f64 = 1e-10;

/// Root of `t^{p-1} ||u||^p = t^{p*-1} int r^theta |u|^{p*} ln(tau + t|u|)^{r^beta} dr`.
pub fn solve_t_eps(
    u: &Profile,
    lp: &LogParams,
    ps: &ParamSet,
    bracket: (f64, f64),
) -> Result<TEps> {
    lp.require_energy_range()?;
    let d = radial::dirichlet_energy(u, ps);
    let (p, q, th) = (ps.p(), ps.p_star(), ps.theta());
    let f = |t: f64| {
        let integral = radial::profile_integral(u, th, |r, v| {
            if v == 0.0 {
                0.0
            } else {
                powf(v.abs(), q) * functionals::log_power(lp.tau(), t * v, powf(r, lp.beta()))
            }
        });
        powf(t, p - 1.0) * d - powf(t, q - 1.0) * integral
    };
    bisect(f, bracket.0, bracket.1)
}

/// Bisection down to adjacent floats, then the residual is reported.
pub(crate) fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> Result<TEps> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(TEps {
            t: a,
            residual: 0.0,
        });
    }
    if fb == 0.0 {
        return Ok(TEps {
            t: b,
            residual: 0.0,
        });
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NoSignChange { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(TEps {
                t: mid,
                residual: 0.0,
            });
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let (t, r) = {
        let (ra, rb) = (f(a).abs(), f(b).abs());
        if ra <= rb {
            (a, ra)
        } else {
            (b, rb)
        }
    };
    Ok(TEps { t, residual: r })
}

/// Energy `I(t u_eps)` along the ray of an analytic bubble.
pub struct BubbleRay {
    pts: Vec<(f64, f64, f64)>,
    dirichlet: f64,
    prim: Primitive,
    lp: LogParams,
    ps: ParamSet,
}

impl BubbleRay {
    pub fn new(spec: &BubbleSpec, lp: &LogParams, dc: &DerivedConstants) -> Result<Self> {
        let ps = dc.params;
        let prim = Primitive::new(lp, &ps)?;
        let quad = spec.quadrature(&[]);
        let dirichlet = quad
            .iter()
            .map(|&(r, w)| w * powf(r, ps.alpha1()) * powf(spec.derivative(r, dc).abs(), ps.p()))
            .sum();
        let pts = quad
            .into_iter()
            .map(|(r, w)| (r, w * powf(r, ps.theta()), spec.value(r, dc)))
            .filter(|&(_, _, v)| v != 0.0)
            .collect();
        Ok(Self {
            pts,
            dirichlet,
            prim,
            lp: *lp,
            ps,
        })
    }

    /// `||u_eps||^p`.
    pub fn dirichlet(&self) -> f64 {
        self.dirichlet
    }

    pub fn energy(&self, t: f64) -> f64 {
        let q = self.ps.p_star();
        let pot: f64 = self
            .pts
            .iter()
            .map(|&(r, w, v)| {
                let tv = t * v;
                w * (functionals::j_density(r, tv, &self.lp, &self.ps) / q - self.prim.eval(r, tv))
            })
            .sum();
        powf(t, self.ps.p()) * self.dirichlet / self.ps.p() - pot
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MountainPass {
    /// `max_t I(t u_eps)`, an upper bound for the mountain-pass level.
    pub max_energy: f64,
    pub t_max: f64,
    /// `(1/p - 1/p*) S_power`.
    pub threshold: f64,
    pub gap: f64,
    /// Largest `t` of the scan and `I` there.
    pub t_far: f64,
    pub energy_far: f64,
}

const MP_SCAN: usize = 161;
const MP_T_RANGE: (f64, f64) = (1e-2, 1e2);

/// Maximizes `I(t u_eps)` over `t` (log-grid scan, then golden-section polish).
pub fn mountain_pass_gap(spec: &BubbleSpec, lp: &LogParams, ps: &ParamSet) -> Result<MountainPass> {
    lp.require_energy_range()?;
    let dc = ps.derived();
    if !(lp.beta() < dc.beta_max) {
        return Err(Error::Domain(
            "mountain-pass estimate needs beta < beta_max",
        ));
    }
    let consts = bliss::compute_s(&dc)?;
    let ray = BubbleRay::new(spec, lp, &dc)?;
    let (l0, l1) = (ln(MP_T_RANGE.0), ln(MP_T_RANGE.1));
    let ts: Vec<f64> = (0..MP_SCAN)
        .map(|i| math::exp(l0 + (l1 - l0) * i as f64 / (MP_SCAN - 1) as f64))
        .collect();
    let es: Vec<f64> = ts.iter().map(|&t| ray.energy(t)).collect();
    let k = (0..MP_SCAN)
        .max_by(|&i, &j| {
            es[i]
                .partial_cmp(&es[j])
                .unwrap_or(core::cmp::Ordering::Equal)
        })
        .unwrap();
    let (mut a, mut b) = (ts[k.saturating_sub(1)], ts[(k + 1).min(MP_SCAN - 1)]);
    let g = 0.5 * (math::sqrt(5.0) - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (ray.energy(c), ray.energy(d));
    while b - a > 1e-12 * b {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = ray.energy(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = ray.energy(d);
        }
    }
    let (t_max, max_energy) = if fc > fd { (c, fc) } else { (d, fd) };
    let max_energy = max_energy.max(es[k]);
    let threshold = consts.mountain_pass_threshold(ps);
    Ok(MountainPass {
        max_energy,
        t_max,
        threshold,
        gap: threshold - max_energy,
        t_far: ts[MP_SCAN - 1],
        energy_far: es[MP_SCAN - 1],
    })
}

/// `min I(rho u)` over unit profiles `u`, for each `rho`: the mountain ridge
/// seen from the given directions.
pub fn sphere_ridge(
    directions: &[Profile],
    rhos: &[f64],
    lp: &LogParams,
    ps: &ParamSet,
) -> Result<Vec<(f64, f64)>> {
    rhos.iter()
        .map(|&rho| {
            let mut lowest = f64::INFINITY;
            for u in directions {
                let un = radial::normalize(u, ps)?;
                lowest = lowest.min(functionals::energy_i(&un.scaled(rho), lp, ps)?);
            }
            Ok((rho, lowest))
        })
        .collect()
}
