//! Bliss extremals `u*_eps(r) = c_hat eps^s / (eps^n + r^n)^{1/m}`, their
//! cutoff truncations to the unit interval, the best constants, crossing
//! radii and the concentration functional `E`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::analysis::{rate_fit, RateModel, RateTable};
use crate::functionals::{log_power, LogParams};
use crate::math::{self, exp, ln, powf};
use crate::params::{DerivedConstants, ParamSet};
use crate::quad::GaussLegendre;
use crate::radial::{self, Grid, Profile};
use crate::{Error, Result};

/// `c_hat eps^s / (eps^n + r^n)^{1/m}`.
pub fn bliss_value(eps: f64, r: f64, dc: &DerivedConstants) -> f64 {
    dc.c_hat * powf(eps, dc.s) * powf(powf(eps, dc.n) + powf(r, dc.n), -1.0 / dc.m)
}

/// `d/dr` of [`bliss_value`].
pub fn bliss_derivative(eps: f64, r: f64, dc: &DerivedConstants) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let base = powf(eps, dc.n) + powf(r, dc.n);
    -dc.c_hat
        * powf(eps, dc.s)
        * (dc.n / dc.m)
        * powf(r, dc.n - 1.0)
        * powf(base, -1.0 / dc.m - 1.0)
}

/// Quintic smoothstep cutoff: 1 on `(0, r0]`, 0 on `[2 r0, 1]`, `C^2` in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    r0: f64,
}

impl Cutoff {
    pub const DEFAULT_R0: f64 = 0.2;

    pub fn new(r0: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0 < 0.5) {
            return Err(Error::Domain("cutoff plateau edge r0 must lie in (0, 1/2)"));
        }
        Ok(Self { r0 })
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn value(&self, r: f64) -> f64 {
        let x = ((r - self.r0) / self.r0).clamp(0.0, 1.0);
        1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        if r <= self.r0 || r >= 2.0 * self.r0 {
            return 0.0;
        }
        let x = (r - self.r0) / self.r0;
        -30.0 * x * x * (1.0 - x) * (1.0 - x) / self.r0
    }
}

impl Default for Cutoff {
    fn default() -> Self {
        Self {
            r0: Self::DEFAULT_R0,
        }
    }
}

/// `u_eps = A_hat eta u*_eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleSpec {
    pub epsilon: f64,
    pub a_hat: f64,
    pub cutoff: Cutoff,
}

impl BubbleSpec {
    pub fn new(epsilon: f64, a_hat: f64, r0: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain("bubble epsilon must be > 0"));
        }
        if !(a_hat > 0.0 && a_hat.is_finite()) {
            return Err(Error::Domain("bubble amplitude must be > 0"));
        }
        Ok(Self {
            epsilon,
            a_hat,
            cutoff: Cutoff::new(r0)?,
        })
    }

    /// Amplitude `A_hat = S_power^{-1/p}`, which makes `||u_eps||^p = 1 + O(eps^{sp})`.
    pub fn normalized(epsilon: f64, consts: &ConstantsReport, ps: &ParamSet) -> Result<Self> {
        Self::new(
            epsilon,
            consts.normalizing_amplitude(ps),
            Cutoff::DEFAULT_R0,
        )
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(epsilon, self.a_hat, self.cutoff.r0)
    }

    pub fn value(&self, r: f64, dc: &DerivedConstants) -> f64 {
        let eta = self.cutoff.value(r);
        if eta == 0.0 {
            return 0.0;
        }
        self.a_hat * eta * bliss_value(self.epsilon, r, dc)
    }

    pub fn derivative(&self, r: f64, dc: &DerivedConstants) -> f64 {
        let eta = self.cutoff.value(r);
        if eta == 0.0 {
            return 0.0;
        }
        self.a_hat
            * (self.cutoff.derivative(r) * bliss_value(self.epsilon, r, dc)
                + eta * bliss_derivative(self.epsilon, r, dc))
    }

    /// Gauss nodes and weights on `(0, 2 r0)`, graded geometrically around
    /// `eps` so the bubble core is resolved for any `eps`. Extra breakpoints
    /// (kinks of an integrand) are inserted as given.
    pub fn quadrature(&self, extra_breaks: &[f64]) -> Vec<(f64, f64)> {
        bubble_quadrature(self.epsilon, self.cutoff.r0, extra_breaks)
    }
}

const BUBBLE_GL: usize = 16;

pub(crate) fn bubble_quadrature(eps: f64, r0: f64, extra: &[f64]) -> Vec<(f64, f64)> {
    let end = 2.0 * r0;
    let mut breaks: Vec<f64> = Vec::new();
    breaks.push(0.0);
    let mut x = eps * powf(2.0, -30.0);
    while x < r0 {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(r0);
    breaks.push(1.5 * r0);
    breaks.push(end);
    breaks.extend(extra.iter().copied().filter(|&b| b > 0.0 && b < end));
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs().max(1e-300));
    let gl = GaussLegendre::new(BUBBLE_GL);
    let mut pts = Vec::with_capacity(breaks.len() * BUBBLE_GL);
    for w in breaks.windows(2) {
        pts.extend(gl.mapped(w[0], w[1]));
    }
    pts
}

/// Samples a bubble at the grid nodes. Requires `r_1 <= eps / 10`.
pub fn bubble_profile(
    spec: &BubbleSpec,
    grid: &Arc<Grid>,
    dc: &DerivedConstants,
) -> Result<Profile> {
    let required = spec.epsilon / 10.0;
    if grid.first() > required {
        return Err(Error::GridTooCoarse {
            first_node: grid.first(),
            required,
        });
    }
    Ok(Profile::from_fn(grid.clone(), |r| spec.value(r, dc))?
        .with_zero_boundary()
        .with_origin(spec.a_hat * dc.c_hat * powf(spec.epsilon, dc.s - dc.n / dc.m)))
}

/// Best constants obtained from the extremal on `(0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsReport {
    /// The best constant `S`.
    pub s: f64,
    /// `S^{(theta+1)/(theta-alpha1+p)}`, taken as the `L^{p*}` integral.
    pub s_power: f64,
    /// `Sigma_p = S^{-p*/p}`.
    pub sigma_p: f64,
    /// `int_0^inf r^theta |u*_1|^{p*} dr`.
    pub pstar_integral: f64,
    /// `int_0^inf r^alpha1 |u*_1'|^p dr`.
    pub gradient_integral: f64,
}

impl ConstantsReport {
    /// Relative gap between the two integrals that both equal `S_power`.
    pub fn integral_mismatch(&self) -> f64 {
        math::rel_diff(self.pstar_integral, self.gradient_integral)
    }

    pub fn normalizing_amplitude(&self, ps: &ParamSet) -> f64 {
        powf(self.s_power, -1.0 / ps.p())
    }

    /// Mountain-pass threshold `(1/p - 1/p*) S_power`.
    pub fn mountain_pass_threshold(&self, ps: &ParamSet) -> f64 {
        (1.0 / ps.p() - 1.0 / ps.p_star()) * self.s_power
    }
}

/// Coefficients of `(1 + x)^{-k} = sum_j c_j x^j`.
fn binomial_series(k: f64) -> impl Iterator<Item = f64> {
    let mut c = 1.0;
    let mut j = 0.0;
    core::iter::from_fn(move || {
        let out = c;
        c *= (-k - j) / (j + 1.0);
        j += 1.0;
        Some(out)
    })
}

const SERIES_TERMS: usize = 400;

/// `int_R^inf r^a (c + r^n)^{-k} dr` for `c < R^n`, by expanding in `c r^{-n}`.
pub(crate) fn upper_tail(a: f64, c: f64, n: f64, k: f64, big_r: f64) -> f64 {
    let ratio = c * powf(big_r, -n);
    debug_assert!(ratio < 1.0);
    let mut sum = 0.0;
    let mut x = 1.0;
    for (j, coef) in binomial_series(k).take(SERIES_TERMS).enumerate() {
        let e = n * k + n * j as f64 - a - 1.0;
        let term = coef * x / e;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        x *= ratio;
    }
    sum * powf(big_r, a + 1.0 - n * k)
}

/// `int_0^rho r^a (c + r^n)^{-k} dr` for `rho^n < c`.
pub(crate) fn lower_head(a: f64, c: f64, n: f64, k: f64, rho: f64) -> f64 {
    let ratio = powf(rho, n) / c;
    debug_assert!(ratio < 1.0);
    let mut sum = 0.0;
    let mut x = 1.0;
    for (j, coef) in binomial_series(k).take(SERIES_TERMS).enumerate() {
        let e = a + 1.0 + n * j as f64;
        let term = coef * x / e;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        x *= ratio;
    }
    sum * powf(c, -k) * powf(rho, a + 1.0)
}

/// `int_0^inf r^a (1 + r^n)^{-k} dr`: series at both ends, composite Gauss
/// in `x = ln r` in the middle.
fn power_ratio_integral(a: f64, n: f64, k: f64, panels: usize) -> f64 {
    // r^n = 1e-3 and 1e3 at the ends of the middle window.
    let half = 3.0 * core::f64::consts::LN_10 / n;
    let (lo, hi) = (-half, half);
    let gl = GaussLegendre::new(20);
    let middle = gl.integrate_composite(lo, hi, panels, |x| {
        exp((a + 1.0) * x - k * math::ln_1p(exp(n * x)))
    });
    lower_head(a, 1.0, n, k, exp(lo)) + middle + upper_tail(a, 1.0, n, k, exp(hi))
}

/// Both integrals of the extremal with `eps = 1`, checked against a
/// refinement; both equal `S^{(theta+1)/(theta-alpha1+p)}`.
pub fn compute_s(dc: &DerivedConstants) -> Result<ConstantsReport> {
    let ps = dc.params;
    let p = ps.p();
    let (n, m) = (dc.n, dc.m);
    let q = dc.p_star;
    let pstar = |panels| powf(dc.c_hat, q) * power_ratio_integral(ps.theta(), n, q / m, panels);
    let grad = |panels| {
        powf(dc.c_hat * n / m, p)
            * power_ratio_integral(ps.alpha1() + p * (n - 1.0), n, p * (1.0 / m + 1.0), panels)
    };
    let (a1, a2) = (pstar(64), pstar(128));
    let (g1, g2) = (grad(64), grad(128));
    let residual = math::rel_diff(a1, a2).max(math::rel_diff(g1, g2));
    if !(residual < 1e-12) {
        return Err(Error::NonConvergence {
            what: "best-constant quadrature",
            residual,
        });
    }
    let s_power = a2;
    let s = powf(s_power, (ps.theta() - ps.alpha1() + p) / (ps.theta() + 1.0));
    Ok(ConstantsReport {
        s,
        s_power,
        sigma_p: powf(s, -q / p),
        pstar_integral: a2,
        gradient_integral: g2,
    })
}

/// Deviations of the cutoff bubble's norms from their whole-line values.
#[derive(Debug, Clone)]
pub struct BubbleScan {
    /// `||u_eps||^p - A_hat^p S_power`.
    pub dirichlet: RateTable,
    /// `A_hat^{p*} S_power - int_0^1 r^theta |u_eps|^{p*} dr`.
    pub lpstar: RateTable,
    /// The bubbles sampled on the grid, when one was supplied.
    pub profiles: Vec<Profile>,
}

/// `||eta u*_eps||^p - S_power` computed as a difference of integrands
/// supported away from the bubble core, so no cancellation occurs.
pub fn dirichlet_deviation(eps: f64, cutoff: &Cutoff, dc: &DerivedConstants) -> f64 {
    let ps = dc.params;
    let p = ps.p();
    let a1 = ps.alpha1();
    let r0 = cutoff.r0();
    let gl = GaussLegendre::new(20);
    let ramp = gl.integrate_composite(r0, 2.0 * r0, 8, |r| {
        let full = bliss_derivative(eps, r, dc);
        let cut = cutoff.derivative(r) * bliss_value(eps, r, dc) + cutoff.value(r) * full;
        powf(r, a1) * (powf(cut.abs(), p) - powf(full.abs(), p))
    });
    let pref = powf(dc.c_hat * powf(eps, dc.s) * dc.n / dc.m, p);
    let tail = pref
        * upper_tail(
            a1 + p * (dc.n - 1.0),
            powf(eps, dc.n),
            dc.n,
            p * (1.0 / dc.m + 1.0),
            2.0 * r0,
        );
    ramp - tail
}

/// `S_power - int_0^1 r^theta |eta u*_eps|^{p*} dr`, nonnegative.
pub fn lpstar_deviation(eps: f64, cutoff: &Cutoff, dc: &DerivedConstants) -> f64 {
    let th = dc.params.theta();
    let q = dc.p_star;
    let r0 = cutoff.r0();
    let gl = GaussLegendre::new(20);
    let ramp = gl.integrate_composite(r0, 2.0 * r0, 8, |r| {
        powf(r, th) * powf(bliss_value(eps, r, dc), q) * (1.0 - powf(cutoff.value(r), q))
    });
    let tail = powf(dc.c_hat * powf(eps, dc.s), q)
        * upper_tail(th, powf(eps, dc.n), dc.n, q / dc.m, 2.0 * r0);
    ramp + tail
}

/// Deviation scans over `eps_list` with pure-power rate fits.
pub fn bubble_norm_scan(
    eps_list: &[f64],
    template: &BubbleSpec,
    grid: Option<&Arc<Grid>>,
    dc: &DerivedConstants,
) -> Result<BubbleScan> {
    let p = dc.params.p();
    let q = dc.p_star;
    let ah = template.a_hat;
    let mut dev_d = Vec::with_capacity(eps_list.len());
    let mut dev_l = Vec::with_capacity(eps_list.len());
    let mut profiles = Vec::new();
    for &eps in eps_list {
        dev_d.push(powf(ah, p) * dirichlet_deviation(eps, &template.cutoff, dc));
        dev_l.push(powf(ah, q) * lpstar_deviation(eps, &template.cutoff, dc));
        if let Some(g) = grid {
            profiles.push(bubble_profile(&template.with_epsilon(eps)?, g, dc)?);
        }
    }
    Ok(BubbleScan {
        dirichlet: rate_fit(eps_list, &dev_d, RateModel::PurePower)?,
        lpstar: rate_fit(eps_list, &dev_l, RateModel::PurePower)?,
        profiles,
    })
}

/// Radii where `|ln(tau + t A eps^s/(eps^n + r^n)^{1/m})|` leaves `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingRadii {
    /// Inner radius where the argument of the log falls to `e`.
    pub a: Option<f64>,
    /// Outer radius where it falls to `1/e`; only for `tau < 1/e`.
    pub b: Option<f64>,
}

fn crossing(level: f64, eps: f64, t: f64, amp: f64, dc: &DerivedConstants) -> Option<f64> {
    let x = powf(t * amp * powf(eps, dc.s) / level, dc.m) - powf(eps, dc.n);
    if x > 0.0 {
        Some(powf(x, 1.0 / dc.n))
    } else {
        None
    }
}

/// `a_eps = [(t A eps^s/(e - tau))^m - eps^n]^{1/n}` and the analogous `b_eps`
/// with `e^{-1} - tau`. `amp` is `A = A_hat c_hat`.
pub fn crossing_radii(
    eps: f64,
    tau: f64,
    t: f64,
    amp: f64,
    dc: &DerivedConstants,
) -> Result<CrossingRadii> {
    let e = core::f64::consts::E;
    if !(tau > 0.0) {
        return Err(Error::Domain("tau must be > 0"));
    }
    if tau >= e {
        return Err(Error::Domain("crossing radius a_eps needs tau < e"));
    }
    if !(eps > 0.0 && t > 0.0 && amp > 0.0) {
        return Err(Error::Domain("eps, t and A must be > 0"));
    }
    let a = crossing(e - tau, eps, t, amp, dc);
    let b = if tau < 1.0 / e {
        crossing(1.0 / e - tau, eps, t, amp, dc)
    } else {
        None
    };
    Ok(CrossingRadii { a, b })
}

/// `E_t(a, b) = int_a^b r^theta |u|^{p*} (|ln(tau + t|u|)|^{r^beta} - 1) dr`
/// for a grid profile.
pub fn concentration_e(
    a: f64,
    b: f64,
    u: &Profile,
    t: f64,
    lp: &LogParams,
    ps: &ParamSet,
) -> Result<f64> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::Domain("need 0 <= a < b <= 1"));
    }
    let q = ps.p_star();
    let th = ps.theta();
    let density = |r: f64, v: f64| {
        if v == 0.0 {
            0.0
        } else {
            powf(v.abs(), q) * (log_power(lp.tau(), t * v, powf(r, lp.beta())) - 1.0)
        }
    };
    let nodes = u.grid().nodes();
    let vals = u.values();
    let gl = GaussLegendre::new(radial::CELL_POINTS);
    // E(a, b) = F(b) - F(a) with F the running integral from 0, so that
    // adjacent intervals add up exactly.
    let cell = |k: usize, hi: f64| -> f64 {
        let (ca, cb) = (nodes[k], nodes[k + 1]);
        gl.integrate(ca, hi, |r| {
            let v = vals[k] + (r - ca) / (cb - ca) * (vals[k + 1] - vals[k]);
            powf(r, th) * density(r, v)
        })
    };
    let r1 = nodes[0];
    let first = density(r1, vals[0]);
    let mut cumulative = Vec::with_capacity(nodes.len());
    let mut acc = radial::power_moment(0.0, r1, th) * first;
    cumulative.push(acc);
    for k in 0..nodes.len() - 1 {
        acc += cell(k, nodes[k + 1]);
        cumulative.push(acc);
    }
    let running = |x: f64| -> f64 {
        match u.grid().locate(x) {
            None => radial::power_moment(0.0, x, th) * first,
            Some(k) if x >= nodes[k + 1] => cumulative[k + 1],
            Some(k) if x == nodes[k] => cumulative[k],
            Some(k) => cumulative[k] + cell(k, x),
        }
    };
    Ok(running(b) - running(a))
}

/// [`concentration_e`] for the analytic bubble rather than a grid sample.
pub fn concentration_e_bubble(
    a: f64,
    b: f64,
    spec: &BubbleSpec,
    t: f64,
    lp: &LogParams,
    dc: &DerivedConstants,
) -> Result<f64> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::Domain("need 0 <= a < b <= 1"));
    }
    let q = dc.p_star;
    let th = dc.params.theta();
    let mut breaks: Vec<f64> = alloc::vec![a, b];
    // Radii where tau + t u crosses 1 are kinks of |ln|.
    let amp = spec.a_hat * dc.c_hat;
    if lp.tau() < 1.0 {
        if let Some(r) = crossing(1.0 - lp.tau(), spec.epsilon, t, amp, dc) {
            breaks.push(r);
        }
    }
    let mut total = 0.0;
    for (r, w) in spec.quadrature(&breaks) {
        if r < a || r > b {
            continue;
        }
        let v = spec.value(r, dc);
        if v == 0.0 {
            continue;
        }
        total +=
            w * powf(r, th) * powf(v, q) * (log_power(lp.tau(), t * v, powf(r, lp.beta())) - 1.0);
    }
    Ok(total)
}

/// Estimate of `ln|ln eps|`, the slowly varying factor in concentration rates.
pub fn loglog(eps: f64) -> f64 {
    ln(ln(eps).abs())
}
