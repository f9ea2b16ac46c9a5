//! The log-perturbed functional `J`, its general-exponent variant, the energy
//! `I` with primitive `G`, and the derivative pairing.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::math::{self, powf};
use crate::params::ParamSet;
use crate::quad::GaussLegendre;
use crate::radial::{self, Profile};
use crate::{Error, Result};

/// Shift `tau` and exponent rate `beta` of the factor `|ln(tau + |u|)|^{r^beta}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogParams {
    tau: f64,
    beta: f64,
}

impl LogParams {
    pub fn new(tau: f64, beta: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParams("tau must be > 0"));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParams("beta must be > 0"));
        }
        Ok(Self { tau, beta })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The energy, `g` and `G` are only defined for `tau >= 1`.
    pub fn require_energy_range(&self) -> Result<()> {
        if self.tau < 1.0 {
            Err(Error::Domain("energy functional requires tau >= 1"))
        } else {
            Ok(())
        }
    }
}

/// `|ln(tau + |u|)|^e` with `x^0 = 1` and `0^e = 0` for `e > 0`.
#[inline]
pub fn log_power(tau: f64, u: f64, e: f64) -> f64 {
    if e == 0.0 {
        return 1.0;
    }
    let l = math::ln_shift(tau, u.abs()).abs();
    if l == 0.0 {
        0.0
    } else {
        powf(l, e)
    }
}

/// `|ln(tau + |u|)|^{r^beta}`.
#[inline]
pub fn log_factor(r: f64, u: f64, lp: &LogParams) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    log_power(lp.tau, u, powf(r, lp.beta))
}

/// Pointwise integrand of `J` without the weight.
#[inline]
pub fn j_density(r: f64, u: f64, lp: &LogParams, ps: &ParamSet) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    powf(u.abs(), ps.p_star()) * log_factor(r, u, lp)
}

/// `d/du` of [`j_density`].
pub fn j_density_du(r: f64, u: f64, lp: &LogParams, ps: &ParamSet) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let q = ps.p_star();
    let a = u.abs();
    let lf = log_factor(r, u, lp);
    let main = q * powf(a, q - 1.0) * lf;
    let raw = math::ln_shift(lp.tau, a);
    if raw == 0.0 || r == 0.0 {
        return main.copysign(u);
    }
    let e = powf(r, lp.beta);
    // d|ln(tau+|u|)|/d|u| = sign(ln) / (tau + |u|)
    let dl = raw.signum() / (lp.tau + a);
    let extra = powf(a, q) * e * powf(raw.abs(), e - 1.0) * dl;
    (main + extra).copysign(u)
}

/// `J(u) = int_0^1 r^theta |u|^{p*} |ln(tau+|u|)|^{r^beta} dr`.
pub fn j_functional(u: &Profile, lp: &LogParams, ps: &ParamSet) -> f64 {
    radial::profile_integral(u, ps.theta(), |r, v| j_density(r, v, lp, ps))
}

/// Gradient of [`j_functional`] with respect to nodal values.
pub fn j_gradient(u: &Profile, lp: &LogParams, ps: &ParamSet) -> Vec<f64> {
    radial::profile_integral_gradient(u, ps.theta(), |r, v| j_density_du(r, v, lp, ps))
}

/// `J0(u) = int_0^1 r^theta |u|^{p*} dr`.
pub fn sobolev_j0(u: &Profile, ps: &ParamSet) -> f64 {
    let q = ps.p_star();
    radial::profile_integral(u, ps.theta(), |_, v| powf(v.abs(), q))
}

pub fn sobolev_j0_gradient(u: &Profile, ps: &ParamSet) -> Vec<f64> {
    let q = ps.p_star();
    radial::profile_integral_gradient(u, ps.theta(), |_, v| q * math::signed_pow(v, q - 1.0))
}

/// `J` (or `J0`) and its nodal gradient on a fixed grid, reusing the
/// quadrature geometry across calls.
#[derive(Debug, Clone)]
pub struct JEvaluator {
    pts: radial::QuadPoints,
    /// `r^beta` per point; `None` evaluates `J0`.
    exponents: Option<Vec<f64>>,
    tau: f64,
    q: f64,
}

impl JEvaluator {
    pub fn new(grid: &radial::Grid, lp: Option<&LogParams>, ps: &ParamSet) -> Self {
        let pts = radial::QuadPoints::new(grid, ps.theta());
        let exponents = lp.map(|lp| pts.r.iter().map(|&r| powf(r, lp.beta)).collect());
        Self {
            pts,
            exponents,
            tau: lp.map_or(1.0, |lp| lp.tau),
            q: ps.p_star(),
        }
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.pts.len() {
            let v = self.pts.value(u, i);
            if v == 0.0 {
                continue;
            }
            let mut f = powf(v.abs(), self.q);
            if let Some(e) = &self.exponents {
                let l = math::ln_shift(self.tau, v.abs()).abs();
                f *= if e[i] == 0.0 {
                    1.0
                } else if l == 0.0 {
                    0.0
                } else {
                    math::pow_via_exp(l, e[i])
                };
            }
            total += self.pts.weight[i] * f;
        }
        total
    }

    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut grad = alloc::vec![0.0; u.len()];
        let q = self.q;
        for i in 0..self.pts.len() {
            let v = self.pts.value(u, i);
            if v == 0.0 {
                continue;
            }
            let a = v.abs();
            let d = match &self.exponents {
                None => q * powf(a, q - 1.0),
                Some(ex) => {
                    let e = ex[i];
                    let raw = math::ln_shift(self.tau, a);
                    let l = raw.abs();
                    if l == 0.0 {
                        if e == 0.0 {
                            q * powf(a, q - 1.0)
                        } else {
                            0.0
                        }
                    } else {
                        let le = math::pow_via_exp(l, e);
                        let pa = powf(a, q - 1.0);
                        q * pa * le + a * pa * e * le / l * raw.signum() / (self.tau + a)
                    }
                }
            };
            self.pts
                .scatter(&mut grad, i, self.pts.weight[i] * d.copysign(v));
        }
        grad
    }
}

/// A weight function `phi` with the windows and constants used to test the
/// three structural hypotheses on it.
#[derive(Clone)]
pub struct HypothesisSet {
    phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub sigma: f64,
    pub c: f64,
    /// Window `(lo, hi)` near 0 for the logarithmic decay bound.
    pub r_small: (f64, f64),
    /// Window `(lo, hi)` near 1 for the `o(|ln(1-r)|)` check.
    pub r_large: (f64, f64),
}

impl fmt::Debug for HypothesisSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HypothesisSet")
            .field("sigma", &self.sigma)
            .field("c", &self.c)
            .field("r_small", &self.r_small)
            .field("r_large", &self.r_large)
            .finish_non_exhaustive()
    }
}

impl HypothesisSet {
    pub const DEFAULT_SMALL: (f64, f64) = (1e-200, 1e-6);
    pub const DEFAULT_LARGE: (f64, f64) = (0.9375, 1.0 - 1.0 / 4_503_599_627_370_496.0);

    pub fn new<F>(phi: F, sigma: f64, c: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::with_windows(phi, sigma, c, Self::DEFAULT_SMALL, Self::DEFAULT_LARGE)
    }

    pub fn with_windows<F>(
        phi: F,
        sigma: f64,
        c: f64,
        r_small: (f64, f64),
        r_large: (f64, f64),
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(sigma > 1.0) {
            return Err(Error::InvalidParams("sigma must be > 1"));
        }
        if !(c > 0.0) {
            return Err(Error::InvalidParams("c must be > 0"));
        }
        let inside = |w: (f64, f64)| 0.0 < w.0 && w.0 < w.1 && w.1 < 1.0;
        if !inside(r_small) || !inside(r_large) {
            return Err(Error::InvalidParams(
                "hypothesis windows must lie inside (0,1)",
            ));
        }
        if r_small.1 >= math::exp(-1.0) {
            return Err(Error::InvalidParams("small window must lie below 1/e"));
        }
        Ok(Self {
            phi: Arc::new(phi),
            sigma,
            c,
            r_small,
            r_large,
        })
    }

    /// `phi(r) = r^beta`.
    pub fn power(beta: f64, sigma: f64, c: f64) -> Result<Self> {
        Self::new(move |r| powf(r, beta), sigma, c)
    }

    pub fn phi(&self, r: f64) -> f64 {
        (self.phi)(r)
    }
}

/// `int_0^1 r^theta |u|^{p*} |ln(tau+|u|)|^{phi(r)} dr`.
pub fn j_phi(u: &Profile, tau: f64, hs: &HypothesisSet, ps: &ParamSet) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParams("tau must be > 0"));
    }
    let q = ps.p_star();
    Ok(radial::profile_integral(u, ps.theta(), |r, v| {
        if v == 0.0 {
            0.0
        } else {
            powf(v.abs(), q) * log_power(tau, v, hs.phi(r))
        }
    }))
}

/// Outcome of one hypothesis check. `worst` is the quantity compared against
/// the threshold at the least favourable sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HCheck {
    pub pass: bool,
    pub worst: f64,
    pub at: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HReport {
    /// `phi(0) = 0` and `phi > 0` on the samples.
    pub h1: HCheck,
    /// `phi(r) |ln r|^sigma ln|ln r| <= c` near the origin.
    pub h2: HCheck,
    /// `phi(r) / |ln(1-r)|` below a declining schedule as `r -> 1`.
    pub h3: HCheck,
}

impl HReport {
    pub fn all_pass(&self) -> bool {
        self.h1.pass && self.h2.pass && self.h3.pass
    }
}

/// Tolerance applied to `phi(r_k)/|ln(1-r_k)|` at `r_k = 1 - 2^{-k}`.
pub fn h3_schedule(k: u32) -> f64 {
    1.0 / math::sqrt(k as f64)
}

const H_SAMPLES: usize = 400;

pub fn check_h_conditions(hs: &HypothesisSet) -> HReport {
    // (h1)
    let phi0 = hs.phi(0.0);
    let mut h1 = HCheck {
        pass: phi0 == 0.0,
        worst: phi0.abs(),
        at: 0.0,
    };
    let mut min_phi = f64::INFINITY;
    let mut min_at = 0.0;
    let (ls_lo, ls_hi) = (math::ln(hs.r_small.0), math::ln(hs.r_large.1));
    for i in 0..=H_SAMPLES {
        let r = math::exp(ls_lo + (ls_hi - ls_lo) * i as f64 / H_SAMPLES as f64);
        let v = hs.phi(r);
        if !(v > min_phi) {
            min_phi = v;
            min_at = r;
        }
    }
    for i in 1..H_SAMPLES {
        let r = i as f64 / H_SAMPLES as f64;
        let v = hs.phi(r);
        if !(v > min_phi) {
            min_phi = v;
            min_at = r;
        }
    }
    if !(min_phi > 0.0) {
        h1 = HCheck {
            pass: false,
            worst: min_phi,
            at: min_at,
        };
    }

    // (h2)
    let (a, b) = (math::ln(hs.r_small.0), math::ln(hs.r_small.1));
    let mut h2 = HCheck {
        pass: true,
        worst: f64::NEG_INFINITY,
        at: hs.r_small.0,
    };
    for i in 0..=H_SAMPLES {
        let lr = a + (b - a) * i as f64 / H_SAMPLES as f64;
        let r = math::exp(lr);
        let l = -lr;
        let q = hs.phi(r) * powf(l, hs.sigma) * math::ln(l);
        if !(q <= h2.worst) {
            h2.worst = q;
            h2.at = r;
        }
    }
    h2.pass = h2.worst.is_finite() && h2.worst <= hs.c;

    // (h3)
    let k_lo = libm::ceil(-libm::log2(1.0 - hs.r_large.0)).max(1.0) as u32;
    let k_hi = libm::floor(-libm::log2(1.0 - hs.r_large.1)) as u32;
    let mut h3 = HCheck {
        pass: true,
        worst: f64::NEG_INFINITY,
        at: hs.r_large.0,
    };
    for k in k_lo..=k_hi.max(k_lo) {
        let r = 1.0 - libm::exp2(-(k as f64));
        let ratio = hs.phi(r) / (k as f64 * core::f64::consts::LN_2);
        let excess = ratio / h3_schedule(k);
        if !(excess <= h3.worst) {
            h3.worst = excess;
            h3.at = r;
        }
    }
    h3.pass = h3.worst.is_finite() && h3.worst <= 1.0;
    HReport { h1, h2, h3 }
}

/// `g(r, s) = r^beta |s|^{p*-1} s / (p* (tau+|s|) ln(tau+|s|)^{1-r^beta})`.
pub fn g_eval(r: f64, s: f64, lp: &LogParams, ps: &ParamSet) -> Result<f64> {
    lp.require_energy_range()?;
    Ok(g_unchecked(r, s, lp, ps.p_star()))
}

/// Below this magnitude `g` is flushed to zero; the true value is smaller
/// than `|s|^{p*-1}` and underflows anyway.
const G_FLUSH: f64 = 1e-150;

#[inline]
fn g_unchecked(r: f64, s: f64, lp: &LogParams, q: f64) -> f64 {
    if r == 0.0 || s.abs() < G_FLUSH {
        return 0.0;
    }
    let a = s.abs();
    let l = math::ln_shift(lp.tau, a);
    if !(l > 0.0) {
        return 0.0;
    }
    let e = powf(r, lp.beta);
    let val = e * powf(a, q - 1.0) * s / (q * (lp.tau + a) * powf(l, 1.0 - e));
    if val.is_finite() {
        val
    } else {
        0.0
    }
}

/// Evaluates the primitive `G(r, u) = int_0^u g(r, s) ds` with a fixed
/// 16-point Gauss rule.
#[derive(Debug, Clone)]
pub struct Primitive {
    gl: GaussLegendre,
    lp: LogParams,
    q: f64,
}

impl Primitive {
    pub fn new(lp: &LogParams, ps: &ParamSet) -> Result<Self> {
        lp.require_energy_range()?;
        Ok(Self {
            gl: GaussLegendre::new(16),
            lp: *lp,
            q: ps.p_star(),
        })
    }

    pub fn g(&self, r: f64, s: f64) -> f64 {
        g_unchecked(r, s, &self.lp, self.q)
    }

    pub fn eval(&self, r: f64, u: f64) -> f64 {
        if r == 0.0 || u == 0.0 {
            return 0.0;
        }
        // G is even; integrate over [0, |u|].
        let a = u.abs();
        self.gl
            .integrate(0.0, a, |s| g_unchecked(r, s, &self.lp, self.q))
    }
}

pub fn big_g_eval(r: f64, u: f64, lp: &LogParams, ps: &ParamSet) -> Result<f64> {
    Ok(Primitive::new(lp, ps)?.eval(r, u))
}

/// `I(u) = ||u||^p / p - J(u) / p* + int_0^1 r^theta G(r, u) dr`.
pub fn energy_i(u: &Profile, lp: &LogParams, ps: &ParamSet) -> Result<f64> {
    let prim = Primitive::new(lp, ps)?;
    let q = ps.p_star();
    let kinetic = radial::dirichlet_energy(u, ps) / ps.p();
    let potential = radial::profile_integral(u, ps.theta(), |r, v| {
        j_density(r, v, lp, ps) / q - prim.eval(r, v)
    });
    Ok(kinetic - potential)
}

/// `<I'(u), v> = int r^alpha1 |u'|^{p-2} u' v' - int r^theta |u|^{p*-2} u ln(tau+|u|)^{r^beta} v`.
pub fn energy_pairing(u: &Profile, v: &Profile, lp: &LogParams, ps: &ParamSet) -> Result<f64> {
    lp.require_energy_range()?;
    if u.values().len() != v.values().len() {
        return Err(Error::Domain("profiles live on different grids"));
    }
    let q = ps.p_star();
    let kinetic = radial::dirichlet_pairing(u, v, ps);
    let reaction = radial::profile_pair_integral(u, v, ps.theta(), |r, uu, vv| {
        if uu == 0.0 {
            0.0
        } else {
            math::signed_pow(uu, q - 1.0) * log_factor(r, uu, lp) * vv
        }
    });
    Ok(kinetic - reaction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{make_grid, normalize, Grid};
    use proptest::prelude::*;

    fn p0() -> ParamSet {
        ParamSet::new(2.0, 2.0, 2.0, 2.0).unwrap()
    }

    fn grid(m: usize) -> Arc<Grid> {
        Arc::new(make_grid(m, 3.0).unwrap())
    }

    fn lp(tau: f64, beta: f64) -> LogParams {
        LogParams::new(tau, beta).unwrap()
    }

    /// Composite Simpson on `[0, 1]` with `n` (even) panels.
    fn simpson<F: Fn(f64) -> f64>(n: usize, f: F) -> f64 {
        let h = 1.0 / n as f64;
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn log_params_validation() {
        assert!(LogParams::new(0.0, 1.0).is_err());
        assert!(LogParams::new(1.0, 0.0).is_err());
        assert!(LogParams::new(0.5, 1.0)
            .unwrap()
            .require_energy_range()
            .is_err());
    }

    #[test]
    fn log_factor_examples() {
        let e = core::f64::consts::E;
        assert_eq!(log_factor(0.0, 3.0, &lp(1.0, 0.5)), 1.0);
        assert_eq!(log_factor(0.0, 0.0, &lp(1.0, 0.5)), 1.0);
        assert!((log_factor(0.5, e - 1.0, &lp(1.0, 1.0)) - 1.0).abs() < 1e-15);
        assert_eq!(log_factor(0.5, 0.0, &lp(1.0, 1.0)), 0.0);
        // tau < 1: absolute value of a negative log.
        let v = log_factor(1.0, 0.0, &lp(0.5, 1.0));
        assert!((v - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn j_examples() {
        let ps = p0();
        let g = grid(2000);
        assert_eq!(
            j_functional(&Profile::zero(g.clone()), &lp(1.0, 0.5), &ps),
            0.0
        );
        let u = Profile::from_fn(g.clone(), |r| 1.0 - r).unwrap();
        assert!((sobolev_j0(&u, &ps) - 1.0 / 252.0).abs() < 1e-9);
        assert_eq!(sobolev_j0(&Profile::zero(g.clone()), &ps), 0.0);

        let tau = core::f64::consts::E.exp() - 1.0;
        let l = lp(tau, 0.5);
        let got = j_functional(&u, &l, &ps);
        let oracle = simpson(20000, |r| {
            r * r * (1.0 - r).powi(6) * (tau + 1.0 - r).ln().powf(r.sqrt())
        });
        assert!((got - oracle).abs() < 1e-8 * oracle, "{got} {oracle}");
        assert!(got >= sobolev_j0(&u, &ps));
    }

    #[test]
    fn j_phi_matches_j() {
        let ps = p0();
        let u = Profile::from_fn(grid(1000), |r| 2.0 * (1.0 - r * r)).unwrap();
        let hs = HypothesisSet::power(0.5, 2.0, 1.0).unwrap();
        let a = j_phi(&u, 1.0, &hs, &ps).unwrap();
        let b = j_functional(&u, &lp(1.0, 0.5), &ps);
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        let lin = HypothesisSet::new(|r| r, 2.0, 1.0).unwrap();
        assert!(j_phi(&u, 1.0, &lin, &ps).unwrap().is_finite());
        assert_eq!(
            j_phi(&Profile::zero(grid(10)), 1.0, &lin, &ps).unwrap(),
            0.0
        );
    }

    #[test]
    fn hypothesis_examples() {
        let ok = check_h_conditions(&HypothesisSet::power(0.5, 2.0, 1.0).unwrap());
        assert!(ok.all_pass(), "{ok:?}");
        let h3_bad =
            check_h_conditions(&HypothesisSet::new(|r: f64| -(1.0 - r).ln(), 2.0, 1.0).unwrap());
        assert!(!h3_bad.h3.pass);
        assert!(!h3_bad.h1.pass || h3_bad.h1.pass);
        let h2_bad = check_h_conditions(
            &HypothesisSet::new(
                |r: f64| if r == 0.0 { 0.0 } else { 1.0 / r.ln().abs() },
                1.5,
                1.0,
            )
            .unwrap(),
        );
        assert!(!h2_bad.h2.pass);
        assert!(h2_bad.h2.worst > 1.0);
        let h1_bad = check_h_conditions(&HypothesisSet::new(|_| 1.0, 2.0, 1.0).unwrap());
        assert!(!h1_bad.h1.pass);
        assert!(HypothesisSet::power(0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn g_examples() {
        let ps = p0();
        let l = lp(1.0, 0.5);
        assert_eq!(g_eval(0.0, 2.0, &l, &ps).unwrap(), 0.0);
        assert_eq!(g_eval(0.5, 0.0, &l, &ps).unwrap(), 0.0);
        let a = g_eval(0.3, 1.7, &l, &ps).unwrap();
        assert_eq!(g_eval(0.3, -1.7, &l, &ps).unwrap(), -a);
        assert!(g_eval(0.3, 1e-200, &l, &ps).unwrap().is_finite());
        assert!(g_eval(0.3, 1.0, &lp(0.5, 0.5), &ps).is_err());

        assert_eq!(big_g_eval(0.4, 0.0, &l, &ps).unwrap(), 0.0);
        assert_eq!(big_g_eval(0.0, 3.0, &l, &ps).unwrap(), 0.0);
        let g1 = big_g_eval(0.4, 2.5, &l, &ps).unwrap();
        assert_eq!(big_g_eval(0.4, -2.5, &l, &ps).unwrap(), g1);
        assert!(g1 > 0.0);
    }

    #[test]
    fn primitive_matches_fine_quadrature() {
        let ps = p0();
        let l = lp(1.0, 0.5);
        let prim = Primitive::new(&l, &ps).unwrap();
        for &(r, u) in &[(0.2, 0.5), (0.7, 3.0), (0.95, 20.0)] {
            let fine = simpson(20000, |t| prim.g(r, t * u)) * u;
            let got = prim.eval(r, u);
            assert!(
                (got - fine).abs() < 1e-9 * fine.abs(),
                "{r} {u} {got} {fine}"
            );
        }
    }

    #[test]
    fn primitive_growth_bounds() {
        // |G| <= r^beta (eps |u|^{p*} + C_eps |u|^p) with C_eps from a scan.
        let ps = p0();
        let l = lp(1.0, 0.5);
        let prim = Primitive::new(&l, &ps).unwrap();
        for &eps in &[1.0, 0.1, 0.01] {
            let us: Vec<f64> = (0..200)
                .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 199.0))
                .collect();
            let rs: [f64; 5] = [0.05, 0.3, 0.6, 0.9, 1.0];
            let mut c_eps: f64 = 0.0;
            for &r in &rs {
                for &u in &us {
                    let rb = r.powf(0.5);
                    let need = (prim.eval(r, u) / rb - eps * u.powi(6)) / (u * u);
                    c_eps = c_eps.max(need);
                }
            }
            assert!(c_eps.is_finite());
            for &r in &rs {
                for &u in &us {
                    let rb = r.powf(0.5);
                    assert!(
                        prim.eval(r, u).abs()
                            <= rb * (eps * u.powi(6) + c_eps * u * u) * (1.0 + 1e-12)
                    );
                }
            }
        }
    }

    #[test]
    fn energy_examples() {
        let ps = p0();
        let l = lp(1.0, 0.5);
        let g = grid(2000);
        assert_eq!(energy_i(&Profile::zero(g.clone()), &l, &ps).unwrap(), 0.0);
        let u = Profile::from_fn(g.clone(), |r| 1.0 - r).unwrap();
        let i1 = energy_i(&u.scaled(1e3), &l, &ps).unwrap();
        let i2 = energy_i(&u.scaled(1e4), &l, &ps).unwrap();
        assert!(i1 < 0.0 && i2 < i1);

        // Independent oracle: Simpson in r, Simpson in s for G.
        let got = energy_i(&u, &l, &ps).unwrap();
        let prim = Primitive::new(&l, &ps).unwrap();
        let g_fine = |r: f64, v: f64| simpson(200, |t| prim.g(r, t * v)) * v;
        let oracle = 0.5 * (1.0 / 3.0)
            - simpson(20000, |r| {
                r * r * (1.0 - r).powi(6) * log_factor(r, 1.0 - r, &l)
            }) / 6.0
            + simpson(2000, |r| r * r * g_fine(r, 1.0 - r));
        assert!((got - oracle).abs() < 1e-8, "{got} {oracle}");
        assert!(energy_i(&u, &lp(0.5, 0.5), &ps).is_err());
    }

    #[test]
    fn pairing_examples() {
        let ps = p0();
        let l = lp(1.0, 0.5);
        let g = grid(500);
        let z = Profile::zero(g.clone());
        let v = Profile::from_fn(g.clone(), |r| (1.0 - r) * (3.0 * r).cos()).unwrap();
        assert_eq!(energy_pairing(&z, &v, &l, &ps).unwrap(), 0.0);

        let u = Profile::from_fn(g.clone(), |r| 2.0 * (1.0 - r * r)).unwrap();
        let h = 1e-4;
        let fd = (energy_i(&u.axpy(h, &v), &l, &ps).unwrap()
            - energy_i(&u.axpy(-h, &v), &l, &ps).unwrap())
            / (2.0 * h);
        let pr = energy_pairing(&u, &v, &l, &ps).unwrap();
        assert!((fd - pr).abs() < 1e-6 * pr.abs().max(1.0), "{fd} {pr}");

        let w = Profile::from_fn(g.clone(), |r| 1.0 - r.powi(3)).unwrap();
        let sum = energy_pairing(&u, &v.axpy(1.0, &w), &l, &ps).unwrap();
        let parts =
            energy_pairing(&u, &v, &l, &ps).unwrap() + energy_pairing(&u, &w, &l, &ps).unwrap();
        assert!((sum - parts).abs() < 1e-12 * sum.abs().max(1.0));
    }

    #[test]
    fn evaluator_matches_direct_functionals() {
        let ps = p0();
        let l = lp(1.3, 0.7);
        let g = grid(300);
        let u = Profile::from_fn(g.clone(), |r| 3.0 * (1.0 - r).powi(2) - 0.5).unwrap();
        let ev = JEvaluator::new(&g, Some(&l), &ps);
        assert!((ev.value(u.values()) - j_functional(&u, &l, &ps)).abs() < 1e-13);
        for (a, b) in ev.gradient(u.values()).iter().zip(j_gradient(&u, &l, &ps)) {
            assert!((a - b).abs() < 1e-13 * b.abs().max(1e-3));
        }
        let e0 = JEvaluator::new(&g, None, &ps);
        assert!((e0.value(u.values()) - sobolev_j0(&u, &ps)).abs() < 1e-13);
        for (a, b) in e0
            .gradient(u.values())
            .iter()
            .zip(sobolev_j0_gradient(&u, &ps))
        {
            assert!((a - b).abs() < 1e-13 * b.abs().max(1e-3));
        }
    }

    #[test]
    fn j_gradient_matches_finite_differences() {
        let ps = p0();
        let l = lp(1.0, 0.5);
        let g = grid(60);
        let u = Profile::from_fn(g.clone(), |r| 3.0 * (1.0 - r).powi(2) + 0.1).unwrap();
        let grad = j_gradient(&u, &l, &ps);
        for k in [0usize, 5, 30, 59] {
            let mut e = alloc::vec![0.0; 60];
            e[k] = 1.0;
            let dir = Profile::new(g.clone(), e).unwrap();
            let h = 1e-5;
            let fd = (j_functional(&u.axpy(h, &dir), &l, &ps)
                - j_functional(&u.axpy(-h, &dir), &l, &ps))
                / (2.0 * h);
            assert!(
                (fd - grad[k]).abs() < 1e-6 * grad[k].abs() + 1e-9,
                "{k} {fd} {}",
                grad[k]
            );
        }
    }

    fn coeffs() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-1.5f64..1.5, 5)
    }

    fn profile_from(g: Arc<Grid>, c: &[f64]) -> Profile {
        Profile::from_fn(g, |r| {
            (1.0 - r)
                * c.iter()
                    .enumerate()
                    .map(|(k, a)| a * ((k as f64 + 0.5) * r * 3.0).cos())
                    .sum::<f64>()
        })
        .unwrap()
        .with_zero_boundary()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn log_factor_monotone_in_u(r in 0.0f64..1.0, a in 0.0f64..50.0, b in 0.0f64..50.0, tau in 1.0f64..5.0, beta in 0.1f64..3.0) {
            let l = lp(tau, beta);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(log_factor(r, lo, &l) <= log_factor(r, hi, &l) * (1.0 + 1e-14) + 1e-300);
        }

        #[test]
        fn j_dominates_j0_for_large_tau(c in coeffs(), tau in core::f64::consts::E..10.0, beta in 0.1f64..3.0) {
            let ps = p0();
            let u = profile_from(grid(300), &c);
            prop_assert!(j_functional(&u, &lp(tau, beta), &ps) >= sobolev_j0(&u, &ps) * (1.0 - 1e-14));
        }

        #[test]
        fn pairing_matches_energy_differences(c in coeffs(), d in coeffs()) {
            let ps = p0();
            let l = lp(1.0, 0.5);
            let g = grid(200);
            let u = profile_from(g.clone(), &c);
            let v = profile_from(g, &d);
            let h = 1e-4;
            let fd = (energy_i(&u.axpy(h, &v), &l, &ps).unwrap() - energy_i(&u.axpy(-h, &v), &l, &ps).unwrap()) / (2.0 * h);
            let pr = energy_pairing(&u, &v, &l, &ps).unwrap();
            let scale = pr.abs().max(radial::dirichlet_pairing(&v, &v, &ps).sqrt() * 1e-3).max(1e-12);
            prop_assert!((fd - pr).abs() <= 1e-5 * scale, "fd {} pairing {}", fd, pr);
        }

        #[test]
        fn scaled_unit_profiles_respect_homogeneous_j0(c in coeffs(), t in 0.05f64..0.99) {
            let ps = p0();
            let u = profile_from(grid(300), &c);
            prop_assume!(radial::dirichlet_norm(&u, &ps) > 1e-6);
            let un = normalize(&u, &ps).unwrap();
            let scaled = un.scaled(t);
            let lhs = sobolev_j0(&scaled, &ps);
            let rhs = sobolev_j0(&un, &ps) * t.powf(ps.p_star());
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }
    }
}
