//! The Young functions `Gamma(t) = t^a |ln(tau + t)|^b`, convexity
//! certificates for them, and the Luxemburg norm of the log-weighted modular.

use alloc::vec::Vec;

use crate::functionals::{self, JEvaluator, LogParams};
use crate::math::{self, ln, powf};
use crate::params::ParamSet;
use crate::radial::{self, Profile};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSpec {
    a: f64,
    b: f64,
    tau: f64,
}

impl GammaSpec {
    pub fn new(a: f64, b: f64, tau: f64) -> Result<Self> {
        if !(a > 1.0) {
            return Err(Error::InvalidParams("a must be > 1"));
        }
        if !(0.0..=1.0).contains(&b) {
            return Err(Error::InvalidParams("b must lie in [0, 1]"));
        }
        if !(tau >= 1.0 && tau.is_finite()) {
            return Err(Error::InvalidParams("tau must be >= 1"));
        }
        Ok(Self { a, b, tau })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// `t^a |ln(tau + t)|^b`, with `Gamma(0) = 0`.
pub fn gamma_value(t: f64, spec: &GammaSpec) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let base = powf(t, spec.a);
    if spec.b == 0.0 {
        base
    } else {
        base * powf(math::ln_shift(spec.tau, t).abs(), spec.b)
    }
}

/// `h_tau(t) = (tau + t) ln(tau + t) / t`.
pub fn h_tau(t: f64, tau: f64) -> f64 {
    (tau + t) * math::ln_shift(tau, t) / t
}

/// `Phi_tau(t) = a(a-1) h^2 + b (a h + b - 1)`, the positive factor of
/// `Gamma''` after the common power is pulled out.
pub fn phi_tau(t: f64, spec: &GammaSpec) -> f64 {
    let h = h_tau(t, spec.tau);
    spec.a * (spec.a - 1.0) * h * h + spec.b * (spec.a * h + spec.b - 1.0)
}

/// `a(a-1) + b(a+b-1)`, the value of `Phi_tau` at `h = 1`.
pub fn phi_lower_bound(spec: &GammaSpec) -> f64 {
    spec.a * (spec.a - 1.0) + spec.b * (spec.a + spec.b - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityReport {
    /// Smallest second difference divided by its scale `Gamma(t_-) + Gamma(t) + Gamma(t_+)`.
    pub min_scaled_second_difference: f64,
    pub second_differences_ok: bool,
    pub min_h: f64,
    pub min_phi: f64,
    pub phi_bound: f64,
    pub phi_ok: bool,
    pub convex: bool,
}

pub const CONVEXITY_TOL: f64 = 1e-12;

/// Log-spaced grid with `per_decade` points per decade on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = libm::log10(hi / lo);
    let n = libm::ceil(decades * per_decade as f64) as usize;
    (0..=n)
        .map(|i| lo * powf(10.0, decades * i as f64 / n as f64))
        .collect()
}

/// Nonuniform second differences of `Gamma` on `t_grid` and the pointwise
/// `Phi_tau >= a(a-1) + b(a+b-1)` certificate.
pub fn convexity_check(spec: &GammaSpec, t_grid: &[f64]) -> Result<ConvexityReport> {
    if t_grid.len() < 3 || t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid[0] <= 0.0 {
        return Err(Error::Domain("t grid must be positive and increasing"));
    }
    if libm::log10(t_grid[t_grid.len() - 1] / t_grid[0]) < 10.0 - 1e-9 {
        return Err(Error::Domain("t grid must cover at least 10 decades"));
    }
    let mut min_sd = f64::INFINITY;
    for w in t_grid.windows(3) {
        let (x0, x1, x2) = (w[0], w[1], w[2]);
        let (g0, g1, g2) = (
            gamma_value(x0, spec),
            gamma_value(x1, spec),
            gamma_value(x2, spec),
        );
        let (h0, h1) = (x1 - x0, x2 - x1);
        // Divided-difference form of f'' scaled to the local function size.
        let sd = (h0 * g2 - (h0 + h1) * g1 + h1 * g0) / (h0 + h1);
        let scale = g0 + g1 + g2;
        let scaled = if scale > 0.0 { sd / scale } else { sd };
        min_sd = min_sd.min(scaled);
    }
    let bound = phi_lower_bound(spec);
    let mut min_h = f64::INFINITY;
    let mut min_phi = f64::INFINITY;
    for &t in t_grid {
        min_h = min_h.min(h_tau(t, spec.tau));
        min_phi = min_phi.min(phi_tau(t, spec));
    }
    let second_differences_ok = min_sd >= -CONVEXITY_TOL;
    let phi_ok = min_h >= 1.0 - 1e-12 && min_phi >= bound * (1.0 - 1e-12) && bound > 0.0;
    Ok(ConvexityReport {
        min_scaled_second_difference: min_sd,
        second_differences_ok,
        min_h,
        min_phi,
        phi_bound: bound,
        phi_ok,
        convex: second_differences_ok && phi_ok,
    })
}

/// `rho(u / lambda) = int r^theta |u/lambda|^{p*} |ln(tau + |u/lambda|)|^{r^beta} dr`.
pub fn modular(u: &Profile, lambda: f64, lp: &LogParams, ps: &ParamSet) -> f64 {
    let inv = 1.0 / lambda;
    radial::profile_integral(u, ps.theta(), |r, v| {
        functionals::j_density(r, v * inv, lp, ps)
    })
}

pub const LUXEMBURG_TOL: f64 = 1e-8;

/// `inf { lambda > 0 : rho(u / lambda) <= 1 }` by bisection on `ln lambda`.
pub fn luxemburg_norm(u: &Profile, lp: &LogParams, ps: &ParamSet) -> Result<f64> {
    lp.require_energy_range()?;
    if u.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let start = radial::lq_norm(u, ps.p_star(), ps.theta())?.max(f64::MIN_POSITIVE);
    let eval = JEvaluator::new(u.grid(), Some(lp), ps);
    let mut scaled = u.values().to_vec();
    let mut f = |lam: f64| {
        let inv = 1.0 / lam;
        for (s, &v) in scaled.iter_mut().zip(u.values()) {
            *s = v * inv;
        }
        eval.value(&scaled) - 1.0
    };
    let (mut lo, mut hi) = (start, start);
    let mut tries = 0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 2000 {
            return Err(Error::NonConvergence {
                what: "Luxemburg upper bracket",
                residual: f(hi),
            });
        }
    }
    tries = 0;
    while f(lo) < 0.0 {
        lo *= 0.5;
        tries += 1;
        if tries > 2000 {
            return Err(Error::NonConvergence {
                what: "Luxemburg lower bracket",
                residual: f(lo),
            });
        }
    }
    for _ in 0..200 {
        let mid = math::exp(0.5 * (ln(lo) + ln(hi)));
        if !(mid > lo && mid < hi) {
            break;
        }
        let fm = f(mid);
        if fm.abs() < 1e-14 {
            return Ok(mid);
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lam = if f(lo).abs() < f(hi).abs() { lo } else { hi };
    let residual = f(lam).abs();
    if residual >= LUXEMBURG_TOL {
        return Err(Error::NonConvergence {
            what: "Luxemburg bisection",
            residual,
        });
    }
    Ok(lam)
}

/// `lambda_0 = (1.05 F_hat)^{1/p*}`.
pub fn embedding_constant(f_hat: f64, ps: &ParamSet) -> f64 {
    powf(1.05 * f_hat, 1.0 / ps.p_star())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingRow {
    pub luxemburg: f64,
    pub dirichlet: f64,
    /// `luxemburg / dirichlet`, 0 for the zero profile.
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingReport {
    pub lambda0: f64,
    pub rows: Vec<EmbeddingRow>,
    pub pass: bool,
}

/// Checks `||u||_lux <= lambda0 ||u||` for each profile.
pub fn embedding_check(
    profiles: &[Profile],
    lp: &LogParams,
    ps: &ParamSet,
    lambda0: f64,
) -> Result<EmbeddingReport> {
    let mut rows = Vec::with_capacity(profiles.len());
    for u in profiles {
        let lux = luxemburg_norm(u, lp, ps)?;
        let d = radial::dirichlet_norm(u, ps);
        let ratio = if d > 0.0 { lux / d } else { 0.0 };
        rows.push(EmbeddingRow {
            luxemburg: lux,
            dirichlet: d,
            ratio,
            pass: lux <= lambda0 * d,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(EmbeddingReport {
        lambda0,
        rows,
        pass,
    })
}
