//! Admissible parameter tuples `(p, alpha0, alpha1, theta)` and the closed-form
//! constants derived from them.

use crate::math::powf;
use crate::{Error, Result};

/// Exponents of the weighted space `X^{1,p}(alpha0, alpha1)` together with
/// the weight exponent `theta` of the target measure `r^theta dr`.
///
/// Only constructible through [`ParamSet::new`], which enforces
///
/// * `p > 1`
/// * `alpha1 - p + 1 > 0` (Sobolev case)
/// * `alpha0 >= alpha1 - p`
/// * `theta > alpha1 - p`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet {
    p: f64,
    alpha0: f64,
    alpha1: f64,
    theta: f64,
}

impl ParamSet {
    /// Validates the tuple; the error names the first violated inequality.
    pub fn new(p: f64, alpha0: f64, alpha1: f64, theta: f64) -> Result<Self> {
        if !(p.is_finite() && alpha0.is_finite() && alpha1.is_finite() && theta.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite"));
        }
        if alpha0 < 0.0 || alpha1 < 0.0 || theta < 0.0 {
            return Err(Error::InvalidParams("alpha0, alpha1, theta must be >= 0"));
        }
        if p <= 1.0 {
            return Err(Error::InvalidParams("p <= 1"));
        }
        if alpha1 - p + 1.0 <= 0.0 {
            return Err(Error::InvalidParams("alpha1-p+1 <= 0"));
        }
        if alpha0 < alpha1 - p {
            return Err(Error::InvalidParams("alpha0 < alpha1-p"));
        }
        if theta <= alpha1 - p {
            return Err(Error::InvalidParams("theta <= alpha1-p"));
        }
        Ok(Self {
            p,
            alpha0,
            alpha1,
            theta,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `alpha1 - p + 1`, positive by construction.
    pub fn sobolev_gap(&self) -> f64 {
        self.alpha1 - self.p + 1.0
    }

    /// Critical exponent `p* = (theta + 1) p / (alpha1 - p + 1)`.
    pub fn p_star(&self) -> f64 {
        (self.theta + 1.0) * self.p / self.sobolev_gap()
    }

    pub fn derived(&self) -> DerivedConstants {
        DerivedConstants::new(*self)
    }
}

/// Validates `(p, alpha0, alpha1, theta)`; see [`ParamSet::new`].
pub fn validate_params(p: f64, alpha0: f64, alpha1: f64, theta: f64) -> Result<ParamSet> {
    ParamSet::new(p, alpha0, alpha1, theta)
}

/// Constants of the Bliss family `c_hat eps^s / (eps^n + r^n)^(1/m)` and the
/// pointwise-bound prefactor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub params: ParamSet,
    pub p_star: f64,
    pub s: f64,
    pub n: f64,
    pub m: f64,
    pub c_hat: f64,
    /// `((p-1)/(alpha1-p+1))^((p-1)/p)`, the bound `|u(r)| <= kappa r^{-(alpha1-p+1)/p}` on the unit sphere.
    pub kappa: f64,
    /// `min{(theta+1)/p, (alpha1-p+1)/(p-1)}`, the upper end of the existence range for `beta`.
    pub beta_max: f64,
}

impl DerivedConstants {
    pub fn new(ps: ParamSet) -> Self {
        let p = ps.p;
        let a1 = ps.alpha1;
        let th = ps.theta;
        let gap = ps.sobolev_gap();
        let s = gap / (p * p - p);
        let n = (th - a1 + p) / (p - 1.0);
        let m = (th - a1 + p) / gap;
        let c_hat = powf(
            (th + 1.0) * powf(gap / (p - 1.0), p - 1.0),
            gap / (p * (th - a1 + p)),
        );
        let kappa = powf((p - 1.0) / gap, (p - 1.0) / p);
        let beta_max = ((th + 1.0) / p).min(gap / (p - 1.0));
        Self {
            params: ps,
            p_star: ps.p_star(),
            s,
            n,
            m,
            c_hat,
            kappa,
            beta_max,
        }
    }
}

/// Computes all derived constants of an admissible tuple.
pub fn derived_constants(ps: &ParamSet) -> DerivedConstants {
    DerivedConstants::new(*ps)
}

/// Outcome of [`check_identities`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    /// Largest residual over the six parameter relations, each scaled by `max(1, |rhs|)`.
    pub residual: f64,
    pub pass: bool,
}

pub const IDENTITY_TOL: f64 = 1e-12;

/// Evaluates the six algebraic relations tying `(s, n, m, p*)` to `(p, alpha1, theta)`.
pub fn check_identities(dc: &DerivedConstants) -> IdentityReport {
    let p = dc.params.p;
    let a1 = dc.params.alpha1;
    let th = dc.params.theta;
    let (s, n, m, ps) = (dc.s, dc.n, dc.m, dc.p_star);
    let gap = a1 - p + 1.0;
    let pairs = [
        (s * m / n, 1.0 / p),
        (n - s * m, (th - a1 + p) / p),
        (s * ps, (th + 1.0) / (p - 1.0)),
        (s * p, gap / (p - 1.0)),
        (th - n * ps / m + 1.0, -(th + 1.0) / (p - 1.0)),
        ((s - n / m) * ps, -(th + 1.0)),
    ];
    let residual = pairs
        .iter()
        .map(|&(lhs, rhs)| (lhs - rhs).abs() / rhs.abs().max(1.0))
        .fold(0.0, f64::max);
    IdentityReport {
        residual,
        pass: residual < IDENTITY_TOL,
    }
}
