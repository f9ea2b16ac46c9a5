//! Positive radial solutions of
//! `-(r^alpha1 |u'|^{p-2} u')' = r^theta ln(tau+|u|)^{r^beta} |u|^{p*-2} u`, `u(1) = 0`,
//! by shooting on the amplitude at the origin.
//!
//! The equation is integrated in flux form `w = r^alpha1 |u'|^{p-2} u'`, which
//! stays regular where `u'` vanishes. Near the origin the solution is started
//! from its leading-order series with zero flux at `r = 0`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::functionals::{self, LogParams};
use crate::math::{self, powf, signed_pow};
use crate::params::ParamSet;
use crate::quad::GaussLegendre;
use crate::radial::{self, Grid, Profile};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpState {
    pub r: f64,
    pub u: f64,
    /// `r^alpha1 |u'|^{p-2} u'`.
    pub w: f64,
}

impl IvpState {
    pub fn du(&self, ps: &ParamSet) -> f64 {
        flux_to_slope(self.w, self.r, ps)
    }
}

#[inline]
fn flux_to_slope(w: f64, r: f64, ps: &ParamSet) -> f64 {
    signed_pow(w * powf(r, -ps.alpha1()), 1.0 / (ps.p() - 1.0))
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpOptions {
    pub r_min: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for IvpOptions {
    fn default() -> Self {
        Self {
            r_min: 1e-6,
            rtol: 1e-10,
            atol: 1e-16,
            max_steps: 2_000_000,
        }
    }
}

struct Rhs<'a> {
    lp: &'a LogParams,
    ps: &'a ParamSet,
}

impl Rhs<'_> {
    #[inline]
    fn eval(&self, r: f64, y: [f64; 2]) -> [f64; 2] {
        let du = flux_to_slope(y[1], r, self.ps);
        let dw = -powf(r, self.ps.theta())
            * functionals::log_factor(r, y[0], self.lp)
            * signed_pow(y[0], self.ps.p_star() - 1.0);
        [du, dw]
    }
}

/// Leading-order start at `r_min`: the source frozen at `u = a` gives
/// `w(r) = -|a|^{p*-2} a int_0^r s^theta ln(tau+|a|)^{s^beta} ds`, and `u` follows
/// by integrating the slope.
fn series_start(a: f64, lp: &LogParams, ps: &ParamSet, r_min: f64) -> IvpState {
    if a == 0.0 {
        return IvpState {
            r: r_min,
            u: 0.0,
            w: 0.0,
        };
    }
    let gl = GaussLegendre::new(16);
    let src = signed_pow(a, ps.p_star() - 1.0);
    let weight = gl.integrate(0.0, r_min, |s| {
        powf(s, ps.theta()) * functionals::log_factor(s, a, lp)
    });
    let w = -src * weight;
    // Slope with the log factor frozen at its r_min value:
    // w(s) ~ -src * lf * s^{theta+1}/(theta+1), u' = -(|w| s^-alpha1)^{1/(p-1)}.
    let th = ps.theta();
    let q = 1.0 / (ps.p() - 1.0);
    let lf = functionals::log_factor(r_min, a, lp);
    let c = powf(src.abs() * lf / (th + 1.0), q);
    let e = (th + 1.0 - ps.alpha1()) * q + 1.0;
    let du_int = c * powf(r_min, e) / e;
    IvpState {
        r: r_min,
        u: a - du_int.copysign(a),
        w,
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Dopri<'a> {
    rhs: Rhs<'a>,
    opts: IvpOptions,
    h: f64,
    steps: usize,
}

impl Dopri<'_> {
    /// Advances `state` to exactly `r_end`.
    fn advance(&mut self, state: &mut IvpState, r_end: f64) -> Result<()> {
        while state.r < r_end {
            if self.steps >= self.opts.max_steps {
                return Err(Error::NonConvergence {
                    what: "ODE step budget",
                    residual: r_end - state.r,
                });
            }
            let last = self.h >= r_end - state.r;
            let h = if last { r_end - state.r } else { self.h };
            let y = [state.u, state.w];
            let mut k = [[0.0; 2]; 7];
            k[0] = self.rhs.eval(state.r, y);
            for i in 1..7 {
                let mut yi = y;
                for (j, kj) in k.iter().enumerate().take(i) {
                    yi[0] += h * A[i][j] * kj[0];
                    yi[1] += h * A[i][j] * kj[1];
                }
                k[i] = self.rhs.eval(state.r + C[i] * h, yi);
            }
            let mut y5 = y;
            let mut err = 0.0f64;
            for d in 0..2 {
                let mut s5 = 0.0;
                let mut s4 = 0.0;
                for i in 0..7 {
                    s5 += B5[i] * k[i][d];
                    s4 += B4[i] * k[i][d];
                }
                y5[d] += h * s5;
                let scale = self.opts.atol + self.opts.rtol * y[d].abs().max(y5[d].abs());
                err = err.max((h * (s5 - s4)).abs() / scale);
            }
            if !err.is_finite() {
                err = 1e10;
            }
            if err <= 1.0 {
                state.r = if last { r_end } else { state.r + h };
                state.u = y5[0];
                state.w = y5[1];
                self.steps += 1;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * powf(err, -0.2)).clamp(0.2, 5.0)
            };
            let proposal = h * factor;
            // Keep the running step when a short final step was taken.
            self.h = if last && err <= 1.0 {
                self.h.max(proposal)
            } else {
                proposal
            };
            if self.h < 1e-15 * state.r.max(1e-300) {
                return Err(Error::StepUnderflow {
                    r: state.r,
                    u: state.u,
                    w: state.w,
                });
            }
        }
        Ok(())
    }
}

/// Trajectory sampled at requested radii.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<IvpState>,
    pub steps: usize,
}

impl Trajectory {
    pub fn end(&self) -> &IvpState {
        self.states.last().expect("non-empty trajectory")
    }
}

/// Integrates from the series start at `opts.r_min` and records the state at
/// every radius of `outputs` (increasing, inside `[r_min, 1]`). Radii below
/// `r_min` are filled from the series.
pub fn ivp_integrate_at(
    amplitude: f64,
    lp: &LogParams,
    ps: &ParamSet,
    opts: &IvpOptions,
    outputs: &[f64],
) -> Result<Trajectory> {
    lp.require_energy_range()?;
    if !(opts.r_min > 0.0 && opts.r_min <= 1e-4) {
        return Err(Error::Domain("r_min must lie in (0, 1e-4]"));
    }
    if !amplitude.is_finite() {
        return Err(Error::Domain("amplitude must be finite"));
    }
    let start = series_start(amplitude, lp, ps, opts.r_min);
    let mut state = start;
    let mut dopri = Dopri {
        rhs: Rhs { lp, ps },
        opts: *opts,
        h: opts.r_min * 0.1,
        steps: 0,
    };
    let mut states = Vec::with_capacity(outputs.len());
    for &r in outputs {
        if r <= opts.r_min {
            let early = series_start(amplitude, lp, ps, r.max(1e-300));
            states.push(early);
            continue;
        }
        dopri.advance(&mut state, r)?;
        states.push(state);
    }
    Ok(Trajectory {
        states,
        steps: dopri.steps,
    })
}

/// `u(1; a)` and the step count.
pub fn boundary_value(
    amplitude: f64,
    lp: &LogParams,
    ps: &ParamSet,
    opts: &IvpOptions,
) -> Result<f64> {
    Ok(ivp_integrate_at(amplitude, lp, ps, opts, &[1.0])?.end().u)
}

/// The IVP solution on `[r_min, 1]` sampled at the grid nodes.
pub fn ivp_integrate(
    amplitude: f64,
    lp: &LogParams,
    ps: &ParamSet,
    opts: &IvpOptions,
    grid: &Arc<Grid>,
) -> Result<Profile> {
    let traj = ivp_integrate_at(amplitude, lp, ps, opts, grid.nodes())?;
    Ok(
        Profile::new(grid.clone(), traj.states.iter().map(|s| s.u).collect())?
            .with_origin(amplitude),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootResult {
    /// Solution on the grid with `u(1)` set to 0.
    pub profile: Profile,
    /// `u(0)`.
    pub amplitude: f64,
    /// `|u(1)|` of the integrated solution before the boundary node is zeroed.
    pub boundary_residual: f64,
    pub weak_residual: f64,
    pub bisections: usize,
    pub ode_steps: usize,
}

/// First `a` on a log grid over `[lo, hi]` where `u(1; a)` turns negative,
/// returned as a bracket `(a_prev, a)`.
pub fn find_bracket(
    lp: &LogParams,
    ps: &ParamSet,
    opts: &IvpOptions,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<(f64, f64)> {
    let mut prev = None;
    for i in 0..points {
        let a = lo * powf(hi / lo, i as f64 / (points - 1) as f64);
        let v = boundary_value(a, lp, ps, opts)?;
        if v < 0.0 {
            if let Some(pa) = prev {
                return Ok((pa, a));
            }
            return Err(Error::NoSignChange { lo, hi: a });
        }
        prev = Some(a);
    }
    Err(Error::NoSignChange { lo, hi })
}

/// Number of cosine bumps and tents in the default weak-residual test set.
pub const DEFAULT_TESTS: usize = 20;

/// Bisection on the amplitude until `|u(1)| < tol`.
///
/// A positive solution is only known to exist for `beta < beta_max`; other
/// values are attempted as well and usually end in a bracketing error.
pub fn shoot(
    lp: &LogParams,
    ps: &ParamSet,
    bracket: (f64, f64),
    tol: f64,
    opts: &IvpOptions,
    grid: &Arc<Grid>,
) -> Result<ShootResult> {
    lp.require_energy_range()?;
    let (mut lo, mut hi) = bracket;
    let (mut flo, fhi) = (
        boundary_value(lo, lp, ps, opts)?,
        boundary_value(hi, lp, ps, opts)?,
    );
    if flo.signum() == fhi.signum() || flo == 0.0 && fhi == 0.0 {
        return Err(Error::NoSignChange { lo, hi });
    }
    let mut bisections = 0;
    let mut best = if flo.abs() < fhi.abs() {
        (lo, flo)
    } else {
        (hi, fhi)
    };
    while best.1.abs() >= tol {
        if bisections >= 200 || hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
            return Err(Error::NonConvergence {
                what: "amplitude bisection",
                residual: best.1.abs(),
            });
        }
        let mid = 0.5 * (lo + hi);
        let fm = boundary_value(mid, lp, ps, opts)?;
        bisections += 1;
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let amplitude = best.0;
    let traj = ivp_integrate_at(amplitude, lp, ps, opts, grid.nodes())?;
    let boundary_residual = traj.end().u.abs();
    let profile = Profile::new(grid.clone(), traj.states.iter().map(|s| s.u).collect())?
        .with_zero_boundary()
        .with_origin(amplitude);
    let weak = weak_residual(&profile, lp, ps, DEFAULT_TESTS)?;
    Ok(ShootResult {
        profile,
        amplitude,
        boundary_residual,
        weak_residual: weak,
        bisections,
        ode_steps: traj.steps,
    })
}

/// Test functions on `grid`: `cos((k - 1/2) pi r)` for the first half and
/// tents centred at `j/(n+1)` of half-width `1/(n+1)` for the rest. All vanish at `r = 1`.
pub fn test_functions(grid: &Arc<Grid>, count: usize) -> Result<Vec<Profile>> {
    let n_cos = count.div_ceil(2);
    let n_tent = count - n_cos;
    let mut out = Vec::with_capacity(count);
    for k in 1..=n_cos {
        let f = (k as f64 - 0.5) * core::f64::consts::PI;
        out.push(Profile::from_fn(grid.clone(), |r| math::cos(f * r))?.with_zero_boundary());
    }
    let width = 1.0 / (n_tent as f64 + 1.0);
    for j in 1..=n_tent {
        let c = j as f64 * width;
        out.push(
            Profile::from_fn(grid.clone(), |r| (1.0 - (r - c).abs() / width).max(0.0))?
                .with_zero_boundary(),
        );
    }
    Ok(out)
}

/// `max_v |<I'(u), v>| / ||v||` over [`test_functions`].
pub fn weak_residual(u: &Profile, lp: &LogParams, ps: &ParamSet, test_count: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for v in test_functions(u.grid(), test_count)? {
        let norm = radial::dirichlet_norm(&v, ps);
        if norm == 0.0 {
            continue;
        }
        let pairing = functionals::energy_pairing(u, &v, lp, ps)?;
        worst = worst.max(pairing.abs() / norm);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::make_grid;

    fn p0() -> ParamSet {
        ParamSet::new(2.0, 2.0, 2.0, 2.0).unwrap()
    }

    fn lp() -> LogParams {
        LogParams::new(1.0, 0.5).unwrap()
    }

    #[test]
    fn zero_amplitude_stays_zero() {
        let g = Arc::new(make_grid(200, 3.0).unwrap());
        let u = ivp_integrate(0.0, &lp(), &p0(), &IvpOptions::default(), &g).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn odd_symmetry() {
        let g = Arc::new(make_grid(200, 3.0).unwrap());
        let o = IvpOptions::default();
        let a = ivp_integrate(3.0, &lp(), &p0(), &o, &g).unwrap();
        let b = ivp_integrate(-3.0, &lp(), &p0(), &o, &g).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn decreasing_while_positive() {
        let g = Arc::new(make_grid(400, 3.0).unwrap());
        let ps = p0();
        let traj = ivp_integrate_at(30.0, &lp(), &ps, &IvpOptions::default(), g.nodes()).unwrap();
        for w in traj.states.windows(2) {
            if w[0].u > 0.0 {
                assert!(w[1].w < 0.0);
                assert!(w[1].u < w[0].u);
            }
        }
    }

    #[test]
    fn unforced_limit_is_constant() {
        // Tiny amplitude: the source is negligible and u stays near a.
        let v = boundary_value(1e-3, &lp(), &p0(), &IvpOptions::default()).unwrap();
        assert!((v - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn r_min_robustness() {
        let ps = p0();
        let a = 25.0;
        let o1 = IvpOptions::default();
        let o2 = IvpOptions {
            r_min: 0.5e-6,
            ..o1
        };
        let v1 = boundary_value(a, &lp(), &ps, &o1).unwrap();
        let v2 = boundary_value(a, &lp(), &ps, &o2).unwrap();
        assert!((v1 - v2).abs() < 1e-8, "{v1} {v2}");
    }

    #[test]
    fn shoot_errors() {
        let ps = p0();
        let g = Arc::new(make_grid(100, 3.0).unwrap());
        let o = IvpOptions::default();
        assert!(matches!(
            shoot(&lp(), &ps, (1e-7, 1e-6), 1e-8, &o, &g),
            Err(Error::NoSignChange { .. })
        ));
        let bad = LogParams::new(1.0, 2.0).unwrap();
        assert!(shoot(&bad, &ps, (1.0, 100.0), 1e-8, &o, &g).is_err());
        let o_bad = IvpOptions { r_min: 1e-2, ..o };
        assert!(boundary_value(1.0, &lp(), &ps, &o_bad).is_err());
    }

    #[test]
    fn weak_residual_examples() {
        let ps = p0();
        let g = Arc::new(make_grid(500, 3.0).unwrap());
        assert_eq!(
            weak_residual(&Profile::zero(g.clone()), &lp(), &ps, 20).unwrap(),
            0.0
        );
        let junk = Profile::from_fn(g.clone(), |r| 3.0 * (1.0 - r) * (1.0 + 5.0 * r * r)).unwrap();
        assert!(weak_residual(&junk, &lp(), &ps, 20).unwrap() > 1e-2);
        let tests = test_functions(&g, 20).unwrap();
        assert_eq!(tests.len(), 20);
        assert!(tests.iter().all(|v| v.boundary_value() == 0.0));
    }
}
