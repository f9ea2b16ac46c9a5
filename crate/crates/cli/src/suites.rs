//! Verification suites: each turns one run into named pass/fail checks.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use loghardy_core::math::rel_diff;
use loghardy_core::orlicz::{CONVEXITY_TOL, LUXEMBURG_TOL};
use loghardy_core::params::IDENTITY_TOL;
use loghardy_core::Grid;

use crate::runs::{self, POINTWISE_FLOOR};
use crate::table::{Cell, Table};
use crate::{CliError, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Bliss,
    Rates,
    Sweep,
    Mp,
    Ncs,
    Orlicz,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Bliss,
        Suite::Rates,
        Suite::Sweep,
        Suite::Mp,
        Suite::Ncs,
        Suite::Orlicz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Bliss => "bliss",
            Suite::Rates => "rates",
            Suite::Sweep => "sweep",
            Suite::Mp => "mp",
            Suite::Ncs => "ncs",
            Suite::Orlicz => "orlicz",
        }
    }

    /// Parses a comma-separated list of suite names; `all` expands to every
    /// suite. Duplicates are dropped, order of first mention is kept.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>, CliError> {
        let mut out = Vec::new();
        for name in s.split(',').map(str::trim) {
            let add = if name == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![name.parse()?]
            };
            for x in add {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        Ok(out)
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "unknown suite '{s}' (bliss, rates, sweep, mp, ncs, orlicz, all)"
                ))
            })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How a check compares its value with its bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// Passes when `value <= bound`.
    AtMost,
    /// Passes when `value >= bound`.
    AtLeast,
    /// Reported only.
    Info,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub relation: Relation,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            relation: Relation::AtMost,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            relation: Relation::AtLeast,
        }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: f64::NAN,
            relation: Relation::Info,
        }
    }

    /// `None` for informational checks. NaN values fail.
    pub fn pass(&self) -> Option<bool> {
        match self.relation {
            Relation::AtMost => Some(self.value <= self.bound),
            Relation::AtLeast => Some(self.value >= self.bound),
            Relation::Info => None,
        }
    }

    pub fn summary(&self, suite: Suite) -> String {
        let tag = match self.pass() {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "INFO",
        };
        let rel = match self.relation {
            Relation::AtMost => format!(" <= {:.6e}", self.bound),
            Relation::AtLeast => format!(" >= {:.6e}", self.bound),
            Relation::Info => String::new(),
        };
        format!("{tag} {suite}/{}: {:.6e}{rel}", self.name, self.value)
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass() != Some(false))
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["check", "value", "bound", "pass"]);
        for c in &self.checks {
            let pass = match c.pass() {
                Some(b) => Cell::Flag(b),
                None => Cell::from("info"),
            };
            t.push(vec![
                c.name.clone().into(),
                c.value.into(),
                c.bound.into(),
                pass,
            ]);
        }
        t
    }
}

fn pointwise(profiles: &[&loghardy_core::Profile], cfg: &RunConfig) -> Check {
    Check::at_least(
        "pointwise_bound_min_slack",
        runs::min_pointwise_slack(profiles.iter().copied(), &cfg.params),
        POINTWISE_FLOOR,
    )
}

pub fn bliss(cfg: &RunConfig) -> Result<SuiteReport, CliError> {
    let c = runs::constants(cfg)?;
    Ok(SuiteReport {
        suite: Suite::Bliss,
        checks: vec![
            Check::at_most("identity_residual", c.identity_residual, IDENTITY_TOL),
            Check::at_most(
                "pstar_vs_gradient_integral",
                c.report.integral_mismatch(),
                cfg.tolerances.identity,
            ),
            Check::at_most(
                "s_power_vs_beta_closed_form",
                rel_diff(c.report.s_power, c.s_power_closed),
                cfg.tolerances.identity,
            ),
            Check::info("sigma_p", c.report.sigma_p),
        ],
    })
}

/// Dirichlet and `L^{p*}` deviation exponents within 10% and 15% of `s p`
/// and `s p*`; the concentration exponent within 15% of `beta`.
pub fn rates(cfg: &RunConfig) -> Result<SuiteReport, CliError> {
    let dc = cfg.params.derived();
    let r = runs::rates(cfg)?;
    let sp = dc.s * cfg.params.p();
    let sq = dc.s * dc.p_star;
    let rel = |x: f64, target: f64| (x - target).abs() / target;
    Ok(SuiteReport {
        suite: Suite::Rates,
        checks: vec![
            Check::info("dirichlet_exponent", r.dirichlet.fitted_exponent),
            Check::at_most(
                "dirichlet_exponent_rel_error",
                rel(r.dirichlet.fitted_exponent, sp),
                0.10,
            ),
            Check::info("lpstar_exponent", r.lpstar.fitted_exponent),
            Check::at_most(
                "lpstar_exponent_rel_error",
                rel(r.lpstar.fitted_exponent, sq),
                0.15,
            ),
            Check::info("concentration_exponent", r.concentration.fitted_exponent),
            Check::at_most(
                "concentration_exponent_rel_error",
                rel(r.concentration.fitted_exponent, cfg.beta),
                0.15,
            ),
        ],
    })
}

/// Final-gap and bubble-bound checks of the beta sweep. Whether the gaps are
/// nonincreasing is reported but not enforced, since on a fixed grid the
/// values for large beta settle slightly below `Sigma_p`.
pub fn sweep(cfg: &RunConfig, grid: &Arc<Grid>) -> Result<SuiteReport, CliError> {
    let run = runs::sweep(cfg, grid)?;
    let mut checks = Vec::new();
    for r in &run.rows {
        checks.push(Check::info(
            format!("F_hat(beta={})", r.beta),
            r.result.value,
        ));
        checks.push(Check::at_least(
            format!("F_hat_minus_bubble_bound(beta={})", r.beta),
            r.result.value - r.bubble_bound,
            -1e-9,
        ));
    }
    let gaps: Vec<f64> = run.rows.iter().map(|r| r.gap_to_sigma).collect();
    let worst_increase = gaps
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::info("largest_gap_increase", worst_increase));
    checks.push(Check::at_most(
        "final_gap_to_sigma",
        *gaps.last().expect("nonempty beta list"),
        cfg.tolerances.sweep_gap,
    ));
    let profiles: Vec<_> = run.rows.iter().map(|r| &r.result.profile).collect();
    checks.push(pointwise(&profiles, cfg));
    Ok(SuiteReport {
        suite: Suite::Sweep,
        checks,
    })
}

/// Positive mountain-pass gap at every scanned scale.
pub fn mp(cfg: &RunConfig) -> Result<SuiteReport, CliError> {
    let run = runs::mp_gap(cfg)?;
    let mut checks: Vec<Check> = run
        .rows
        .iter()
        .map(|(eps, m)| Check::at_least(format!("gap(eps={eps:e})"), m.gap, f64::MIN_POSITIVE))
        .collect();
    if let Some(fit) = &run.gap_fit {
        checks.push(Check::info("gap_exponent", fit.fitted_exponent));
    }
    Ok(SuiteReport {
        suite: Suite::Mp,
        checks,
    })
}

pub fn ncs(cfg: &RunConfig, grid: &Arc<Grid>) -> Result<SuiteReport, CliError> {
    let run = runs::ncs(cfg, grid)?;
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let profiles: Vec<_> = run.profiles.iter().collect();
    Ok(SuiteReport {
        suite: Suite::Ncs,
        checks: vec![
            Check::at_most(
                "norm_error",
                run.report.norm_error,
                loghardy_core::analysis::NCS_NORM_TOL,
            ),
            Check::at_least("tails_vanish", flag(run.report.tails_vanish), 1.0),
            Check::at_least("lp_norms_vanish", flag(run.report.lp_vanish), 1.0),
            Check::at_most("max_J_eps_le_1e-3", run.level.max_j, run.level.bound),
            pointwise(&profiles, cfg),
        ],
    })
}

pub fn orlicz(cfg: &RunConfig, grid: &Arc<Grid>) -> Result<SuiteReport, CliError> {
    let run = runs::orlicz(cfg, grid)?;
    let mut checks = Vec::new();
    for row in &run.convexity {
        let s = &row.spec;
        checks.push(Check::at_least(
            format!(
                "convexity_min_scaled_second_difference(a={},b={},tau={})",
                s.a(),
                s.b(),
                s.tau()
            ),
            row.report.min_scaled_second_difference,
            -CONVEXITY_TOL,
        ));
        checks.push(Check::at_least(
            format!(
                "phi_tau_min_over_bound(a={},b={},tau={})",
                s.a(),
                s.b(),
                s.tau()
            ),
            row.report.min_phi / row.report.phi_bound,
            1.0 - 1e-12,
        ));
    }
    checks.push(Check::at_most(
        "luxemburg_modular_residual",
        run.max_modular_residual,
        LUXEMBURG_TOL,
    ));
    checks.push(Check::at_most(
        "luxemburg_homogeneity_rel_error",
        run.max_homogeneity_error,
        1e-10,
    ));
    checks.push(Check::info("lambda0", run.embedding.lambda0));
    let worst_ratio = run
        .embedding
        .rows
        .iter()
        .map(|r| r.ratio)
        .fold(0.0, f64::max);
    checks.push(Check::at_most(
        "max_luxemburg_over_dirichlet",
        worst_ratio,
        run.embedding.lambda0,
    ));
    let profiles: Vec<_> = run.profiles.iter().collect();
    checks.push(pointwise(&profiles, cfg));
    Ok(SuiteReport {
        suite: Suite::Orlicz,
        checks,
    })
}

pub fn run(suite: Suite, cfg: &RunConfig, grid: &Arc<Grid>) -> Result<SuiteReport, CliError> {
    match suite {
        Suite::Bliss => bliss(cfg),
        Suite::Rates => rates(cfg),
        Suite::Sweep => sweep(cfg, grid),
        Suite::Mp => mp(cfg),
        Suite::Ncs => ncs(cfg, grid),
        Suite::Orlicz => orlicz(cfg, grid),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!(Suite::parse_list("all").unwrap().len(), 6);
        assert!(Suite::parse_list("shoot").is_err());
        assert_eq!(
            Suite::parse_list("mp, bliss,mp").unwrap(),
            vec![Suite::Mp, Suite::Bliss]
        );
    }

    #[test]
    fn check_relations() {
        assert_eq!(Check::at_most("a", 1.0, 2.0).pass(), Some(true));
        assert_eq!(Check::at_least("a", 1.0, 2.0).pass(), Some(false));
        assert_eq!(Check::at_most("a", f64::NAN, 2.0).pass(), Some(false));
        assert_eq!(Check::info("a", 1.0).pass(), None);
        let r = SuiteReport {
            suite: Suite::Mp,
            checks: vec![Check::info("x", 3.0), Check::at_most("y", 0.0, 1.0)],
        };
        assert!(r.passed());
        assert!(Check::at_most("y", 2.0, 1.0)
            .summary(Suite::Mp)
            .starts_with("FAIL mp/y"));
    }

    #[test]
    fn bliss_suite_passes_on_p0() {
        let r = bliss(&RunConfig::default()).unwrap();
        assert!(r.passed(), "{:?}", r.checks);
    }
}
