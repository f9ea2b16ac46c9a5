//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are comma
//! separated. Unknown keys and repeated keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use loghardy_core::analysis::{default_eps_scan, MaximizeOptions};
use loghardy_core::functionals::LogParams;
use loghardy_core::radial::make_grid;
use loghardy_core::{Grid, ParamSet};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Relative agreement of the two Bliss integrals and the closed form.
    pub identity: f64,
    /// `|u(1)|` of the shooting solution.
    pub boundary: f64,
    /// Weak residual of the shooting solution.
    pub weak: f64,
    /// Slack above `Sigma_p` allowed by the concentration-level check.
    pub level: f64,
    /// Final `|F_hat - Sigma_p|` of the beta sweep.
    pub sweep_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-6,
            boundary: 1e-8,
            weak: 1e-4,
            level: 5e-3,
            sweep_gap: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ParamSet,
    pub tau: f64,
    pub beta: f64,
    pub grid_m: usize,
    pub grid_gamma: f64,
    /// Bubble scales for scans, rates and NCS families.
    pub epsilon_list: Vec<f64>,
    /// Bubble scales for the mountain-pass table.
    pub mp_epsilon_list: Vec<f64>,
    pub beta_list: Vec<f64>,
    pub tolerances: Tolerances,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub starts: usize,
    /// Seed for the random profiles of the Orlicz suite.
    pub seed: u64,
    pub random_profiles: usize,
    /// Amplitude range scanned for a shooting bracket.
    pub amp_lo: f64,
    pub amp_hi: f64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ParamSet::new(2.0, 2.0, 2.0, 2.0).expect("valid default"),
            tau: 1.0,
            beta: 0.5,
            grid_m: 4000,
            grid_gamma: 3.0,
            epsilon_list: default_eps_scan(),
            mp_epsilon_list: vec![1e-3, 1e-4, 1e-5, 1e-6, 1e-7],
            beta_list: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            tolerances: Tolerances::default(),
            max_iter: 5000,
            rel_tol: 1e-10,
            starts: 3,
            seed: 7,
            random_profiles: 100,
            amp_lo: 1.0,
            amp_hi: 1e3,
            output_dir: PathBuf::from("."),
        }
    }
}

const KEYS: &[&str] = &[
    "p",
    "alpha0",
    "alpha1",
    "theta",
    "tau",
    "beta",
    "grid_m",
    "grid_gamma",
    "epsilon_list",
    "mp_epsilon_list",
    "beta_list",
    "tol_identity",
    "tol_boundary",
    "tol_weak",
    "tol_level",
    "tol_sweep_gap",
    "max_iter",
    "rel_tol",
    "starts",
    "seed",
    "random_profiles",
    "amp_lo",
    "amp_hi",
    "output_dir",
];

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v
        .parse()
        .map_err(|_| invalid(format!("{key}: cannot parse '{v}' as a number")))?;
    if !x.is_finite() {
        return Err(invalid(format!("{key}: value must be finite")));
    }
    Ok(x)
}

fn parse_usize(key: &str, v: &str) -> Result<usize, CliError> {
    v.parse().map_err(|_| {
        invalid(format!(
            "{key}: cannot parse '{v}' as a nonnegative integer"
        ))
    })
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    let xs = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(key, s))
        .collect::<Result<Vec<_>, _>>()?;
    if xs.is_empty() {
        return Err(invalid(format!("{key}: list must be nonempty")));
    }
    Ok(xs)
}

impl RunConfig {
    /// Parses config text, starting from the defaults.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(invalid(format!("line {}: unknown key '{k}'", lineno + 1)));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(invalid(format!(
                    "line {}: key '{k}' given twice",
                    lineno + 1
                )));
            }
        }
        let mut cfg = Self::default();
        let (mut p, mut a0, mut a1, mut th) = (
            cfg.params.p(),
            cfg.params.alpha0(),
            cfg.params.alpha1(),
            cfg.params.theta(),
        );
        for (k, v) in &entries {
            let v = v.as_str();
            match k.as_str() {
                "p" => p = parse_f64(k, v)?,
                "alpha0" => a0 = parse_f64(k, v)?,
                "alpha1" => a1 = parse_f64(k, v)?,
                "theta" => th = parse_f64(k, v)?,
                "tau" => cfg.tau = parse_f64(k, v)?,
                "beta" => cfg.beta = parse_f64(k, v)?,
                "grid_m" => cfg.grid_m = parse_usize(k, v)?,
                "grid_gamma" => cfg.grid_gamma = parse_f64(k, v)?,
                "epsilon_list" => cfg.epsilon_list = parse_list(k, v)?,
                "mp_epsilon_list" => cfg.mp_epsilon_list = parse_list(k, v)?,
                "beta_list" => cfg.beta_list = parse_list(k, v)?,
                "tol_identity" => cfg.tolerances.identity = parse_f64(k, v)?,
                "tol_boundary" => cfg.tolerances.boundary = parse_f64(k, v)?,
                "tol_weak" => cfg.tolerances.weak = parse_f64(k, v)?,
                "tol_level" => cfg.tolerances.level = parse_f64(k, v)?,
                "tol_sweep_gap" => cfg.tolerances.sweep_gap = parse_f64(k, v)?,
                "max_iter" => cfg.max_iter = parse_usize(k, v)?,
                "rel_tol" => cfg.rel_tol = parse_f64(k, v)?,
                "starts" => cfg.starts = parse_usize(k, v)?,
                "seed" => {
                    cfg.seed = v
                        .parse()
                        .map_err(|_| invalid(format!("seed: cannot parse '{v}'")))?
                }
                "random_profiles" => cfg.random_profiles = parse_usize(k, v)?,
                "amp_lo" => cfg.amp_lo = parse_f64(k, v)?,
                "amp_hi" => cfg.amp_hi = parse_f64(k, v)?,
                "output_dir" => cfg.output_dir = PathBuf::from(v),
                _ => unreachable!("key list checked above"),
            }
        }
        cfg.params = ParamSet::new(p, a0, a1, th)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.tau > 0.0) {
            return Err(invalid("tau must be > 0"));
        }
        if !(self.beta > 0.0) {
            return Err(invalid("beta must be > 0"));
        }
        if self.grid_m < 2 || !(self.grid_gamma >= 1.0) {
            return Err(invalid("grid needs grid_m >= 2 and grid_gamma >= 1"));
        }
        for (name, list) in [
            ("epsilon_list", &self.epsilon_list),
            ("mp_epsilon_list", &self.mp_epsilon_list),
        ] {
            if list.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
                return Err(invalid(format!("{name}: entries must lie in (0, 1)")));
            }
            if list.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(invalid(format!("{name}: entries must decrease")));
            }
        }
        if self.beta_list.iter().any(|&b| !(b > 0.0))
            || self.beta_list.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(invalid(
                "beta_list: entries must be positive and increasing",
            ));
        }
        let t = &self.tolerances;
        if [
            t.identity,
            t.boundary,
            t.weak,
            t.level,
            t.sweep_gap,
            self.rel_tol,
        ]
        .iter()
        .any(|&x| !(x > 0.0))
        {
            return Err(invalid("tolerances must be > 0"));
        }
        if self.max_iter == 0 || self.starts == 0 {
            return Err(invalid("max_iter and starts must be >= 1"));
        }
        if !(self.amp_lo > 0.0 && self.amp_hi > self.amp_lo) {
            return Err(invalid("need 0 < amp_lo < amp_hi"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Arc<Grid>, CliError> {
        Ok(Arc::new(make_grid(self.grid_m, self.grid_gamma)?))
    }

    pub fn log_params(&self) -> Result<LogParams, CliError> {
        Ok(LogParams::new(self.tau, self.beta)?)
    }

    pub fn maximize_options(&self) -> MaximizeOptions {
        MaximizeOptions {
            max_iter: self.max_iter,
            rel_tol: self.rel_tol,
            starts: self.starts,
            ..MaximizeOptions::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn parses_values_and_lists() {
        let cfg = RunConfig::parse(
            "# P1\np = 3\nalpha0=2\nalpha1 = 4\ntheta = 4\n\nbeta_list = 1, 2,4\ngrid_m = 500\n",
        )
        .unwrap();
        assert_eq!(cfg.params.p_star(), 7.5);
        assert_eq!(cfg.beta_list, vec![1.0, 2.0, 4.0]);
        assert_eq!(cfg.grid_m, 500);
    }

    #[test]
    fn rejects_unknown_and_repeated_keys() {
        assert!(matches!(
            RunConfig::parse("tol_idenity = 1e-3"),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            RunConfig::parse("tau = 1\ntau = 2"),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            RunConfig::parse("tau 1"),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn invalid_params_name_the_inequality() {
        let err = RunConfig::parse("p = 2\nalpha0 = 0\nalpha1 = 0.5\ntheta = 2").unwrap_err();
        assert!(err.to_string().contains("alpha1-p+1 <= 0"), "{err}");
    }

    #[test]
    fn rejects_bad_lists() {
        assert!(RunConfig::parse("epsilon_list = 1e-3, 1e-2").is_err());
        assert!(RunConfig::parse("beta_list = ").is_err());
        assert!(RunConfig::parse("beta_list = 2, 1").is_err());
        assert!(RunConfig::parse("epsilon_list = 1e-3, x").is_err());
    }
}
