//! One function per subcommand: run the computation, return the table(s)
//! it writes and the profiles it produced.

use std::sync::Arc;

use loghardy_core::analysis::{
    self, bubble_lower_bound, maximize_f, mountain_pass_gap, ncs_check, normalized_bubbles,
    rate_fit, MaximizeResult, MountainPass, NcsReport, RateModel, RateTable,
};
use loghardy_core::bliss::{
    self, bubble_norm_scan, compute_s, concentration_e_bubble, BubbleSpec, ConstantsReport,
};
use loghardy_core::functionals::{self, LogParams};
use loghardy_core::orlicz::{self, EmbeddingReport, GammaSpec};
use loghardy_core::params::check_identities;
use loghardy_core::radial::{self, pointwise_bound_check};
use loghardy_core::shooting::{self, IvpOptions, ShootResult};
use loghardy_core::{Grid, ParamSet, Profile};
use rayon::prelude::*;

use crate::table::{fmt_f64, Cell, Table};
use crate::{random, CliError, RunConfig};

/// Radii at which the NCS tail energies are measured.
pub const NCS_RADII: [f64; 3] = [0.1, 0.2, 0.4];
/// Tail energy below which a family counts as concentrated.
pub const NCS_TAIL_TOL: f64 = 1e-3;
/// Bubble scales at or below which the concentration level is compared.
pub const LEVEL_EPS_MAX: f64 = 1e-3;
/// Lowest allowed pointwise-bound slack.
pub const POINTWISE_FLOOR: f64 = -1e-12;

/// `S_power` from the Beta-function closed form.
pub fn s_power_closed_form(ps: &ParamSet) -> f64 {
    let dc = ps.derived();
    let a = (ps.theta() + 1.0) / dc.n;
    let b = dc.p_star / dc.m - a;
    let ln_beta = libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b);
    dc.c_hat.powf(dc.p_star) / dc.n * ln_beta.exp()
}

pub struct ConstantsRun {
    pub report: ConstantsReport,
    pub identity_residual: f64,
    pub identity_pass: bool,
    pub s_power_closed: f64,
    pub table: Table,
}

pub fn constants(cfg: &RunConfig) -> Result<ConstantsRun, CliError> {
    let ps = cfg.params;
    let dc = ps.derived();
    let report = compute_s(&dc)?;
    let ids = check_identities(&dc);
    let closed = s_power_closed_form(&ps);
    let mut table = Table::new(&["name", "value"]);
    let rows: [(&str, f64); 19] = [
        ("p", ps.p()),
        ("alpha0", ps.alpha0()),
        ("alpha1", ps.alpha1()),
        ("theta", ps.theta()),
        ("p_star", dc.p_star),
        ("s", dc.s),
        ("n", dc.n),
        ("m", dc.m),
        ("c_hat", dc.c_hat),
        ("kappa", dc.kappa),
        ("beta_max", dc.beta_max),
        ("identity_residual", ids.residual),
        ("s_power", report.s_power),
        ("s_power_closed_form", closed),
        ("pstar_integral", report.pstar_integral),
        ("gradient_integral", report.gradient_integral),
        ("sigma_p", report.sigma_p),
        ("best_constant_s", report.s),
        (
            "mountain_pass_threshold",
            report.mountain_pass_threshold(&ps),
        ),
    ];
    for (k, v) in rows {
        table.push(vec![k.into(), v.into()]);
    }
    Ok(ConstantsRun {
        report,
        identity_residual: ids.residual,
        identity_pass: ids.pass,
        s_power_closed: closed,
        table,
    })
}

/// Metadata lines attached to every maximizer output.
pub fn maximizer_metadata(
    cfg: &RunConfig,
    r: &MaximizeResult,
    sigma_p: f64,
) -> Vec<(&'static str, String)> {
    vec![
        ("tau", fmt_f64(cfg.tau)),
        ("beta", fmt_f64(cfg.beta)),
        ("grid_m", cfg.grid_m.to_string()),
        ("grid_gamma", fmt_f64(cfg.grid_gamma)),
        ("value", fmt_f64(r.value)),
        ("sigma_p", fmt_f64(sigma_p)),
        ("value_minus_sigma_p", fmt_f64(r.value - sigma_p)),
        ("iterations", r.iterations.to_string()),
        ("converged", r.converged.to_string()),
        ("seed_epsilon", fmt_f64(r.seed_eps)),
        (
            "search_space",
            "nonnegative profiles (values clipped at 0)".to_string(),
        ),
    ]
}

pub struct MaximizeRun {
    pub result: MaximizeResult,
    pub sigma_p: f64,
    pub bubble_bound: f64,
}

pub fn maximize(cfg: &RunConfig, grid: &Arc<Grid>) -> Result<MaximizeRun, CliError> {
    let lp = cfg.log_params()?;
    let sigma_p = compute_s(&cfg.params.derived())?.sigma_p;
    let result = maximize_f(&cfg.params, &lp, grid, &cfg.maximize_options())?;
    let bubble_bound =
        bubble_lower_bound(&cfg.params, &lp, &cfg.maximize_options().seed_eps, grid)?.best_value;
    Ok(MaximizeRun {
        result,
        sigma_p,
        bubble_bound,
    })
}

pub struct SweepRow {
    pub beta: f64,
    pub result: MaximizeResult,
    pub bubble_bound: f64,
    pub gap_to_sigma: f64,
}

pub struct SweepRun {
    pub rows: Vec<SweepRow>,
    pub sigma_p: f64,
    pub table: Table,
}

/// The beta sweep, one task per beta, collected in input order.
pub fn sweep(cfg: &RunConfig, grid: &Arc<Grid>) -> Result<SweepRun, CliError> {
    let ps = cfg.params;
    let sigma_p = compute_s(&ps.derived())?.sigma_p;
    let opts = cfg.maximize_options();
    let rows = cfg
        .beta_list
        .par_iter()
        .map(|&beta| -> Result<SweepRow, CliError> {
            let lp = LogParams::new(cfg.tau, beta)?;
            let result = maximize_f(&ps, &lp, grid, &opts)?;
            let bubble_bound = bubble_lower_bound(&ps, &lp, &opts.seed_eps, grid)?.best_value;
            Ok(SweepRow {
                beta,
                gap_to_sigma: (result.value - sigma_p).abs(),
                result,
                bubble_bound,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["beta", "F_hat", "gap_to_sigma"]);
    for r in &rows {
        table.push(vec![
            r.beta.into(),
            r.result.value.into(),
            r.gap_to_sigma.into(),
        ]);
    }
    Ok(SweepRun {
        rows,
        sigma_p,
        table,
    })
}

pub fn rate_table(t: &RateTable) -> Table {
    let mut table = Table::new(&["epsilon", "value", "model", "fitted_exponent", "residual"]);
    for (&e, &v) in t.abscissae.iter().zip(&t.ordinates) {
        table.push(vec![
            e.into(),
            v.into(),
            t.model.name().into(),
            t.fitted_exponent.into(),
            t.fit_residual.into(),
        ]);
    }
    table
}

pub struct RatesRun {
    pub dirichlet: RateTable,
    pub lpstar: RateTable,
    /// `E_1(0, 1)` of the unit-amplitude bubble at the configured `(tau, beta)`.
    pub concentration: RateTable,
}

pub fn rates(cfg: &RunConfig) -> Result<RatesRun, CliError> {
    let dc = cfg.params.derived();
    let lp = cfg.log_params()?;
    let template = BubbleSpec::new(cfg.epsilon_list[0], 1.0, bliss::Cutoff::DEFAULT_R0)?;
    let scan = bubble_norm_scan(&cfg.epsilon_list, &template, None, &dc)?;
    let e_values = cfg
        .epsilon_list
        .par_iter()
        .map(|&eps| concentration_e_bubble(0.0, 1.0, &template.with_epsilon(eps)?, 1.0, &lp, &dc))
        .collect::<Result<Vec<_>, _>>()?;
    let concentration = rate_fit(&cfg.epsilon_list, &e_values, RateModel::PowerTimesLogLog)?;
    Ok(RatesRun {
        dirichlet: scan.dirichlet,
        lpstar: scan.lpstar,
        concentration,
    })
}

pub struct MpRun {
    pub rows: Vec<(f64, MountainPass)>,
    /// Log-log fit of the gap over the scan, when every gap is positive.
    pub gap_fit: Option<RateTable>,
    pub table: Table,
}

pub fn mp_gap(cfg: &RunConfig) -> Result<MpRun, CliError> {
    let ps = cfg.params;
    let lp = cfg.log_params()?;
    let consts = compute_s(&ps.derived())?;
    let rows = cfg
        .mp_epsilon_list
        .par_iter()
        .map(|&eps| -> Result<(f64, MountainPass), CliError> {
            let spec = BubbleSpec::normalized(eps, &consts, &ps)?;
            Ok((eps, mountain_pass_gap(&spec, &lp, &ps)?))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["epsilon", "max_I", "threshold", "gap"]);
    for (eps, mp) in &rows {
        table.push(vec![
            (*eps).into(),
            mp.max_energy.into(),
            mp.threshold.into(),
            mp.gap.into(),
        ]);
    }
    let eps: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let gaps: Vec<f64> = rows.iter().map(|r| r.1.gap).collect();
    let gap_fit = rate_fit(&eps, &gaps, RateModel::PowerTimesLogLog).ok();
    Ok(MpRun {
        rows,
        gap_fit,
        table,
    })
}

pub struct ShootRun {
    pub bracket: (f64, f64),
    pub result: ShootResult,
    pub in_regime: bool,
}

/// Amplitudes sampled when looking for a bracket.
pub const BRACKET_POINTS: usize = 31;
/// Bisection stops once `|u(1)|` is this small.
pub const SHOOT_TOL: f64 = 1e-10;

pub fn shoot(cfg: &RunConfig, grid: &Arc<Grid>) -> Result<ShootRun, CliError> {
    if cfg.tau < 1.0 {
        return Err(CliError::Config("tau must be >= 1 for the BVP".into()));
    }
    let lp = cfg.log_params()?;
    let ps = cfg.params;
    let in_regime = cfg.beta < ps.derived().beta_max;
    let opts = IvpOptions::default();
    let bracket = shooting::find_bracket(&lp, &ps, &opts, cfg.amp_lo, cfg.amp_hi, BRACKET_POINTS)?;
    let result = shooting::shoot(&lp, &ps, bracket, SHOOT_TOL, &opts, grid)?;
    Ok(ShootRun {
        bracket,
        result,
        in_regime,
    })
}

pub fn shoot_metadata(run: &ShootRun) -> Vec<(&'static str, String)> {
    let r = &run.result;
    vec![
        ("amplitude", fmt_f64(r.amplitude)),
        ("bracket_lo", fmt_f64(run.bracket.0)),
        ("bracket_hi", fmt_f64(run.bracket.1)),
        ("boundary_residual", fmt_f64(r.boundary_residual)),
        ("weak_residual", fmt_f64(r.weak_residual)),
        ("weak_tests", shooting::DEFAULT_TESTS.to_string()),
        ("bisections", r.bisections.to_string()),
        ("ode_steps", r.ode_steps.to_string()),
        ("existence_regime", run.in_regime.to_string()),
    ]
}

pub struct NcsRun {
    pub eps: Vec<f64>,
    pub profiles: Vec<Profile>,
    pub report: NcsReport,
    pub level: analysis::LevelReport,
    pub sigma_p: f64,
    pub table: Table,
}

/// Normalized bubbles over the scan: the NCS report for the whole family and
/// the level check for the scales at or below [`LEVEL_EPS_MAX`].
pub fn ncs(cfg: &RunConfig, grid: &Arc<Grid>) -> Result<NcsRun, CliError> {
    let ps = cfg.params;
    let dc = ps.derived();
    let lp = cfg.log_params()?;
    let consts = compute_s(&dc)?;
    let (eps, profiles): (Vec<f64>, Vec<Profile>) =
        normalized_bubbles(&cfg.epsilon_list, grid, &dc, &consts)?
            .into_iter()
            .unzip();
    if profiles.len() < 3 {
        return Err(CliError::Config(
            "NCS check needs at least 3 bubble scales the grid resolves".into(),
        ));
    }
    let report = ncs_check(&profiles, &ps, &NCS_RADII, NCS_TAIL_TOL)?;
    let small: Vec<Profile> = eps
        .iter()
        .zip(&profiles)
        .filter(|(&e, _)| e <= LEVEL_EPS_MAX)
        .map(|(_, u)| u.clone())
        .collect();
    let level = analysis::concentration_level_check(
        &small,
        &lp,
        &ps,
        consts.sigma_p,
        cfg.tolerances.level,
        &report,
    );
    let mut header = vec!["epsilon", "dirichlet_norm"];
    let tail_names: Vec<String> = NCS_RADII.iter().map(|r| format!("tail_{r}")).collect();
    header.extend(tail_names.iter().map(String::as_str));
    header.extend(["lp_norm", "J"]);
    let mut table = Table::new(&header);
    for (j, (e, u)) in eps.iter().zip(&profiles).enumerate() {
        let mut row: Vec<Cell> = vec![(*e).into(), radial::dirichlet_norm(u, &ps).into()];
        row.extend(report.tails.iter().map(|t| Cell::from(t[j])));
        row.push(report.lp_norms[j].into());
        row.push(functionals::j_functional(u, &lp, &ps).into());
        table.push(row);
    }
    Ok(NcsRun {
        eps,
        profiles,
        report,
        level,
        sigma_p: consts.sigma_p,
        table,
    })
}

pub struct ConvexityRow {
    pub spec: GammaSpec,
    pub report: orlicz::ConvexityReport,
}

pub struct OrliczRun {
    pub convexity: Vec<ConvexityRow>,
    pub f_hat: f64,
    pub embedding: EmbeddingReport,
    /// Largest `|rho(u / ||u||_lux) - 1|` over the nonzero profiles.
    pub max_modular_residual: f64,
    /// Largest relative `| ||c u||_lux - |c| ||u||_lux |`.
    pub max_homogeneity_error: f64,
    pub profiles: Vec<Profile>,
    pub table: Table,
}

/// Young functions checked for convexity: `(p*, 1, tau)` and `(p* + 1.5, 0.5, 2)`.
pub fn gamma_specs(cfg: &RunConfig) -> Result<Vec<GammaSpec>, CliError> {
    let q = cfg.params.p_star();
    Ok(vec![
        GammaSpec::new(q, 1.0, cfg.tau.max(1.0))?,
        GammaSpec::new(q + 1.5, 0.5, 2.0)?,
    ])
}

/// Profiles and scale factors used for the homogeneity check.
const HOMOGENEITY_PROFILES: usize = 10;
const HOMOGENEITY_SCALES: [f64; 3] = [0.1, 3.0, -2.0];

pub fn orlicz(cfg: &RunConfig, grid: &Arc<Grid>) -> Result<OrliczRun, CliError> {
    let ps = cfg.params;
    let dc = ps.derived();
    let lp = cfg.log_params()?;
    let t_grid = orlicz::log_grid(1e-6, 1e6, 50);
    let convexity = gamma_specs(cfg)?
        .into_iter()
        .map(|spec| {
            Ok(ConvexityRow {
                report: orlicz::convexity_check(&spec, &t_grid)?,
                spec,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let f_hat = maximize_f(&ps, &lp, grid, &cfg.maximize_options())?.value;
    let lambda0 = orlicz::embedding_constant(f_hat, &ps);
    let consts = compute_s(&dc)?;
    let mut profiles = random::random_profiles(cfg.seed, cfg.random_profiles, grid);
    profiles.extend(
        normalized_bubbles(&cfg.epsilon_list, grid, &dc, &consts)?
            .into_iter()
            .map(|(_, u)| u),
    );
    let embedding = orlicz::embedding_check(&profiles, &lp, &ps, lambda0)?;
    let max_modular_residual = profiles
        .par_iter()
        .zip(&embedding.rows)
        .filter(|(_, row)| row.luxemburg > 0.0)
        .map(|(u, row)| (orlicz::modular(u, row.luxemburg, &lp, &ps) - 1.0).abs())
        .reduce(|| 0.0, f64::max);
    let max_homogeneity_error = profiles
        .par_iter()
        .zip(&embedding.rows)
        .take(HOMOGENEITY_PROFILES)
        .map(|(u, row)| -> Result<f64, CliError> {
            let mut worst = 0.0f64;
            for c in HOMOGENEITY_SCALES {
                let scaled = orlicz::luxemburg_norm(&u.scaled(c), &lp, &ps)?;
                let expect = c.abs() * row.luxemburg;
                if expect > 0.0 {
                    worst = worst.max((scaled - expect).abs() / expect);
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut table = Table::new(&["profile_id", "luxemburg", "dirichlet", "ratio", "pass"]);
    for (i, row) in embedding.rows.iter().enumerate() {
        table.push(vec![
            i.into(),
            row.luxemburg.into(),
            row.dirichlet.into(),
            row.ratio.into(),
            row.pass.into(),
        ]);
    }
    Ok(OrliczRun {
        convexity,
        f_hat,
        embedding,
        max_modular_residual,
        max_homogeneity_error,
        profiles,
        table,
    })
}

/// Smallest pointwise-bound slack over `profiles` (infinity when empty).
pub fn min_pointwise_slack<'a>(
    profiles: impl IntoIterator<Item = &'a Profile>,
    ps: &ParamSet,
) -> f64 {
    profiles
        .into_iter()
        .map(|u| pointwise_bound_check(u, ps).min_slack)
        .fold(f64::INFINITY, f64::min)
}
