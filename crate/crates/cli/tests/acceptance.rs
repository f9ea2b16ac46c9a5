//! Acceptance criteria, run as a plain binary so the per-criterion lines are
//! always printed. Exits nonzero when any criterion fails.

use std::f64::consts::{E, PI};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use loghardy::random;
use loghardy_core::analysis::{
    beta_sweep, bubble_lower_bound, concentration_level_check, default_eps_scan, maximize_f,
    mountain_pass_gap, ncs_check, normalized_bubbles, rate_fit, MaximizeOptions, RateModel,
};
use loghardy_core::bliss::{bubble_norm_scan, compute_s, concentration_e_bubble, BubbleSpec};
use loghardy_core::functionals::{energy_i, energy_pairing, LogParams};
use loghardy_core::orlicz::{self, GammaSpec};
use loghardy_core::radial::{make_grid, pointwise_bound_check};
use loghardy_core::shooting::{find_bracket, shoot, IvpOptions, DEFAULT_TESTS};
use loghardy_core::{Grid, ParamSet, Profile};

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn p0() -> ParamSet {
    ParamSet::new(2.0, 2.0, 2.0, 2.0).unwrap()
}

fn p1() -> ParamSet {
    ParamSet::new(3.0, 2.0, 4.0, 4.0).unwrap()
}

/// `10^-first, 3 10^-(first+1), 10^-(first+1), ..., 10^-last`.
fn half_decades(first: i32, last: i32) -> Vec<f64> {
    let mut out = Vec::new();
    for k in first..=last {
        let e = 10f64.powi(-k);
        out.push(e);
        if k < last {
            out.push(0.3 * e);
        }
    }
    out
}

/// Shared state: the scan grid, the `beta = 0.5` maximum and every profile
/// produced along the way (for the pointwise-bound criterion).
struct Ctx {
    grid: Arc<Grid>,
    sigma_p: f64,
    f_hat_half: Option<f64>,
    emitted: Vec<(&'static str, ParamSet, Profile)>,
}

impl Ctx {
    fn emit(&mut self, what: &'static str, ps: ParamSet, u: &Profile) {
        self.emitted.push((what, ps, u.clone()));
    }
}

fn c1_bliss_identity(_: &mut Ctx) -> Outcome {
    let start = Instant::now();
    let target = 3f64.powf(1.5) * PI / 16.0;
    let c0 = compute_s(&p0().derived()).unwrap();
    let e_pstar = rel(c0.pstar_integral, target);
    let e_grad = rel(c0.gradient_integral, target);
    let mut sets = vec![p1()];
    let mut rng = random::rng(2024);
    sets.extend((0..5).map(|_| random::random_params(&mut rng)));
    let worst_other = sets
        .iter()
        .map(|ps| compute_s(&ps.derived()).unwrap().integral_mismatch())
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: e_pstar <= 1e-6 && e_grad <= 1e-6 && worst_other <= 1e-6 && secs < 5.0,
        detail: format!(
            "P0 rel errors {e_pstar:.2e}/{e_grad:.2e} vs 3^(3/2)pi/16; P1 + 5 random worst mismatch {worst_other:.2e}; {secs:.2}s"
        ),
    }
}

fn c2_best_constant(ctx: &mut Ctx) -> Outcome {
    let target = 256.0 / (27.0 * PI * PI);
    let e = rel(ctx.sigma_p, target);
    Outcome {
        pass: e <= 1e-6,
        detail: format!(
            "Sigma_p = {:.9} vs 256/(27 pi^2) = {target:.9}, rel {e:.2e}",
            ctx.sigma_p
        ),
    }
}

fn c3_bubble_rates(ctx: &mut Ctx) -> Outcome {
    let ps = p0();
    let dc = ps.derived();
    let eps = half_decades(2, 5);
    let template = BubbleSpec::new(eps[0], 1.0, 0.2).unwrap();
    let scan = bubble_norm_scan(&eps, &template, Some(&ctx.grid), &dc).unwrap();
    for u in &scan.profiles {
        ctx.emit("bubble scan", ps, u);
    }
    let kd = scan.dirichlet.fitted_exponent;
    let kl = scan.lpstar.fitted_exponent;
    let (sp, sq) = (dc.s * ps.p(), dc.s * dc.p_star);
    Outcome {
        pass: rel(kd, sp) <= 0.10 && rel(kl, sq) <= 0.15,
        detail: format!("Dirichlet exponent {kd:.4} (sp = {sp}), L^p* exponent {kl:.4} (sp* = {sq}) over {} scales", eps.len()),
    }
}

fn c4_strict_inequality(ctx: &mut Ctx) -> Outcome {
    let ps = p0();
    let lp = LogParams::new(1.0, 0.5).unwrap();
    let r = maximize_f(&ps, &lp, &ctx.grid, &MaximizeOptions::default()).unwrap();
    ctx.emit("maximizer", ps, &r.profile);
    ctx.f_hat_half = Some(r.value);
    let strict = r.value >= ctx.sigma_p + 1e-3;
    let mut worst = f64::INFINITY;
    for beta in [0.3, 0.5, 0.8, 2.0, 8.0] {
        let b = bubble_lower_bound(
            &ps,
            &LogParams::new(1.0, beta).unwrap(),
            &default_eps_scan(),
            &ctx.grid,
        )
        .unwrap();
        ctx.emit("best bubble", ps, &b.best().profile);
        worst = worst.min(b.best_value - ctx.sigma_p);
    }
    Outcome {
        pass: strict && worst >= -1e-3,
        detail: format!(
            "F_hat(0.5) - Sigma_p = {:.4e} ({} iterations); min over beta of bubble bound - Sigma_p = {worst:.3e}",
            r.value - ctx.sigma_p,
            r.iterations
        ),
    }
}

fn c5_beta_sweep(ctx: &mut Ctx) -> Outcome {
    let ps = p0();
    let betas = [1.0, 2.0, 4.0, 8.0, 16.0];
    let rows = beta_sweep(&ps, 1.0, &betas, &ctx.grid, &MaximizeOptions::default()).unwrap();
    for r in &rows {
        ctx.emit("sweep maximizer", ps, &r.profile);
    }
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap_to_sigma).collect();
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
    let last = *gaps.last().unwrap();
    let listing: Vec<String> = rows
        .iter()
        .map(|r| format!("{}:{:.3e}", r.beta, r.f_hat - ctx.sigma_p))
        .collect();
    Outcome {
        pass: monotone && last < 0.01,
        detail: format!(
            "F_hat - Sigma_p by beta [{}]; |gap| nonincreasing: {monotone}; final |gap| {last:.3e}",
            listing.join(", ")
        ),
    }
}

fn c6_concentration_rate(_: &mut Ctx) -> Outcome {
    let ps = p0();
    let dc = ps.derived();
    let eps = half_decades(2, 6);
    let mut parts = Vec::new();
    let mut pass = true;
    for beta in [0.3, 0.5, 0.8] {
        let lp = LogParams::new(1.0, beta).unwrap();
        let values: Vec<f64> = eps
            .iter()
            .map(|&e| {
                concentration_e_bubble(
                    0.0,
                    1.0,
                    &BubbleSpec::new(e, 1.0, 0.2).unwrap(),
                    1.0,
                    &lp,
                    &dc,
                )
                .unwrap()
            })
            .collect();
        let k = rate_fit(&eps, &values, RateModel::PowerTimesLogLog)
            .unwrap()
            .fitted_exponent;
        pass &= rel(k, beta) <= 0.15;
        parts.push(format!("beta {beta}: {k:.4}"));
    }
    Outcome {
        pass,
        detail: format!("fitted exponents {}", parts.join(", ")),
    }
}

fn c7_mountain_pass(_: &mut Ctx) -> Outcome {
    let ps = p0();
    let lp = LogParams::new(1.0, 0.5).unwrap();
    let consts = compute_s(&ps.derived()).unwrap();
    let threshold = 3f64.sqrt() * PI / 16.0;
    let gap_at = |e: f64| {
        let mp =
            mountain_pass_gap(&BubbleSpec::normalized(e, &consts, &ps).unwrap(), &lp, &ps).unwrap();
        (mp.max_energy, threshold - mp.max_energy)
    };
    let mut below = true;
    let mut parts = Vec::new();
    for e in [1e-3, 1e-4, 1e-5] {
        let (m, g) = gap_at(e);
        below &= m < threshold;
        parts.push(format!("{e:e}: {g:.3e}"));
    }
    // The gap only follows its asymptotic law once the cutoff no longer
    // dominates, so the exponent is fitted on the small scales.
    let fit_eps = [1e-5, 3e-6, 1e-6, 3e-7, 1e-7];
    let gaps: Vec<f64> = fit_eps.iter().map(|&e| gap_at(e).1).collect();
    let k = rate_fit(&fit_eps, &gaps, RateModel::PowerTimesLogLog)
        .unwrap()
        .fitted_exponent;
    Outcome {
        pass: below && rel(k, 0.5) <= 0.20,
        detail: format!(
            "gaps below sqrt(3)pi/16 [{}]; gap exponent on eps 1e-5..1e-7: {k:.4} (beta 0.5)",
            parts.join(", ")
        ),
    }
}

fn c8_shooting(ctx: &mut Ctx) -> Outcome {
    let ps = p0();
    let lp = LogParams::new(1.0, 0.5).unwrap();
    let opts = IvpOptions::default();
    let bracket = find_bracket(&lp, &ps, &opts, 1.0, 1e3, 31).unwrap();
    let coarse = Arc::new(make_grid(2000, 3.0).unwrap());
    let rc = shoot(&lp, &ps, bracket, 1e-10, &opts, &coarse).unwrap();
    let rf = shoot(&lp, &ps, bracket, 1e-10, &opts, &ctx.grid).unwrap();
    ctx.emit("shooting", ps, &rc.profile);
    ctx.emit("shooting", ps, &rf.profile);
    let vals = rf.profile.values();
    let positive = vals[..vals.len() - 1].iter().all(|&v| v > 0.0);
    let halves = rf.weak_residual <= 0.5 * rc.weak_residual;
    Outcome {
        pass: rf.boundary_residual < 1e-8 && positive && rf.weak_residual < 1e-4 && halves,
        detail: format!(
            "u(0) = {:.8}, |u(1)| = {:.2e}, interior positive: {positive}, weak residual ({DEFAULT_TESTS} tests) M=2000 {:.3e} -> M=4000 {:.3e}",
            rf.amplitude, rf.boundary_residual, rc.weak_residual, rf.weak_residual
        ),
    }
}

fn c10_orlicz(ctx: &mut Ctx) -> Outcome {
    let t_grid = orlicz::log_grid(1e-6, 1e6, 50);
    let mut convex = true;
    let mut parts = Vec::new();
    for (a, b, tau) in [(6.0, 1.0, 1.0), (7.5, 0.5, 2.0)] {
        let r = orlicz::convexity_check(&GammaSpec::new(a, b, tau).unwrap(), &t_grid).unwrap();
        convex &= r.min_scaled_second_difference >= -1e-12;
        parts.push(format!(
            "({a},{b},{tau}) min {:.2e}",
            r.min_scaled_second_difference
        ));
    }
    let ps = p0();
    let dc = ps.derived();
    let lp = LogParams::new(1.0, 0.5).unwrap();
    let consts = compute_s(&dc).unwrap();
    let mut profiles = random::random_profiles(99, 100, &ctx.grid);
    profiles.extend(
        normalized_bubbles(&default_eps_scan(), &ctx.grid, &dc, &consts)
            .unwrap()
            .into_iter()
            .map(|x| x.1),
    );
    for u in &profiles {
        ctx.emit("orlicz profile", ps, u);
    }
    let f_hat = ctx.f_hat_half.expect("criterion 4 ran first");
    let lambda0 = orlicz::embedding_constant(f_hat, &ps);
    let report = orlicz::embedding_check(&profiles, &lp, &ps, lambda0).unwrap();
    let residual = profiles
        .iter()
        .zip(&report.rows)
        .map(|(u, row)| (orlicz::modular(u, row.luxemburg, &lp, &ps) - 1.0).abs())
        .fold(0.0, f64::max);
    let mut homogeneity = 0.0f64;
    for (u, row) in profiles.iter().zip(&report.rows).take(10) {
        for c in [0.1, 3.0, -2.0] {
            let scaled = orlicz::luxemburg_norm(&u.scaled(c), &lp, &ps).unwrap();
            homogeneity = homogeneity.max(rel(scaled, c.abs() * row.luxemburg));
        }
    }
    let worst_ratio = report.rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Outcome {
        pass: convex && residual < 1e-8 && homogeneity <= 1e-10 && report.pass,
        detail: format!(
            "convexity [{}]; modular residual {residual:.2e}; homogeneity {homogeneity:.2e}; max lux/dirichlet {worst_ratio:.4} <= lambda0 {lambda0:.4} on {} profiles",
            parts.join(", "),
            profiles.len()
        ),
    }
}

fn c11_gradient(_: &mut Ctx) -> Outcome {
    let sets = [p0(), p1(), ParamSet::new(2.5, 1.0, 2.0, 3.0).unwrap()];
    let grid = Arc::new(make_grid(200, 2.0).unwrap());
    let mut rng = random::rng(5);
    let mut worst = 0.0f64;
    for ps in sets {
        let lp = LogParams::new(1.0, 0.5).unwrap();
        for _ in 0..50 {
            let u = random::random_profile(&mut rng, &grid);
            let v = random::random_profile(&mut rng, &grid);
            // Central differences converge as h^2 here; 1e-4 leaves truncation
            // errors near 1e-2 on profiles with steep slopes.
            let h = 1e-6 * u.max_abs().max(1e-3) / v.max_abs().max(1e-300);
            let plus = energy_i(&u.axpy(h, &v), &lp, &ps).unwrap();
            let minus = energy_i(&u.axpy(-h, &v), &lp, &ps).unwrap();
            let fd = (plus - minus) / (2.0 * h);
            let an = energy_pairing(&u, &v, &lp, &ps).unwrap();
            worst = worst.max((fd - an).abs() / an.abs().max(fd.abs()));
        }
    }
    Outcome {
        pass: worst < 1e-5,
        detail: format!("worst relative error {worst:.2e} over 150 pairs"),
    }
}

fn c12_concentration_level(ctx: &mut Ctx) -> Outcome {
    let ps = p0();
    let dc = ps.derived();
    let consts = compute_s(&dc).unwrap();
    let (eps, profiles): (Vec<f64>, Vec<Profile>) =
        normalized_bubbles(&default_eps_scan(), &ctx.grid, &dc, &consts)
            .unwrap()
            .into_iter()
            .unzip();
    for u in &profiles {
        ctx.emit("normalized bubble", ps, u);
    }
    let ncs = ncs_check(&profiles, &ps, &[0.1, 0.2, 0.4], 1e-3).unwrap();
    let small: Vec<Profile> = eps
        .iter()
        .zip(&profiles)
        .filter(|(&e, _)| e <= 1e-3)
        .map(|(_, u)| u.clone())
        .collect();
    let mut pass = ncs.is_ncs;
    let mut parts = Vec::new();
    for (tau, beta) in [(1.0, 0.5), (E, 1.0)] {
        let lp = LogParams::new(tau, beta).unwrap();
        let level = concentration_level_check(&small, &lp, &ps, ctx.sigma_p, 5e-3, &ncs);
        pass &= level.pass;
        parts.push(format!(
            "(tau {tau:.4}, beta {beta}): max J - Sigma_p = {:.3e}",
            level.max_j - ctx.sigma_p
        ));
    }
    Outcome {
        pass,
        detail: format!("NCS {}; {} (bound 5e-3)", ncs.is_ncs, parts.join("; ")),
    }
}

fn c9_pointwise(ctx: &mut Ctx) -> Outcome {
    let mut worst = f64::INFINITY;
    let mut worst_what = "";
    for (what, ps, u) in &ctx.emitted {
        let s = pointwise_bound_check(u, ps).min_slack;
        if s < worst {
            worst = s;
            worst_what = what;
        }
    }
    Outcome {
        pass: worst >= -1e-12 && !ctx.emitted.is_empty(),
        detail: format!(
            "{} profiles, min slack {worst:.3e} ({worst_what})",
            ctx.emitted.len()
        ),
    }
}

type Criterion = (u8, &'static str, fn(&mut Ctx) -> Outcome);

fn main() -> ExitCode {
    let mut ctx = Ctx {
        grid: Arc::new(make_grid(4000, 3.0).unwrap()),
        sigma_p: compute_s(&p0().derived()).unwrap().sigma_p,
        f_hat_half: None,
        emitted: Vec::new(),
    };
    // Criterion 9 inspects what the others emitted, so it runs last.
    let criteria: [Criterion; 12] = [
        (1, "Bliss identity", c1_bliss_identity),
        (2, "best constant Sigma_p", c2_best_constant),
        (3, "bubble norm rates", c3_bubble_rates),
        (4, "strict inequality below beta_max", c4_strict_inequality),
        (5, "beta sweep toward Sigma_p", c5_beta_sweep),
        (6, "concentration rate", c6_concentration_rate),
        (7, "mountain-pass level gap", c7_mountain_pass),
        (8, "boundary-value problem by shooting", c8_shooting),
        (10, "Orlicz convexity and embedding", c10_orlicz),
        (11, "energy derivative vs finite differences", c11_gradient),
        (12, "concentration level", c12_concentration_level),
        (9, "pointwise bound on emitted profiles", c9_pointwise),
    ];
    let mut results = Vec::new();
    for (id, title, f) in criteria {
        let start = Instant::now();
        let o = f(&mut ctx);
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} [{tag}] {title}: {} ({:.1}s)",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        results.push((id, o.pass));
    }
    results.sort();
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.1)
        .map(|r| r.0.to_string())
        .collect();
    println!(
        "acceptance: {}/{} criteria pass{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {}", failed.join(", "))
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
