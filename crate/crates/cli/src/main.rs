use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use loghardy::runs;
use loghardy::suites::{self, Suite};
use loghardy::table::{self, fmt_f64};
use loghardy::{CliError, RunConfig};

/// Numerical checks for log-perturbed weighted Sobolev inequalities.
#[derive(Debug, Parser)]
#[command(name = "loghardy", version)]
struct Cli {
    /// Flat key = value configuration file; defaults are used when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` from the config).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps; 0 lets the pool decide.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derived constants, S_power and Sigma_p.
    Constants,
    /// Run verification suites and exit nonzero if any check fails.
    Verify {
        /// Comma-separated suites: bliss, rates, sweep, mp, ncs, orlicz or all.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Maximize the log-perturbed functional on the unit sphere.
    Maximize,
    /// Maximize for every entry of `beta_list`.
    SweepBeta,
    /// Bubble norm deviations and concentration rates with exponent fits.
    Rates,
    /// Upper bounds for the mountain-pass level along bubble rays.
    MpGap,
    /// Solve the radial boundary-value problem by shooting.
    Shoot,
    /// Convexity of the Young functions and the Luxemburg embedding.
    Orlicz,
    /// Concentration checks on the normalized bubble family.
    Ncs,
}

fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if cli.threads > 0 {
        // Only fails if a global pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    std::fs::create_dir_all(&cfg.output_dir)?;
    let dir = cfg.output_dir.clone();
    match cli.command {
        Command::Constants => {
            let c = runs::constants(&cfg)?;
            for row in c.table.rows() {
                if let [table::Cell::Text(k), table::Cell::Num(v)] = row.as_slice() {
                    println!("{k} = {}", fmt_f64(*v));
                }
            }
            c.table.write(&out_path(&dir, "constants.csv"))?;
        }
        Command::Verify { suite } => {
            let list = Suite::parse_list(&suite)?;
            let grid = cfg.grid()?;
            let mut failed = Vec::new();
            for s in list {
                let report = suites::run(s, &cfg, &grid)?;
                for c in &report.checks {
                    println!("{}", c.summary(s));
                }
                report
                    .table()
                    .write(&out_path(&dir, &format!("verify_{s}.csv")))?;
                let ok = report.passed();
                println!("suite {s}: {}", if ok { "PASS" } else { "FAIL" });
                if !ok {
                    failed.push(s.name());
                }
            }
            if !failed.is_empty() {
                return Err(CliError::ChecksFailed(format!(
                    "failed suites: {}",
                    failed.join(", ")
                )));
            }
        }
        Command::Maximize => {
            let grid = cfg.grid()?;
            let m = runs::maximize(&cfg, &grid)?;
            let mut meta = runs::maximizer_metadata(&cfg, &m.result, m.sigma_p);
            meta.push(("bubble_lower_bound", fmt_f64(m.bubble_bound)));
            for (k, v) in &meta {
                println!("{k} = {v}");
            }
            table::write_profile(&out_path(&dir, "maximizer.csv"), &m.result.profile)?;
            table::write_metadata(&out_path(&dir, "maximizer_meta.txt"), &meta)?;
        }
        Command::SweepBeta => {
            let grid = cfg.grid()?;
            let s = runs::sweep(&cfg, &grid)?;
            println!("sigma_p = {}", fmt_f64(s.sigma_p));
            for r in &s.rows {
                println!(
                    "beta {}: F_hat {} gap {} iterations {} converged {}",
                    fmt_f64(r.beta),
                    fmt_f64(r.result.value),
                    fmt_f64(r.gap_to_sigma),
                    r.result.iterations,
                    r.result.converged
                );
            }
            s.table.write(&out_path(&dir, "beta_sweep.csv"))?;
        }
        Command::Rates => {
            let r = runs::rates(&cfg)?;
            for (name, t) in [
                ("dirichlet", &r.dirichlet),
                ("lpstar", &r.lpstar),
                ("concentration", &r.concentration),
            ] {
                println!(
                    "{name}: exponent {} ({}, residual {})",
                    fmt_f64(t.fitted_exponent),
                    t.model.name(),
                    fmt_f64(t.fit_residual)
                );
                runs::rate_table(t).write(&out_path(&dir, &format!("rates_{name}.csv")))?;
            }
        }
        Command::MpGap => {
            let m = runs::mp_gap(&cfg)?;
            for (eps, mp) in &m.rows {
                println!(
                    "eps {}: c_MP upper bound {} threshold {} gap {}",
                    fmt_f64(*eps),
                    fmt_f64(mp.max_energy),
                    fmt_f64(mp.threshold),
                    fmt_f64(mp.gap)
                );
            }
            if let Some(fit) = &m.gap_fit {
                println!(
                    "gap exponent {} ({})",
                    fmt_f64(fit.fitted_exponent),
                    fit.model.name()
                );
            }
            m.table.write(&out_path(&dir, "mp_gap.csv"))?;
        }
        Command::Shoot => {
            if cfg.beta >= cfg.params.derived().beta_max {
                eprintln!(
                    "warning: beta >= beta_max is outside existence regime; attempting anyway"
                );
            }
            let grid = cfg.grid()?;
            let s = runs::shoot(&cfg, &grid)?;
            let meta = runs::shoot_metadata(&s);
            for (k, v) in &meta {
                println!("{k} = {v}");
            }
            table::write_profile(&out_path(&dir, "solution.csv"), &s.result.profile)?;
            table::write_metadata(&out_path(&dir, "shoot_meta.txt"), &meta)?;
            if !(s.result.boundary_residual < cfg.tolerances.boundary) {
                return Err(CliError::ChecksFailed(format!(
                    "boundary residual {} exceeds {}",
                    fmt_f64(s.result.boundary_residual),
                    fmt_f64(cfg.tolerances.boundary)
                )));
            }
        }
        Command::Orlicz => {
            let grid = cfg.grid()?;
            let o = runs::orlicz(&cfg, &grid)?;
            for row in &o.convexity {
                println!(
                    "Gamma(a={}, b={}, tau={}): min scaled second difference {} convex {}",
                    row.spec.a(),
                    row.spec.b(),
                    row.spec.tau(),
                    fmt_f64(row.report.min_scaled_second_difference),
                    row.report.convex
                );
            }
            println!("F_hat = {}", fmt_f64(o.f_hat));
            println!("lambda0 = {}", fmt_f64(o.embedding.lambda0));
            println!("embedding pass = {}", o.embedding.pass);
            o.table.write(&out_path(&dir, "orlicz.csv"))?;
        }
        Command::Ncs => {
            let grid = cfg.grid()?;
            let n = runs::ncs(&cfg, &grid)?;
            println!("normalized = {}", n.report.normalized);
            println!("tails_vanish = {}", n.report.tails_vanish);
            println!("lp_vanish = {}", n.report.lp_vanish);
            println!("is_ncs = {}", n.report.is_ncs);
            println!("sigma_p = {}", fmt_f64(n.sigma_p));
            if n.level.applicable {
                println!(
                    "max J (eps <= {}) = {} bound {} pass {}",
                    fmt_f64(runs::LEVEL_EPS_MAX),
                    fmt_f64(n.level.max_j),
                    fmt_f64(n.level.bound),
                    n.level.pass
                );
            } else {
                println!("level check skipped: family is not concentrating");
            }
            n.table.write(&out_path(&dir, "ncs.csv"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
