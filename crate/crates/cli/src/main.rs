use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use bundle_cert::closed_forms::{
    self, brev, cbar, opt_value, params_a, params_b, relaxed_optimum, RegimeAParams,
};
use bundle_cert::lp_oracle::{build_lp, oracle_report, solve_with, LpStatus, Solver};
use bundle_cert::mechanisms::{best_deterministic, best_full_bundle, best_symmetric_menu};
use bundle_cert::solutions::{DualVariant, SolutionPair};
use bundle_cert::sweep::{max_ratios, run_sweep, sweep_points, write_csv, SweepConfig};
use bundle_cert::verify::{full_verify, DEFAULT_GRID};
use bundle_cert::Regime;
use clap::{Parser, Subcommand, ValueEnum};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "bundle-cert",
    version,
    about = "Optimal two-item mechanisms on [c, c+1]^2"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regime and construction parameters at c.
    Params {
        #[arg(long, value_parser = offset, allow_negative_numbers = true)]
        c: f64,
        /// Tolerance for the parameter identities.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Build and verify the primal/dual pair at c.
    Verify {
        #[arg(long, value_parser = offset, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, value_enum, default_value_t = VariantArg::Standard)]
        variant: VariantArg,
        /// Samples per side of the verification grid.
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Build this regime's pair even outside its range.
        #[arg(long, value_enum)]
        force_regime: Option<RegimeArg>,
        /// Allowed distance of the objectives from the closed form.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Value of the relaxed program.
    Opt {
        #[arg(long, value_parser = offset, allow_negative_numbers = true)]
        c: f64,
    },
    /// Best full-bundling price and revenue.
    Brev {
        #[arg(long, value_parser = offset, allow_negative_numbers = true)]
        c: f64,
    },
    /// Best symmetric deterministic menu.
    Drev {
        #[arg(long, value_parser = offset, allow_negative_numbers = true)]
        c: f64,
    },
    /// Search symmetric randomized menus.
    MenuSearch {
        #[arg(long, value_parser = offset, allow_negative_numbers = true)]
        c: f64,
        /// Nontrivial options in the family (3 or 4).
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(3..=4))]
        k: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Solve the grid discretisation of the relaxed program.
    Lp {
        #[arg(long, value_parser = offset, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, default_value_t = 40, value_parser = clap::value_parser!(u64).range(4..))]
        n: u64,
        #[arg(long, value_enum, default_value_t = SolverArg::Network)]
        solver: SolverArg,
        /// Also write the instance in LP format.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Ratio sweep over c, written as CSV.
    Sweep {
        #[arg(long = "from", value_parser = offset, allow_negative_numbers = true)]
        from: f64,
        #[arg(long = "to", value_parser = offset, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
        /// Add an LP column at this grid resolution.
        #[arg(long)]
        with_lp: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VariantArg {
    Standard,
    Alt,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RegimeArg {
    A,
    B,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SolverArg {
    Network,
    Dense,
}

fn offset(s: &str) -> Result<f64, String> {
    let c: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !c.is_finite() || c < 0.0 {
        return Err(format!("c must be a finite number >= 0, got {s}"));
    }
    Ok(c)
}

/// Failure with a definite exit status.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure {
            code: EXIT_FAILURE,
            error,
        }
    }
}

fn usage(error: anyhow::Error) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    let mut out = std::io::stdout().lock();
    match command {
        Command::Params { c, tol } => {
            let regime = Regime::for_offset(c);
            writeln!(out, "c        {c:.9}").ok();
            writeln!(out, "regime   {regime}").ok();
            writeln!(out, "cbar     {:.9}", cbar()).ok();
            let mut ok = true;
            match regime {
                Regime::A => {
                    let a = params_a(c).map_err(anyhow::Error::from)?;
                    print_params_a(&mut out, &a);
                    let (r1, r2) = a.identity_residuals();
                    let chain = a.chain_holds(tol);
                    ok = r1.abs() <= tol && r2.abs() <= tol && chain;
                    writeln!(
                        out,
                        "check    r - q = d - c   {} ({r1:.2e})",
                        pass(r1.abs() <= tol)
                    )
                    .ok();
                    writeln!(
                        out,
                        "check    p = q + b       {} ({r2:.2e})",
                        pass(r2.abs() <= tol)
                    )
                    .ok();
                    writeln!(out, "check    ordering chain  {}", pass(chain)).ok();
                }
                Regime::B => {
                    let b = params_b(c).map_err(anyhow::Error::from)?;
                    for (name, v) in [("p", b.p), ("q", b.q), ("h", b.h)] {
                        writeln!(out, "{name:<8} {v:.9}").ok();
                    }
                }
            }
            Ok(if ok { 0 } else { EXIT_FAILURE })
        }
        Command::Verify {
            c,
            variant,
            grid,
            force_regime,
            tol,
        } => {
            let variant = match variant {
                VariantArg::Standard => DualVariant::Standard,
                VariantArg::Alt => DualVariant::Alternative,
            };
            if grid == 0 {
                return Err(usage(anyhow::anyhow!("--grid must be positive")));
            }
            let (pair, target) = match force_regime {
                Some(r) => {
                    let regime = match r {
                        RegimeArg::A => Regime::A,
                        RegimeArg::B => Regime::B,
                    };
                    (
                        SolutionPair::forced(c, regime, variant).map_err(anyhow::Error::from)?,
                        None,
                    )
                }
                None => {
                    let pair = SolutionPair::for_offset(c, variant)
                        .map_err(|e| usage(anyhow::Error::from(e)))?;
                    (pair, Some(relaxed_optimum(c).map_err(anyhow::Error::from)?))
                }
            };
            writeln!(out, "c                  {c:.9}").ok();
            writeln!(out, "regime             {} ({})", pair.regime, pair.variant).ok();
            let report = full_verify(&pair, grid);
            writeln!(out, "{report}").ok();
            let mut ok = report.certified();
            if let Some(t) = target {
                let close = (report.primal_objective - t).abs() <= tol
                    && (report.dual_objective - t).abs() <= tol;
                writeln!(out, "closed form        {t:.9} ({})", pass(close)).ok();
                ok &= close;
            }
            Ok(if ok { 0 } else { EXIT_FAILURE })
        }
        Command::Opt { c } => {
            let v = relaxed_optimum(c).map_err(anyhow::Error::from)?;
            let regime = Regime::for_offset(c);
            writeln!(out, "{v:.9}  (regime {regime})").ok();
            if regime == Regime::A {
                let gap = opt_value(c).map_err(anyhow::Error::from)?
                    - brev(c).map_err(anyhow::Error::from)?;
                writeln!(out, "excess over full bundling {gap:.3e}").ok();
            }
            Ok(0)
        }
        Command::Brev { c } => {
            let b = best_full_bundle(c).map_err(anyhow::Error::from)?;
            writeln!(out, "price    {:.9}", b.price).ok();
            writeln!(out, "revenue  {:.9}", b.revenue).ok();
            writeln!(
                out,
                "cubic    {:.3e}",
                closed_forms::bundle_foc_residual(b.price, c)
            )
            .ok();
            Ok(0)
        }
        Command::Drev { c } => {
            let d = best_deterministic(c);
            writeln!(out, "item price    {:.9}", d.item_price).ok();
            writeln!(out, "bundle price  {:.9}", d.bundle_price).ok();
            writeln!(out, "revenue       {:.9}", d.revenue).ok();
            Ok(0)
        }
        Command::MenuSearch { c, k, seed } => {
            let s = best_symmetric_menu(c, k as usize, seed).map_err(anyhow::Error::from)?;
            for o in s.menu.options() {
                writeln!(out, "option   ({:.6}, {:.6})  price {:.9}", o.a1, o.a2, o.t).ok();
            }
            writeln!(out, "revenue  {:.9}", s.revenue).ok();
            if let Ok(opt) = relaxed_optimum(c) {
                writeln!(out, "ratio    {:.9}", opt / s.revenue).ok();
            }
            Ok(0)
        }
        Command::Lp { c, n, solver, dump } => {
            let n = n as usize;
            let lp = build_lp(c, n).map_err(|e| usage(e.into()))?;
            if let Some(path) = dump {
                std::fs::write(&path, lp.to_lp_format())
                    .with_context(|| format!("cannot write {}", path.display()))
                    .map_err(usage)?;
            }
            let solver = match solver {
                SolverArg::Network => Solver::Network,
                SolverArg::Dense => Solver::Dense,
            };
            let s = solve_with(&lp, solver).map_err(anyhow::Error::from)?;
            writeln!(out, "status      {:?}", s.status).ok();
            writeln!(out, "value       {:.9}", s.value).ok();
            writeln!(out, "iterations  {}", s.iterations).ok();
            if let Ok(t) = relaxed_optimum(c) {
                writeln!(out, "continuum   {t:.9} (difference {:.3e})", s.value - t).ok();
            }
            if solver == Solver::Network {
                let rep = oracle_report(c, n).map_err(anyhow::Error::from)?;
                if let (Some(d), Some(won)) =
                    (rep.deterministic_revenue, rep.exceeds_deterministic())
                {
                    writeln!(
                        out,
                        "best deterministic {d:.9} (grid optimum exceeds it: {won})"
                    )
                    .ok();
                }
            }
            Ok(if s.status == LpStatus::Optimal {
                0
            } else {
                EXIT_FAILURE
            })
        }
        Command::Sweep {
            from,
            to,
            step,
            out: path,
            with_lp,
            seed,
        } => {
            let points = sweep_points(from, to, step).map_err(|e| usage(e.into()))?;
            if with_lp.is_some_and(|n| n < 4) {
                return Err(usage(anyhow::anyhow!(
                    "--with-lp needs a grid of at least 4"
                )));
            }
            let file = File::create(&path)
                .with_context(|| format!("cannot write {}", path.display()))
                .map_err(usage)?;
            let rows = run_sweep(
                &points,
                &SweepConfig {
                    seed,
                    lp_grid: with_lp,
                },
            )
            .map_err(anyhow::Error::from)?;
            let mut w = BufWriter::new(file);
            write_csv(&rows, &mut w)
                .and_then(|_| w.flush())
                .with_context(|| format!("cannot write {}", path.display()))
                .map_err(usage)?;
            let (b, d, r) = max_ratios(&rows);
            writeln!(out, "rows             {}", rows.len()).ok();
            writeln!(out, "max ratio_bundle {b:.9}").ok();
            writeln!(out, "max ratio_det    {d:.9}").ok();
            writeln!(out, "max ratio_rand   {r:.9}").ok();
            Ok(0)
        }
    }
}

fn print_params_a(out: &mut impl Write, a: &RegimeAParams) {
    let rows = [
        ("q", a.q),
        ("p", a.p),
        ("h", a.h),
        ("b", a.b),
        ("r", a.r),
        ("d", a.d),
        ("c+1-r", a.phi_denominator),
    ];
    for (name, v) in rows {
        writeln!(out, "{name:<8} {v:.9}").ok();
    }
}
