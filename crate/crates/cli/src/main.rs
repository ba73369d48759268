//! Command-line runner for the annulus Euler solver suite.
//!
//! Exit codes: 0 success, 2 configuration or artifact error, 3 solver
//! non-convergence, 4 pressure compatibility mismatch, 5 data-gate violation
//! (positivity, flux compatibility, monotonicity, through-flow or curl
//! defects).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use annulus_euler::config::{Method, RunConfig};
use annulus_euler::driver;
use annulus_euler::SolverError;

#[derive(Parser)]
#[command(name = "annulus-euler", version, about = "Steady incompressible Euler solvers on an annulus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for emitted fields and reports.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Grid override of the form NRxNT, e.g. 65x128.
    #[arg(long)]
    grid: Option<String>,
    /// Method override: grad_shafranov, vortex_transport or both.
    #[arg(long)]
    method: Option<String>,
    /// Suppress informational output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured boundary value problem and emit fields.
    Solve(CommonArgs),
    /// Re-read emitted fields and recompute the residuals.
    Verify {
        /// Directory holding u_r.csv, u_theta.csv, p.csv (and report.json).
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        quiet: bool,
    },
    /// Run the configured problem over a refinement ladder and fit orders.
    Converge {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated refinement levels, e.g. 33x64,65x128,129x256.
        #[arg(long)]
        levels: Option<String>,
    },
    /// Solve with both methods and report the cross-method gap.
    Compare(CommonArgs),
}

fn exit_code_for(err: &SolverError) -> u8 {
    match err {
        SolverError::Config(_)
        | SolverError::InvalidGrid(_)
        | SolverError::NonPeriodicData(_)
        | SolverError::SingularMode { .. }
        | SolverError::Io(_) => 2,
        SolverError::NoConvergence { .. } => 3,
        SolverError::CompatibilityMismatch { .. } => 4,
        SolverError::FluxMismatch { .. }
        | SolverError::NonPositiveThroughflow { .. }
        | SolverError::NonMonotoneDiffeo { .. }
        | SolverError::ThroughflowSignChange { .. }
        | SolverError::CurlDefect { .. }
        | SolverError::SeamMismatch { .. } => 5,
    }
}

fn load_config(args: &CommonArgs) -> Result<RunConfig, SolverError> {
    let text = fs::read_to_string(&args.config)?;
    let mut config = RunConfig::from_toml(&text)?;
    if let Some(spec) = &args.grid {
        config = config.with_grid_override(spec)?;
    }
    if let Some(m) = &args.method {
        config.method = match m.as_str() {
            "grad_shafranov" => Method::GradShafranov,
            "vortex_transport" => Method::VortexTransport,
            "both" => Method::Both,
            other => {
                return Err(SolverError::Config(format!("unknown method '{other}'")));
            }
        };
        config.validate()?;
    }
    Ok(config)
}

fn run_solve(args: &CommonArgs, force_both: bool) -> Result<u8, SolverError> {
    let mut config = load_config(args)?;
    if force_both {
        config.method = Method::Both;
        config.validate()?;
    }
    let outcome = driver::run(&config)?;
    driver::emit(&outcome, &args.out)?;
    let report = &outcome.report;
    if !args.quiet {
        println!(
            "{} via {}: converged={} iterations={} euler_residual_inf={:.3e} flux_defect={:.3e}",
            report.bc_kind,
            report.method,
            report.converged,
            report.iterations,
            report.euler_residual_inf,
            report.flux_defect
        );
        for (name, value) in &report.bc_residuals {
            println!("  {name}: {value:.3e}");
        }
        if let (Some(u), Some(p)) = (report.cross_method_gap_u, report.cross_method_gap_p) {
            println!("  cross_method_gap_u: {u:.3e}");
            println!("  cross_method_gap_p: {p:.3e}");
        }
        if let Some(gap) = report.compat_gap {
            println!(
                "  compatibility: {} (gap {gap:.3e})",
                if report.compat_ok == Some(true) { "ok" } else { "MISMATCH" }
            );
        }
        if report.smallness_warning {
            println!("  note: data lies outside the advisory smallness regime");
        }
        println!("  artifacts written to {}", args.out.display());
    }
    if outcome.compat_rejected() {
        return Ok(4);
    }
    Ok(0)
}

fn run_verify(out: &PathBuf, quiet: bool) -> Result<u8, SolverError> {
    let v = driver::verify_dir(out)?;
    if !quiet {
        println!(
            "residuals from {}: euler={:.3e} (r {:.3e}, theta {:.3e}, div {:.3e}) flux_defect={:.3e}",
            out.display(),
            v.euler_residual_inf,
            v.momentum_r_inf,
            v.momentum_theta_inf,
            v.divergence_inf,
            v.flux_defect
        );
        match v.round_trip_ok {
            Some(true) => println!("  report round-trip: ok (gap {:.3e})", v.report_gap.unwrap()),
            Some(false) => println!(
                "  report round-trip: MISMATCH (gap {:.3e})",
                v.report_gap.unwrap()
            ),
            None => println!("  no report.json found; residuals recomputed only"),
        }
    }
    if v.round_trip_ok == Some(false) {
        return Ok(2);
    }
    Ok(0)
}

fn run_converge(common: &CommonArgs, levels: &Option<String>) -> Result<u8, SolverError> {
    let config = load_config(common)?;
    let levels: Vec<String> = match levels {
        Some(s) => s.split(',').map(|p| p.trim().to_string()).collect(),
        None => config
            .convergence
            .as_ref()
            .map(|c| c.levels.clone())
            .unwrap_or_default(),
    };
    let table = driver::convergence_study(&config, &levels)?;
    fs::create_dir_all(&common.out)?;
    fs::write(common.out.join("convergence.csv"), table.to_csv())?;
    if !common.quiet {
        println!("nr x nt      dr          err_u       err_p       residual");
        for l in &table.levels {
            println!(
                "{:>4}x{:<5} {:.4e} {:.4e} {:.4e} {:.4e}",
                l.nr, l.ntheta, l.dr, l.err_u, l.err_p, l.residual_inf
            );
        }
        let fmt = |o: f64| {
            if o.is_nan() {
                "n/a (round-off)".to_string()
            } else {
                format!("{o:.3}")
            }
        };
        println!("measured order: u {} | p {}", fmt(table.order_u), fmt(table.order_p));
        println!("table written to {}", common.out.join("convergence.csv").display());
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => run_solve(args, false),
        Command::Compare(args) => run_solve(args, true),
        Command::Verify { out, quiet } => run_verify(out, *quiet),
        Command::Converge { common, levels } => run_converge(common, levels),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
