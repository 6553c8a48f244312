//! Scenario runner: solve, verify, converge, and selftest subcommands
//! over TOML scenario files. Artifact formats and exit codes are
//! documented in `docs/schema.md`.

use clap::{Parser, Subcommand};
use nsvolterra::config::Scenario;
use nsvolterra::fields::write_vector_snapshot;
use nsvolterra::report::{
    convergence_study, run_checks, write_atomic, write_convergence_csv, write_json,
    write_norm_csv, CheckOutcome, RunSummary, KNOWN_CHECKS,
};
use nsvolterra::solver::{solve_inhomogeneous, SignConvention};
use nsvolterra::Error;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "nsvolterra",
    version,
    about = "Volterra-reformulated Navier-Stokes solver and inequality verifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the scenario's `[output] dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed override; recorded in every artifact.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Fractional order override.
    #[arg(long, global = true)]
    mu: Option<f64>,

    /// Convection sign convention override.
    #[arg(long, global = true, value_parser = ["standard", "paper"])]
    sign: Option<String>,

    /// Suppress progress output (artifacts are still written).
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the scenario and write summary, norm series, and final
    /// snapshots.
    Solve,
    /// Run the scenario's verification set (or an explicit list).
    Verify {
        /// Comma-separated check identifiers; defaults to the
        /// scenario's `[verify] checks`.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
    },
    /// Time-refinement sweep on a manufactured scenario.
    Converge {
        /// Comma-separated step counts, at least two.
        #[arg(long, value_delimiter = ',', default_value = "32,64,128")]
        levels: Vec<usize>,
    },
    /// Built-in quick verification battery; needs no scenario file.
    Selftest,
}

/// Exit codes: 0 success, 2 configuration/usage, 3 non-convergence or
/// failed checks, 4 I/O.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 4,
        Error::NoConvergence { .. } => 3,
        _ => 2,
    }
}

#[derive(Serialize)]
struct VerifySummary {
    name: String,
    seed: u64,
    checks: Vec<CheckOutcome>,
}

fn load_scenario(cli: &Cli) -> Result<Scenario, Error> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required for this subcommand".into()))?;
    let mut sc = Scenario::load(path)?;
    if let Some(seed) = cli.seed {
        sc.seed = seed;
    }
    if let Some(mu) = cli.mu {
        sc.solve.mu = mu;
    }
    if let Some(sign) = &cli.sign {
        sc.solve.sign = if sign == "paper" {
            SignConvention::Paper
        } else {
            SignConvention::Standard
        };
    }
    if let Some(out) = &cli.out {
        sc.output.dir = out.clone();
    }
    Ok(sc)
}

fn builtin_scenario(cli: &Cli) -> Result<Scenario, Error> {
    let mut sc = Scenario::parse(
        r#"
        name = "selftest"
        seed = 1
        [solve]
        cutoff = 2
        horizon = 1.0
        steps = 12
        rho = 1.0
        [forcing]
        kind = "random"
        epsilon = 0.05
        decay = 1.0
    "#,
    )?;
    if let Some(seed) = cli.seed {
        sc.seed = seed;
    }
    if let Some(mu) = cli.mu {
        sc.solve.mu = mu;
    }
    Ok(sc)
}

fn run_solve(cli: &Cli) -> Result<u8, Error> {
    let sc = load_scenario(cli)?;
    let cfg = sc.solve_config()?;
    let (f, exact) = sc.build_forcing(&cfg)?;
    let a = sc.build_initial(&cfg)?;
    let bundle = solve_inhomogeneous(&f, &a, &cfg)?;
    let dir = &sc.output.dir;
    write_json(&dir.join("summary.json"), &RunSummary::new(&sc, &cfg, &bundle))?;
    write_norm_csv(&dir.join("norms.csv"), &bundle)?;
    let last = cfg.grid.num_nodes() - 1;
    for (name, field) in [("w_final.snap", &bundle.w), ("u_final.snap", &bundle.u)] {
        let mut buf = Vec::new();
        write_vector_snapshot(&mut buf, field.snapshot(last))?;
        write_atomic(&dir.join(name), &buf)?;
    }
    if !cli.quiet {
        println!(
            "{}: converged in {} iterations, |w| = {:.6e}, max residual {:.3e}",
            sc.name,
            bundle.iterations,
            bundle.w_norm.l2_norm(),
            bundle.residual.linf_norm()
        );
        if let Some(u_star) = exact {
            println!(
                "  manufactured error |u - u*| = {:.6e}",
                bundle.u.sub(&u_star).l2_qt_norm()
            );
        }
        println!("  artifacts in {}", dir.display());
    }
    Ok(0)
}

fn run_verify_set(sc: &Scenario, ids: &[String], quiet: bool) -> Result<u8, Error> {
    for id in ids {
        if !KNOWN_CHECKS.contains(&id.as_str()) {
            return Err(Error::UnknownCheck(id.clone()));
        }
    }
    let outcomes = run_checks(sc, ids)?;
    let all_pass = outcomes.iter().all(|o| o.pass);
    write_json(
        &sc.output.dir.join("verify.json"),
        &VerifySummary {
            name: sc.name.clone(),
            seed: sc.seed,
            checks: outcomes.clone(),
        },
    )?;
    if !quiet {
        for o in &outcomes {
            let detail = o
                .constants
                .iter()
                .map(|(k, v)| format!("{k}={v:.6e}"))
                .collect::<Vec<_>>()
                .join(", ");
            println!("{} {} ({detail})", if o.pass { "PASS" } else { "FAIL" }, o.id);
        }
        println!(
            "{} of {} checks passed",
            outcomes.iter().filter(|o| o.pass).count(),
            outcomes.len()
        );
    }
    Ok(if all_pass { 0 } else { 3 })
}

fn run_verify(cli: &Cli, checks: &[String]) -> Result<u8, Error> {
    let sc = load_scenario(cli)?;
    let ids: Vec<String> = if checks.is_empty() {
        sc.verify.checks.clone()
    } else {
        checks.to_vec()
    };
    run_verify_set(&sc, &ids, cli.quiet)
}

fn run_converge(cli: &Cli, levels: &[usize]) -> Result<u8, Error> {
    let sc = load_scenario(cli)?;
    let rows = convergence_study(&sc, levels)?;
    write_convergence_csv(&sc.output.dir.join("convergence.csv"), &rows)?;
    if !cli.quiet {
        println!("steps  cutoff  error         order");
        for r in &rows {
            println!(
                "{:<6} {:<7} {:.6e}  {}",
                r.steps,
                r.cutoff,
                r.error,
                r.order.map_or("-".into(), |o| format!("{o:.3}")),
            );
        }
    }
    Ok(0)
}

fn run_selftest(cli: &Cli) -> Result<u8, Error> {
    let mut sc = builtin_scenario(cli)?;
    if let Some(out) = &cli.out {
        sc.output.dir = out.clone();
    }
    let ids: Vec<String> = [
        "abel-roundtrip",
        "composition",
        "f-mu-identity",
        "projection",
        "bilinear",
        "norm-inequalities",
        "riccati-chain",
        "apriori",
        "hopf",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    run_verify_set(&sc, &ids, cli.quiet)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve => run_solve(&cli),
        Command::Verify { checks } => run_verify(&cli, checks),
        Command::Converge { levels } => run_converge(&cli, levels),
        Command::Selftest => run_selftest(&cli),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
