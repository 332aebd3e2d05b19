use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use rayon::prelude::*;

use droplet_core::scenario::{
    converge, read_run, run_scenario, verify_slices, write_run, CheckResult, RunOptions, Scenario,
    SolverKind,
};
use droplet_core::verify::DataTables;
use droplet_core::viscous::{mollify_data, EPSILON_LADDER};
use droplet_core::DropletError;

#[derive(Parser, Debug)]
#[command(name = "droplet", about = "Damped pressureless particle flow on the half line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// Multiply every check tolerance by this factor.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,

    /// Write `n` equally spaced slices instead of the configured ones.
    #[arg(long)]
    slices: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and write its fields.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run every `.toml` scenario of a directory, one output folder each.
    Batch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Viscosity ladder against the exact solution.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Comma separated viscosities, largest first.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<f64>>,
    },
    /// Re-run the checks on a stored run directory.
    Verify {
        /// The run directory written by `solve`.
        #[arg(long)]
        out_dir: PathBuf,
        /// Take the checks from this scenario instead of the stored manifest.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
    },
}

/// 0 pass, 1 check failure, 2 input error, 3 numeric breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Status {
    Pass = 0,
    CheckFailed = 1,
    Input = 2,
    Breakdown = 3,
}

fn status_of(err: &anyhow::Error) -> Status {
    match err.downcast_ref::<DropletError>() {
        Some(DropletError::Numeric { .. } | DropletError::Breakdown(_) | DropletError::Consistency(_)) => {
            Status::Breakdown
        }
        _ => Status::Input,
    }
}

fn load(path: &Path) -> anyhow::Result<Scenario> {
    let text = fs::read_to_string(path)
        .map_err(DropletError::from)
        .with_context(|| format!("reading {}", path.display()))?;
    let sc = Scenario::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(sc)
}

fn report(name: &str, checks: &[CheckResult]) -> Status {
    let mut status = Status::Pass;
    for c in checks {
        let tag = if c.passed { "pass" } else { "FAIL" };
        println!("{name}: {tag} {} = {:e} (tol {:e})", c.name, c.value, c.tolerance);
        if !c.passed {
            status = Status::CheckFailed;
        }
    }
    status
}

fn solve(config: &Path, out_dir: &Path, common: &Common) -> anyhow::Result<Status> {
    let sc = load(config)?;
    let opts = RunOptions {
        tol_scale: common.tol_scale,
        slices: common.slices,
    };
    let outcome = run_scenario(&sc, &opts).with_context(|| format!("scenario `{}`", sc.name))?;
    write_run(out_dir, &outcome).with_context(|| format!("writing {}", out_dir.display()))?;
    Ok(report(&sc.name, &outcome.checks))
}

fn batch(dir: &Path, out_dir: &Path, common: &Common) -> anyhow::Result<Status> {
    let mut configs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(DropletError::from)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    configs.sort();
    let results: Vec<Status> = configs
        .par_iter()
        .map(|cfg| {
            let stem = cfg.file_stem().unwrap_or_default();
            match solve(cfg, &out_dir.join(stem), common) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    status_of(&e)
                }
            }
        })
        .collect();
    Ok(results.into_iter().max().unwrap_or(Status::Pass))
}

fn run_converge(config: &Path, out_dir: &Path, ladder: Option<&[f64]>) -> anyhow::Result<Status> {
    let sc = load(config)?;
    if sc.solver != SolverKind::Viscous {
        return Err(DropletError::Config("solver: the ladder study needs a viscous scenario".into()).into());
    }
    let ladder = ladder.unwrap_or(&EPSILON_LADDER);
    let table = converge(&sc, ladder).with_context(|| format!("scenario `{}`", sc.name))?;
    let mut csv = String::from(
        "epsilon,l1_distance,l1_ratio,momentum_residual,mass_residual,residual_ratio,data_residual,bound_violations\n",
    );
    let ratio = |r: Option<f64>| r.map(|x| format!("{x:e}")).unwrap_or_default();
    println!("{:>10} {:>12} {:>8} {:>12} {:>12} {:>8}", "eps", "L1", "ratio", "momentum", "mass", "ratio");
    for r in &table.rows {
        csv.push_str(&format!(
            "{:e},{:e},{},{:e},{:e},{},{:e},{}\n",
            r.epsilon,
            r.l1_distance,
            ratio(r.l1_ratio),
            r.momentum_residual,
            r.mass_residual,
            ratio(r.residual_ratio),
            r.data_residual,
            r.bound_violations
        ));
        println!(
            "{:>10.4e} {:>12.4e} {:>8} {:>12.4e} {:>12.4e} {:>8}",
            r.epsilon,
            r.l1_distance,
            r.l1_ratio.map(|x| format!("{x:.3}")).unwrap_or_default(),
            r.momentum_residual,
            r.mass_residual,
            r.residual_ratio.map(|x| format!("{x:.3}")).unwrap_or_default(),
        );
    }
    fs::create_dir_all(out_dir).map_err(DropletError::from)?;
    fs::write(out_dir.join("convergence.csv"), csv).map_err(DropletError::from)?;
    let monotone = table.rows.windows(2).all(|w| w[1].l1_distance < w[0].l1_distance);
    let bounded = table.rows.iter().all(|r| r.bound_violations == 0);
    Ok(if monotone && bounded { Status::Pass } else { Status::CheckFailed })
}

fn verify(out_dir: &Path, config: Option<&Path>, tol_scale: f64) -> anyhow::Result<Status> {
    let stored = read_run(out_dir).with_context(|| format!("reading {}", out_dir.display()))?;
    let mut sc = stored.scenario.clone();
    if let Some(cfg) = config {
        sc.checks = load(cfg)?.checks;
    }
    let [u0, v0, ub, vb] = sc.profiles()?;
    let tables = match (sc.solver, sc.epsilon) {
        (SolverKind::Viscous, Some(eps)) => {
            let m = mollify_data(&u0, &v0, &ub, &vb, eps, sc.horizon)?;
            DataTables {
                u0: m.u0,
                v0: m.v0,
                u_boundary: m.u_boundary,
                v_boundary: m.v_boundary,
            }
        }
        _ => DataTables {
            u0,
            v0,
            u_boundary: ub,
            v_boundary: vb,
        },
    };
    let checks = verify_slices(&sc, &stored.slices, &tables, tol_scale)
        .with_context(|| format!("scenario `{}`", sc.name))?;
    Ok(report(&sc.name, &checks))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { config, out_dir, common } => solve(config, out_dir, common),
        Command::Batch { config, out_dir, common } => batch(config, out_dir, common),
        Command::Converge { config, out_dir, ladder } => run_converge(config, out_dir, ladder.as_deref()),
        Command::Verify { out_dir, config, tol_scale } => verify(out_dir, config.as_deref(), *tol_scale),
    };
    let status = result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        status_of(&e)
    });
    ExitCode::from(status as u8)
}
