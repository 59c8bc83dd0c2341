use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use ucfem::experiment::{
    emit_csv, fit_rate, run_case, run_single, solution_dump_string, Case, ExperimentPlan,
    NoiseSpec, RowField,
};
use ucfem::ProblemConfig;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CaseArg {
    Disk,
    SideDown,
    SideUp,
    Layer,
}

impl From<CaseArg> for Case {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::Disk => Case::Disk,
            CaseArg::SideDown => Case::SideDown,
            CaseArg::SideUp => Case::SideUp,
            CaseArg::Layer => Case::Layer,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NoiseArg {
    None,
    H2,
    H,
    H05,
}

impl From<NoiseArg> for NoiseSpec {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::None => NoiseSpec::None,
            NoiseArg::H2 => NoiseSpec::Power(2.0),
            NoiseArg::H => NoiseSpec::Power(1.0),
            NoiseArg::H05 => NoiseSpec::Power(0.5),
        }
    }
}

/// Stabilized finite element solver for unique continuation of
/// convection-diffusion problems. Runs a mesh sweep and writes one CSV row
/// per (mu, n).
#[derive(Debug, Parser)]
#[command(name = "ucfem", version)]
struct Args {
    #[arg(long, value_enum)]
    case: CaseArg,
    /// Mesh parameter (cells per side); repeat for a sweep.
    #[arg(long = "n", required = true, num_args = 1..)]
    n: Vec<usize>,
    /// Diffusion coefficient; repeat for several.
    #[arg(long, required = true, num_args = 1..)]
    mu: Vec<f64>,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    beta1: f64,
    #[arg(long, value_enum, default_value = "none")]
    noise: NoiseArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = ProblemConfig::DEFAULT_GAMMA)]
    gamma: f64,
    #[arg(long = "gamma-star", default_value_t = ProblemConfig::DEFAULT_GAMMA_STAR)]
    gamma_star: f64,
    #[arg(long, default_value_t = ProblemConfig::DEFAULT_ZETA)]
    zeta: f64,
    /// Weight decay constant for the triple-norm diagnostic.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Estimate the condition number of each system (slow).
    #[arg(long)]
    cond: bool,
    /// Write 0 for wall times so that output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Dump the mesh of the finest n to this file.
    #[arg(long)]
    mesh_dump: Option<PathBuf>,
    /// Dump nodal u_h, z_h and u of the finest n and first mu to this file.
    #[arg(long)]
    solution_dump: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

/// Returns whether every run succeeded.
fn run(args: Args) -> Result<bool> {
    let mut mesh_sizes = args.n.clone();
    mesh_sizes.sort_unstable();
    mesh_sizes.dedup();
    let plan = ExperimentPlan {
        beta1: args.beta1,
        noise: args.noise.into(),
        seed: args.seed,
        gamma: args.gamma,
        gamma_star: args.gamma_star,
        zeta: args.zeta,
        lambda: args.lambda,
        condition: args.cond,
        timing: !args.no_timing,
        ..ExperimentPlan::new(args.case.into(), mesh_sizes, args.mu.clone())
    };

    let rows = run_case(&plan)?;
    emit_csv(&rows, &args.out)?;

    let mut ok = true;
    for row in rows.iter().filter(|r| r.failed()) {
        ok = false;
        eprintln!(
            "run n={} mu={} failed: {}",
            row.n,
            row.mu,
            row.failure.as_deref().unwrap_or("")
        );
    }
    for &mu in &plan.mus {
        let series: Vec<_> = rows.iter().filter(|r| r.mu == mu).cloned().collect();
        for field in [RowField::L2Down, RowField::L2Up] {
            if let Ok(rate) = fit_rate(&series, field) {
                eprintln!("mu={mu} {field:?} rate {rate:.3}");
            }
        }
    }

    let finest = *plan.mesh_sizes.last().expect("validated plan");
    if let Some(path) = &args.mesh_dump {
        ucfem::mesh::build_mesh(finest)?.write_dump(path)?;
    }
    if let Some(path) = &args.solution_dump {
        let out = run_single(&plan, finest, plan.mus[0])?;
        std::fs::write(path, solution_dump_string(&out))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ok)
}
