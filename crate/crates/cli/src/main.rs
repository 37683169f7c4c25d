mod config;
mod error;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use hvi_core::{
    analysis::{run_study, solve_level, Mode, ReferenceSpec, StudyConfig},
    assembly::assemble_bilinear,
    energy_functional, problem, DgSpace,
};

use crate::config::Overrides;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "hvi",
    version,
    about = "IPDG solver for H(curl) hemivariational inequalities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the benchmark problem on one mesh level.
    Solve(SolveArgs),
    /// Run a convergence study and print the error table as CSV.
    Study(StudyArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Penalty parameter eta.
    #[arg(long)]
    eta: Option<f64>,
    /// Potential parameter a (slope at the origin).
    #[arg(long)]
    a: Option<f64>,
    /// Potential parameter b (asymptotic slope).
    #[arg(long)]
    b: Option<f64>,
    /// Potential decay rate beta.
    #[arg(long)]
    beta: Option<f64>,
    /// hvi or linear (drops the nonsmooth term).
    #[arg(long, value_parser = config::parse_mode)]
    mode: Option<Mode>,
    /// Uzawa stopping tolerance.
    #[arg(long)]
    eps: Option<f64>,
    /// Uzawa iteration cap.
    #[arg(long)]
    max_iters: Option<usize>,
    /// key=value settings file; explicit flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Refinement level (2^level cells per side).
    #[arg(long)]
    level: Option<u32>,
    #[command(flatten)]
    common: Common,
    /// Field samples at quadrature points (elem_id,xq,yq,Ex,Ey).
    #[arg(long)]
    dump_field: Option<PathBuf>,
    /// System matrix in Matrix Market format.
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
    /// Triangle coordinates (elem_id,x0,y0,x1,y1,x2,y2).
    #[arg(long)]
    dump_mesh: Option<PathBuf>,
    /// Uzawa iteration log (iter,rel_dE,rel_dlambda,energy).
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StudyArgs {
    /// Comma-separated levels, ranges allowed (1,2,3 or 1..4).
    #[arg(long, value_parser = config::parse_levels)]
    levels: Option<::std::vec::Vec<u32>>,
    /// analytic or nested:<level>.
    #[arg(long, value_parser = config::parse_reference)]
    reference: Option<ReferenceSpec>,
    #[command(flatten)]
    common: Common,
}

const DEFAULT_SOLVE_LEVEL: u32 = 3;

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            eta: self.eta,
            a: self.a,
            b: self.b,
            beta: self.beta,
            mode: self.mode,
            eps: self.eps,
            max_iters: self.max_iters,
            ..Default::default()
        }
    }

    fn resolve(&self, flags: Overrides) -> Result<Overrides, CliError> {
        let file = match &self.config {
            Some(p) => config::load(p)?,
            None => Overrides::default(),
        };
        Ok(file.merged_with(flags))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| io_err(path, source))
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_to(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let mut w = create(path)?;
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| io_err(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_to(p, |w| w.write_all(text.as_bytes())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve(args: &SolveArgs) -> Result<(), CliError> {
    let flags = Overrides {
        level: args.level,
        ..args.common.overrides()
    };
    let settings = args.common.resolve(flags)?;
    let level = settings.level.unwrap_or(DEFAULT_SOLVE_LEVEL);
    let cfg = settings.apply(StudyConfig {
        levels: vec![level],
        ..Default::default()
    });
    cfg.validate()?;

    let start = Instant::now();
    let sol = solve_level(level, &cfg)?;
    let space: &DgSpace = &sol.space;
    let res = &sol.result;
    let coeffs = cfg.coefficients()?;
    let matrix = assemble_bilinear(space, &coeffs);
    let f = hvi_core::assemble_load(space, problem::source);
    let energy = energy_functional(&matrix, &f, &cfg.potential()?, space, &res.e);

    if let Some(p) = &args.dump_field {
        write_to(p, |w| space.write_field_csv(&res.e, w))?;
    }
    if let Some(p) = &args.dump_matrix {
        write_to(p, |w| matrix.write_matrix_market(w))?;
    }
    if let Some(p) = &args.dump_mesh {
        write_to(p, |w| space.mesh().write_csv(w))?;
    }
    if let Some(p) = &args.log {
        write_to(p, |w| res.write_log_csv(w))?;
    }

    let summary = format!(
        "level,h,dofs,uzawa_iterations,converged,energy,l2_norm,energy_norm,seconds\n{},{:.5e},{},{},{},{:.10e},{:.10e},{:.10e},{:.3}\n",
        level,
        space.mesh().grid_spacing(),
        space.num_dofs(),
        res.iterations,
        res.converged,
        energy,
        space.l2_norm(&res.e),
        space.energy_norm(&res.e, cfg.eta),
        start.elapsed().as_secs_f64()
    );
    emit(args.common.out.as_deref(), &summary)?;
    if !res.converged {
        return Err(CliError::NotConverged(format!(
            "Uzawa iteration did not reach eps = {:e} within {} iterations",
            cfg.eps_stop, cfg.l_max
        )));
    }
    Ok(())
}

fn study(args: &StudyArgs) -> Result<(), CliError> {
    let flags = Overrides {
        levels: args.levels.clone(),
        reference: args.reference,
        ..args.common.overrides()
    };
    let settings = args.common.resolve(flags)?;
    let cfg = settings.apply(StudyConfig::default());
    let start = Instant::now();
    let report = run_study(&cfg)?;
    log::info!("study finished in {:.1} s", start.elapsed().as_secs_f64());
    emit(args.common.out.as_deref(), &report.to_csv_string())?;

    let failed: Vec<_> = report
        .rows
        .iter()
        .filter(|r| !r.converged)
        .map(|r| r.level)
        .collect();
    if !failed.is_empty() {
        return Err(CliError::NotConverged(format!(
            "Uzawa iteration did not converge on levels {failed:?}"
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Study(a) => study(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
