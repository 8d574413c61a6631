//! Command-line front end: `convergence`, `mandel` and `solve`.
//!
//! Exit codes: 0 success, 1 output i/o failure, 2 configuration or usage error,
//! 3 solver failure, 4 convergence rates outside the configured band.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Parser;

use crate::config::{Command, ConvergenceJob, LawKind, RunConfig, SolveJob};
use crate::elements::make_space_set;
use crate::error::{ConfigError, SolveError, VerificationError};
use crate::output::{fields_csv, mandel_files, vtk_string, write_file};
use crate::scenarios::{run_mandel, MandelRun, MandelSetup, MandelVariant};
use crate::solver::NonlinearSolver;
use crate::verification::{compute_errors, convergence_study, ConvergenceStudy, ErrorReport};

#[derive(Debug, Parser)]
#[command(name = "biot", version, about = "Mixed finite elements for nonlinear Biot poroelasticity")]
pub struct Cli {
    /// `convergence`, `mandel` or `solve`; defaults to `command` in the config file.
    pub command: Option<String>,
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `[output] dir`, default `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Polynomial degree k.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub degree: Option<u8>,
    /// Refinement levels of the convergence study.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Permeability law: constant, exp, kozeny, scaled-exp or porosity-exp.
    #[arg(long)]
    pub law: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("solver failure: {0}")]
    Solve(String),
    #[error("rates outside band: {0}")]
    Band(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solve(_) => 3,
            CliError::Band(_) => 4,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Config(m) => CliError::Config(ConfigError::new("solver", m)),
            other => CliError::Solve(other.to_string()),
        }
    }
}

impl From<VerificationError> for CliError {
    fn from(e: VerificationError) -> Self {
        CliError::Solve(e.to_string())
    }
}

/// Reads the config and applies the flag overrides.
pub fn resolve(cli: &Cli) -> Result<(Command, RunConfig, PathBuf), ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let command = match (&cli.command, cfg.command) {
        (Some(c), _) => c.parse()?,
        (None, Some(c)) => c,
        (None, None) => return Err(ConfigError::new("command", "give a command on the command line or in the config")),
    };
    if let Some(k) = cli.degree {
        cfg.degree = Some(k as usize);
    }
    if let Some(levels) = cli.levels {
        if command != Command::Convergence {
            return Err(ConfigError::new("levels", "only the convergence command takes --levels"));
        }
        cfg.mesh.levels = Some(levels);
    }
    if let Some(law) = &cli.law {
        cfg.permeability.law = Some(law.parse::<LawKind>()?);
    }
    let out = cli.out.clone().or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    Ok((command, cfg, out))
}

/// Runs the study, writes `convergence.csv` and checks the rate band.
pub fn cmd_convergence(job: &ConvergenceJob, out: &Path) -> Result<ConvergenceStudy, CliError> {
    let study = convergence_study(&job.case, job.degree, job.levels, job.solver)?;
    write_file(out, "convergence.csv", &study.to_csv())?;
    print!("{}", study.table());
    let b = job.band;
    if !study.rates_within(b.levels, b.min, b.max) {
        return Err(CliError::Band(format!(
            "last {} levels have rates {:?}, band [{}, {}]",
            b.levels,
            study.last_rates(b.levels),
            b.min,
            b.max
        )));
    }
    Ok(study)
}

/// Runs the requested variants and writes their transient and mid-line files.
pub fn cmd_mandel(setup: &MandelSetup, variants: &[MandelVariant], out: &Path) -> Result<Vec<MandelRun>, CliError> {
    let mut runs = Vec::new();
    for &v in variants {
        runs.push(run_mandel(&setup.clone().with_variant(v))?);
    }
    for run in &runs {
        for (name, contents) in mandel_files(run) {
            write_file(out, &name, &contents)?;
        }
    }
    println!("{}", mandel_summary(&runs));
    Ok(runs)
}

/// One line per variant plus the peak comparison when both ran.
pub fn mandel_summary(runs: &[MandelRun]) -> String {
    let mut s = String::new();
    for run in runs {
        let r = &run.record;
        writeln!(
            s,
            "{}: p(0,H/2) first {:.5e}, peak {:.5e}, final {:.5e}",
            run.setup.variant.label(),
            r.p_center.first().copied().unwrap_or(0.0),
            r.peak_pressure(),
            r.p_center.last().copied().unwrap_or(0.0)
        )
        .unwrap();
    }
    if let [a, b] = runs {
        write!(s, "nonlinear peak below constant peak: {}", b.record.peak_pressure() < a.record.peak_pressure()).unwrap();
    }
    s.trim_end().to_string()
}

/// Stationary solve writing `fields.csv`, `fields.vtk` and, for the manufactured problem, `errors.csv`.
pub fn cmd_solve(job: &SolveJob, out: &Path) -> Result<Option<ErrorReport>, CliError> {
    let spaces = make_space_set(&job.mesh, job.degree).map_err(|e| ConfigError::new("degree", e.to_string()))?;
    let mut solver = NonlinearSolver::new(&job.mesh, &spaces, job.params, job.law, &job.data, job.solver)?;
    let (state, trace) = solver.solve_stationary()?;
    let errors = job.manufactured.map(|case| compute_errors(&job.mesh, &spaces, &state, &case));
    write_file(out, "fields.csv", &fields_csv(&state))?;
    write_file(out, "fields.vtk", &vtk_string(&job.mesh, &spaces, &state))?;
    println!("solved {} dofs in {} iterations", spaces.total_dofs(), trace.iterations());
    if let Some(e) = &errors {
        let mut csv = String::from("h,dofs");
        for n in ErrorReport::NAMES {
            write!(csv, ",{n}").unwrap();
        }
        write!(csv, "\n{:.5e},{}", e.h, e.dofs).unwrap();
        for v in e.values() {
            write!(csv, ",{v:.5e}").unwrap();
        }
        csv.push('\n');
        write_file(out, "errors.csv", &csv)?;
        print!("{csv}");
    }
    Ok(errors)
}

/// Parses, dispatches and reports; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = resolve(cli).map_err(CliError::from).and_then(|(command, cfg, out)| match command {
        Command::Convergence => cfg.convergence_job().map_err(CliError::from).and_then(|j| cmd_convergence(&j, &out).map(drop)),
        Command::Mandel => cfg
            .mandel_job()
            .map_err(CliError::from)
            .and_then(|(setup, variants)| cmd_mandel(&setup, &variants, &out).map(drop)),
        Command::Solve => cfg.solve_job().map_err(CliError::from).and_then(|j| cmd_solve(&j, &out).map(drop)),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("biot").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config() {
        let (cmd, cfg, out) = resolve(&cli(&["convergence", "--degree", "1", "--levels", "3", "--law", "exp"])).unwrap();
        assert_eq!(cmd, Command::Convergence);
        assert_eq!((cfg.degree, cfg.mesh.levels, cfg.permeability.law), (Some(1), Some(3), Some(LawKind::Exponential)));
        assert_eq!(out, PathBuf::from("out"));
    }

    #[test]
    fn usage_errors() {
        assert!(Cli::try_parse_from(["biot", "convergence", "--degree", "2"]).is_err());
        assert_eq!(resolve(&cli(&[])).unwrap_err().field, "command");
        assert_eq!(resolve(&cli(&["mandel", "--levels", "3"])).unwrap_err().field, "levels");
        assert_eq!(resolve(&cli(&["plot"])).unwrap_err().field, "command");
        assert_eq!(run(&cli(&["convergence", "--levels", "1"])), 2);
    }
}
