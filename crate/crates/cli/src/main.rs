//! `monoweight` command-line front end.
//!
//! Exit codes: 0 all checks pass, 1 a verification failed (ids on stderr),
//! 2 usage error, 3 numerical failure.

mod commands;
mod config;
mod output;

use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Flags, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    /// Prefixes the message with a report id.
    pub fn context(self, id: &str) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{id}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{id}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{id}: {m}")),
        }
    }
}

impl From<monoweight::Error> for CliError {
    fn from(e: monoweight::Error) -> Self {
        use monoweight::Error as E;
        match e {
            E::InvalidWeight(_)
            | E::CriticalExponent { .. }
            | E::SupercriticalExponent { .. }
            | E::ExponentOutOfRange(_)
            | E::InvalidDomain(_)
            | E::InvalidArgument(_)
            | E::DivergentTail { .. } => CliError::Usage(e.to_string()),
            E::NonFiniteIntegrand { .. }
            | E::DegenerateParametrization(_)
            | E::LowAcceptance { .. }
            | E::NoConvergence(_)
            | E::SolverDiverged { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "monoweight", version, about = "Inequalities with monomial weights: constants and numerical verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print D, p_*, m(B₁*), C₁, C_p and the exponential-integrability constants.
    Constants(Flags),
    /// Sobolev inequality with the sharp constant over a function corpus.
    VerifySobolev(Flags),
    /// Isoperimetric inequality over a shape corpus.
    VerifyIsop(Flags),
    /// Hölder estimate for p > D against an envelope from an independent corpus.
    VerifyMorrey(Flags),
    /// Exponential integrability at p = D with the series-criterion constants.
    VerifyTrudinger(Flags),
    /// Radial decreasing rearrangement: equimeasurability, norms, gradient decrease.
    Rearrange(Flags),
    /// Gradient descent of the isoperimetric quotient over planar star shapes.
    ShapeSearch(Flags),
    /// Weighted Neumann problem on planar domains away from the axes.
    SolveNeumann(Flags),
    /// Unweighted inequality with gradient powers via the change of variables.
    CovVerify(Flags),
}

impl Command {
    fn parts(&self) -> (&'static str, &Flags) {
        match self {
            Command::Constants(f) => ("constants", f),
            Command::VerifySobolev(f) => ("verify-sobolev", f),
            Command::VerifyIsop(f) => ("verify-isop", f),
            Command::VerifyMorrey(f) => ("verify-morrey", f),
            Command::VerifyTrudinger(f) => ("verify-trudinger", f),
            Command::Rearrange(f) => ("rearrange", f),
            Command::ShapeSearch(f) => ("shape-search", f),
            Command::SolveNeumann(f) => ("solve-neumann", f),
            Command::CovVerify(f) => ("cov-verify", f),
        }
    }
}

fn dispatch(name: &str, mut cfg: RunConfig) -> Result<bool, CliError> {
    if name == "constants" {
        let text = commands::constants(&cfg)?;
        if let Some(dir) = &cfg.out {
            output::write_file(Path::new(dir), "constants.json", &text)?;
        }
        print!("{text}");
        return Ok(true);
    }
    let outcome = match name {
        "verify-sobolev" => commands::verify_sobolev(&cfg)?,
        "verify-isop" => commands::verify_isop(&cfg)?,
        "verify-morrey" => commands::verify_morrey(&cfg)?,
        "verify-trudinger" => commands::verify_trudinger(&cfg)?,
        "rearrange" => commands::rearrange(&cfg)?,
        "shape-search" => commands::shape_search(&cfg)?,
        "solve-neumann" => commands::solve_neumann_cmd(&cfg)?,
        "cov-verify" => commands::cov_verify_cmd(&mut cfg)?,
        other => return Err(CliError::Usage(format!("unknown command '{other}'"))),
    };
    // cov-verify fills in A; reports carry the final configuration
    let summary = output::emit(&outcome.records, &outcome.records[0].config)?;
    if let Some(dir) = &cfg.out {
        for (name, contents) in &outcome.files {
            output::write_file(Path::new(dir), name, contents)?;
        }
    }
    for id in &summary.failed_ids {
        eprintln!("FAILED {id}");
    }
    Ok(summary.failed == 0)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (name, flags) = cli.command.parts();
    let cfg = RunConfig::resolve(name, flags, commands::default_tol(name))?;
    match cfg.workers {
        #[cfg(feature = "parallel")]
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
            pool.install(|| dispatch(name, cfg))
        }
        _ => dispatch(name, cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_categories_map_to_exit_codes() {
        let usage = CliError::from(monoweight::Error::InvalidWeight("A_1 = -1".into()));
        let numeric = CliError::from(monoweight::Error::NoConvergence("quadrature".into()));
        assert_eq!((usage.code(), numeric.code()), (2, 3));
        assert_eq!(CliError::Io("disk full".into()).code(), 2);
        assert!(numeric.context("isop-0003").to_string().contains("isop-0003: "));
    }
}
