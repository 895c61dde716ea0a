mod cli;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;
use collective_rg::{Error, MemoryBudget};

use cli::{Cli, Command};
use commands::Ctx;
use config::{load_params, RunConfig};
use output::OutputDir;

fn run(cli: Cli) -> Result<(), Error> {
    let params = load_params(cli.config.as_deref(), |k| std::env::var(k).ok())?;
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("--tol must be positive, got {t}")));
        }
    }
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .map_err(|e| Error::resource(format!("thread pool: {e}")))?;
    }
    let (name, options) = match &cli.command {
        Command::Spectrum(a) => ("spectrum", serde_json::to_value(a)),
        Command::SteadyState(a) => ("steady-state", serde_json::to_value(a)),
        Command::GapScan(a) => ("gap-scan", serde_json::to_value(a)),
        Command::RgSolve(a) => ("rg-solve", serde_json::to_value(a)),
        Command::OracleCheck(a) => ("oracle-check", serde_json::to_value(a)),
        Command::Evolve(a) => ("evolve", serde_json::to_value(a)),
    };
    let config = RunConfig {
        tool: "crg",
        version: env!("CARGO_PKG_VERSION"),
        command: name.to_string(),
        params: params.clone(),
        method: cli.method,
        tol: cli.tol,
        jobs: rayon::current_num_threads(),
        options: options.expect("arguments serialize"),
    };
    let mut out = OutputDir::create(&cli.out, config)?;
    let ctx = Ctx { params, method: cli.method, tol: cli.tol, budget: MemoryBudget::default() };
    let result = match &cli.command {
        Command::Spectrum(a) => commands::spectrum(&ctx, a, &mut out),
        Command::SteadyState(_) => commands::steady(&ctx, &mut out),
        Command::GapScan(a) => commands::gap_scan(&ctx, a, &mut out),
        Command::RgSolve(a) => commands::rg_solve(&ctx, a, &mut out),
        Command::OracleCheck(a) => commands::oracle_check(&ctx, a, &mut out),
        Command::Evolve(a) => commands::evolve(&ctx, a, &mut out),
    };
    // partial outputs stay listed even when a check fails
    out.finish()?;
    result
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CRG_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("crg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
