//! Argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ed,
    Rg,
    Both,
}

impl Method {
    pub fn ed(self) -> bool {
        matches!(self, Method::Ed | Method::Both)
    }

    pub fn rg(self) -> bool {
        matches!(self, Method::Rg | Method::Both)
    }
}

#[derive(Debug, Parser)]
#[command(name = "crg", version, about = "Liouvillian spectra of collective N-level atoms")]
pub struct Cli {
    /// Parameter file: {"n_levels","n_atoms","eps","gamma","gamma0","p"}.
    #[arg(long, global = true, env = "CRG_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "CRG_OUT", default_value = "crg-out")]
    pub out: PathBuf,
    #[arg(long, global = true, env = "CRG_METHOD", value_enum, default_value = "ed")]
    pub method: Method,
    /// Tolerance for solver convergence and consistency checks.
    #[arg(long, global = true, env = "CRG_TOL")]
    pub tol: Option<f64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "CRG_JOBS", default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sector spectra as CSV.
    Spectrum(SpectrumArgs),
    /// Zero mode of the (0,…,0) sector and level populations.
    SteadyState(SteadyArgs),
    /// Slowest modes over a range of atom numbers and their polynomial fit in 1/L.
    GapScan(GapScanArgs),
    /// Solve the Richardson-Gaudin equations in one sector.
    RgSolve(RgSolveArgs),
    /// Closed-form sector matrices against the literal doubled-space Liouvillian.
    OracleCheck(OracleArgs),
    /// Time evolution of an observable from a Fock state.
    Evolve(EvolveArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    /// Restrict to one sector, e.g. "1,-1,0".
    #[arg(long, allow_hyphen_values = true)]
    pub sector: Option<String>,
    /// Also write each sector matrix in COO form (row,col,re,im).
    #[arg(long)]
    pub dump_coo: bool,
    /// Comma-separated pumping values; one merged spectrum file per value.
    #[arg(long, allow_hyphen_values = true)]
    pub p_sweep: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct SteadyArgs {}

#[derive(Debug, Args, Serialize)]
pub struct GapScanArgs {
    /// Atom numbers, comma separated.
    #[arg(long, default_value = "40,60,80,100,120")]
    pub sizes: String,
    /// Sectors separated by ';'.
    #[arg(long, allow_hyphen_values = true, default_value = "1,-1,0;1,0,-1")]
    pub sectors: String,
}

#[derive(Debug, Args, Serialize)]
pub struct RgSolveArgs {
    /// Sector; the zero sector gives the steady state.
    #[arg(long, allow_hyphen_values = true)]
    pub sector: Option<String>,
    /// Start from a previously written solution JSON.
    #[arg(long)]
    pub guess: Option<PathBuf>,
    /// Random starts instead of the steady-state seeded search.
    #[arg(long)]
    pub multistart: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    /// Flip the sign of one matrix-element family: `diag` or `alpha,beta` (1-based levels).
    #[arg(long)]
    pub flip: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    /// Initial Fock state occupations, e.g. "2,1,1".
    #[arg(long)]
    pub initial: String,
    /// Observable: population of a level (one-based).
    #[arg(long, default_value_t = 1)]
    pub level: usize,
    #[arg(long, default_value_t = 5.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
}
