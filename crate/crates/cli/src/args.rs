use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_rational::Rational64;

#[derive(Debug, Parser)]
#[command(
    name = "lhy-lab",
    version,
    about = "Scattering lengths, Bogoliubov energies and parameter checks for the dilute Bose gas",
    after_help = "Set LHYLAB_THREADS to cap the number of worker threads.\n\
                  Exit codes: 0 success, 1 validation failure, 2 numerical failure, 64 usage error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the zero-energy scattering problem and print the scattering length
    Scatter(ScatterArgs),
    /// Replace a potential by an integrable one of bounded integral and certify the change in a
    Approx(ApproxArgs),
    /// Bogoliubov dispersion tables and ground-state integrals
    #[command(subcommand)]
    Bogo(BogoCommand),
    /// Evaluate the radial constant of the second-order energy
    Lhy(LhyArgs),
    /// Diagnostics of the cos^(M+2) localization function
    Chi(ChiArgs),
    /// Exponent bookkeeping for the asymptotic parameter system
    #[command(subcommand)]
    Params(ParamsCommand),
    /// Localize a vector to a window of a banded Hermitian matrix
    Matloc(MatlocArgs),
    /// Potential -> scattering -> approximation -> energy table -> parameter report
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    /// Potential spec (TOML)
    #[arg(long, value_name = "SPEC")]
    pub potential: PathBuf,
    /// Outer integration radius; defaults to a multiple of the support radius
    #[arg(long, value_name = "X")]
    pub rmax: Option<f64>,
    /// Agreement required between the two extraction points of a
    #[arg(long, default_value_t = lhy_core::scattering::DEFAULT_TOL)]
    pub tol: f64,
    /// Write r, u, phi, omega, g rows to this CSV file
    #[arg(long, value_name = "CSV")]
    pub emit_profile: Option<PathBuf>,
    /// Maximum number of profile rows
    #[arg(long, default_value_t = 2000)]
    pub rows: usize,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[arg(long, value_name = "SPEC")]
    pub potential: PathBuf,
    /// Bound on (8 pi a)^-1 int v_T, must exceed 1
    #[arg(long = "T", value_name = "T")]
    pub t: f64,
    /// Allowed relative loss from capping a hard core [default: T^-2]
    #[arg(long)]
    pub delta: Option<f64>,
    /// Certificate output (flat JSON)
    #[arg(long, value_name = "JSON")]
    pub emit_cert: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum BogoCommand {
    /// Tabulate A, B, D_k and alpha_k on a momentum grid
    Dispersion(DispersionArgs),
    /// Compare the ground-state integral with the two-term energy
    Lhy(BogoLhyArgs),
}

#[derive(Debug, Args)]
pub struct DispersionArgs {
    #[arg(long)]
    pub rho: f64,
    /// Scattering length; ignored when --potential is given
    #[arg(long, required_unless_present = "potential")]
    pub a: Option<f64>,
    /// Use g_hat(k) of this potential instead of the constant 8 pi a
    #[arg(long, value_name = "SPEC")]
    pub potential: Option<PathBuf>,
    /// Single-column CSV of k values [default: 200 log-spaced points]
    #[arg(long, value_name = "CSV")]
    pub grid: Option<PathBuf>,
    /// Output CSV [default: stdout]
    #[arg(long, value_name = "CSV")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BogoLhyArgs {
    /// Comma-separated list of rho a^3 values
    #[arg(long = "rho-a3", value_delimiter = ',', required = true, num_args = 1..)]
    pub rho_a3: Vec<f64>,
    /// Use the scattering solution of this potential [default: a unit-length delta shell g]
    #[arg(long, value_name = "SPEC")]
    pub potential: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LhyArgs {
    /// Target relative accuracy of the quadrature
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Also print the two-term energy density at this density (needs --a)
    #[arg(long, requires = "a")]
    pub rho: Option<f64>,
    #[arg(long, requires = "rho")]
    pub a: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ChiArgs {
    /// Regularity M (a positive multiple of 4 gives the standard family)
    #[arg(long = "M", value_name = "M", default_value_t = 4)]
    pub m: u32,
    /// Write k, chi_hat, decay_bound rows along a coordinate axis
    #[arg(long, value_name = "CSV")]
    pub emit_hat: Option<PathBuf>,
    #[arg(long, default_value_t = 1000.0)]
    pub k_max: f64,
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
}

#[derive(Debug, Subcommand)]
pub enum ParamsCommand {
    /// Compute exact exponent margins of every relation
    Check(ParamsCheckArgs),
}

#[derive(Debug, Args)]
pub struct ParamsCheckArgs {
    /// kappa in (0, 1/4]; 1/4 means the limit from below
    #[arg(long, value_parser = parse_rational, default_value = "1/4")]
    pub kappa: Rational64,
    /// Evaluate the scales numerically at this rho a^3
    #[arg(long = "rho-a3")]
    pub rho_a3: Option<f64>,
    /// R/a, needed to decide the range-dependent relations
    #[arg(long = "r-over-a", requires = "rho_a3")]
    pub r_over_a: Option<f64>,
    /// Replace the standard relations by the ones in this file
    #[arg(long, value_name = "FILE")]
    pub relations: Option<PathBuf>,
    /// Fail unless every exact margin is at least this
    #[arg(long, value_parser = parse_rational)]
    pub min_margin: Option<Rational64>,
    #[arg(long, value_name = "JSON")]
    pub emit_report: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["matrix", "ensemble"]))]
pub struct MatlocArgs {
    /// Bands as CSV rows k,i,re[,im]
    #[arg(long, value_name = "CSV", requires = "psi")]
    pub matrix: Option<PathBuf>,
    /// Vector as CSV rows re[,im]
    #[arg(long, value_name = "CSV", requires = "matrix")]
    pub psi: Option<PathBuf>,
    /// Run the seeded random 2-banded ensemble with this N instead
    #[arg(long, value_name = "N")]
    pub ensemble: Option<usize>,
    #[arg(long, default_value_t = 1000, requires = "ensemble")]
    pub trials: u64,
    #[arg(long, default_value_t = 0, requires = "ensemble")]
    pub seed: u64,
    /// Pair each ensemble matrix with its own ground state instead of a spread vector
    #[arg(long, requires = "ensemble")]
    pub ground_state: bool,
    /// Window length M'
    #[arg(long)]
    pub mprime: usize,
    #[arg(long = "C", value_name = "C", default_value_t = 100.0)]
    pub c: f64,
    /// Per-trial CSV for the ensemble
    #[arg(long, value_name = "CSV")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Run file (TOML) with keys potential, T, delta, rho_a3, kappa, out_dir; flags override it
    #[arg(long, value_name = "TOML")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "SPEC")]
    pub potential: Option<PathBuf>,
    #[arg(long = "T", value_name = "T")]
    pub t: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "rho-a3", value_delimiter = ',', num_args = 1..)]
    pub rho_a3: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_rational)]
    pub kappa: Option<Rational64>,
    /// Directory for certificate.json, lhy.csv and params.json
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

/// `p/q`, an integer, or a terminating decimal, read exactly.
pub fn parse_rational(s: &str) -> Result<Rational64, String> {
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
            return Err(format!("`{s}` is not a terminating decimal"));
        }
        let neg = int.starts_with('-');
        let int: i64 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| format!("bad integer part in `{s}`"))?
        };
        let den = 10i64.pow(frac.len() as u32);
        let num = int.abs() * den + frac.parse::<i64>().map_err(|e| e.to_string())?;
        return Ok(Rational64::new(if neg { -num } else { num }, den));
    }
    if let Some((_, d)) = s.split_once('/') {
        if d.trim().parse::<i64>() == Ok(0) {
            return Err("zero denominator".into());
        }
    }
    s.parse::<Rational64>().map_err(|_| format!("`{s}` is not a rational number"))
}
