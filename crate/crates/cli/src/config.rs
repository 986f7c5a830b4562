//! Command line flags, the flat JSON config file, and their merge.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(
    name = "logdamp",
    version,
    about = "Decay-rate verification for the wave equation with logarithmic damping"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Fit every norm curve and compare with the predicted laws (JSON).
    Report,
    /// One norm curve on a geometric time grid (CSV).
    Curve,
    /// Convergence table of a Beta-type integral or the Gamma ratio (CSV).
    Specfun,
    /// One Fourier mode: closed form against the Runge–Kutta oracle.
    Mode,
    /// Frequency thresholds δ₀, δ₁, B and the rate γ.
    Thresholds,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Report => "report",
            Command::Curve => "curve",
            Command::Specfun => "specfun",
            Command::Mode => "mode",
            Command::Thresholds => "thresholds",
        }
    }
}

/// Every flag is optional so that a config file can supply it; flags given on
/// the command line win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    /// Space dimension.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Damping exponent θ.
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// Initial velocity, `name:key=value,...` (gaussian, shifted_gaussian, box, ball, delta_like).
    #[arg(long, global = true)]
    pub datum: Option<String>,
    /// Norm to tabulate with `curve`.
    #[arg(long, global = true)]
    pub quantity: Option<String>,
    #[arg(long, global = true)]
    #[serde(alias = "t-min")]
    pub t_min: Option<f64>,
    #[arg(long, global = true)]
    #[serde(alias = "t-max")]
    pub t_max: Option<f64>,
    /// Number of grid times.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Allowed deviation of a fitted exponent.
    #[arg(long, global = true)]
    #[serde(alias = "tol-exp")]
    pub tol_exp: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Flat JSON object with the same keys as the flags.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// specfun: origin, shifted, radial, radial_shifted or gautschi.
    #[arg(long, global = true)]
    pub kind: Option<String>,
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true)]
    pub x1: Option<f64>,
    /// Upper limit (`x₂`, or `η₂` for the radial kinds); infinite when absent.
    #[arg(long, global = true)]
    pub x2: Option<f64>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Shift `s` of the Gamma ratio.
    #[arg(long, global = true)]
    pub s: Option<f64>,
    /// Pass threshold on the last relative error (specfun, mode).
    #[arg(long, global = true)]
    pub check: Option<f64>,

    /// mode: frequency radius.
    #[arg(long, global = true)]
    pub r: Option<f64>,
    /// mode: time.
    #[arg(long, global = true)]
    pub t: Option<f64>,
    /// mode: `û₁`, e.g. `1` or `0.5+2i`.
    #[arg(long, global = true)]
    pub u1hat: Option<String>,
    /// mode: oracle step.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
}

macro_rules! prefer {
    ($a:expr, $b:expr; $($f:ident),*) => {
        Flags { $($f: $a.$f.or($b.$f),)* config: $a.config }
    };
}

impl Flags {
    fn over(self, file: Flags) -> Flags {
        prefer!(self, file; n, theta, datum, quantity, t_min, t_max, points, tol_exp, out,
            threads, kind, mu, x1, x2, p, eta, s, check, r, t, u1hat, dt)
    }

    /// Merge with the config file named by `--config`, if any.
    pub fn resolve(self) -> Result<Flags> {
        match &self.config {
            None => Ok(self),
            Some(path) => {
                let file = read_config(path)?;
                Ok(self.over(file))
            }
        }
    }
}

fn read_config(path: &Path) -> Result<Flags> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// Geometric time grid requested by the flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn from_flags(f: &Flags, default: GridSpec) -> Result<GridSpec> {
        let g = GridSpec {
            t_min: f.t_min.unwrap_or(default.t_min),
            t_max: f.t_max.unwrap_or(default.t_max),
            points: f.points.unwrap_or(default.points),
        };
        if !(g.t_min > 0.0 && g.t_max > g.t_min && g.t_max.is_finite()) {
            bail!("need 0 < t-min < t-max, got t-min = {}, t-max = {}", g.t_min, g.t_max);
        }
        if g.points < 2 {
            bail!("need at least 2 grid points, got {}", g.points);
        }
        Ok(g)
    }
}

pub const NORM_GRID: GridSpec = GridSpec {
    t_min: 1e2,
    t_max: 1e5,
    points: 16,
};
