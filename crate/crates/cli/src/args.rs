use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use szego_core::{Complex64, FaceKind, Point, Variable};

#[derive(Debug, Parser)]
#[command(name = "szego", version, about = "Szegő kernel of the non-smooth worm domain")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Domain parameter β (> π).
    #[arg(long, global = true, default_value_t = 2.0 * std::f64::consts::PI)]
    pub beta: f64,
    /// Contour height; defaults to the midpoint of the admissible interval.
    #[arg(long, global = true)]
    pub h: Option<f64>,
    #[arg(long, global = true, default_value_t = szego_core::domain::DEFAULT_TOL_QUAD)]
    pub tol_quad: f64,
    #[arg(long, global = true, default_value_t = szego_core::domain::DEFAULT_TOL_SERIES)]
    pub tol_series: f64,
    /// Output format; `eval`, `singular`, `compare`, `repro` and `verify` default to
    /// json, `trace` to csv.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for sampled suites.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the kernel by both routes, with leading term and remainder.
    Eval {
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        w: Point,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        z: Point,
    },
    /// Tabulate the kernel along a boundary approach or a Re τ sweep.
    Trace(TraceArgs),
    /// Classify singular terms at a boundary pair and fit blow-up exponents.
    Singular(SingularArgs),
    /// Compare the singular order of a kernel derivative with the Bergman templates.
    Compare {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
        eps: List,
        #[arg(long, default_value = "w1", value_parser = parse_variable)]
        var: Variable,
    },
    /// Check the reproducing property for `g(z1) z2^m` with a Gaussian profile.
    Repro {
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        z: Point,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        mode: i64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        center: f64,
        #[arg(long, default_value_t = 3.0)]
        width: f64,
        #[arg(long, default_value_t = szego_core::reproducing::DEFAULT_DELTA_B)]
        delta_b: f64,
    },
    /// Run an invariant suite and report per-check results.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Residues,
    Decomposition,
    ClosedForms,
    Symmetry,
    Decay,
    Repro,
    All,
}

#[derive(Debug, Args)]
pub struct TargetArgs {
    /// Face approached by w (E1..E4, oblique-right, oblique-left, horiz-top, horiz-bottom).
    #[arg(long, value_parser = parse_face)]
    pub face_w: FaceKind,
    /// Face approached by z; defaults to the face of w.
    #[arg(long, value_parser = parse_face)]
    pub face_z: Option<FaceKind>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    /// Position along a non-distinguished face; defaults to the middle of its range.
    #[arg(long, allow_hyphen_values = true)]
    pub aux: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(subcommand)]
    pub path: TracePath,
}

#[derive(Debug, Subcommand)]
pub enum TracePath {
    /// Approach a boundary pair through the listed slacks (strictly decreasing).
    Approach {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, value_parser = parse_list, allow_hyphen_values = true, conflicts_with = "geometric")]
        eps: Option<List>,
        /// `start,ratio,count` geometric slack schedule.
        #[arg(long, value_parser = parse_list)]
        geometric: Option<List>,
    },
    /// Move the points apart in Re τ at fixed (Im z1, log|z2|²).
    ReTau {
        #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
        re_tau: List,
        /// `(Im w1, log|w2|²)`.
        #[arg(long, value_parser = parse_list, allow_hyphen_values = true, default_value = "0.3,0.2")]
        w_ab: List,
        #[arg(long, value_parser = parse_list, allow_hyphen_values = true, default_value = "-0.2,0.1")]
        z_ab: List,
        /// Rotate arg w2 so that arg λ = −Re τ/2.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        co_rotate: bool,
    },
}

#[derive(Debug, Args)]
pub struct SingularArgs {
    #[command(flatten)]
    pub target: TargetArgs,
    /// Slacks for the blow-up fit; omit to classify only.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub eps: Option<List>,
    /// kernel, or the derivative variable (w1, w2, conj_z1, conj_z2).
    #[arg(long, default_value = "kernel")]
    pub quantity: String,
    /// Second slack list; with `--eps` it runs the two-factor corner fit (E1..E4 only).
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub eps2: Option<List>,
}

/// A comma-separated list of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct List(pub Vec<f64>);

impl std::ops::Deref for List {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub fn parse_list(s: &str) -> Result<List, String> {
    if s.trim().is_empty() {
        return Ok(List(Vec::new()));
    }
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect::<Result<_, _>>()
        .map(List)
}

/// `re1,im1,re2,im2`.
pub fn parse_point(s: &str) -> Result<Point, String> {
    let v = parse_list(s)?.0;
    if v.len() != 4 {
        return Err(format!("expected re1,im1,re2,im2, got {} numbers", v.len()));
    }
    Ok(Point::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])))
}

fn parse_face(s: &str) -> Result<FaceKind, String> {
    s.parse::<FaceKind>().map_err(|e| e.to_string())
}

fn parse_variable(s: &str) -> Result<Variable, String> {
    s.parse::<Variable>()
}
