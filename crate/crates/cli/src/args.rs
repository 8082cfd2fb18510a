//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "greenp2", version, about = "Experiments with holomorphic self-maps of the projective plane")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: Global,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Map definition file; standard input when absent or `-`.
    #[arg(long, global = true)]
    pub map: Option<String>,

    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Also write the command's series as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,

    #[arg(long, global = true, env = "GREENP2_DEFAULT_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Iterate count or horizon (default depends on the command).
    #[arg(long, global = true)]
    pub n: Option<usize>,

    /// Sample count (default depends on the command).
    #[arg(long, global = true)]
    pub samples: Option<usize>,

    /// Tolerance (default depends on the command).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tol: Option<f64>,

    /// Degree for generators.
    #[arg(long, global = true)]
    pub d: Option<usize>,

    /// Configuration row id such as `1-0` or `3-3`.
    #[arg(long, global = true)]
    pub row: Option<String>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Green function at a point, or at random points.
    Green {
        /// Homogeneous coordinates `z,w,t`; complex entries like `1+2i`.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Multiplicity cocycles along orbits of critical points.
    Mult {
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Invariant lines and points, exceptional sets, transition matrix.
    Invariants,
    /// Configuration row of the exceptional set.
    Classify,
    /// L1 distance between pulled-back curve potentials and the Green function.
    Equidist {
        #[arg(long, default_value = "z+w+2*t")]
        curve: String,
    },
    /// Lelong number of a potential at a point.
    Lelong(PotentialArgs),
    /// Weighted Kiselman number of a potential at a point.
    Kiselman {
        #[command(flatten)]
        potential: PotentialArgs,
        /// Weights `a1,a2`.
        #[arg(long, default_value = "1,1")]
        weights: String,
        /// Scan weights `(alpha, 1)` for alpha in 0.1, 0.2, ..., 1.
        #[arg(long)]
        scan: bool,
    },
    /// Volume of iterated images of a small ball.
    Volume {
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        /// Affine chart (index of the coordinate set to one); defaults to the largest coordinate.
        #[arg(long)]
        chart: Option<usize>,
    },
    /// Generate a map file.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
    },
}

#[derive(Debug, Clone, Args)]
pub struct PotentialArgs {
    #[arg(long, value_enum, default_value_t = Potential::Jacobian)]
    pub potential: Potential,
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    #[arg(long)]
    pub chart: Option<usize>,
    /// Curve for the `curve` potential.
    #[arg(long, default_value = "z+w+2*t")]
    pub curve: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Potential {
    /// `log |Jf|`.
    Jacobian,
    /// Normalized pullback of a curve's defining form.
    Curve,
    /// Green function of the lift.
    Green,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Table1,
    LattesUeda,
}
