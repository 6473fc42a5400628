//! Command-line arguments. The parsed form doubles as the serializable run
//! configuration: a run is reproduced by `run --config <file>`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nosestretch_core::optimizer::VerifyTolerances;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Parser, Serialize, Deserialize, PartialEq)]
#[command(name = "nosestretch", version, about = "Nose-stretch variations and minimal-resistance solver")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize, PartialEq)]
pub struct GlobalArgs {
    /// Random seed for stochastic commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; the solver evaluates trials sequentially.
    #[arg(long, global = true, default_value_t = 1)]
    #[serde(default = "one")]
    pub threads: usize,
    #[command(flatten)]
    #[serde(default)]
    pub tol: Tolerances,
}

fn one() -> usize {
    1
}

/// Tolerance overrides, from `--tol-*` flags or a JSON file with the same
/// keys.
#[derive(Clone, Debug, Default, Args, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed max |u - M| on the boundary.
    #[arg(long = "tol-boundary", global = true)]
    pub boundary: Option<f64>,
    /// Upper end of the small-gradient band.
    #[arg(long = "tol-gap-lo", global = true)]
    pub gap_lo: Option<f64>,
    /// Lower end of the large-gradient band.
    #[arg(long = "tol-gap-hi", global = true)]
    pub gap_hi: Option<f64>,
    /// Required fraction of regular cells outside the gap.
    #[arg(long = "tol-gap-fraction", global = true)]
    pub gap_fraction: Option<f64>,
    /// Distance from extreme vertices to the singular set; default 2h.
    #[arg(long = "tol-extreme-distance", global = true)]
    pub extreme_distance: Option<f64>,
    /// Required fraction of extreme vertices near the singular set.
    #[arg(long = "tol-extreme-fraction", global = true)]
    pub extreme_fraction: Option<f64>,
    /// Bound on |lambda_min| over regular cells; default 10h.
    #[arg(long = "tol-developability", global = true)]
    pub developability: Option<f64>,
    /// Reconstruction Hausdorff bound; default 3h.
    #[arg(long = "tol-hausdorff", global = true)]
    pub hausdorff: Option<f64>,
    /// Normal-cone width marking a singular point; default 4h/diameter.
    #[arg(long = "tol-angle", global = true)]
    pub angle: Option<f64>,
    /// Hessian classification tolerance.
    #[arg(long = "tol-hessian", global = true)]
    pub hessian: Option<f64>,
    /// Relative acceptance threshold of the solver.
    #[arg(long = "tol-accept", global = true)]
    pub accept: Option<f64>,
}

impl Tolerances {
    /// Fill unset entries from `base`.
    pub fn or(&self, base: &Tolerances) -> Tolerances {
        Tolerances {
            boundary: self.boundary.or(base.boundary),
            gap_lo: self.gap_lo.or(base.gap_lo),
            gap_hi: self.gap_hi.or(base.gap_hi),
            gap_fraction: self.gap_fraction.or(base.gap_fraction),
            extreme_distance: self.extreme_distance.or(base.extreme_distance),
            extreme_fraction: self.extreme_fraction.or(base.extreme_fraction),
            developability: self.developability.or(base.developability),
            hausdorff: self.hausdorff.or(base.hausdorff),
            angle: self.angle.or(base.angle),
            hessian: self.hessian.or(base.hessian),
            accept: self.accept.or(base.accept),
        }
    }

    pub fn verify(&self) -> VerifyTolerances {
        let d = VerifyTolerances::default();
        VerifyTolerances {
            boundary: self.boundary.unwrap_or(d.boundary),
            g_lo: self.gap_lo.unwrap_or(d.g_lo),
            g_hi: self.gap_hi.unwrap_or(d.g_hi),
            gap_fraction: self.gap_fraction.unwrap_or(d.gap_fraction),
            extreme_distance: self.extreme_distance.or(d.extreme_distance),
            extreme_fraction: self.extreme_fraction.unwrap_or(d.extreme_fraction),
            developability: self.developability.or(d.developability),
            hausdorff: self.hausdorff.or(d.hausdorff),
            angle_tol: self.angle.or(d.angle_tol),
            hessian_tol: self.hessian.or(d.hessian_tol),
        }
    }
}

#[derive(Clone, Debug, Subcommand, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Resistance along the 1D nose family: CSV (s, F, chord, residual) and a JSON summary.
    Toy(ToyArgs),
    /// Nose-stretch report at one point of a mesh.
    Stretch(StretchArgs),
    /// Minimize the resistance over convex functions bounded by M.
    Solve(SolveArgs),
    /// Structural checks of a mesh.
    Verify(VerifyArgs),
    /// Radially symmetric minimizer on a disk: CSV (r, phi).
    Radial(RadialArgs),
    /// Lower-hull surface of a mesh as OBJ.
    ExportObj(ExportObjArgs),
    /// Replay a saved run configuration.
    Run(ReplayArgs),
}

#[derive(Clone, Debug, Args, Serialize, Deserialize, PartialEq)]
pub struct ToyArgs {
    /// Convex function: x^2, x^4, |x|, cosh(x), exp(x), or breakpoints "pts:x0,y0;x1,y1;...".
    #[arg(long, default_value = "x^2")]
    pub u: String,
    /// Interval of definition.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true, default_values_t = [-1.0, 1.0])]
    pub range: Vec<f64>,
    /// Nose point below the graph.
    #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true, required = true)]
    pub o: Vec<f64>,
    /// Pressure law: newton1d (1/(1+p^2)) or quadratic1d (p^2).
    #[arg(long, default_value = "newton1d")]
    pub f: String,
    /// Number of equispaced s in [0, 1].
    #[arg(long, default_value_t = 11)]
    pub n: usize,
    /// Intervals used to sample an analytic function.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Directory for toy.csv and toy_summary.json; stdout and stderr otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize, PartialEq)]
pub struct StretchArgs {
    /// Input mesh JSON.
    #[arg(long)]
    pub mesh: PathBuf,
    /// Pressure model: newton, quadratic, affine:a1,a2,b, flat-disk:r.
    #[arg(long, default_value = "newton")]
    pub f: String,
    /// Check point.
    #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true, required = true)]
    pub x: Vec<f64>,
    /// Allowed sup-norm change.
    #[arg(long, default_value_t = 0.02)]
    pub eps: f64,
    /// Fixed initial half-width of the stretch.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Number of equispaced samples of F(s) on [0, 1].
    #[arg(long, default_value_t = 11)]
    pub samples: usize,
    /// Output JSON; stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize, PartialEq)]
pub struct SolveArgs {
    /// disk or square.
    #[arg(long, default_value = "disk")]
    pub domain: String,
    /// Disk radius or square half-side.
    #[arg(long = "R", default_value_t = 1.0)]
    pub r: f64,
    /// Height bound.
    #[arg(long = "M", default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, default_value = "newton")]
    pub f: String,
    /// Cells across the domain on the finest level.
    #[arg(long, default_value_t = 48)]
    pub grid: usize,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Total perturbation trials.
    #[arg(long, default_value_t = 200_000)]
    pub budget: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write surface.obj.
    #[arg(long)]
    pub obj: bool,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize, PartialEq)]
pub struct VerifyArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, default_value = "newton")]
    pub f: String,
    /// JSON tolerance file; `--tol-*` flags take precedence.
    #[arg(long)]
    pub tolerances: Option<PathBuf>,
    /// Output JSON; stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with code 2 when a check fails.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize, PartialEq)]
pub struct RadialArgs {
    /// Disk radius.
    #[arg(long = "L", default_value_t = 1.0)]
    pub l: f64,
    #[arg(long = "M", default_value_t = 1.0)]
    pub m: f64,
    /// Radial intervals.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value = "newton")]
    pub f: String,
    /// Output CSV; stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize, PartialEq)]
pub struct ExportObjArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize, PartialEq)]
pub struct ReplayArgs {
    #[arg(long)]
    pub config: PathBuf,
}
