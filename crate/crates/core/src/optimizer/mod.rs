//! Minimization over convex functions bounded by `M`, the radial baseline
//! and structural checks of candidate solutions.

mod planes;
mod radial;
mod solve;
mod verify;

pub use planes::Plane;
pub use radial::{pav, project_slopes, radial_resistance, ring_weights, solve_radial_1d, RadialSolution};
pub use solve::{solve_2d, stretch_candidates, SolveConfig, SolveResult, TraceEntry};
pub use verify::{
    hausdorff_inner, point_distance, reconstruct_from_singular, verify_solution, Check, Developability, ExtremeVsSingular,
    GradientGap, PartitionSummary, Reconstruction, VerificationReport, VerifyTolerances, REPORT_NOTE,
};
