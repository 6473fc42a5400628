//! Pressure models, resistance functionals and Hessian classification.

mod functional;
mod model;

pub use functional::{
    cell_gradients, classify_hessian, classify_sym, default_hessian_tol, degeneracy_radius, eval_F, eval_F_body,
    eval_f_masked, eval_f_surface, for_each_tri_cell, interior_cells, partition_domain, partition_with_surface,
    HessianClass, Region, RegionMask,
};
pub use model::{fd_gradient, fd_hessian, CustomPressure, PressureModel};
