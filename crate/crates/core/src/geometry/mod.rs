//! Grids, convex grid functions, polytopes and their operations.

mod body;
mod domain;
mod gridfn;
mod singular;
mod surface;

pub use body::{
    body_to_fn, conv_with_segment, epigraph_body, extreme_vertices, homothety, lower_surface, minkowski_blend,
    shrink_family_negative, support_function, Facet, PolyBody, Segment3,
};
pub(crate) use body::shrink_with_surface;
pub use domain::{Domain, DomainKind, Grid};
pub use gridfn::{lower_convex_envelope, GridFn, ENVELOPE_REL, HULL_MERGE_REL};
pub use singular::{default_angle_tol, graph_normal, normal_cone_widths, singular_from_widths, singular_points};
pub use surface::{clipped_area, Surface};
