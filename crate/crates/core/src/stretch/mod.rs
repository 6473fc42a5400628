//! The nose-stretch variation: site selection, the family `C_s`, its
//! quadratic resistance law and a descent step built on it.

mod coeffs;
mod family;
mod improve;
mod profile;
mod site;

pub use coeffs::{analytic_coeffs, fit_quadratic, AnalyticCoeffs, NormalClass, QuadCoeffs, QuadFit};
pub use family::{family_at, sweep_resistance, MemberCheck};
pub use improve::{improvement_step, improvement_step_with, ImproveOptions, Improvement};
pub use profile::{Frame, ProfileW};
pub use site::{prepare_site, SiteOptions, StretchSite};

use crate::error::Result;
use crate::geometry::GridFn;

/// Profile of the site (computed during preparation).
pub fn profile_w(u: &GridFn, site: &StretchSite) -> Result<ProfileW> {
    site.check_owner(u)?;
    Ok(site.profile.clone())
}

/// Node-wise validity checks of a family member against the site.
pub fn check_family_member(u: &GridFn, member: &GridFn, site: &StretchSite) -> Result<MemberCheck> {
    site.check_owner(u)?;
    Ok(family::check_member(u, member, site))
}

/// Profile of `u` for a nose at height `z0` above the origin of `frame`.
pub fn profile_in_frame(u: &GridFn, frame: &Frame, z0: f64) -> Result<ProfileW> {
    profile::compute_profile(u, &u.surface()?, frame, z0)
}
