//! Members of the two-sided family `C_s` and their resistance.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{shrink_with_surface, GridFn, Surface};
use crate::math::Vec3;
use crate::resistance::{eval_F, eval_f_surface, PressureModel};

use super::site::StretchSite;

/// Images `(1 - s) p + s c` of graph points that fall below the graph.
/// Images on or above the graph lie inside `C` and cannot be hull vertices.
fn images_below(pts: &[Vec3], surf: &Surface, c: Vec3, s: f64) -> Vec<Vec3> {
    pts.iter()
        .map(|p| *p * (1.0 - s) + c * s)
        .filter(|q| surf.eval(q.xy()).is_some_and(|z| q.z < z))
        .collect()
}

/// Lower surface of `C_s` for `0 < s <= 1`, using
/// `(1 - s) C + s conv(C, I) = conv(C, (1 - s) C + s A, (1 - s) C + s B)`.
pub(crate) fn positive_surface(u: &GridFn, surf: &Surface, a: Vec3, b: Vec3, s: f64) -> Result<Surface> {
    let mut pts = u.points();
    let extra: Vec<Vec3> = if s >= 1.0 {
        alloc::vec![a, b]
    } else {
        let mut e = images_below(&pts, surf, a, s);
        e.extend(images_below(&pts, surf, b, s));
        e
    };
    pts.extend(extra);
    Surface::lower_hull(pts, u.hull_eps())
}

/// Grid member for any `s`; `surf` is the surface of `u`.
pub(crate) fn member(u: &GridFn, surf: &Surface, a: Vec3, b: Vec3, s: f64) -> Result<GridFn> {
    if s == 0.0 {
        return Ok(u.clone());
    }
    if s < 0.0 {
        return shrink_with_surface(u, surf, &[a, b], s);
    }
    let ps = positive_surface(u, surf, a, b, s)?;
    let vals = ps.sample(u.grid())?;
    // The member lies below u; clip rounding above it.
    u.with_values(vals.iter().zip(u.values()).map(|(x, y)| x.min(*y)).collect())
}

/// Resistance of the member: exact polytope value for `s` in `[0, 1]`,
/// grid value for `s < 0`.
pub(crate) fn member_resistance(u: &GridFn, surf: &Surface, a: Vec3, b: Vec3, f: &PressureModel, s: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(eval_f_surface(surf, f));
    }
    if s > 0.0 {
        return Ok(eval_f_surface(&positive_surface(u, surf, a, b, s)?, f));
    }
    eval_F(&member(u, surf, a, b, s)?, f, None)
}

/// Outcome of the node-wise checks of one member.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemberCheck {
    /// Largest change at nodes outside the working set.
    pub outside_change: f64,
    /// Largest change anywhere.
    pub max_change: f64,
    pub unchanged_outside: bool,
    pub within_eps: bool,
}

impl MemberCheck {
    pub fn ok(&self) -> bool {
        self.unchanged_outside && self.within_eps
    }
}

pub(crate) fn check_member(u: &GridFn, m: &GridFn, site: &StretchSite) -> MemberCheck {
    let tol = u.envelope_tol();
    let mut outside_change: f64 = 0.0;
    let mut max_change: f64 = 0.0;
    for ((x, a), b) in u.grid().nodes.iter().zip(u.values()).zip(m.values()) {
        let d = (a - b).abs();
        max_change = max_change.max(d);
        if !site.in_working_set(*x) {
            outside_change = outside_change.max(d);
        }
    }
    MemberCheck {
        outside_change,
        max_change,
        unchanged_outside: outside_change <= tol,
        within_eps: max_change < site.eps,
    }
}

fn check_s(site: &StretchSite, s: f64) -> Result<()> {
    if !s.is_finite() || s > 1.0 {
        return Err(Error::Range { what: "family parameter", value: s });
    }
    if s < site.s0 {
        return Err(Error::Validity(format!("s = {s} is below s0 = {}", site.s0)));
    }
    Ok(())
}

/// The member `u^(s)` of the family through `u` for `s0 <= s <= 1`.
pub fn family_at(u: &GridFn, site: &StretchSite, s: f64) -> Result<GridFn> {
    site.check_owner(u)?;
    check_s(site, s)?;
    let (a, b) = site.endpoints();
    member(u, site.surface(), a, b, s)
}

/// `(s, F(u^(s)))` for every requested `s`, in input order.
pub fn sweep_resistance(u: &GridFn, site: &StretchSite, f: &PressureModel, s_values: &[f64]) -> Result<Vec<(f64, f64)>> {
    site.check_owner(u)?;
    let (a, b) = site.endpoints();
    s_values
        .iter()
        .map(|&s| {
            check_s(site, s)?;
            Ok((s, member_resistance(u, site.surface(), a, b, f, s)?))
        })
        .collect()
}
