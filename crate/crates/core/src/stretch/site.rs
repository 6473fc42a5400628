//! Site selection: frame, nose segment, working set and validity range.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Hypothesis, Result};
use crate::geometry::{normal_cone_widths, GridFn, Segment3, Surface};
use crate::math::{powi, Vec2, Vec3};
use crate::resistance::{classify_hessian, HessianClass, PressureModel};

use super::family::{check_member, member};
use super::profile::{compute_profile, Frame, ProfileW};

/// Tuning knobs of [`prepare_site`].
#[derive(Clone, Debug, PartialEq)]
pub struct SiteOptions {
    /// Normal-cone width above which a node counts as singular here.
    pub angle_tol: f64,
    /// Initial nose depth as a fraction of `eps`.
    pub depth_fraction: f64,
    /// Fixed initial half-width; by default half the shorter tangency distance.
    pub delta: Option<f64>,
    /// Number of halvings of the depth before giving up.
    pub max_halvings: usize,
    /// Pairs sampled for the concavity condition.
    pub concavity_pairs: usize,
    /// Hessian classification tolerance; `None` for the default.
    pub hessian_tol: Option<f64>,
    /// Positive probes `2^-k`, `k = 0..positive_probes`.
    pub positive_probes: u32,
    /// Negative probes `-2^-k`, `k = 1..=negative_probes`.
    pub negative_probes: u32,
}

impl Default for SiteOptions {
    fn default() -> Self {
        SiteOptions {
            angle_tol: 0.5,
            depth_fraction: 0.5,
            delta: None,
            max_halvings: 12,
            concavity_pairs: 32,
            hessian_tol: None,
            positive_probes: 5,
            negative_probes: 16,
        }
    }
}

/// A prepared nose-stretch site on one grid function.
#[derive(Clone, Debug)]
pub struct StretchSite {
    pub check_point: Vec2,
    pub check_node: usize,
    pub eps: f64,
    pub frame: Frame,
    pub z0: f64,
    pub delta: f64,
    pub segment: Segment3,
    /// Radius of the ball where the concavity condition was verified.
    pub concavity_radius: f64,
    /// Radius of the open ball around the check point used as working set.
    pub working_radius: f64,
    /// Most negative probed `s` whose member passes the validity checks.
    pub s0: f64,
    /// Largest probed `s` in `(0, 1]` whose member passes them.
    pub s_max: f64,
    pub profile: ProfileW,
    pub warnings: Vec<String>,
    surf: Arc<Surface>,
    owner: (usize, f64),
}

fn fingerprint(u: &GridFn) -> (usize, f64) {
    let s = u.values().iter().enumerate().map(|(i, v)| v * (1.0 + (i % 7) as f64)).sum();
    (u.len(), s)
}

impl StretchSite {
    pub fn anchor(&self) -> Vec2 {
        self.frame.origin
    }

    pub fn shear(&self) -> f64 {
        self.frame.shear
    }

    /// Endpoints `A`, `B` of the nose segment.
    pub fn endpoints(&self) -> (Vec3, Vec3) {
        (self.segment.a, self.segment.b)
    }

    pub fn in_working_set(&self, x: Vec2) -> bool {
        (x - self.check_point).norm() < self.working_radius
    }

    /// Lower-hull surface of the function the site was prepared on.
    pub fn surface(&self) -> &Surface {
        &self.surf
    }

    pub(crate) fn check_owner(&self, u: &GridFn) -> Result<()> {
        if fingerprint(u) != self.owner {
            return Err(Error::Invalid("site was prepared for a different function".into()));
        }
        Ok(())
    }
}

/// Gradient at a node: central differences when the four lattice
/// neighbours exist, else the area-weighted mean of the incident triangles.
pub(crate) fn node_gradient(u: &GridFn, surf: &Surface, tris: &[u32], node: usize) -> Vec2 {
    let grid = u.grid();
    let v = u.values();
    if let Some((i, j)) = grid.lattice_pos(node) {
        let nb = |di: isize, dj: isize| {
            let (a, b) = (i as isize + di, j as isize + dj);
            if a < 0 || b < 0 {
                return None;
            }
            let id = grid.node_at(a as usize, b as usize)?;
            let d = grid.nodes[id] - grid.nodes[node];
            ((d.norm() - grid.h).abs() <= 1e-9 * grid.h).then_some(id)
        };
        if let (Some(e), Some(w), Some(n), Some(s)) = (nb(1, 0), nb(-1, 0), nb(0, 1), nb(0, -1)) {
            let h2 = 2.0 * grid.h;
            return Vec2::new((v[e] - v[w]) / h2, (v[n] - v[s]) / h2);
        }
    }
    let mut g = Vec2::ZERO;
    let mut wsum = 0.0;
    for &t in tris {
        g = g + surf.grads[t as usize] * surf.areas[t as usize];
        wsum += surf.areas[t as usize];
    }
    if wsum > 0.0 {
        g / wsum
    } else {
        g
    }
}

/// Nose segment for depth `z0` and half-width `delta` in the frame.
fn nose_segment(frame: &Frame, z0: f64, delta: f64) -> Result<Segment3> {
    let pa = frame.point(0.0, -delta);
    let pb = frame.point(0.0, delta);
    Segment3::new(pa.lift(z0 - frame.shear * delta), pb.lift(z0 + frame.shear * delta))
}

/// Strict concavity of `f` along gradient segments parallel to `e1`.
fn concavity_holds(f: &PressureModel, e1: Vec2, grads: &[Vec2], pairs: usize) -> bool {
    let parallel = |d: Vec2| {
        let n = d.norm();
        n > 1e-12 && (d.cross(e1) / n).abs() <= 0.05
    };
    let concave_on = |g0: Vec2, g1: Vec2| {
        let d = g1 - g0;
        for k in 0..=4 {
            let lam = k as f64 / 4.0;
            match f.hessian(g0 + d * lam) {
                Ok(h) if h.quad(d) < 0.0 => {}
                _ => return false,
            }
        }
        let mid = (g0 + g1) * 0.5;
        f.value(mid) > 0.5 * (f.value(g0) + f.value(g1))
    };
    let mut found = 0;
    for (i, gi) in grads.iter().enumerate() {
        if found >= pairs {
            break;
        }
        let best = grads
            .iter()
            .enumerate()
            .filter(|(j, gj)| *j != i && parallel(**gj - *gi))
            .max_by(|a, b| (*a.1 - *gi).norm2().partial_cmp(&(*b.1 - *gi).norm2()).unwrap_or(core::cmp::Ordering::Equal));
        if let Some((_, gj)) = best {
            if !concave_on(*gi, *gj) {
                return false;
            }
            found += 1;
        }
    }
    true
}

/// Prepare a nose-stretch site at the node nearest to `check_point`.
pub fn prepare_site(u: &GridFn, f: &PressureModel, check_point: Vec2, eps: f64, opts: &SiteOptions) -> Result<StretchSite> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Range { what: "tolerance", value: eps });
    }
    let grid = u.grid().clone();
    let h = grid.h;
    let node = (0..grid.len())
        .filter(|&i| !grid.on_boundary[i])
        .min_by(|&i, &j| {
            (grid.nodes[i] - check_point)
                .norm2()
                .partial_cmp(&(grid.nodes[j] - check_point).norm2())
                .unwrap_or(core::cmp::Ordering::Equal)
        })
        .ok_or_else(|| Error::Invalid("grid has no interior node".into()))?;
    let x0 = grid.nodes[node];
    let surf = Arc::new(u.surface()?);
    if !surf.vertex_mask[node] {
        return Err(Error::Precondition(Hypothesis::NotExtreme));
    }
    let inc = surf.node_incidence(&grid);
    let widths = normal_cone_widths(u, &surf);
    if widths[node] > opts.angle_tol {
        return Err(Error::Precondition(Hypothesis::SingularNearby));
    }
    let g0 = node_gradient(u, &surf, &inc[node], node);
    let hess = f.hessian(g0)?;
    if classify_hessian(f, g0, opts.hessian_tol)? != HessianClass::Neg {
        return Err(Error::Precondition(Hypothesis::NoNegativeEigenvalue));
    }
    let (lo, hi) = hess.eigenvalues();
    let mut e1 = if (hi - lo) <= 1e-8 * hess.max_abs().max(1e-300) { Vec2::new(1.0, 0.0) } else { hess.min_eigenvector() };
    if e1.x < 0.0 || (e1.x == 0.0 && e1.y < 0.0) {
        e1 = -e1;
    }
    let shear = g0.dot(e1.perp());
    let frame = Frame::new(x0, e1, shear);
    let mut warnings = Vec::new();

    // Concavity radius: halve until the sampled condition holds.
    let dist = u.domain().inside_distance(x0);
    let mut r = 0.5 * dist;
    loop {
        if r < 2.0 * h {
            return Err(Error::Resolution(format!("concavity condition fails down to radius {r}")));
        }
        let mut near: Vec<usize> = (0..grid.len()).filter(|&i| !grid.on_boundary[i] && (grid.nodes[i] - x0).norm() < r).collect();
        near.sort_by(|&i, &j| {
            (grid.nodes[i] - x0)
                .norm2()
                .partial_cmp(&(grid.nodes[j] - x0).norm2())
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(i.cmp(&j))
        });
        // Thin out evenly so the sample still spans the whole ball.
        let stride = near.len().div_ceil(2048).max(1);
        let near: Vec<usize> = near.into_iter().step_by(stride).collect();
        let grads: Vec<Vec2> = near.iter().map(|&i| node_gradient(u, &surf, &inc[i], i)).collect();
        if concavity_holds(f, e1, &grads, opts.concavity_pairs) {
            if near.iter().any(|&i| widths[i] > opts.angle_tol) {
                return Err(Error::Precondition(Hypothesis::SingularNearby));
            }
            break;
        }
        r *= 0.5;
    }
    let working_radius = (2.0 * r).min(dist);

    let u0 = u.values()[node];
    let mut depth = opts.depth_fraction * eps;
    let mut last = String::from("no attempt");
    let mut too_large = false;
    for k in 0..=opts.max_halvings {
        let z0 = u0 - depth;
        let scale = powi(0.5, k as i32);
        depth *= 0.5;
        let profile = match compute_profile(u, &surf, &frame, z0) {
            Ok(p) => p,
            Err(Error::SiteTooLarge(m)) => {
                last = m;
                too_large = true;
                continue;
            }
            Err(e) => return Err(e),
        };
        let contacts = [
            frame.point(profile.t_minus, profile.mid_minus - profile.a_minus),
            frame.point(profile.t_minus, profile.mid_minus + profile.a_minus),
            frame.point(profile.t_plus, profile.mid_plus - profile.a_plus),
            frame.point(profile.t_plus, profile.mid_plus + profile.a_plus),
        ];
        if contacts.iter().any(|p| (*p - x0).norm() >= working_radius) {
            last = String::from("contact segment leaves the working set");
            too_large = true;
            continue;
        }
        let delta = match opts.delta {
            Some(d) => d * scale,
            None => 0.5 * (-profile.t_minus).min(profile.t_plus),
        };
        if delta < h {
            return Err(Error::Resolution(format!("half-width {delta} below grid step {h}")));
        }
        let segment = nose_segment(&frame, z0, delta)?;
        let below = [segment.a, segment.b].iter().all(|p| surf.eval(p.xy()).is_some_and(|z| p.z < z));
        if !below {
            last = String::from("nose segment not below the graph");
            too_large = false;
            continue;
        }
        let concave = (0..=32).all(|i| {
            let p = profile.xi_minus + (profile.xi_plus - profile.xi_minus) * i as f64 / 32.0;
            frame.curvature(f, p).is_ok_and(|c| c < 0.0)
        });
        if !concave {
            last = String::from("integrand not strictly concave between the support slopes");
            too_large = false;
            continue;
        }
        if profile.tie {
            warnings.push(String::from("support line touches the profile along a segment"));
        }
        let mut site = StretchSite {
            check_point: x0,
            check_node: node,
            eps,
            frame,
            z0,
            delta,
            segment,
            concavity_radius: r,
            working_radius,
            s0: 0.0,
            s_max: 0.0,
            profile,
            warnings: warnings.clone(),
            surf: surf.clone(),
            owner: fingerprint(u),
        };
        let (a, b) = site.endpoints();
        let mut s_max = None;
        for j in 0..opts.positive_probes {
            let s = powi(0.5, j as i32);
            let m = member(u, &surf, a, b, s)?;
            if check_member(u, &m, &site).ok() {
                s_max = Some(s);
                break;
            }
        }
        let Some(s_max) = s_max else {
            last = String::from("no positive probe satisfies the validity checks");
            too_large = false;
            continue;
        };
        if s_max < 1.0 {
            site.warnings.push(format!("validity checks hold only up to s = {s_max}"));
        }
        site.s_max = s_max;
        for j in 1..=opts.negative_probes {
            let s = -(powi(0.5, j as i32));
            let m = member(u, &surf, a, b, s)?;
            if check_member(u, &m, &site).ok() {
                site.s0 = s;
                break;
            }
        }
        return Ok(site);
    }
    if too_large {
        return Err(Error::SiteTooLarge(last));
    }
    Err(Error::Resolution(last))
}
