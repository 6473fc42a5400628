//! The column-minimum profile `w` of the sheared function and its support
//! lines from the nose.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{GridFn, Surface};
use crate::math::Vec2;
use crate::resistance::PressureModel;
use crate::toy::ConvexFn1D;

/// Rotated and sheared coordinates around the anchor `x0`.
///
/// A point `x` has frame coordinates `t = <x - x0, e1>`, `tau = <x - x0, e2>`
/// and sheared height `z - shear * tau`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub origin: Vec2,
    pub e1: Vec2,
    pub e2: Vec2,
    pub shear: f64,
}

impl Frame {
    pub fn new(origin: Vec2, e1: Vec2, shear: f64) -> Frame {
        let e1 = e1.normalized();
        Frame { origin, e1, e2: e1.perp(), shear }
    }

    pub fn coords(&self, x: Vec2) -> (f64, f64) {
        let d = x - self.origin;
        (d.dot(self.e1), d.dot(self.e2))
    }

    pub fn point(&self, t: f64, tau: f64) -> Vec2 {
        self.origin + self.e1 * t + self.e2 * tau
    }

    pub fn sheared_height(&self, x: Vec2, z: f64) -> f64 {
        z - self.shear * self.coords(x).1
    }

    /// Original gradient for a sheared frame gradient `(p, q)`.
    pub fn gradient(&self, p: f64, q: f64) -> Vec2 {
        self.e1 * p + self.e2 * (q + self.shear)
    }

    /// The sheared integrand on the `e1` axis, `f(p, 0)` in frame terms.
    pub fn pressure(&self, f: &PressureModel, p: f64) -> f64 {
        f.value(self.gradient(p, 0.0))
    }

    /// Second derivative of the sheared integrand along `e1` at `(p, 0)`.
    pub fn curvature(&self, f: &PressureModel, p: f64) -> Result<f64> {
        Ok(f.hessian(self.gradient(p, 0.0))?.quad(self.e1))
    }
}

/// Profile data of one site.
#[derive(Clone, Debug)]
pub struct ProfileW {
    /// `w` as a convex piecewise-linear function of `t`.
    pub w: ConvexFn1D,
    pub z0: f64,
    pub xi_minus: f64,
    pub xi_plus: f64,
    pub t_minus: f64,
    pub t_plus: f64,
    /// Half-lengths and midpoints (in `tau`) of the contact segments.
    pub a_minus: f64,
    pub a_plus: f64,
    pub mid_minus: f64,
    pub mid_plus: f64,
    /// Quadrature nodes on `(t_minus, t_plus)`: `(t, weight, L(t))`.
    pub widths: Vec<(f64, f64, f64)>,
    /// Several breakpoints on one support line.
    pub tie: bool,
}

impl ProfileW {
    /// Slope of `w` on the piece containing `t`.
    pub fn slope_at(&self, t: f64) -> f64 {
        let xs = self.w.xs();
        let ys = self.w.ys();
        let i = xs.partition_point(|v| *v <= t).clamp(1, xs.len() - 1);
        (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1])
    }

    /// `int_{t-}^{t+} f(w'(t), 0) dt`, exact for piecewise-linear `w`.
    pub fn pressure_integral(&self, frame: &Frame, f: &PressureModel) -> f64 {
        let xs = self.w.xs();
        let ys = self.w.ys();
        let mut total = 0.0;
        for i in 0..xs.len() - 1 {
            let lo = xs[i].max(self.t_minus);
            let hi = xs[i + 1].min(self.t_plus);
            if hi > lo {
                let p = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
                total += frame.pressure(f, p) * (hi - lo);
            }
        }
        total
    }

    /// `int L(t) f(w'(t), 0) dt` over `(t-, t+)`.
    pub fn width_integral(&self, frame: &Frame, f: &PressureModel) -> f64 {
        self.widths.iter().map(|(t, wt, l)| wt * l * frame.pressure(f, self.slope_at(*t))).sum()
    }
}

/// Lower chain of `(t, z)` points, strictly convex.
fn lower_chain(mut pts: Vec<(f64, f64)>) -> Result<ConvexFn1D> {
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    let span = pts.last().map_or(0.0, |p| p.0) - pts.first().map_or(0.0, |p| p.0);
    let merge = 1e-12 * span.max(1e-300);
    // Column minima: abscissas within `merge` of a column's first one
    // belong to that column.
    let mut cols: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        match cols.last_mut() {
            Some(c) if p.0 - c.0 <= merge => c.1 = c.1.min(p.1),
            _ => cols.push(p),
        }
    }
    let mut chain: Vec<(f64, f64)> = Vec::new();
    for p in cols {
        while chain.len() >= 2 {
            let (o, a) = (chain[chain.len() - 2], chain[chain.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= 0.0 {
                chain.pop();
            } else {
                break;
            }
        }
        chain.push(p);
    }
    let (xs, ys) = chain.into_iter().unzip();
    ConvexFn1D::new(xs, ys)
}

/// Minimum over `tau` of the sheared function along the line `t`, with the
/// extent of the set where it is within `flat` of that minimum.
fn column_width(surf: &Surface, u: &GridFn, frame: &Frame, t: f64, floor: f64, flat: f64) -> f64 {
    let base = frame.point(t, 0.0);
    let Some((lo, hi)) = u.domain().clip_line(base, frame.e2) else { return 0.0 };
    let pad = 1e-9 * (hi - lo);
    let (lo, hi) = (lo + pad, hi - pad);
    let g = |tau: f64| match surf.eval(base + frame.e2 * tau) {
        Some(z) => z - frame.shear * tau,
        None => f64::INFINITY,
    };
    // Golden-section search for the minimizer of a convex function.
    let r = 0.5 * (crate::math::sqrt(5.0) - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..90 {
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    let tau_star = 0.5 * (a + b);
    let level = g(tau_star).min(floor) + flat;
    if g(tau_star) > level {
        return 0.0;
    }
    let edge = |mut inside: f64, mut outside: f64| {
        if g(outside) <= level {
            return outside;
        }
        for _ in 0..80 {
            let m = 0.5 * (inside + outside);
            if g(m) <= level {
                inside = m;
            } else {
                outside = m;
            }
        }
        inside
    };
    edge(tau_star, hi) - edge(tau_star, lo)
}

/// Flatness tolerance for contact sets, relative to the height range.
pub(crate) fn flat_tol(u: &GridFn) -> f64 {
    let span = u.values().iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(u.height_cap());
    1e-9 * (1.0 + span)
}

/// Compute the profile for the nose height `z0` at the frame origin.
pub(crate) fn compute_profile(u: &GridFn, surf: &Surface, frame: &Frame, z0: f64) -> Result<ProfileW> {
    let grid = u.grid();
    let proj: Vec<(f64, f64, f64)> = grid
        .nodes
        .iter()
        .zip(u.values())
        .map(|(x, z)| {
            let (t, tau) = frame.coords(*x);
            (t, tau, z - frame.shear * tau)
        })
        .collect();
    let w = lower_chain(proj.iter().map(|p| (p.0, p.2)).collect())?;
    let xs = w.xs();
    let ys = w.ys();
    let n = xs.len();
    let scale = 1.0 + ys.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let rel = 1e-12 * scale;
    if !(xs[0] < 0.0 && xs[n - 1] > 0.0) {
        return Err(Error::SiteTooLarge("anchor is not interior to the profile range".into()));
    }
    match w.eval(0.0) {
        Some(w0) if w0 > z0 => {}
        _ => return Err(Error::Invalid("nose height is not below the profile".into())),
    }
    // Support slopes from (0, z0): max over left breakpoints and min over
    // right breakpoints of the secant slope.
    let mut left: Option<(usize, f64)> = None;
    let mut right: Option<(usize, f64)> = None;
    let mut tie = false;
    for i in 0..n {
        let sl = (ys[i] - z0) / xs[i];
        if xs[i] < 0.0 {
            match left {
                Some((_, best)) if sl < best - rel => {}
                Some((_, best)) if sl <= best + rel => {
                    // Leftmost on ties.
                    tie = true;
                }
                _ => left = Some((i, sl)),
            }
        } else if xs[i] > 0.0 {
            match right {
                Some((_, best)) if sl > best + rel => {}
                Some((_, best)) if sl >= best - rel => {
                    tie = true;
                    right = Some((i, best));
                }
                _ => right = Some((i, sl)),
            }
        }
    }
    let (il, _) = left.ok_or_else(|| Error::SiteTooLarge("no support point left of the anchor".into()))?;
    let (ir, _) = right.ok_or_else(|| Error::SiteTooLarge("no support point right of the anchor".into()))?;
    if il == 0 || ir == n - 1 {
        return Err(Error::SiteTooLarge("support line touches the edge of the domain".into()));
    }
    let (t_minus, t_plus) = (xs[il], xs[ir]);
    let xi_minus = (ys[il] - z0) / t_minus;
    let xi_plus = (ys[ir] - z0) / t_plus;

    // Contact segments: graph nodes on the support planes.
    let flat = flat_tol(u);
    let contact = |t_c: f64, xi: f64| {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &proj {
            if (p.2 - (z0 + xi * p.0)).abs() <= flat && (p.0 - t_c).abs() <= 1e-9 * (1.0 + t_c.abs()) {
                lo = lo.min(p.1);
                hi = hi.max(p.1);
            }
        }
        if lo > hi {
            (0.0, 0.0)
        } else {
            (0.5 * (hi - lo), 0.5 * (hi + lo))
        }
    };
    let (a_minus, mid_minus) = contact(t_minus, xi_minus);
    let (a_plus, mid_plus) = contact(t_plus, xi_plus);

    // Width function on each piece of w inside (t-, t+): three-point
    // Gauss rule per piece.
    let gauss = [(-0.774_596_669_241_483_4, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.774_596_669_241_483_4, 5.0 / 9.0)];
    let mut widths = Vec::new();
    for i in il..ir {
        let (a, b) = (xs[i], xs[i + 1]);
        let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
        for (g, wt) in gauss {
            let t = m + r * g;
            let floor = w.eval(t).unwrap_or(f64::INFINITY);
            widths.push((t, wt * r, column_width(surf, u, frame, t, floor, flat)));
        }
    }
    Ok(ProfileW {
        w,
        z0,
        xi_minus,
        xi_plus,
        t_minus,
        t_plus,
        a_minus,
        a_plus,
        mid_minus,
        mid_plus,
        widths,
        tie,
    })
}

