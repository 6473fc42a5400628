//! One-dimensional nose stretching on a segment `[a, b]`.
//!
//! Everything here works on exact piecewise-linear geometry, so the
//! resistance of the family is linear in `s` on `[0, 1]` up to rounding.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::Vec2;

/// Convex piecewise-linear function through `(xs[i], ys[i])`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexFn1D {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl ConvexFn1D {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<ConvexFn1D> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Invalid(format!("{} abscissas and {} values", xs.len(), ys.len())));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite breakpoint".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("breakpoints must increase strictly".into()));
        }
        let u = ConvexFn1D { xs, ys };
        let sl = u.slopes();
        let scale = sl.iter().fold(1.0_f64, |m, s| m.max(s.abs()));
        if sl.windows(2).any(|w| w[1] < w[0] - 1e-9 * scale) {
            return Err(Error::Invalid("slopes are not nondecreasing".into()));
        }
        Ok(u)
    }

    /// Interpolate `f` at `n + 1` equispaced breakpoints on `[a, b]`.
    pub fn from_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Result<ConvexFn1D> {
        if !(b > a) || n == 0 {
            return Err(Error::Invalid(format!("bad sampling of [{a}, {b}] with {n} segments")));
        }
        let xs: Vec<f64> = (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect();
        let ys = xs.iter().map(|x| f(*x)).collect();
        Self::new(xs, ys)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn slopes(&self) -> Vec<f64> {
        (0..self.xs.len() - 1).map(|i| (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])).collect()
    }

    pub fn point(&self, i: usize) -> Vec2 {
        Vec2::new(self.xs[i], self.ys[i])
    }

    /// Value at `x`; `None` outside the range.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let (a, b) = self.range();
        if x < a || x > b {
            return None;
        }
        let i = self.xs.partition_point(|v| *v <= x).clamp(1, self.xs.len() - 1);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let t = (x - x0) / (x1 - x0);
        Some(self.ys[i - 1] + t * (self.ys[i] - self.ys[i - 1]))
    }
}

/// `sum f1(slope_i) * length_i`.
pub fn resistance_1d(u: &ConvexFn1D, f1: impl Fn(f64) -> f64) -> f64 {
    let mut total = 0.0;
    for i in 0..u.xs.len() - 1 {
        let dx = u.xs[i + 1] - u.xs[i];
        total += f1((u.ys[i + 1] - u.ys[i]) / dx) * dx;
    }
    total
}

/// `int_a^b f1(du(x)) dx` by adaptive Simpson quadrature.
pub fn resistance_1d_smooth(du: impl Fn(f64) -> f64, f1: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let g = |x: f64| f1(du(x));
    adaptive_simpson(&g, a, b, tol)
}

/// Adaptive Simpson rule with Richardson correction.
pub fn adaptive_simpson(g: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(g: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (g(lm), g(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (g(a), g(0.5 * (a + b)), g(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(g, a, b, fa, fm, fb, whole, tol, 50)
}

/// The family generated by a nose `O` below the graph.
#[derive(Clone, Debug)]
pub struct ToyFamily {
    base: ConvexFn1D,
    nose: Vec2,
    /// Breakpoint indices of the tangency points `A0`, `B0`.
    ia: usize,
    ib: usize,
    /// Working interval: the family must leave `u` unchanged outside it.
    working: (f64, f64),
}

impl ToyFamily {
    /// Tangent lines from `O` touch at breakpoints; ties go to the leftmost
    /// touching point for `A0` and the rightmost for `B0`.
    pub fn new(base: ConvexFn1D, nose: Vec2) -> Result<ToyFamily> {
        let (a, b) = base.range();
        if !(nose.x > a && nose.x < b) {
            return Err(Error::Validity(format!("nose abscissa {} outside ({a}, {b})", nose.x)));
        }
        let at = base.eval(nose.x).unwrap_or(f64::NAN);
        if !(nose.y < at) {
            return Err(Error::Validity(format!("nose height {} not below the graph value {at}", nose.y)));
        }
        let n = base.len();
        let slope = |i: usize| (base.ys[i] - nose.y) / (base.xs[i] - nose.x);
        let mut ia = usize::MAX;
        let mut ib = usize::MAX;
        for i in 0..n {
            if base.xs[i] < nose.x {
                if ia == usize::MAX || slope(i) > slope(ia) + 1e-14 * slope(ia).abs() {
                    ia = i;
                }
            } else if base.xs[i] > nose.x && (ib == usize::MAX || slope(i) <= slope(ib) + 1e-14 * slope(ib).abs()) {
                ib = i;
            }
        }
        if ia == usize::MAX || ib == usize::MAX || ia == 0 || ib == n - 1 {
            return Err(Error::Validity("tangent lines from the nose touch the graph at an endpoint".into()));
        }
        let (xa, xb) = (base.xs[ia], base.xs[ib]);
        let margin = 0.5 * (xa - a).min(b - xb);
        Ok(ToyFamily { base, nose, ia, ib, working: (xa - margin, xb + margin) })
    }

    /// Replace the working interval; it must contain both tangency points.
    pub fn with_working_interval(mut self, lo: f64, hi: f64) -> Result<ToyFamily> {
        let (xa, xb) = (self.base.xs[self.ia], self.base.xs[self.ib]);
        if !(lo < xa && hi > xb) {
            return Err(Error::Validity(format!("working interval ({lo}, {hi}) misses a tangency point")));
        }
        self.working = (lo, hi);
        Ok(self)
    }

    pub fn working_interval(&self) -> (f64, f64) {
        self.working
    }

    pub fn base(&self) -> &ConvexFn1D {
        &self.base
    }

    pub fn nose(&self) -> Vec2 {
        self.nose
    }

    /// Tangency points `A0` and `B0`.
    pub fn tangency(&self) -> (Vec2, Vec2) {
        (self.base.point(self.ia), self.base.point(self.ib))
    }

    /// Slopes of the tangent segments `O A0` and `O B0`.
    pub fn tangent_slopes(&self) -> (f64, f64) {
        let (a0, b0) = self.tangency();
        ((a0.y - self.nose.y) / (a0.x - self.nose.x), (b0.y - self.nose.y) / (b0.x - self.nose.x))
    }

    /// `F(O A0) + F(O B0) - F(A0 B0)`.
    pub fn analytic_slope(&self, f1: impl Fn(f64) -> f64) -> f64 {
        let (a0, b0) = self.tangency();
        let (ma, mb) = self.tangent_slopes();
        let arc = ConvexFn1D {
            xs: self.base.xs[self.ia..=self.ib].to_vec(),
            ys: self.base.ys[self.ia..=self.ib].to_vec(),
        };
        f1(ma) * (self.nose.x - a0.x) + f1(mb) * (b0.x - self.nose.x) - resistance_1d(&arc, f1)
    }
}

fn push_point(xs: &mut Vec<f64>, ys: &mut Vec<f64>, x: f64, y: f64) {
    if let Some(&last) = xs.last() {
        if x <= last {
            // Coincident point (s = 0 or s = 1 images): keep the lower value.
            let k = ys.len() - 1;
            ys[k] = ys[k].min(y);
            return;
        }
    }
    xs.push(x);
    ys.push(y);
}

/// Member `u^(s)` of the family for `s <= 1`.
pub fn toy_family_at(fam: &ToyFamily, s: f64) -> Result<ConvexFn1D> {
    if !(s <= 1.0) || !s.is_finite() {
        return Err(Error::Range { what: "family parameter", value: s });
    }
    if s == 0.0 {
        return Ok(fam.base.clone());
    }
    if s > 0.0 {
        return Ok(blend_positive(fam, s));
    }
    let v = shrink_negative(fam, s);
    // Outside the working interval the family must not move.
    let (lo, hi) = fam.working;
    let scale = fam.base.ys.iter().fold(1.0_f64, |m, y| m.max(y.abs()));
    for (x, y) in v.xs.iter().zip(&v.ys) {
        if (*x <= lo || *x >= hi) && (y - fam.base.eval(*x).unwrap_or(*y)).abs() > 1e-12 * scale {
            return Err(Error::Validity(format!("s = {s} modifies the function at x = {x}")));
        }
    }
    Ok(v)
}

fn blend_positive(fam: &ToyFamily, s: f64) -> ConvexFn1D {
    let u = &fam.base;
    let o = fam.nose;
    let k = 1.0 - s;
    let mut xs = Vec::with_capacity(u.len() + 2);
    let mut ys = Vec::with_capacity(u.len() + 2);
    for i in 0..=fam.ia {
        push_point(&mut xs, &mut ys, u.xs[i], u.ys[i]);
    }
    for i in fam.ia..=fam.ib {
        let p = o + (u.point(i) - o) * k;
        push_point(&mut xs, &mut ys, p.x, p.y);
    }
    for i in fam.ib..u.len() {
        push_point(&mut xs, &mut ys, u.xs[i], u.ys[i]);
    }
    ConvexFn1D { xs, ys }
}

/// `max(u, O + (1 - s)(u - O))` on the original range.
fn shrink_negative(fam: &ToyFamily, s: f64) -> ConvexFn1D {
    let u = &fam.base;
    let o = fam.nose;
    let k = 1.0 - s;
    let (a, b) = u.range();
    let img = ConvexFn1D {
        xs: u.xs.iter().map(|x| o.x + (x - o.x) * k).collect(),
        ys: u.ys.iter().map(|y| o.y + (y - o.y) * k).collect(),
    };
    let mut cand: Vec<f64> = u.xs.clone();
    cand.extend(img.xs.iter().copied().filter(|x| *x > a && *x < b));
    cand.sort_by(|p, q| p.partial_cmp(q).unwrap_or(core::cmp::Ordering::Equal));
    cand.dedup();
    let value = |x: f64| {
        let ux = u.eval(x).unwrap_or(f64::NEG_INFINITY);
        let vx = img.eval(x).unwrap_or(f64::NEG_INFINITY);
        (ux, vx)
    };
    let mut xs = Vec::with_capacity(cand.len() + 8);
    let mut ys = Vec::with_capacity(cand.len() + 8);
    for w in 0..cand.len() {
        let x = cand[w];
        let (ux, vx) = value(x);
        push_point(&mut xs, &mut ys, x, ux.max(vx));
        if w + 1 < cand.len() {
            // Both pieces are affine on the gap: add their crossing if any.
            let x1 = cand[w + 1];
            let (ux1, vx1) = value(x1);
            let (d0, d1) = (ux - vx, ux1 - vx1);
            if d0 * d1 < 0.0 {
                let t = d0 / (d0 - d1);
                let xc = x + t * (x1 - x);
                if xc > x && xc < x1 {
                    let (uc, vc) = value(xc);
                    push_point(&mut xs, &mut ys, xc, uc.max(vc));
                }
            }
        }
    }
    ConvexFn1D { xs, ys }
}

/// One sweep row: `F(s)`, the chord through the endpoints and the residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToyRow {
    pub s: f64,
    pub f: f64,
    pub chord: f64,
    pub residual: f64,
}

/// `F(u^(s))` at `n` equispaced `s` in `[0, 1]` against the chord between
/// `s = 0` and `s = 1`.
pub fn toy_sweep(fam: &ToyFamily, f1: impl Fn(f64) -> f64 + Copy, n: usize) -> Result<Vec<ToyRow>> {
    if n == 0 {
        return Err(Error::Invalid("empty sweep".into()));
    }
    let f0 = resistance_1d(&fam.base, f1);
    let f_one = resistance_1d(&toy_family_at(fam, 1.0)?, f1);
    (0..n)
        .map(|i| {
            let s = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            let f = resistance_1d(&toy_family_at(fam, s)?, f1);
            let chord = f0 + s * (f_one - f0);
            Ok(ToyRow { s, f, chord, residual: f - chord })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToySlopes {
    /// Least-squares slope of `F(u^(s))` over `s = 0, 0.1, ..., 1`.
    pub numeric: f64,
    /// `F(O A0) + F(O B0) - F(A0 B0)`.
    pub analytic: f64,
    /// One-sided difference quotients at `s = 0`.
    pub right: f64,
    pub left: f64,
    /// Central difference at `s = 0`.
    pub central: f64,
    /// Largest deviation from the chord over the sweep.
    pub chord_residual: f64,
}

/// Numeric and analytic slopes of the resistance along the family.
pub fn toy_slope_identity(fam: &ToyFamily, f1: impl Fn(f64) -> f64 + Copy, step: f64) -> Result<ToySlopes> {
    let rows = toy_sweep(fam, f1, 11)?;
    let n = rows.len() as f64;
    let ms = rows.iter().map(|r| r.s).sum::<f64>() / n;
    let mf = rows.iter().map(|r| r.f).sum::<f64>() / n;
    let num: f64 = rows.iter().map(|r| (r.s - ms) * (r.f - mf)).sum();
    let den: f64 = rows.iter().map(|r| (r.s - ms) * (r.s - ms)).sum();
    let chord_residual = rows.iter().fold(0.0_f64, |m, r| m.max(r.residual.abs()));
    let f = |s: f64| toy_family_at(fam, s).map(|v| resistance_1d(&v, f1));
    let (fp, f0, fm) = (f(step)?, f(0.0)?, f(-step)?);
    Ok(ToySlopes {
        numeric: num / den,
        analytic: fam.analytic_slope(f1),
        right: (fp - f0) / step,
        left: (f0 - fm) / step,
        central: (fp - fm) / (2.0 * step),
        chord_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{atan, sqrt};
    use alloc::vec;

    fn newton1(p: f64) -> f64 {
        1.0 / (1.0 + p * p)
    }

    fn parabola() -> ToyFamily {
        let u = ConvexFn1D::from_fn(|x| x * x, -1.0, 1.0, 2000).unwrap();
        ToyFamily::new(u, Vec2::new(0.0, -0.2)).unwrap()
    }

    #[test]
    fn resistance_examples() {
        let c = ConvexFn1D::new(vec![-1.0, 1.0], vec![3.0, 3.0]).unwrap();
        assert_eq!(resistance_1d(&c, newton1), 2.0);
        let v = ConvexFn1D::new(vec![-1.0, 0.0, 1.0], vec![1.0, 0.0, 1.0]).unwrap();
        assert_eq!(resistance_1d(&v, newton1), 1.0);
        let q = resistance_1d_smooth(|x| 2.0 * x, newton1, -1.0, 1.0, 1e-12);
        assert!((q - atan(2.0)).abs() < 1e-10);
    }

    #[test]
    fn rejects_concave() {
        assert!(ConvexFn1D::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).is_err());
        assert!(ConvexFn1D::new(vec![0.0, 0.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn tangency_on_parabola() {
        let fam = parabola();
        let (a0, b0) = fam.tangency();
        assert!((a0.x + sqrt(0.2)).abs() < 1e-3);
        assert!((b0.x - sqrt(0.2)).abs() < 1e-3);
        let (ma, mb) = fam.tangent_slopes();
        assert!((ma + 2.0 * sqrt(0.2)).abs() < 2e-3 && (mb - 2.0 * sqrt(0.2)).abs() < 2e-3);
    }

    #[test]
    fn family_endpoints() {
        let fam = parabola();
        assert_eq!(toy_family_at(&fam, 0.0).unwrap(), *fam.base());
        let one = toy_family_at(&fam, 1.0).unwrap();
        assert_eq!(one.eval(0.0), Some(-0.2));
        assert!(toy_family_at(&fam, 1.5).is_err());
    }

    #[test]
    fn linear_in_s() {
        let fam = parabola();
        let rows = toy_sweep(&fam, newton1, 11).unwrap();
        assert!(rows.iter().all(|r| r.residual.abs() < 1e-12));
    }

    #[test]
    fn two_sided_slopes() {
        let fam = parabola();
        let sl = toy_slope_identity(&fam, newton1, 1e-5).unwrap();
        assert!((sl.numeric - sl.analytic).abs() < 1e-9);
        assert!((sl.central - sl.analytic).abs() < 1e-6, "{sl:?}");
        assert!((sl.left - sl.right).abs() < 1e-6, "{sl:?}");
        assert!(sl.analytic < 0.0);
    }

    #[test]
    fn sign_follows_convexity() {
        let fam = parabola();
        assert!(fam.analytic_slope(|p| p * p) > 0.0);
        let u = ConvexFn1D::from_fn(|x| x * x, -1.0, 1.0, 2000).unwrap();
        let shallow = ToyFamily::new(u, Vec2::new(0.0, -0.05)).unwrap();
        let (_, mb) = shallow.tangent_slopes();
        assert!(mb < 1.0 / sqrt(3.0));
        assert!(shallow.analytic_slope(newton1) < 0.0);
    }

    #[test]
    fn nose_above_graph_rejected() {
        let u = ConvexFn1D::from_fn(|x| x * x, -1.0, 1.0, 10).unwrap();
        assert!(matches!(ToyFamily::new(u, Vec2::new(0.0, 0.5)), Err(Error::Validity(_))));
    }

    #[test]
    fn large_negative_s_rejected() {
        let fam = parabola();
        assert!(toy_family_at(&fam, -0.01).is_ok());
        assert!(matches!(toy_family_at(&fam, -50.0), Err(Error::Validity(_))));
    }
}
