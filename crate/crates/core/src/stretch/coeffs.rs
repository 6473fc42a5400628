//! Coefficients of the quadratic resistance law, from classification of
//! normals and from a least-squares fit of sampled resistances.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Surface;
use crate::geometry::GridFn;
use crate::math::{solve3, sqrt, Vec3};
use crate::resistance::PressureModel;

use super::site::StretchSite;

/// Coefficients of `F(s) = c0 + c1/2 (1-s)^2 + a3 s(1-s) + a4/2 s^2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuadCoeffs {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub c0: f64,
    pub c1: f64,
}

impl QuadCoeffs {
    /// Fill in `c0 = a0 + b2 + b4` and `c1 = a1 - a2 + b3 - 2 b4`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(a0: f64, a1: f64, a2: f64, a3: f64, a4: f64, b2: f64, b3: f64, b4: f64) -> QuadCoeffs {
        QuadCoeffs { a0, a1, a2, a3, a4, b2, b3, b4, c0: a0 + b2 + b4, c1: a1 - a2 + b3 - 2.0 * b4 }
    }

    /// Resistance predicted for `s` in `[0, 1]`.
    pub fn law(&self, s: f64) -> f64 {
        let t = 1.0 - s;
        self.c0 + 0.5 * self.c1 * t * t + self.a3 * s * t + 0.5 * self.a4 * s * s
    }

    /// `dF/ds` at `s = 0`.
    pub fn derivative_at_0(&self) -> f64 {
        self.a3 - self.c1
    }

    /// `F(u)` reassembled from the region resistances.
    pub fn value_at_0(&self) -> f64 {
        self.a0 + 0.5 * self.a1 + self.b2 - 0.5 * self.a2 + 0.5 * self.b3
    }
}

/// Least-squares fit `F(s) = p0 + p1 s + p2 s^2` and the law coefficients it
/// determines.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadFit {
    pub p: [f64; 3],
    /// `c0 + c1/2`.
    pub value_at_0: f64,
    /// `a3 - c1`.
    pub derivative_at_0: f64,
    /// Recoverable once `c0` is supplied.
    pub c1: Option<f64>,
    pub a3: Option<f64>,
    pub a4: Option<f64>,
    pub residual_max: f64,
    pub residual_rms: f64,
}

impl QuadFit {
    pub fn eval(&self, s: f64) -> f64 {
        self.p[0] + s * (self.p[1] + s * self.p[2])
    }
}

/// Fit sampled `(s, F)` pairs on `[0, 1]`. With `c0` given, the split of
/// the constant term recovers `c1`, `a3` and `a4`:
/// `p0 = c0 + c1/2`, `p1 = a3 - c1`, `p2 = c1/2 - a3 + a4/2`.
pub fn fit_quadratic(samples: &[(f64, f64)], c0: Option<f64>) -> Result<QuadFit> {
    if samples.len() < 4 {
        return Err(Error::Fit(format!("{} samples, need at least 4", samples.len())));
    }
    if let Some((s, _)) = samples.iter().find(|(s, f)| !(s.is_finite() && f.is_finite()) || *s < 0.0 || *s > 1.0) {
        return Err(Error::Range { what: "fit sample parameter", value: *s });
    }
    let mut distinct: Vec<f64> = samples.iter().map(|p| p.0).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    distinct.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    if distinct.len() < 3 {
        return Err(Error::Fit(format!("{} distinct parameters, need at least 3", distinct.len())));
    }
    let mut m = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for &(s, f) in samples {
        let basis = [1.0, s, s * s];
        for i in 0..3 {
            rhs[i] += basis[i] * f;
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    let p = solve3(m, rhs).ok_or_else(|| Error::Fit("singular normal equations".into()))?;
    let mut fit = QuadFit {
        p,
        value_at_0: p[0],
        derivative_at_0: p[1],
        c1: None,
        a3: None,
        a4: None,
        residual_max: 0.0,
        residual_rms: 0.0,
    };
    let mut ss = 0.0;
    for &(s, f) in samples {
        let r = (f - fit.eval(s)).abs();
        fit.residual_max = fit.residual_max.max(r);
        ss += r * r;
    }
    fit.residual_rms = sqrt(ss / samples.len() as f64);
    if let Some(c0) = c0 {
        let c1 = 2.0 * (p[0] - c0);
        fit.c1 = Some(c1);
        fit.a3 = Some(p[1] + c1);
        fit.a4 = Some(2.0 * (p[0] + p[1] + p[2] - c0));
    }
    Ok(fit)
}

/// Boundary classes of outward normals relative to `C` and `conv(C, I)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormalClass {
    /// Support face touches `C` only.
    Zero,
    /// Support face of the hull is the endpoint `A` (or `B`) alone.
    OneA,
    OneB,
    /// Support face touches `C` and `A` (or `B`).
    TwoA,
    TwoB,
    /// Support face is the segment `I` alone.
    Three,
    /// Support face touches `C` and the whole segment.
    Four,
}

impl NormalClass {
    pub const ALL: [NormalClass; 7] = [
        NormalClass::Zero,
        NormalClass::OneA,
        NormalClass::OneB,
        NormalClass::TwoA,
        NormalClass::TwoB,
        NormalClass::Three,
        NormalClass::Four,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            NormalClass::Zero => "A0",
            NormalClass::OneA => "A1_A",
            NormalClass::OneB => "A1_B",
            NormalClass::TwoA => "A2_A",
            NormalClass::TwoB => "A2_B",
            NormalClass::Three => "A3",
            NormalClass::Four => "A4",
        }
    }
}

/// Classify a lower facet of `C` with unit normal `n` through `p`.
/// Returns the class and whether a decision was within the ambiguity band.
fn classify_c_facet(n: Vec3, p: Vec3, a: Vec3, b: Vec3, tol: f64) -> (NormalClass, bool) {
    let h = p.dot(n);
    let da = a.dot(n) - h;
    let db = b.dot(n) - h;
    let near = |d: f64| d.abs() > tol && d.abs() < 1e3 * tol;
    if da.max(db) > tol {
        let diff = da - db;
        let c = if diff.abs() <= tol {
            NormalClass::Three
        } else if diff > 0.0 {
            NormalClass::OneA
        } else {
            NormalClass::OneB
        };
        (c, near(da.max(db)) || near(diff))
    } else {
        let (on_a, on_b) = (da >= -tol, db >= -tol);
        let c = match (on_a, on_b) {
            (true, true) => NormalClass::Four,
            (true, false) => NormalClass::TwoA,
            (false, true) => NormalClass::TwoB,
            (false, false) => NormalClass::Zero,
        };
        (c, near(da) || near(db))
    }
}

/// Region resistances and profile integrals of one site.
#[derive(Clone, Debug)]
pub struct AnalyticCoeffs {
    pub coeffs: QuadCoeffs,
    /// `F(u)` from the triangle sum.
    pub f_u: f64,
    /// `|F(u) - (a0 + a1/2 + b2 - a2/2 + b3/2)|`.
    pub identity_residual: f64,
    /// Resistance of the facets of `conv(C, I)` containing the segment.
    pub f_trapezoids: f64,
    /// Lower facets of `C` per class, in [`NormalClass::ALL`] order.
    pub c_counts: [usize; 7],
    /// Lower facets of `conv(C, I)` per class.
    pub hull_counts: [usize; 7],
    pub warnings: Vec<String>,
}

fn resistance_of(surf: &Surface, f: &PressureModel, t: usize) -> f64 {
    f.value(surf.grads[t]) * surf.areas[t]
}

/// Coefficients of the law from the geometry of `C`, `conv(C, I)` and the
/// profile.
pub fn analytic_coeffs(u: &GridFn, site: &StretchSite, f: &PressureModel) -> Result<AnalyticCoeffs> {
    site.check_owner(u)?;
    let surf = site.surface();
    let (a, b) = site.endpoints();
    let span = u.values().iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(u.height_cap());
    let tol = 1e-9 * (u.domain().diameter() + span);
    let mut warnings: Vec<String> = site.warnings.clone();

    let mut c_sum = [0.0; 7];
    let mut c_counts = [0usize; 7];
    let mut ambiguous = 0usize;
    for t in 0..surf.tris.len() {
        let n = surf.normal(t);
        let p = surf.points[surf.tris[t][0] as usize];
        let (cls, amb) = classify_c_facet(n, p, a, b, tol);
        c_sum[cls.index()] += resistance_of(surf, f, t);
        c_counts[cls.index()] += 1;
        if amb {
            ambiguous += 1;
        }
    }

    let mut pts = u.points();
    let base = pts.len() as u32;
    pts.push(a);
    pts.push(b);
    let hull = Surface::lower_hull(pts, u.hull_eps())?;
    let mut hull_sum = [0.0; 7];
    let mut hull_counts = [0usize; 7];
    for t in 0..hull.tris.len() {
        let n = hull.normal(t);
        let tri = hull.tris[t];
        let p = hull.points[tri[0] as usize];
        let h = p.dot(n);
        let on = |q: Vec3, idx: u32| tri.contains(&idx) || (q.dot(n) - h).abs() <= tol;
        let (on_a, on_b) = (on(a, base), on(b, base + 1));
        let cls = match (on_a, on_b) {
            (true, true) => NormalClass::Four,
            (true, false) => NormalClass::TwoA,
            (false, true) => NormalClass::TwoB,
            (false, false) => NormalClass::Zero,
        };
        let d = [(a.dot(n) - h).abs(), (b.dot(n) - h).abs()];
        if d.iter().any(|d| *d > tol && *d < 1e3 * tol) {
            ambiguous += 1;
        }
        hull_sum[cls.index()] += resistance_of(&hull, f, t);
        hull_counts[cls.index()] += 1;
    }
    if ambiguous > 0 {
        warnings.push(format!("{ambiguous} facets within the classification tolerance band"));
    }

    let idx = |c: NormalClass| c.index();
    let a0 = c_sum[idx(NormalClass::Zero)];
    let a1 = 2.0 * (c_sum[idx(NormalClass::OneA)] + c_sum[idx(NormalClass::OneB)]);
    let f2_c = c_sum[idx(NormalClass::TwoA)] + c_sum[idx(NormalClass::TwoB)];
    let b2 = hull_sum[idx(NormalClass::TwoA)] + hull_sum[idx(NormalClass::TwoB)];
    let a2 = 2.0 * (b2 - f2_c);
    let f_trapezoids = hull_sum[idx(NormalClass::Four)];
    let zero_gap = (hull_sum[idx(NormalClass::Zero)] - a0).abs();
    if zero_gap > 1e-9 * (1.0 + a0.abs()) {
        warnings.push(format!("unchanged regions of C and its hull differ by {zero_gap:.3e}"));
    }

    let frame = &site.frame;
    let pr = &site.profile;
    let delta = site.delta;
    let a3 = 2.0 * delta * pr.pressure_integral(frame, f);
    let b3 = 2.0 * pr.width_integral(frame, f);
    let f_minus = frame.pressure(f, pr.xi_minus);
    let f_plus = frame.pressure(f, pr.xi_plus);
    let a4 = 2.0 * delta * (f_minus * (-pr.t_minus) + f_plus * pr.t_plus);
    let b4 = f_minus * (-pr.t_minus) * pr.a_minus + f_plus * pr.t_plus * pr.a_plus;
    let coeffs = QuadCoeffs::from_parts(a0, a1, a2, a3, a4, b2, b3, b4);

    let f_u: f64 = (0..surf.tris.len()).map(|t| resistance_of(surf, f, t)).sum();
    let identity_residual = (f_u - coeffs.value_at_0()).abs();
    let trap_gap = (f_trapezoids - (0.5 * a4 + b4)).abs();
    if trap_gap > 1e-6 * (1.0 + f_trapezoids.abs()) {
        warnings.push(format!("trapezoid resistance differs from a4/2 + b4 by {trap_gap:.3e}"));
    }
    Ok(AnalyticCoeffs { coeffs, f_u, identity_residual, f_trapezoids, c_counts, hull_counts, warnings })
}
