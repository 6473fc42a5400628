//! Pressure integrands `f(xi)` with analytic derivatives.

use alloc::format;
use alloc::sync::Arc;
use core::fmt;

use crate::error::{Error, Result};
use crate::math::{sqrt, Sym2, Vec2, Vec3};

/// Half-width of the band around a crease treated as non-smooth.
const CREASE_BAND: f64 = 1e-12;
/// `|n3|` below this counts as a horizontal normal.
const HORIZONTAL_NZ: f64 = 1e-14;

/// User-supplied integrand. Derivatives default to central differences.
pub trait CustomPressure: Send + Sync {
    fn value(&self, xi: Vec2) -> f64;

    fn gradient(&self, xi: Vec2) -> Vec2 {
        fd_gradient(|p| self.value(p), xi)
    }

    fn hessian(&self, xi: Vec2) -> Sym2 {
        fd_hessian(|p| self.value(p), xi)
    }

    fn is_smooth_at(&self, _xi: Vec2) -> bool {
        true
    }

    /// Value of `g` on horizontal normals `(n1, n2, 0)`, if declared.
    fn horizontal_limit(&self, _n: Vec2) -> Option<f64> {
        None
    }

    fn name(&self) -> &str {
        "custom"
    }
}

#[derive(Clone)]
pub enum PressureModel {
    /// `1 / (1 + |xi|^2)`.
    Newton,
    /// `|xi|^2`.
    Quadratic,
    /// `(b - <a, xi>)_+`.
    AffinePlus { a: Vec2, b: f64 },
    /// `(|xi|^2 - r^2)_+`, zero on the disk `|xi| <= r`.
    FlatDisk { r: f64 },
    Custom(Arc<dyn CustomPressure>),
}

impl fmt::Debug for PressureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PressureModel::Newton => f.write_str("Newton"),
            PressureModel::Quadratic => f.write_str("Quadratic"),
            PressureModel::AffinePlus { a, b } => write!(f, "AffinePlus {{ a: {a:?}, b: {b} }}"),
            PressureModel::FlatDisk { r } => write!(f, "FlatDisk {{ r: {r} }}"),
            PressureModel::Custom(c) => write!(f, "Custom({})", c.name()),
        }
    }
}

impl PressureModel {
    pub fn affine_plus(a: Vec2, b: f64) -> Result<PressureModel> {
        if !(b > 0.0) || !b.is_finite() || !(a.x.is_finite() && a.y.is_finite()) {
            return Err(Error::Range { what: "affine offset b", value: b });
        }
        Ok(PressureModel::AffinePlus { a, b })
    }

    pub fn flat_disk(r: f64) -> Result<PressureModel> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Range { what: "flat disk radius", value: r });
        }
        Ok(PressureModel::FlatDisk { r })
    }

    pub fn name(&self) -> &str {
        match self {
            PressureModel::Newton => "newton",
            PressureModel::Quadratic => "quadratic",
            PressureModel::AffinePlus { .. } => "affine_plus",
            PressureModel::FlatDisk { .. } => "flat_disk",
            PressureModel::Custom(c) => c.name(),
        }
    }

    #[inline]
    pub fn value(&self, xi: Vec2) -> f64 {
        match self {
            PressureModel::Newton => 1.0 / (1.0 + xi.norm2()),
            PressureModel::Quadratic => xi.norm2(),
            PressureModel::AffinePlus { a, b } => (b - a.dot(xi)).max(0.0),
            PressureModel::FlatDisk { r } => (xi.norm2() - r * r).max(0.0),
            PressureModel::Custom(c) => c.value(xi),
        }
    }

    /// `f(p, 0)`, the restriction to the first axis.
    #[inline]
    pub fn value1(&self, p: f64) -> f64 {
        self.value(Vec2::new(p, 0.0))
    }

    /// Whether `f` is twice differentiable at `xi`.
    pub fn is_smooth_at(&self, xi: Vec2) -> bool {
        match self {
            PressureModel::Newton | PressureModel::Quadratic => true,
            PressureModel::AffinePlus { a, b } => {
                (b - a.dot(xi)).abs() > CREASE_BAND * (1.0 + b.abs() + a.norm() * xi.norm())
            }
            PressureModel::FlatDisk { r } => (xi.norm2() - r * r).abs() > CREASE_BAND * (1.0 + r * r),
            PressureModel::Custom(c) => c.is_smooth_at(xi),
        }
    }

    /// Whether the model is smooth everywhere.
    pub fn is_globally_smooth(&self) -> bool {
        matches!(self, PressureModel::Newton | PressureModel::Quadratic)
    }

    pub fn gradient(&self, xi: Vec2) -> Vec2 {
        match self {
            PressureModel::Newton => {
                let q = 1.0 + xi.norm2();
                xi * (-2.0 / (q * q))
            }
            PressureModel::Quadratic => xi * 2.0,
            PressureModel::AffinePlus { a, b } => {
                if b - a.dot(xi) > 0.0 {
                    -*a
                } else {
                    Vec2::ZERO
                }
            }
            PressureModel::FlatDisk { r } => {
                if xi.norm2() > r * r {
                    xi * 2.0
                } else {
                    Vec2::ZERO
                }
            }
            PressureModel::Custom(c) => c.gradient(xi),
        }
    }

    /// Analytic Hessian; `NonSmooth` on a crease.
    pub fn hessian(&self, xi: Vec2) -> Result<Sym2> {
        if !self.is_smooth_at(xi) {
            return Err(Error::NonSmooth(format!("{} at ({}, {})", self.name(), xi.x, xi.y)));
        }
        Ok(match self {
            PressureModel::Newton => {
                let q = 1.0 + xi.norm2();
                let (q2, q3) = (q * q, q * q * q);
                Sym2::new(
                    -2.0 / q2 + 8.0 * xi.x * xi.x / q3,
                    8.0 * xi.x * xi.y / q3,
                    -2.0 / q2 + 8.0 * xi.y * xi.y / q3,
                )
            }
            PressureModel::Quadratic => Sym2::new(2.0, 0.0, 2.0),
            PressureModel::AffinePlus { .. } => Sym2::new(0.0, 0.0, 0.0),
            PressureModel::FlatDisk { r } => {
                if xi.norm2() > r * r {
                    Sym2::new(2.0, 0.0, 2.0)
                } else {
                    Sym2::new(0.0, 0.0, 0.0)
                }
            }
            PressureModel::Custom(c) => c.hessian(xi),
        })
    }

    /// Surface density on the unit sphere: `f(n1/|n3|, n2/|n3|) |n3|` on the
    /// lower hemisphere, zero on the upper one.
    pub fn g_of_normal(&self, n: Vec3) -> Result<f64> {
        if n.z > HORIZONTAL_NZ {
            return Ok(0.0);
        }
        if n.z >= -HORIZONTAL_NZ {
            return match self {
                PressureModel::Newton => Ok(0.0),
                PressureModel::AffinePlus { a, .. } => Ok((-a.dot(n.xy())).max(0.0)),
                PressureModel::Custom(c) => c.horizontal_limit(n.xy()).ok_or(Error::UndefinedLimit),
                _ => Err(Error::UndefinedLimit),
            };
        }
        let m = -n.z;
        Ok(match self {
            // Closed form avoids dividing by a tiny |n3|.
            PressureModel::Newton => {
                let r = n.norm2();
                m * m * m / (r * sqrt(r))
            }
            _ => self.value(Vec2::new(n.x / m, n.y / m)) * m,
        })
    }
}

/// Central-difference gradient with a relative step.
pub fn fd_gradient(f: impl Fn(Vec2) -> f64, xi: Vec2) -> Vec2 {
    let hx = 1e-6 * (1.0 + xi.x.abs());
    let hy = 1e-6 * (1.0 + xi.y.abs());
    Vec2::new(
        (f(xi + Vec2::new(hx, 0.0)) - f(xi - Vec2::new(hx, 0.0))) / (2.0 * hx),
        (f(xi + Vec2::new(0.0, hy)) - f(xi - Vec2::new(0.0, hy))) / (2.0 * hy),
    )
}

/// Central-difference Hessian (second-order stencil).
pub fn fd_hessian(f: impl Fn(Vec2) -> f64, xi: Vec2) -> Sym2 {
    let h = 1e-4 * (1.0 + xi.norm());
    let ex = Vec2::new(h, 0.0);
    let ey = Vec2::new(0.0, h);
    let f0 = f(xi);
    let a = (f(xi + ex) - 2.0 * f0 + f(xi - ex)) / (h * h);
    let c = (f(xi + ey) - 2.0 * f0 + f(xi - ey)) / (h * h);
    let b = (f(xi + ex + ey) - f(xi + ex - ey) - f(xi - ex + ey) + f(xi - ex - ey)) / (4.0 * h * h);
    Sym2::new(a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sqrt;

    #[test]
    fn newton_values() {
        let f = PressureModel::Newton;
        assert_eq!(f.value(Vec2::ZERO), 1.0);
        assert!((f.value1(2.0) - 0.2).abs() < 1e-16);
        assert_eq!(f.g_of_normal(Vec3::new(0.0, 0.0, -1.0)).unwrap(), 1.0);
        assert_eq!(f.g_of_normal(Vec3::new(0.0, 0.0, 1.0)).unwrap(), 0.0);
        assert_eq!(f.g_of_normal(Vec3::new(1.0, 0.0, 0.0)).unwrap(), 0.0);
        let n = Vec3::new(sqrt(2.0 / 3.0), 0.0, -1.0 / sqrt(3.0));
        assert!((f.g_of_normal(n).unwrap() - 1.0 / (3.0 * sqrt(3.0))).abs() < 1e-15);
    }

    #[test]
    fn g_matches_generic_formula() {
        let f = PressureModel::Newton;
        let n = Vec3::new(0.3, -0.4, -0.5).normalized();
        let m = -n.z;
        let generic = f.value(Vec2::new(n.x / m, n.y / m)) * m;
        assert!((f.g_of_normal(n).unwrap() - generic).abs() < 1e-15);
        assert!((generic - m * m * m).abs() < 1e-15);
    }

    #[test]
    fn horizontal_limits() {
        let side = Vec3::new(1.0, 0.0, 0.0);
        assert!(matches!(PressureModel::Quadratic.g_of_normal(side), Err(Error::UndefinedLimit)));
        let aff = PressureModel::affine_plus(Vec2::new(-1.0, 0.0), 1.0).unwrap();
        assert_eq!(aff.g_of_normal(side).unwrap(), 1.0);
    }

    #[test]
    fn creases_are_reported() {
        let fd = PressureModel::flat_disk(0.5).unwrap();
        assert!(matches!(fd.hessian(Vec2::new(0.5, 0.0)), Err(Error::NonSmooth(_))));
        assert!(fd.hessian(Vec2::new(0.2, 0.0)).is_ok());
        let aff = PressureModel::affine_plus(Vec2::new(1.0, 0.0), 1.0).unwrap();
        assert!(matches!(aff.hessian(Vec2::new(1.0, 3.0)), Err(Error::NonSmooth(_))));
        assert!(PressureModel::flat_disk(-1.0).is_err());
    }

    #[test]
    fn newton_hessian_against_differences() {
        let f = PressureModel::Newton;
        for xi in [Vec2::new(0.3, -0.7), Vec2::new(1.5, 2.0), Vec2::new(-0.1, 0.05)] {
            let h = f.hessian(xi).unwrap();
            let d = fd_hessian(|p| f.value(p), xi);
            let s = h.max_abs();
            assert!((h.a - d.a).abs() / s < 1e-6);
            assert!((h.b - d.b).abs() / s < 1e-6);
            assert!((h.c - d.c).abs() / s < 1e-6);
            let g = f.gradient(xi);
            let gd = fd_gradient(|p| f.value(p), xi);
            assert!((g - gd).norm() / g.norm() < 1e-6);
        }
    }

    struct Cubic;
    impl CustomPressure for Cubic {
        fn value(&self, xi: Vec2) -> f64 {
            xi.x * xi.x * xi.x + xi.y * xi.y
        }
    }

    #[test]
    fn custom_defaults() {
        let f = PressureModel::Custom(Arc::new(Cubic));
        let h = f.hessian(Vec2::new(1.0, 0.0)).unwrap();
        assert!((h.a - 6.0).abs() < 1e-5 && (h.c - 2.0).abs() < 1e-5 && h.b.abs() < 1e-5);
        assert!(matches!(f.g_of_normal(Vec3::new(0.0, 1.0, 0.0)), Err(Error::UndefinedLimit)));
    }
}
