use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{Vec2, Vec3};

use super::domain::{Domain, Grid};
use super::surface::Surface;

/// Relative coplanarity tolerance for hulls (times the point-set diameter).
pub const HULL_MERGE_REL: f64 = 1e-12;
/// Relative discrete-convexity tolerance (times the height cap).
pub const ENVELOPE_REL: f64 = 1e-9;

/// Scalar values on the nodes of a clipped grid, with the height cap `M`
/// of the body `{(x, z) : u(x) <= z <= M}`.
#[derive(Clone, Debug)]
pub struct GridFn {
    grid: Arc<Grid>,
    values: Vec<f64>,
    height_cap: f64,
}

impl GridFn {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, height_cap: f64) -> Result<GridFn> {
        if values.len() != grid.len() {
            return Err(Error::Invalid(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if !height_cap.is_finite() || height_cap < 0.0 {
            return Err(Error::Range { what: "height cap", value: height_cap });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite value at node {i}")));
        }
        Ok(GridFn { grid, values, height_cap })
    }

    /// Sample a function at the nodes.
    pub fn from_fn(grid: Arc<Grid>, height_cap: f64, f: impl Fn(Vec2) -> f64) -> Result<GridFn> {
        let values = grid.nodes.iter().map(|p| f(*p)).collect();
        Self::new(grid, values, height_cap)
    }

    pub fn constant(grid: Arc<Grid>, height_cap: f64, c: f64) -> Result<GridFn> {
        Self::from_fn(grid, height_cap, |_| c)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn domain(&self) -> &Domain {
        &self.grid.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn height_cap(&self) -> f64 {
        self.height_cap
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same grid and cap, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<GridFn> {
        GridFn::new(self.grid.clone(), values, self.height_cap)
    }

    pub fn points(&self) -> Vec<Vec3> {
        self.grid.nodes.iter().zip(&self.values).map(|(p, z)| p.lift(*z)).collect()
    }

    /// Coplanarity tolerance used for hulls of this function's graph.
    pub fn hull_eps(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        let span = (hi - lo).max(self.height_cap - lo).max(0.0);
        HULL_MERGE_REL * (self.grid.domain.diameter() + span)
    }

    /// Lower-hull triangulation of the node graph.
    pub fn surface(&self) -> Result<Surface> {
        Surface::lower_hull(self.points(), self.hull_eps())
    }

    pub fn envelope_tol(&self) -> f64 {
        ENVELOPE_REL * self.height_cap.max(1e-300)
    }

    /// Largest discretely convex function below `self`, plus its surface.
    pub fn convexified_with_surface(&self) -> Result<(GridFn, Surface)> {
        let s = self.surface()?;
        let sampled = s.sample(&self.grid)?;
        let vals = sampled.iter().zip(&self.values).map(|(a, b)| a.min(*b)).collect();
        Ok((self.with_values(vals)?, s))
    }

    pub fn convexified(&self) -> Result<GridFn> {
        Ok(self.convexified_with_surface()?.0)
    }

    /// Equals its own lower convex envelope within `tol`.
    pub fn is_convex_within(&self, tol: f64) -> bool {
        match self.convexified() {
            Ok(env) => self.max_abs_diff(&env) <= tol,
            Err(_) => false,
        }
    }

    pub fn is_convex(&self) -> bool {
        self.is_convex_within(self.envelope_tol())
    }

    /// Member of the admissible class: convex and `0 <= u <= M` within `tol`.
    pub fn in_class(&self, tol: f64) -> bool {
        self.values.iter().all(|v| *v >= -tol && *v <= self.height_cap + tol) && self.is_convex_within(tol)
    }

    pub fn max_abs_diff(&self, other: &GridFn) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Largest value on boundary nodes of `|u - M|`.
    pub fn boundary_gap(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.grid.on_boundary)
            .filter(|(_, b)| **b)
            .map(|(v, _)| (v - self.height_cap).abs())
            .fold(0.0, f64::max)
    }
}

/// Lower convex envelope of scattered samples, evaluated at the grid nodes.
pub fn lower_convex_envelope(grid: &Arc<Grid>, samples: &[(Vec2, f64)], height_cap: f64) -> Result<GridFn> {
    if samples.len() < 3 {
        return Err(Error::Degenerate(format!("{} samples", samples.len())));
    }
    if samples.iter().any(|(p, z)| !(p.x.is_finite() && p.y.is_finite() && z.is_finite())) {
        return Err(Error::Invalid("non-finite sample".into()));
    }
    let pts: Vec<Vec3> = samples.iter().map(|(p, z)| p.lift(*z)).collect();
    let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.z), b.max(p.z)));
    let eps = HULL_MERGE_REL * (grid.domain.diameter() + (hi - lo));
    let s = Surface::lower_hull(pts, eps)?;
    let vals = s.sample(grid)?;
    GridFn::new(grid.clone(), vals, height_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn square(h: f64) -> Arc<Grid> {
        Domain::rect(-1.0, 1.0, -1.0, 1.0, h).unwrap().grid()
    }

    #[test]
    fn paraboloid_is_its_own_envelope() {
        let g = Domain::disk(Vec2::ZERO, 1.0, 1.0 / 16.0).unwrap().grid();
        let u = GridFn::from_fn(g, 1.0, |p| p.norm2()).unwrap();
        let env = u.convexified().unwrap();
        assert!(u.max_abs_diff(&env) < 1e-12);
        assert!(u.is_convex());
    }

    #[test]
    fn five_points_on_square() {
        let g = Domain::rect(-1.0, 1.0, -1.0, 1.0, 0.25).unwrap().grid();
        let s = vec![
            (Vec2::new(1.0, 1.0), 1.0),
            (Vec2::new(-1.0, 1.0), 1.0),
            (Vec2::new(-1.0, -1.0), 1.0),
            (Vec2::new(1.0, -1.0), 1.0),
            (Vec2::new(0.0, 0.0), 0.0),
        ];
        let u = lower_convex_envelope(&g, &s, 1.0).unwrap();
        let id = g.node_at(6, 6).unwrap();
        assert_eq!(g.nodes[id], Vec2::new(0.5, 0.5));
        assert!((u.values()[id] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn saddle_envelope_collapses() {
        // Brute-force oracle: the envelope at the origin is the min over
        // pairs of samples symmetric through it of the chord midpoint.
        let g = square(0.125);
        let f = |p: Vec2| p.x * p.x - p.y * p.y;
        let samples: Vec<(Vec2, f64)> = g.nodes.iter().map(|p| (*p, f(*p))).collect();
        let mut oracle = f64::INFINITY;
        for (p, zp) in &samples {
            for (q, zq) in &samples {
                if (*p + *q).norm() < 1e-12 {
                    oracle = oracle.min(0.5 * (zp + zq));
                }
            }
        }
        assert!((oracle + 1.0).abs() < 1e-12);
        let u = lower_convex_envelope(&g, &samples, 1.0).unwrap();
        let c = g.node_at(8, 8).unwrap();
        assert!((u.values()[c] - oracle).abs() < 1e-12);
    }

    #[test]
    fn envelope_is_idempotent() {
        let g = square(0.125);
        let u = GridFn::from_fn(g, 2.0, |p| (p.x * 3.0).sin_cos_free() + p.y.abs()).unwrap();
        let e1 = u.convexified().unwrap();
        let e2 = e1.convexified().unwrap();
        assert!(e1.max_abs_diff(&e2) < 1e-12);
        assert!(e1.values().iter().zip(u.values()).all(|(a, b)| a <= b));
    }

    #[test]
    fn collinear_samples_error() {
        let g = square(0.25);
        let s = vec![(Vec2::new(0.0, 0.0), 0.0), (Vec2::new(0.5, 0.0), 1.0), (Vec2::new(1.0, 0.0), 0.0)];
        assert!(matches!(lower_convex_envelope(&g, &s, 1.0), Err(Error::Degenerate(_))));
    }

    trait Wiggle {
        fn sin_cos_free(self) -> f64;
    }
    impl Wiggle for f64 {
        // Non-convex test profile without libm: a cubic wiggle.
        fn sin_cos_free(self) -> f64 {
            self * self * self - self
        }
    }
}
