//! Resistance functionals on grid functions and polytopes, and the Hessian
//! partition of the domain.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{clipped_area, GridFn, Grid, PolyBody, Surface};
use crate::math::{Sym2, Vec2};

use super::model::PressureModel;

/// Per-cell selection on a grid, row-major over `nx * ny` cells.
#[derive(Clone, Debug)]
pub struct RegionMask {
    grid: Arc<Grid>,
    cells: Vec<bool>,
}

impl RegionMask {
    pub fn new(grid: Arc<Grid>, cells: Vec<bool>) -> Result<RegionMask> {
        if cells.len() != grid.cell_count() {
            return Err(Error::Invalid(alloc::format!("{} mask cells for {} grid cells", cells.len(), grid.cell_count())));
        }
        Ok(RegionMask { grid, cells })
    }

    pub fn full(grid: Arc<Grid>) -> RegionMask {
        let n = grid.cell_count();
        RegionMask { grid, cells: vec![true; n] }
    }

    /// Cells whose lower-left corner satisfies `pred` applied to the cell centre.
    pub fn from_centers(grid: Arc<Grid>, pred: impl Fn(Vec2) -> bool) -> RegionMask {
        let h = grid.h;
        let cells = (0..grid.cell_count()).map(|c| pred(grid.cell_corner(c) + Vec2::new(0.5 * h, 0.5 * h))).collect();
        RegionMask { grid, cells }
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|c| *c)
    }

    pub fn complement(&self) -> RegionMask {
        RegionMask { grid: self.grid.clone(), cells: self.cells.iter().map(|c| !c).collect() }
    }
}

/// Calls `visit(t, cell, area)` for every triangle/cell overlap of positive area.
pub fn for_each_tri_cell(surf: &Surface, grid: &Grid, mut visit: impl FnMut(usize, usize, f64)) {
    let h = grid.h;
    for t in 0..surf.tris.len() {
        let tri = surf.tri_xy(t);
        let (lo, hi) = surf.tri_bbox(t);
        let (i0, i1, j0, j1) = grid.cell_range(lo, hi);
        if i0 == i1 && j0 == j1 {
            visit(t, j0 * grid.nx + i0, surf.areas[t]);
            continue;
        }
        for j in j0..=j1 {
            for i in i0..=i1 {
                let c = j * grid.nx + i;
                let a = grid.cell_corner(c);
                let area = clipped_area(&tri, a, a + Vec2::new(h, h));
                if area > 0.0 {
                    visit(t, c, area);
                }
            }
        }
    }
}

/// `sum_t f(grad_t) area_t` over the triangles of a lower surface.
pub fn eval_f_surface(surf: &Surface, f: &PressureModel) -> f64 {
    surf.grads.iter().zip(&surf.areas).map(|(g, a)| f.value(*g) * a).sum()
}

/// `F(u) = int f(grad u)` for the piecewise-linear lower-hull interpolant.
/// With a mask, triangles are clipped to the selected cells.
#[allow(non_snake_case)]
pub fn eval_F(u: &GridFn, f: &PressureModel, mask: Option<&RegionMask>) -> Result<f64> {
    let surf = u.surface()?;
    Ok(eval_f_masked(&surf, u.grid(), f, mask))
}

pub fn eval_f_masked(surf: &Surface, grid: &Grid, f: &PressureModel, mask: Option<&RegionMask>) -> f64 {
    match mask {
        None => eval_f_surface(surf, f),
        Some(m) => {
            if m.is_empty() {
                return 0.0;
            }
            let vals: Vec<f64> = surf.grads.iter().map(|g| f.value(*g)).collect();
            let mut total = 0.0;
            for_each_tri_cell(surf, grid, |t, c, area| {
                if m.cells[c] {
                    total += vals[t] * area;
                }
            });
            total
        }
    }
}

/// `sum over facets g(n) area`.
#[allow(non_snake_case)]
pub fn eval_F_body(c: &PolyBody, f: &PressureModel) -> Result<f64> {
    let mut total = 0.0;
    for facet in c.facets() {
        total += f.g_of_normal(facet.normal)? * facet.area;
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HessianClass {
    Pos,
    Neg,
    Degen,
}

/// Default degeneracy tolerance `1e-8 max(1, |H|)`.
pub fn default_hessian_tol(h: Sym2) -> f64 {
    1e-8 * h.max_abs().max(1.0)
}

/// Label of `f''(xi)`: degenerate if `|det| <= tol * scale`, positive if both
/// eigenvalues exceed `tol`, negative otherwise.
pub fn classify_hessian(f: &PressureModel, xi: Vec2, tol: Option<f64>) -> Result<HessianClass> {
    let h = f.hessian(xi)?;
    Ok(classify_sym(h, tol))
}

pub fn classify_sym(h: Sym2, tol: Option<f64>) -> HessianClass {
    let scale = h.max_abs().max(1.0);
    let tol = tol.unwrap_or_else(|| default_hessian_tol(h));
    let (lo, _) = h.eigenvalues();
    if h.det().abs() <= tol * scale {
        HessianClass::Degen
    } else if lo > tol {
        HessianClass::Pos
    } else {
        HessianClass::Neg
    }
}

/// Root of `det f''` along the ray `t d`, `t` in `[lo, hi]`, by bisection.
pub fn degeneracy_radius(f: &PressureModel, d: Vec2, lo: f64, hi: f64) -> Result<Option<f64>> {
    let d = d.normalized();
    let det = |t: f64| f.hessian(d * t).map(|h| h.det());
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (det(a)?, det(b)?);
    if fa == 0.0 {
        return Ok(Some(a));
    }
    if fa.signum() == fb.signum() {
        return Ok(None);
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = det(m)?;
        if fm == 0.0 {
            return Ok(Some(m));
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// `f''(grad u)` positive definite.
    Plus,
    /// One negative eigenvalue, the other nonzero.
    Minus,
    /// Degenerate Hessian or cell touching the boundary.
    Zero,
    /// Cell outside the domain.
    Outside,
}

/// Cell-mean gradients of the surface over cells fully inside the domain.
pub fn cell_gradients(surf: &Surface, grid: &Grid) -> Vec<Option<Vec2>> {
    let n = grid.cell_count();
    let mut area = vec![0.0; n];
    let mut gsum = vec![Vec2::ZERO; n];
    for_each_tri_cell(surf, grid, |t, c, a| {
        area[c] += a;
        gsum[c] = gsum[c] + surf.grads[t] * a;
    });
    let interior = interior_cells(grid);
    (0..n)
        .map(|c| (interior[c] && area[c] > 0.5 * grid.h * grid.h).then(|| gsum[c] / area[c]))
        .collect()
}

/// Cells whose four corners are lattice nodes of the domain and none of them
/// lies on the boundary.
pub fn interior_cells(grid: &Grid) -> Vec<bool> {
    (0..grid.cell_count())
        .map(|c| {
            let (i, j) = (c % grid.nx, c / grid.nx);
            [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
                .iter()
                .all(|&(a, b)| grid.node_at(a, b).is_some_and(|id| !grid.on_boundary[id]))
        })
        .collect()
}

/// Labels every cell by the Hessian class of `f` at the cell gradient.
pub fn partition_domain(u: &GridFn, f: &PressureModel, tol: Option<f64>) -> Result<Vec<Region>> {
    let surf = u.surface()?;
    partition_with_surface(&surf, u.grid(), f, tol)
}

pub fn partition_with_surface(surf: &Surface, grid: &Grid, f: &PressureModel, tol: Option<f64>) -> Result<Vec<Region>> {
    let grads = cell_gradients(surf, grid);
    grads
        .iter()
        .enumerate()
        .map(|(c, g)| match g {
            Some(g) => Ok(match classify_hessian(f, *g, tol)? {
                HessianClass::Pos => Region::Plus,
                HessianClass::Neg => Region::Minus,
                HessianClass::Degen => Region::Zero,
            }),
            None => Ok(if grid.nodes_in_cell(c).is_empty() { Region::Outside } else { Region::Zero }),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{epigraph_body, homothety, Domain};
    use crate::math::{sqrt, Vec3};
    use core::f64::consts::PI;

    #[test]
    fn constant_on_disk() {
        let g = Domain::disk(Vec2::ZERO, 1.0, 1.0 / 64.0).unwrap().grid();
        let u = GridFn::constant(g, 1.0, 0.5).unwrap();
        let v = eval_F(&u, &PressureModel::Newton, None).unwrap();
        assert!((v - PI).abs() < 2e-3, "{v}");
    }

    #[test]
    fn cone_on_disk() {
        let g = Domain::disk(Vec2::ZERO, 1.0, 1.0 / 64.0).unwrap().grid();
        let u = GridFn::from_fn(g, 1.0, |p| p.norm()).unwrap();
        let v = eval_F(&u, &PressureModel::Newton, None).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-2, "{v}");
    }

    #[test]
    fn ramp_on_square() {
        let g = Domain::rect(0.0, 1.0, 0.0, 1.0, 1.0 / 8.0).unwrap().grid();
        let u = GridFn::from_fn(g, 2.0, |p| 2.0 * p.x).unwrap();
        let v = eval_F(&u, &PressureModel::Newton, None).unwrap();
        assert!((v - 0.2).abs() < 1e-14);
    }

    #[test]
    fn masks_are_additive() {
        let g = Domain::disk(Vec2::ZERO, 1.0, 1.0 / 16.0).unwrap().grid();
        let u = GridFn::from_fn(g.clone(), 2.0, |p| p.norm2() + 0.3 * p.x).unwrap();
        let f = PressureModel::Newton;
        let m = RegionMask::from_centers(g.clone(), |p| p.x + 0.3 * p.y > 0.1);
        let a = eval_F(&u, &f, Some(&m)).unwrap();
        let b = eval_F(&u, &f, Some(&m.complement())).unwrap();
        let all = eval_F(&u, &f, None).unwrap();
        assert!((a + b - all).abs() < 1e-12);
        let none = RegionMask::new(g.clone(), vec![false; g.cell_count()]).unwrap();
        assert_eq!(eval_F(&u, &f, Some(&none)).unwrap(), 0.0);
    }

    fn cube() -> PolyBody {
        let mut p = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    p.push(Vec3::new(x, y, z));
                }
            }
        }
        PolyBody::from_points(&p).unwrap()
    }

    #[test]
    fn body_functional() {
        let f = PressureModel::Newton;
        assert!((eval_F_body(&cube(), &f).unwrap() - 1.0).abs() < 1e-15);
        let pyr = PolyBody::from_points(&[
            Vec3::new(-1.0, -1.0, 1.0),
            Vec3::new(1.0, -1.0, 1.0),
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(-1.0, 1.0, 1.0),
            Vec3::new(0.0, 0.0, 0.0),
        ])
        .unwrap();
        assert!((eval_F_body(&pyr, &f).unwrap() - 2.0).abs() < 1e-14);
        let big = homothety(&pyr, 2.0, Vec3::new(0.3, 0.1, -2.0)).unwrap();
        assert!((eval_F_body(&big, &f).unwrap() - 8.0).abs() < 1e-13);
    }

    #[test]
    fn body_matches_grid_functional() {
        let g = Domain::disk(Vec2::ZERO, 1.0, 1.0 / 16.0).unwrap().grid();
        let u = GridFn::from_fn(g, 1.0, |p| 0.8 * p.norm2() + 0.1 * p.y).unwrap();
        let f = PressureModel::Newton;
        let a = eval_F(&u, &f, None).unwrap();
        let b = eval_F_body(&epigraph_body(&u).unwrap(), &f).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} {b}");
    }

    #[test]
    fn hessian_classes() {
        let f = PressureModel::Newton;
        assert_eq!(classify_hessian(&f, Vec2::ZERO, None).unwrap(), HessianClass::Neg);
        let r = 1.0 / sqrt(3.0);
        assert_eq!(classify_hessian(&f, Vec2::new(r, 0.0), None).unwrap(), HessianClass::Degen);
        assert_eq!(classify_hessian(&PressureModel::Quadratic, Vec2::new(3.0, 1.0), None).unwrap(), HessianClass::Pos);
        let root = degeneracy_radius(&f, Vec2::new(1.0, 1.0), 0.1, 1.0).unwrap().unwrap();
        assert!((root - r).abs() < 1e-12);
    }

    #[test]
    fn partitions() {
        let g = Domain::disk(Vec2::ZERO, 1.0, 1.0 / 16.0).unwrap().grid();
        let zero = GridFn::constant(g.clone(), 1.0, 0.0).unwrap();
        let p = partition_domain(&zero, &PressureModel::Newton, None).unwrap();
        let interior = interior_cells(&g);
        for (c, r) in p.iter().enumerate() {
            if interior[c] {
                assert_eq!(*r, Region::Minus);
            } else {
                assert!(matches!(r, Region::Zero | Region::Outside));
            }
        }
        let q = partition_domain(&zero, &PressureModel::Quadratic, None);
        assert!(q.unwrap().iter().zip(&interior).all(|(r, i)| !*i || *r == Region::Plus));
    }
}
