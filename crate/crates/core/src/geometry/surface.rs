//! Lower convex hull of a height sample set, as a triangulated
//! piecewise-linear convex function over the convex hull of the sites.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hull::{convex_hull, HullShape};
use crate::math::{floor, sqrt, Vec2, Vec3};

use super::domain::Grid;

/// Faces with `n.z` above this are treated as vertical and dropped.
const VERTICAL_NZ: f64 = -1e-12;
/// Barycentric slack for point-in-triangle tests.
const BARY_TOL: f64 = 1e-9;

/// Triangulated lower hull. Plane of triangle `t` is `z = c[t] + grad[t] . x`.
#[derive(Clone, Debug)]
pub struct Surface {
    pub points: Vec<Vec3>,
    pub tris: Vec<[u32; 3]>,
    pub grads: Vec<Vec2>,
    pub consts: Vec<f64>,
    /// Projected areas.
    pub areas: Vec<f64>,
    /// Indices of points that are vertices of some lower triangle.
    pub vertex_mask: Vec<bool>,
    locator: Locator,
}

impl Surface {
    /// Lower hull of `points`. `eps` is the coplanarity tolerance (absolute).
    pub fn lower_hull(points: Vec<Vec3>, eps: f64) -> Result<Surface> {
        let shape = convex_hull(&points, eps);
        let mut tris: Vec<[u32; 3]> = Vec::new();
        match shape {
            HullShape::Solid(h) => {
                for (f, n) in h.faces.iter().zip(&h.normals) {
                    if n.z < VERTICAL_NZ {
                        tris.push([f[0] as u32, f[1] as u32, f[2] as u32]);
                    }
                }
            }
            HullShape::Polygon { cycle, normal } => {
                if normal.z.abs() < 1e-12 {
                    return Err(Error::Degenerate("samples lie in a vertical plane".into()));
                }
                // Fan triangulation, oriented counterclockwise in the plane.
                let ccw_up = normal.z > 0.0;
                for k in 1..cycle.len() - 1 {
                    let (a, b, c) = (cycle[0] as u32, cycle[k] as u32, cycle[k + 1] as u32);
                    tris.push(if ccw_up { [a, b, c] } else { [a, c, b] });
                }
            }
            _ => return Err(Error::Degenerate("sample sites are collinear".into())),
        }
        Ok(Self::from_triangles(points, tris))
    }

    /// Build from explicit triangles (any orientation).
    pub fn from_triangles(points: Vec<Vec3>, tris: Vec<[u32; 3]>) -> Surface {
        let mut grads = Vec::with_capacity(tris.len());
        let mut consts = Vec::with_capacity(tris.len());
        let mut areas = Vec::with_capacity(tris.len());
        let mut vertex_mask = vec![false; points.len()];
        for t in &tris {
            let (p0, p1, p2) = (points[t[0] as usize], points[t[1] as usize], points[t[2] as usize]);
            let d1 = p1 - p0;
            let d2 = p2 - p0;
            let det = d1.x * d2.y - d1.y * d2.x;
            let gx = (d1.z * d2.y - d2.z * d1.y) / det;
            let gy = (d1.x * d2.z - d2.x * d1.z) / det;
            let g = Vec2::new(gx, gy);
            grads.push(g);
            consts.push(p0.z - g.dot(p0.xy()));
            areas.push(0.5 * det.abs());
            for &v in t {
                vertex_mask[v as usize] = true;
            }
        }
        let locator = Locator::build(&points, &tris);
        Surface { points, tris, grads, consts, areas, vertex_mask, locator }
    }

    pub fn plane_value(&self, t: usize, p: Vec2) -> f64 {
        self.consts[t] + self.grads[t].dot(p)
    }

    /// Outward (downward) unit normal of the epigraph on triangle `t`.
    pub fn normal(&self, t: usize) -> Vec3 {
        let g = self.grads[t];
        Vec3::new(g.x, g.y, -1.0) / sqrt(1.0 + g.norm2())
    }

    fn bary(&self, t: usize, p: Vec2) -> [f64; 3] {
        let tri = self.tris[t];
        let a = self.points[tri[0] as usize].xy();
        let b = self.points[tri[1] as usize].xy();
        let c = self.points[tri[2] as usize].xy();
        let det = (b - a).cross(c - a);
        let l1 = (p - a).cross(c - a) / det;
        let l2 = (b - a).cross(p - a) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    pub fn contains(&self, t: usize, p: Vec2) -> bool {
        self.bary(t, p).iter().all(|l| *l >= -BARY_TOL)
    }

    /// Triangle containing `p`, if any.
    pub fn locate(&self, p: Vec2) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &t in self.locator.candidates(p) {
            let l = self.bary(t as usize, p);
            let worst = l[0].min(l[1]).min(l[2]);
            if worst >= 0.0 {
                return Some(t as usize);
            }
            if worst >= -BARY_TOL && best.is_none_or(|b| worst > b.1) {
                best = Some((t as usize, worst));
            }
        }
        best.map(|b| b.0)
    }

    /// Value of the interpolant at `p`, `None` outside the hull of the sites.
    pub fn eval(&self, p: Vec2) -> Option<f64> {
        // Max over planes of containing triangles; on edges they agree.
        let mut v: Option<f64> = None;
        for &t in self.locator.candidates(p) {
            if self.contains(t as usize, p) {
                let z = self.plane_value(t as usize, p);
                v = Some(v.map_or(z, |w: f64| w.max(z)));
            }
        }
        v
    }

    /// Gradient at `p` (from the containing triangle).
    pub fn gradient(&self, p: Vec2) -> Option<Vec2> {
        self.locate(p).map(|t| self.grads[t])
    }

    /// For every grid node, the list of triangles containing it.
    pub fn node_incidence(&self, grid: &Grid) -> Vec<Vec<u32>> {
        let mut inc: Vec<Vec<u32>> = vec![Vec::new(); grid.len()];
        self.for_each_node_hit(grid, |node, t| inc[node].push(t as u32));
        inc
    }

    /// Values at every grid node; `Err(Coverage)` if a node is outside.
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        let mut vals = vec![f64::NEG_INFINITY; grid.len()];
        self.for_each_node_hit(grid, |node, t| {
            let z = self.plane_value(t, grid.nodes[node]);
            if z > vals[node] {
                vals[node] = z;
            }
        });
        for (i, v) in vals.iter().enumerate() {
            if *v == f64::NEG_INFINITY {
                let p = grid.nodes[i];
                return Err(Error::Coverage { x: p.x, y: p.y });
            }
        }
        Ok(vals)
    }

    fn for_each_node_hit(&self, grid: &Grid, mut hit: impl FnMut(usize, usize)) {
        for t in 0..self.tris.len() {
            let (lo, hi) = self.tri_bbox(t);
            let (i0, i1, j0, j1) = grid.cell_range(lo, hi);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    for &n in grid.nodes_in_cell(j * grid.nx + i) {
                        let p = grid.nodes[n as usize];
                        if p.x < lo.x - 1e-9 || p.x > hi.x + 1e-9 || p.y < lo.y - 1e-9 || p.y > hi.y + 1e-9 {
                            continue;
                        }
                        if self.contains(t, p) {
                            hit(n as usize, t);
                        }
                    }
                }
            }
        }
    }

    pub fn tri_bbox(&self, t: usize) -> (Vec2, Vec2) {
        let tri = self.tris[t];
        let mut lo = self.points[tri[0] as usize].xy();
        let mut hi = lo;
        for &v in &tri[1..] {
            let p = self.points[v as usize].xy();
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    pub fn tri_xy(&self, t: usize) -> [Vec2; 3] {
        let tri = self.tris[t];
        [
            self.points[tri[0] as usize].xy(),
            self.points[tri[1] as usize].xy(),
            self.points[tri[2] as usize].xy(),
        ]
    }

    /// Total projected area.
    pub fn area(&self) -> f64 {
        self.areas.iter().sum()
    }
}

/// Uniform bucket grid over triangle bounding boxes.
#[derive(Clone, Debug)]
struct Locator {
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<u32>,
    items: Vec<u32>,
}

impl Locator {
    fn build(points: &[Vec3], tris: &[[u32; 3]]) -> Locator {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for t in tris {
            for &v in t {
                let p = points[v as usize];
                lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
            }
        }
        if tris.is_empty() {
            return Locator { origin: Vec2::ZERO, cell: 1.0, nx: 1, ny: 1, start: vec![0, 0], items: Vec::new() };
        }
        let ext = (hi - lo).x.max((hi - lo).y).max(1e-300);
        let target = (tris.len() as f64).max(1.0);
        let nside = (sqrt(target) as usize).clamp(1, 1024);
        let cell = ext / nside as f64 * (1.0 + 1e-9);
        let nx = ((hi.x - lo.x) / cell) as usize + 1;
        let ny = ((hi.y - lo.y) / cell) as usize + 1;
        let range = |a: Vec2, b: Vec2| {
            let f = |v: f64, n: usize| (floor(v / cell).max(0.0) as usize).min(n - 1);
            (f(a.x - lo.x, nx), f(b.x - lo.x, nx), f(a.y - lo.y, ny), f(b.y - lo.y, ny))
        };
        let bbox = |t: &[u32; 3]| {
            let mut a = points[t[0] as usize].xy();
            let mut b = a;
            for &v in &t[1..] {
                let p = points[v as usize].xy();
                a = Vec2::new(a.x.min(p.x), a.y.min(p.y));
                b = Vec2::new(b.x.max(p.x), b.y.max(p.y));
            }
            (a - Vec2::new(1e-9 * ext, 1e-9 * ext), b + Vec2::new(1e-9 * ext, 1e-9 * ext))
        };
        let mut count = vec![0u32; nx * ny + 1];
        for t in tris {
            let (a, b) = bbox(t);
            let (i0, i1, j0, j1) = range(a, b);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    count[j * nx + i + 1] += 1;
                }
            }
        }
        for k in 0..nx * ny {
            count[k + 1] += count[k];
        }
        let mut fill = count.clone();
        let mut items = vec![0u32; count[nx * ny] as usize];
        for (ti, t) in tris.iter().enumerate() {
            let (a, b) = bbox(t);
            let (i0, i1, j0, j1) = range(a, b);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let c = j * nx + i;
                    items[fill[c] as usize] = ti as u32;
                    fill[c] += 1;
                }
            }
        }
        Locator { origin: lo, cell, nx, ny, start: count, items }
    }

    fn candidates(&self, p: Vec2) -> &[u32] {
        let fx = (p.x - self.origin.x) / self.cell;
        let fy = (p.y - self.origin.y) / self.cell;
        if !(fx > -1e-6 && fy > -1e-6) || fx >= self.nx as f64 + 1e-6 || fy >= self.ny as f64 + 1e-6 {
            return &[];
        }
        let i = (floor(fx).max(0.0) as usize).min(self.nx - 1);
        let j = (floor(fy).max(0.0) as usize).min(self.ny - 1);
        let c = j * self.nx + i;
        &self.items[self.start[c] as usize..self.start[c + 1] as usize]
    }
}

/// Area of the part of triangle `tri` inside the axis-aligned box `[lo, hi]`.
pub fn clipped_area(tri: &[Vec2; 3], lo: Vec2, hi: Vec2) -> f64 {
    let mut poly: Vec<Vec2> = tri.to_vec();
    let mut buf: Vec<Vec2> = Vec::with_capacity(8);
    // Each clip keeps points with s(p) >= 0.
    let clips: [(usize, f64, f64); 4] = [(0, lo.x, 1.0), (0, hi.x, -1.0), (1, lo.y, 1.0), (1, hi.y, -1.0)];
    for (axis, bound, sign) in clips {
        buf.clear();
        let side = |p: Vec2| sign * (if axis == 0 { p.x } else { p.y } - bound);
        let n = poly.len();
        for k in 0..n {
            let a = poly[k];
            let b = poly[(k + 1) % n];
            let (sa, sb) = (side(a), side(b));
            if sa >= 0.0 {
                buf.push(a);
            }
            if (sa >= 0.0) != (sb >= 0.0) {
                let t = sa / (sa - sb);
                buf.push(a + (b - a) * t);
            }
        }
        core::mem::swap(&mut poly, &mut buf);
        if poly.len() < 3 {
            return 0.0;
        }
    }
    let mut a = 0.0;
    for k in 0..poly.len() {
        a += poly[k].cross(poly[(k + 1) % poly.len()]);
    }
    0.5 * a.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_point_envelope() {
        let pts = vec![
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(-1.0, 1.0, 1.0),
            Vec3::new(-1.0, -1.0, 1.0),
            Vec3::new(1.0, -1.0, 1.0),
            Vec3::new(0.0, 0.0, 0.0),
        ];
        let s = Surface::lower_hull(pts, 1e-12).unwrap();
        assert_eq!(s.tris.len(), 4);
        assert!((s.eval(Vec2::new(0.5, 0.5)).unwrap() - 0.5).abs() < 1e-14);
        assert!((s.area() - 4.0).abs() < 1e-12);
        assert!(s.eval(Vec2::new(2.0, 0.0)).is_none());
    }

    #[test]
    fn flat_samples_are_fan_triangulated() {
        let pts = vec![
            Vec3::new(0.0, 0.0, 2.0),
            Vec3::new(1.0, 0.0, 2.0),
            Vec3::new(1.0, 1.0, 2.0),
            Vec3::new(0.0, 1.0, 2.0),
        ];
        let s = Surface::lower_hull(pts, 1e-12).unwrap();
        assert!((s.area() - 1.0).abs() < 1e-14);
        assert_eq!(s.eval(Vec2::new(0.3, 0.6)), Some(2.0));
    }

    #[test]
    fn collinear_sites_are_rejected() {
        let pts = vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 1.0), Vec3::new(2.0, 0.0, 0.0)];
        assert!(matches!(Surface::lower_hull(pts, 1e-12), Err(Error::Degenerate(_))));
    }

    #[test]
    fn clip_area_of_half_square() {
        let tri = [Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(0.0, 2.0)];
        let a = clipped_area(&tri, Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0));
        assert!((a - 1.0).abs() < 1e-15);
        let b = clipped_area(&tri, Vec2::new(1.0, 1.0), Vec2::new(2.0, 2.0));
        assert!(b.abs() < 1e-15);
    }
}
