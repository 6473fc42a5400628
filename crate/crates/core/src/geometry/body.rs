//! Convex polytopes in vertex representation with derived facets.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hull::{convex_hull, convex_hull_2d, HullShape};
use crate::math::{Vec2, Vec3};

use super::domain::Grid;
use super::gridfn::{GridFn, HULL_MERGE_REL};
use super::surface::Surface;

/// Triangles whose normals have at least this dot product and whose
/// vertices lie within the merge tolerance of a common plane form one facet.
const COPLANAR_DOT: f64 = 1.0 - 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    /// Outward unit normal.
    pub normal: Vec3,
    /// Support value `<n, p>` on the facet plane.
    pub offset: f64,
    /// Vertex indices, counterclockwise seen from outside.
    pub cycle: Vec<usize>,
    pub area: f64,
}

/// Bounded convex polytope. Vertices are exactly the extreme points.
#[derive(Clone, Debug)]
pub struct PolyBody {
    vertices: Vec<Vec3>,
    facets: Vec<Facet>,
    edges: Vec<(usize, usize)>,
    dim: u8,
    eps: f64,
}

fn point_diameter(pts: &[Vec3]) -> f64 {
    if pts.is_empty() {
        return 0.0;
    }
    let mut lo = pts[0];
    let mut hi = pts[0];
    for p in pts {
        lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    (hi - lo).norm()
}

fn polygon_area(pts: &[Vec3], normal: Vec3) -> f64 {
    let mut s = Vec3::ZERO;
    for k in 0..pts.len() {
        s += pts[k].cross(pts[(k + 1) % pts.len()]);
    }
    0.5 * s.dot(normal).abs()
}

/// Orthonormal pair spanning the plane orthogonal to `n`.
fn plane_basis(n: Vec3) -> (Vec3, Vec3) {
    let t = if n.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
    let e1 = (t - n * t.dot(n)).normalized();
    (e1, n.cross(e1))
}

impl PolyBody {
    /// Convex hull of a point set, merge tolerance relative to its diameter.
    pub fn from_points(points: &[Vec3]) -> Result<PolyBody> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Invalid("non-finite vertex".into()));
        }
        let eps = HULL_MERGE_REL * point_diameter(points).max(1e-300);
        Self::from_points_eps(points, eps)
    }

    pub fn from_points_eps(points: &[Vec3], eps: f64) -> Result<PolyBody> {
        match convex_hull(points, eps) {
            HullShape::Empty => Err(Error::Degenerate("empty point set".into())),
            HullShape::Point(i) => Ok(PolyBody { vertices: vec![points[i]], facets: vec![], edges: vec![], dim: 0, eps }),
            HullShape::Segment(a, b) => Ok(PolyBody {
                vertices: vec![points[a], points[b]],
                facets: vec![],
                edges: vec![(0, 1)],
                dim: 1,
                eps,
            }),
            HullShape::Polygon { cycle, normal } => {
                let vertices: Vec<Vec3> = cycle.iter().map(|&i| points[i]).collect();
                let k = vertices.len();
                let area = polygon_area(&vertices, normal);
                let offset = normal.dot(vertices[0]);
                let up: Vec<usize> = (0..k).collect();
                let down: Vec<usize> = (0..k).rev().collect();
                let edges = (0..k).map(|i| (i.min((i + 1) % k), i.max((i + 1) % k))).collect();
                Ok(PolyBody {
                    facets: vec![
                        Facet { normal, offset, cycle: up, area },
                        Facet { normal: -normal, offset: -offset, cycle: down, area },
                    ],
                    vertices,
                    edges,
                    dim: 2,
                    eps,
                })
            }
            HullShape::Solid(h) => {
                let mut remap = vec![usize::MAX; points.len()];
                let vertices: Vec<Vec3> = h
                    .vertices
                    .iter()
                    .enumerate()
                    .map(|(k, &i)| {
                        remap[i] = k;
                        points[i]
                    })
                    .collect();
                // Merge coplanar neighbouring triangles (union-find over shared edges).
                let nf = h.faces.len();
                let mut parent: Vec<usize> = (0..nf).collect();
                fn root(p: &mut [usize], mut i: usize) -> usize {
                    while p[i] != i {
                        p[i] = p[p[i]];
                        i = p[i];
                    }
                    i
                }
                let mut half: Vec<(usize, usize, usize)> = Vec::with_capacity(3 * nf);
                for (t, f) in h.faces.iter().enumerate() {
                    for k in 0..3 {
                        let (a, b) = (f[k], f[(k + 1) % 3]);
                        half.push((a.min(b), a.max(b), t));
                    }
                }
                half.sort_unstable();
                for w in half.windows(2) {
                    if w[0].0 != w[1].0 || w[0].1 != w[1].1 {
                        continue;
                    }
                    let (t, q) = (w[0].2, w[1].2);
                    let (n, m) = (h.normals[t], h.normals[q]);
                    let d = n.dot(points[h.faces[t][0]]);
                    if n.dot(m) > COPLANAR_DOT && h.faces[q].iter().all(|&v| (n.dot(points[v]) - d).abs() <= 4.0 * eps) {
                        let (ra, rb) = (root(&mut parent, t), root(&mut parent, q));
                        if ra != rb {
                            parent[ra.max(rb)] = ra.min(rb);
                        }
                    }
                }
                let mut group = vec![usize::MAX; nf];
                let mut planes = 0usize;
                for t in 0..nf {
                    let r = root(&mut parent, t);
                    if group[r] == usize::MAX {
                        group[r] = planes;
                        planes += 1;
                    }
                    group[t] = group[r];
                }
                let mut facets = Vec::with_capacity(planes);
                let mut members: Vec<Vec<usize>> = vec![Vec::new(); planes];
                for (t, g) in group.iter().enumerate() {
                    members[*g].push(t);
                }
                for tris in &members {
                    let mut nsum = Vec3::ZERO;
                    let mut area = 0.0;
                    let mut vids: Vec<usize> = Vec::new();
                    for &t in tris {
                        let f = h.faces[t];
                        let (a, b, c) = (points[f[0]], points[f[1]], points[f[2]]);
                        let cr = (b - a).cross(c - a);
                        nsum += cr;
                        area += 0.5 * cr.norm();
                        for v in f {
                            if !vids.contains(&remap[v]) {
                                vids.push(remap[v]);
                            }
                        }
                    }
                    let normal = nsum.normalized();
                    let (e1, e2) = plane_basis(normal);
                    let proj: Vec<Vec2> =
                        vids.iter().map(|&v| Vec2::new(vertices[v].dot(e1), vertices[v].dot(e2))).collect();
                    let order = convex_hull_2d(&proj, 0.0);
                    let cycle: Vec<usize> = order.iter().map(|&k| vids[k]).collect();
                    let offset = cycle.iter().map(|&v| normal.dot(vertices[v])).sum::<f64>() / cycle.len() as f64;
                    facets.push(Facet { normal, offset, cycle, area });
                }
                let mut edges: Vec<(usize, usize)> = Vec::new();
                for f in &facets {
                    let k = f.cycle.len();
                    for i in 0..k {
                        let (a, b) = (f.cycle[i], f.cycle[(i + 1) % k]);
                        edges.push((a.min(b), a.max(b)));
                    }
                }
                edges.sort_unstable();
                edges.dedup();
                Ok(PolyBody { vertices, facets, edges, dim: 3, eps })
            }
        }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Affine dimension: 0 point, 1 segment, 2 flat polygon, 3 solid.
    pub fn dim(&self) -> u8 {
        self.dim
    }

    /// Lower-dimensional body (zero volume).
    pub fn is_degenerate(&self) -> bool {
        self.dim < 3
    }

    /// Merge tolerance the facets were built with.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn diameter(&self) -> f64 {
        point_diameter(&self.vertices)
    }

    pub fn centroid(&self) -> Vec3 {
        let mut s = Vec3::ZERO;
        for v in &self.vertices {
            s += *v;
        }
        s / self.vertices.len() as f64
    }

    pub fn volume(&self) -> f64 {
        if self.dim < 3 {
            return 0.0;
        }
        let c = self.centroid();
        self.facets.iter().map(|f| f.area * (f.offset - f.normal.dot(c)) / 3.0).sum()
    }

    pub fn surface_area(&self) -> f64 {
        self.facets.iter().map(|f| f.area).sum()
    }

    /// `|sum area * n|`, zero for a closed surface.
    pub fn closure_residual(&self) -> f64 {
        let mut s = Vec3::ZERO;
        for f in &self.facets {
            s += f.normal * f.area;
        }
        s.norm()
    }

    /// Support value `max <v, n>` over vertices.
    pub fn support(&self, n: Vec3) -> f64 {
        self.vertices.iter().map(|v| v.dot(n)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn translated(&self, t: Vec3) -> PolyBody {
        let mut out = self.clone();
        for v in &mut out.vertices {
            *v += t;
        }
        for f in &mut out.facets {
            f.offset += f.normal.dot(t);
        }
        out
    }

    /// Outward facet normal of the lower facets, i.e. those seen from below.
    pub fn lower_facets(&self) -> impl Iterator<Item = &Facet> {
        self.facets.iter().filter(|f| f.normal.z < 0.0)
    }
}

/// Segment `[A, B]` in space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment3 {
    pub a: Vec3,
    pub b: Vec3,
    degenerate: bool,
}

impl Segment3 {
    pub fn new(a: Vec3, b: Vec3) -> Result<Segment3> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Invalid("non-finite segment endpoint".into()));
        }
        if a == b {
            return Err(Error::Degenerate("segment endpoints coincide".into()));
        }
        Ok(Segment3 { a, b, degenerate: false })
    }

    /// Single point `A = B`, flagged.
    pub fn point(a: Vec3) -> Segment3 {
        Segment3 { a, b: a, degenerate: true }
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn midpoint(&self) -> Vec3 {
        (self.a + self.b) * 0.5
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }
}

/// Body `{(x, z) : x in Omega, u(x) <= z <= M}` spanned by the node graph
/// and the rim at height `M`.
pub fn epigraph_body(u: &GridFn) -> Result<PolyBody> {
    let grid = u.grid();
    let m = u.height_cap();
    let mut pts = u.points();
    for (i, p) in grid.nodes.iter().enumerate() {
        if grid.on_boundary[i] {
            pts.push(p.lift(m));
        }
    }
    PolyBody::from_points_eps(&pts, u.hull_eps())
}

/// Lower boundary `min {z : (x, z) in C}` at every node of `grid`.
pub fn body_to_fn(c: &PolyBody, grid: &Arc<Grid>) -> Result<GridFn> {
    let top = c.vertices().iter().map(|v| v.z).fold(f64::NEG_INFINITY, f64::max);
    let vals = lower_surface(c)?.sample(grid)?;
    GridFn::new(grid.clone(), vals, top)
}

/// Triangulated lower boundary of `c`.
pub fn lower_surface(c: &PolyBody) -> Result<Surface> {
    Surface::lower_hull(c.vertices().to_vec(), c.eps())
}

/// `(1 - s) C + s D` for `s` in `[0, 1]`.
pub fn minkowski_blend(c: &PolyBody, d: &PolyBody, s: f64) -> Result<PolyBody> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Range { what: "blend parameter", value: s });
    }
    if s == 0.0 {
        return Ok(c.clone());
    }
    if s == 1.0 {
        return Ok(d.clone());
    }
    let mut pts = Vec::with_capacity(c.vertices.len() * d.vertices.len());
    for v in &c.vertices {
        for w in &d.vertices {
            pts.push(*v * (1.0 - s) + *w * s);
        }
    }
    PolyBody::from_points_eps(&pts, c.eps.max(d.eps))
}

/// `center + r (C - center)`.
pub fn homothety(c: &PolyBody, r: f64, center: Vec3) -> Result<PolyBody> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Range { what: "homothety ratio", value: r });
    }
    let mut out = c.clone();
    for v in &mut out.vertices {
        *v = center + (*v - center) * r;
    }
    for f in &mut out.facets {
        f.offset = f.normal.dot(center) + r * (f.offset - f.normal.dot(center));
        f.area *= r * r;
    }
    out.eps *= r;
    Ok(out)
}

/// `conv(C u I)`.
pub fn conv_with_segment(c: &PolyBody, seg: &Segment3) -> Result<PolyBody> {
    let mut pts = c.vertices.clone();
    pts.push(seg.a);
    if !seg.is_degenerate() {
        pts.push(seg.b);
    }
    PolyBody::from_points_eps(&pts, c.eps)
}

/// Support value at `n` and the vertices attaining it within the face tolerance.
pub fn support_function(c: &PolyBody, n: Vec3) -> (f64, Vec<usize>) {
    let h = c.support(n);
    let tol = 1e-9 * c.diameter().max(1e-300);
    let face = (0..c.vertices.len()).filter(|&i| c.vertices[i].dot(n) >= h - tol).collect();
    (h, face)
}

pub fn extreme_vertices(c: &PolyBody) -> Vec<Vec3> {
    c.vertices.clone()
}

/// Negative-parameter family: pointwise maximum of `u` and its two
/// homothety images about `A` and `B` with ratio `1 - s`. Image points that
/// fall outside the domain impose no constraint.
pub fn shrink_family_negative(u: &GridFn, a: Vec3, b: Vec3, s: f64) -> Result<GridFn> {
    if !(s <= 0.0) || !s.is_finite() {
        return Err(Error::Range { what: "negative family parameter", value: s });
    }
    if s == 0.0 {
        return Ok(u.clone());
    }
    let surf = u.surface()?;
    shrink_with_surface(u, &surf, &[a, b], s)
}

pub(crate) fn shrink_with_surface(u: &GridFn, surf: &Surface, centers: &[Vec3], s: f64) -> Result<GridFn> {
    let k = 1.0 - s;
    let vals = u
        .grid()
        .nodes
        .iter()
        .zip(u.values())
        .map(|(x, v)| {
            let mut out = *v;
            for c in centers {
                let y = (*x - c.xy() * s) / k;
                if let Some(z) = surf.eval(y) {
                    out = out.max(s * c.z + k * z);
                }
            }
            out
        })
        .collect();
    u.with_values(vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::math::sqrt;

    fn cube(lo: f64, hi: f64) -> PolyBody {
        let mut p = Vec::new();
        for &x in &[lo, hi] {
            for &y in &[lo, hi] {
                for &z in &[lo, hi] {
                    p.push(Vec3::new(x, y, z));
                }
            }
        }
        PolyBody::from_points(&p).unwrap()
    }

    #[test]
    fn cube_facets() {
        let c = cube(0.0, 1.0);
        assert_eq!(c.vertices().len(), 8);
        assert_eq!(c.facets().len(), 6);
        assert_eq!(c.edges().len(), 12);
        assert!(c.closure_residual() < 1e-14);
        assert!((c.volume() - 1.0).abs() < 1e-14);
        for f in c.facets() {
            assert_eq!(f.cycle.len(), 4);
            assert!((f.area - 1.0).abs() < 1e-14);
            assert!((f.normal.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn epigraph_of_zero_is_cube() {
        let g = Domain::rect(0.0, 1.0, 0.0, 1.0, 0.125).unwrap().grid();
        let u = GridFn::constant(g.clone(), 1.0, 0.0).unwrap();
        let c = epigraph_body(&u).unwrap();
        assert_eq!(c.vertices().len(), 8);
        let back = body_to_fn(&c, &g).unwrap();
        assert!(back.max_abs_diff(&u) < 1e-15);
    }

    #[test]
    fn flat_slab_is_degenerate() {
        let g = Domain::rect(0.0, 1.0, 0.0, 1.0, 0.25).unwrap().grid();
        let u = GridFn::constant(g, 1.0, 1.0).unwrap();
        let c = epigraph_body(&u).unwrap();
        assert!(c.is_degenerate());
        assert_eq!(c.dim(), 2);
        assert!(c.closure_residual() < 1e-14);
    }

    #[test]
    fn pyramid_epigraph_roundtrip() {
        let g = Domain::rect(-1.0, 1.0, -1.0, 1.0, 0.125).unwrap().grid();
        let u = GridFn::from_fn(g.clone(), 1.0, |p| p.x.abs().max(p.y.abs())).unwrap();
        let c = epigraph_body(&u).unwrap();
        assert_eq!(c.vertices().len(), 5);
        assert!(c.vertices().contains(&Vec3::ZERO));
        assert_eq!(c.lower_facets().count(), 4);
        let back = body_to_fn(&c, &g).unwrap();
        assert!(back.max_abs_diff(&u) < 1e-12);
    }

    #[test]
    fn segment_blend_is_square() {
        let c = PolyBody::from_points(&[Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0)]).unwrap();
        let d = PolyBody::from_points(&[Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0)]).unwrap();
        let q = minkowski_blend(&c, &d, 0.5).unwrap();
        assert_eq!(q.dim(), 2);
        assert_eq!(q.vertices().len(), 4);
        for f in q.facets() {
            assert!((f.area - 0.25).abs() < 1e-15);
        }
        assert!(minkowski_blend(&c, &d, 1.5).is_err());
    }

    #[test]
    fn blend_of_translates() {
        let c = cube(0.0, 1.0);
        let d = c.translated(Vec3::new(1.0, 0.0, 0.0));
        let q = minkowski_blend(&c, &d, 0.3).unwrap();
        assert_eq!(q.vertices().len(), 8);
        assert!((q.support(Vec3::new(1.0, 0.0, 0.0)) - 1.3).abs() < 1e-14);
        assert!((q.support(Vec3::new(-1.0, 0.0, 0.0)) + 0.3).abs() < 1e-14);
    }

    #[test]
    fn homothety_scales() {
        let c = cube(0.0, 1.0);
        let d = homothety(&c, 2.0, Vec3::ZERO).unwrap();
        assert!((d.volume() - 8.0).abs() < 1e-12);
        assert!(homothety(&c, 0.0, Vec3::ZERO).is_err());
        let e = homothety(&c, 0.5, c.centroid()).unwrap();
        for v in e.vertices() {
            assert!(v.x > 0.0 && v.x < 1.0);
        }
    }

    #[test]
    fn cube_with_segment_below() {
        let c = cube(0.0, 1.0);
        let seg = Segment3::new(Vec3::new(0.5, 0.4, -0.5), Vec3::new(0.5, 0.6, -0.5)).unwrap();
        let t = conv_with_segment(&c, &seg).unwrap();
        assert_eq!(t.vertices().len(), 10);
        let quads: Vec<&Facet> = t.lower_facets().filter(|f| f.cycle.len() == 4).collect();
        assert_eq!(quads.len(), 2);
        for f in &quads {
            // Trapezoid with parallel sides 1 and 0.2, slant height sqrt(0.5^2+0.5^2).
            assert!((f.area - 0.6 * sqrt(0.5)).abs() < 1e-12);
        }
        let inside = Segment3::new(Vec3::new(0.2, 0.2, 0.2), Vec3::new(0.8, 0.8, 0.8)).unwrap();
        assert_eq!(conv_with_segment(&c, &inside).unwrap().vertices().len(), 8);
        let pt = conv_with_segment(&c, &Segment3::point(Vec3::new(0.5, 0.5, -1.0))).unwrap();
        assert_eq!(pt.vertices().len(), 9);
    }

    #[test]
    fn support_face_of_cube() {
        let c = cube(0.0, 1.0);
        let (h, face) = support_function(&c, Vec3::new(0.0, 0.0, -1.0));
        assert_eq!(h, 0.0);
        assert_eq!(face.len(), 4);
        let (_, one) = support_function(&c, Vec3::new(0.3, 0.5, 0.8).normalized());
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn shrink_closed_form() {
        let g = Domain::disk(Vec2::ZERO, 1.0, 1.0 / 64.0).unwrap().grid();
        let u = GridFn::from_fn(g.clone(), 1.0, |p| p.norm2()).unwrap();
        let a = Vec3::new(0.0, 0.0, -0.1);
        let v = shrink_family_negative(&u, a, a, -0.05).unwrap();
        let o = g.node_at(64, 64).unwrap();
        assert!((v.values()[o] - 0.005).abs() < 1e-12);
        let slope_bound = 2.0 * g.h * g.h;
        for (i, p) in g.nodes.iter().enumerate() {
            let exact = p.norm2().max(p.norm2() / 1.05 + 0.005);
            assert!((v.values()[i] - exact).abs() <= slope_bound, "{p:?}");
        }
        let w = shrink_family_negative(&u, a, a, -0.01).unwrap();
        assert!((w.values()[o] - 0.001).abs() < 1e-12);
    }
}
