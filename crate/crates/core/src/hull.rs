//! Convex hulls in 2D and 3D.
//!
//! The 3D hull is an incremental quickhull with per-face conflict lists.
//! A point counts as outside a face only if it lies more than `eps` above
//! the face plane, so near-coplanar points are absorbed instead of
//! producing slivers. Inputs with affine dimension below 3 are reported
//! through [`HullShape`] rather than as an error.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{Vec2, Vec3};

const NONE: usize = usize::MAX;

/// Triangulated 3D hull. Faces index into the input point slice and are
/// oriented counterclockwise when seen from outside.
#[derive(Clone, Debug)]
pub struct Hull3 {
    pub faces: Vec<[usize; 3]>,
    pub normals: Vec<Vec3>,
    /// Sorted indices of the input points that are hull vertices.
    pub vertices: Vec<usize>,
}

/// Result of a hull computation, by affine dimension of the input.
#[derive(Clone, Debug)]
pub enum HullShape {
    Empty,
    Point(usize),
    /// Extreme endpoints of a collinear set.
    Segment(usize, usize),
    /// Coplanar set: counterclockwise polygon (around `normal`) of point indices.
    Polygon { cycle: Vec<usize>, normal: Vec3 },
    Solid(Hull3),
}

#[derive(Clone)]
struct Face {
    v: [usize; 3],
    n: Vec3,
    d: f64,
    nb: [usize; 3],
    outside: Vec<usize>,
    far: usize,
    far_dist: f64,
    alive: bool,
}

impl Face {
    fn new(v: [usize; 3], pts: &[Vec3]) -> Face {
        let (a, b, c) = (pts[v[0]], pts[v[1]], pts[v[2]]);
        let n = (b - a).cross(c - a).normalized();
        // Offset from the centroid reduces cancellation for far-off planes.
        let d = n.dot((a + b + c) / 3.0);
        Face { v, n, d, nb: [NONE; 3], outside: Vec::new(), far: NONE, far_dist: 0.0, alive: true }
    }

    #[inline]
    fn dist(&self, p: Vec3) -> f64 {
        self.n.dot(p) - self.d
    }

    fn push_outside(&mut self, i: usize, dist: f64) {
        if dist > self.far_dist || self.far == NONE {
            self.far = i;
            self.far_dist = dist;
        }
        self.outside.push(i);
    }
}

/// Affine dimension of a point set at tolerance `eps` along with the
/// witnesses used to build an initial simplex.
fn initial_simplex(pts: &[Vec3], eps: f64) -> (usize, [usize; 4]) {
    let n = pts.len();
    // Extremes along each axis; take the pair at largest separation.
    let mut best = (0usize, 0usize, -1.0f64);
    for axis in 0..3 {
        let (mut lo, mut hi) = (0usize, 0usize);
        for i in 1..n {
            if pts[i][axis] < pts[lo][axis] {
                lo = i;
            }
            if pts[i][axis] > pts[hi][axis] {
                hi = i;
            }
        }
        let d = (pts[hi] - pts[lo]).norm();
        if d > best.2 {
            best = (lo, hi, d);
        }
    }
    let (i0, i1, d01) = best;
    if d01 <= eps {
        return (0, [i0, 0, 0, 0]);
    }
    let dir = (pts[i1] - pts[i0]) / d01;
    let mut i2 = NONE;
    let mut dmax = eps;
    for (i, p) in pts.iter().enumerate() {
        let w = *p - pts[i0];
        let d = (w - dir * w.dot(dir)).norm();
        if d > dmax {
            dmax = d;
            i2 = i;
        }
    }
    if i2 == NONE {
        return (1, [i0, i1, 0, 0]);
    }
    let nrm = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
    let mut i3 = NONE;
    let mut dmax = eps;
    for (i, p) in pts.iter().enumerate() {
        let d = (nrm.dot(*p - pts[i0])).abs();
        if d > dmax {
            dmax = d;
            i3 = i;
        }
    }
    if i3 == NONE {
        return (2, [i0, i1, i2, 0]);
    }
    (3, [i0, i1, i2, i3])
}

/// Convex hull of `pts` with coplanarity tolerance `eps` (absolute length).
pub fn convex_hull(pts: &[Vec3], eps: f64) -> HullShape {
    if pts.is_empty() {
        return HullShape::Empty;
    }
    let (dim, s) = initial_simplex(pts, eps);
    match dim {
        0 => HullShape::Point(s[0]),
        1 => {
            let dir = pts[s[1]] - pts[s[0]];
            let (mut lo, mut hi) = (s[0], s[0]);
            for i in 0..pts.len() {
                let t = dir.dot(pts[i]);
                if t < dir.dot(pts[lo]) {
                    lo = i;
                }
                if t > dir.dot(pts[hi]) {
                    hi = i;
                }
            }
            HullShape::Segment(lo, hi)
        }
        2 => {
            let normal = (pts[s[1]] - pts[s[0]]).cross(pts[s[2]] - pts[s[0]]).normalized();
            let cycle = planar_hull(pts, normal, eps);
            HullShape::Polygon { cycle, normal }
        }
        _ => HullShape::Solid(quickhull(pts, s, eps)),
    }
}

/// Counterclockwise hull (around `normal`) of coplanar points.
fn planar_hull(pts: &[Vec3], normal: Vec3, eps: f64) -> Vec<usize> {
    let e1 = {
        let t = if normal.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
        (t - normal * t.dot(normal)).normalized()
    };
    let e2 = normal.cross(e1);
    let proj: Vec<Vec2> = pts.iter().map(|p| Vec2::new(p.dot(e1), p.dot(e2))).collect();
    convex_hull_2d(&proj, eps)
}

/// Andrew's monotone chain. Returns counterclockwise indices of the strict
/// hull vertices (points within `eps` of an edge are dropped).
pub fn convex_hull_2d(pts: &[Vec2], eps: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        pts[a]
            .x
            .partial_cmp(&pts[b].x)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(pts[a].y.partial_cmp(&pts[b].y).unwrap_or(core::cmp::Ordering::Equal))
    });
    idx.dedup_by(|a, b| (pts[*a] - pts[*b]).norm() <= eps);
    if idx.len() < 3 {
        return idx;
    }
    let turn = |o: Vec2, a: Vec2, b: Vec2| -> bool {
        let ab = (a - o).cross(b - o);
        // Require a left turn beyond the distance tolerance.
        ab > eps * (b - o).norm().max((a - o).norm())
    };
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for &i in &idx {
        while hull.len() >= 2 && !turn(pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]], pts[i]) {
            hull.pop();
        }
        hull.push(i);
    }
    let lower_len = hull.len() + 1;
    for &i in idx.iter().rev().skip(1) {
        while hull.len() >= lower_len && !turn(pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]], pts[i]) {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();
    hull
}

fn quickhull(pts: &[Vec3], s: [usize; 4], eps: f64) -> Hull3 {
    let mut faces: Vec<Face> = Vec::with_capacity(2 * pts.len() + 8);
    // Orient the tetrahedron so that face normals point away from its centroid.
    let centroid = (pts[s[0]] + pts[s[1]] + pts[s[2]] + pts[s[3]]) / 4.0;
    let tri = [[s[0], s[1], s[2]], [s[0], s[3], s[1]], [s[1], s[3], s[2]], [s[2], s[3], s[0]]];
    let flip = {
        let f = Face::new(tri[0], pts);
        f.dist(centroid) > 0.0
    };
    for t in tri {
        let v = if flip { [t[0], t[2], t[1]] } else { t };
        faces.push(Face::new(v, pts));
    }
    link_all(&mut faces);

    for (i, p) in pts.iter().enumerate() {
        if s.contains(&i) {
            continue;
        }
        for f in faces.iter_mut() {
            let d = f.dist(*p);
            if d > eps {
                f.push_outside(i, d);
                break;
            }
        }
    }

    let mut stack: Vec<usize> = (0..faces.len()).filter(|&f| !faces[f].outside.is_empty()).collect();
    let mut visible: Vec<usize> = Vec::new();
    let mut horizon: Vec<(usize, usize, usize)> = Vec::new(); // (a, b, outer face)
    let mut new_faces: Vec<usize> = Vec::new();
    let mut orphans: Vec<usize> = Vec::new();
    let mut visit_mark: Vec<u32> = vec![0; faces.len()];
    let mut epoch: u32 = 0;

    while let Some(fi) = stack.pop() {
        if !faces[fi].alive || faces[fi].outside.is_empty() {
            continue;
        }
        let eye = faces[fi].far;
        let ep = pts[eye];
        epoch += 1;
        if visit_mark.len() < faces.len() {
            visit_mark.resize(faces.len(), 0);
        }

        // Flood the visible region.
        visible.clear();
        horizon.clear();
        visible.push(fi);
        visit_mark[fi] = epoch;
        let mut k = 0;
        while k < visible.len() {
            let f = visible[k];
            k += 1;
            for e in 0..3 {
                let g = faces[f].nb[e];
                if visit_mark[g] == epoch {
                    continue;
                }
                if faces[g].dist(ep) > eps {
                    visit_mark[g] = epoch;
                    visible.push(g);
                }
            }
        }
        for &f in &visible {
            for e in 0..3 {
                let g = faces[f].nb[e];
                if visit_mark[g] != epoch {
                    horizon.push((faces[f].v[e], faces[f].v[(e + 1) % 3], g));
                }
            }
        }

        // The horizon must be a simple cycle; anything else means the
        // visible region was not a disk at this tolerance. Drop the point.
        let simple = {
            let mut ok = true;
            for (i, h) in horizon.iter().enumerate() {
                if horizon.iter().skip(i + 1).any(|o| o.0 == h.0) {
                    ok = false;
                    break;
                }
            }
            ok && horizon.len() >= 3
        };
        if !simple {
            let f = &mut faces[fi];
            f.outside.retain(|&p| p != eye);
            f.far = NONE;
            f.far_dist = 0.0;
            let outs = core::mem::take(&mut f.outside);
            for p in outs {
                let d = faces[fi].dist(pts[p]);
                faces[fi].push_outside(p, d);
            }
            stack.push(fi);
            continue;
        }

        orphans.clear();
        for &f in &visible {
            faces[f].alive = false;
            let outs = core::mem::take(&mut faces[f].outside);
            orphans.extend(outs.into_iter().filter(|&p| p != eye));
        }

        new_faces.clear();
        for &(a, b, outer) in &horizon {
            let nf = faces.len();
            let mut face = Face::new([a, b, eye], pts);
            face.nb[0] = outer;
            faces.push(face);
            // Repoint the outer face's edge (b, a) to the new face.
            let of = &mut faces[outer];
            for e in 0..3 {
                if of.v[e] == b && of.v[(e + 1) % 3] == a {
                    of.nb[e] = nf;
                }
            }
            new_faces.push(nf);
        }
        // Edge (b, eye) of the face starting at a meets edge (eye, b) of the
        // face whose horizon edge starts at b.
        for (i, &(_, b, _)) in horizon.iter().enumerate() {
            let j = horizon.iter().position(|h| h.0 == b).unwrap_or(i);
            let (fi_new, fj_new) = (new_faces[i], new_faces[j]);
            faces[fi_new].nb[1] = fj_new;
            faces[fj_new].nb[2] = fi_new;
        }

        for &p in &orphans {
            let q = pts[p];
            for &nf in &new_faces {
                let d = faces[nf].dist(q);
                if d > eps {
                    faces[nf].push_outside(p, d);
                    break;
                }
            }
        }
        for &nf in &new_faces {
            if !faces[nf].outside.is_empty() {
                stack.push(nf);
            }
        }
    }

    let mut out_faces = Vec::new();
    let mut normals = Vec::new();
    let mut is_vertex = vec![false; pts.len()];
    for f in faces.iter().filter(|f| f.alive) {
        out_faces.push(f.v);
        normals.push(f.n);
        for &v in &f.v {
            is_vertex[v] = true;
        }
    }
    let vertices = (0..pts.len()).filter(|&i| is_vertex[i]).collect();
    Hull3 { faces: out_faces, normals, vertices }
}

fn link_all(faces: &mut [Face]) {
    let n = faces.len();
    for f in 0..n {
        for e in 0..3 {
            let (a, b) = (faces[f].v[e], faces[f].v[(e + 1) % 3]);
            for g in 0..n {
                if g == f {
                    continue;
                }
                for k in 0..3 {
                    if faces[g].v[k] == b && faces[g].v[(k + 1) % 3] == a {
                        faces[f].nb[e] = g;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> Vec<Vec3> {
        let mut v = Vec::new();
        for i in 0..8 {
            v.push(Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64));
        }
        v
    }

    #[test]
    fn cube_hull_has_twelve_triangles() {
        let HullShape::Solid(h) = convex_hull(&cube(), 1e-12) else { panic!("not solid") };
        assert_eq!(h.faces.len(), 12);
        assert_eq!(h.vertices.len(), 8);
    }

    #[test]
    fn interior_points_are_dropped() {
        let mut p = cube();
        for i in 0..50 {
            let t = i as f64 / 50.0;
            p.push(Vec3::new(0.1 + 0.8 * t, 0.5, 0.2 + 0.6 * t * t));
        }
        // Points on faces too.
        p.push(Vec3::new(0.5, 0.5, 0.0));
        p.push(Vec3::new(0.5, 0.0, 0.5));
        let HullShape::Solid(h) = convex_hull(&p, 1e-12) else { panic!() };
        assert_eq!(h.vertices, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn degenerate_dimensions() {
        assert!(matches!(convex_hull(&[Vec3::ZERO, Vec3::ZERO], 1e-12), HullShape::Point(_)));
        let seg = [Vec3::ZERO, Vec3::new(0.5, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)];
        assert!(matches!(convex_hull(&seg, 1e-12), HullShape::Segment(0, 2)));
        let sq = [
            Vec3::ZERO,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.5, 0.5, 0.0),
        ];
        match convex_hull(&sq, 1e-12) {
            HullShape::Polygon { cycle, .. } => assert_eq!(cycle.len(), 4),
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn sphere_points_all_on_hull() {
        let mut p = Vec::new();
        let n = 400;
        for i in 0..n {
            // Fibonacci sphere.
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = crate::math::sqrt(1.0 - z * z);
            let phi = i as f64 * 2.399963229728653;
            p.push(Vec3::new(r * crate::math::cos(phi), r * crate::math::sin(phi), z));
        }
        let HullShape::Solid(h) = convex_hull(&p, 1e-12) else { panic!() };
        assert_eq!(h.vertices.len(), n);
        assert_eq!(h.faces.len(), 2 * n - 4);
        for (f, nrm) in h.faces.iter().zip(&h.normals) {
            for q in &p {
                assert!(nrm.dot(*q - p[f[0]]) < 1e-9);
            }
        }
    }
}
