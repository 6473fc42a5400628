//! Planar convex domains and their clipped uniform grids.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{ceil, floor, sqrt, Vec2};

#[derive(Clone, Debug, PartialEq)]
pub enum DomainKind {
    Disk { center: Vec2, radius: f64 },
    /// Convex polygon, counterclockwise.
    Polygon { vertices: Vec<Vec2> },
}

/// A compact convex domain together with its grid step.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub kind: DomainKind,
    pub h: f64,
}

impl Domain {
    pub fn disk(center: Vec2, radius: f64, h: f64) -> Result<Domain> {
        let d = Domain { kind: DomainKind::Disk { center, radius }, h };
        d.validate()?;
        Ok(d)
    }

    pub fn polygon(vertices: Vec<Vec2>, h: f64) -> Result<Domain> {
        let d = Domain { kind: DomainKind::Polygon { vertices }, h };
        d.validate()?;
        Ok(d)
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rect(x0: f64, x1: f64, y0: f64, y1: f64, h: f64) -> Result<Domain> {
        Self::polygon(
            vec![Vec2::new(x0, y0), Vec2::new(x1, y0), Vec2::new(x1, y1), Vec2::new(x0, y1)],
            h,
        )
    }

    fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::Range { what: "grid step", value: self.h });
        }
        match &self.kind {
            DomainKind::Disk { center, radius } => {
                if !(*radius > 0.0) || !radius.is_finite() || !center.x.is_finite() || !center.y.is_finite() {
                    return Err(Error::Range { what: "disk radius", value: *radius });
                }
            }
            DomainKind::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(Error::Invalid(format!("polygon needs 3 vertices, got {n}")));
                }
                for i in 0..n {
                    let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
                    if (b - a).cross(c - b) <= 0.0 {
                        return Err(Error::Invalid("polygon not strictly convex and counterclockwise".into()));
                    }
                }
            }
        }
        let w = self.min_width();
        if w < 4.0 * self.h * (1.0 - 1e-12) {
            return Err(Error::Invalid(format!("grid step {} too coarse for width {w}", self.h)));
        }
        Ok(())
    }

    /// Bounding box `(min, max)`.
    pub fn bbox(&self) -> (Vec2, Vec2) {
        match &self.kind {
            DomainKind::Disk { center, radius } => {
                (*center - Vec2::new(*radius, *radius), *center + Vec2::new(*radius, *radius))
            }
            DomainKind::Polygon { vertices } => {
                let mut lo = vertices[0];
                let mut hi = vertices[0];
                for v in vertices {
                    lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
                    hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
                }
                (lo, hi)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.kind {
            DomainKind::Disk { radius, .. } => 2.0 * radius,
            DomainKind::Polygon { vertices } => {
                let mut d: f64 = 0.0;
                for a in vertices {
                    for b in vertices {
                        d = d.max((*a - *b).norm());
                    }
                }
                d
            }
        }
    }

    /// Minimum width over directions.
    pub fn min_width(&self) -> f64 {
        match &self.kind {
            DomainKind::Disk { radius, .. } => 2.0 * radius,
            DomainKind::Polygon { vertices } => {
                let n = vertices.len();
                let mut w = f64::INFINITY;
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    let nrm = (b - a).perp().normalized();
                    let far = vertices.iter().map(|v| (*v - a).dot(nrm).abs()).fold(0.0, f64::max);
                    w = w.min(far);
                }
                w
            }
        }
    }

    pub fn area(&self) -> f64 {
        match &self.kind {
            DomainKind::Disk { radius, .. } => core::f64::consts::PI * radius * radius,
            DomainKind::Polygon { vertices } => polygon_area(vertices),
        }
    }

    pub fn center(&self) -> Vec2 {
        match &self.kind {
            DomainKind::Disk { center, .. } => *center,
            DomainKind::Polygon { vertices } => {
                let s = vertices.iter().fold(Vec2::ZERO, |a, v| a + *v);
                s / vertices.len() as f64
            }
        }
    }

    /// Signed distance to the boundary, positive inside.
    pub fn inside_distance(&self, p: Vec2) -> f64 {
        match &self.kind {
            DomainKind::Disk { center, radius } => radius - (p - *center).norm(),
            DomainKind::Polygon { vertices } => {
                let n = vertices.len();
                let mut d = f64::INFINITY;
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    let inward = (b - a).perp().normalized();
                    d = d.min((p - a).dot(inward));
                }
                d
            }
        }
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        self.inside_distance(p) >= -tol
    }

    /// Outward unit normal at (or nearest to) a boundary point.
    pub fn outward_normal(&self, p: Vec2) -> Vec2 {
        match &self.kind {
            DomainKind::Disk { center, .. } => (p - *center).normalized(),
            DomainKind::Polygon { vertices } => {
                let n = vertices.len();
                let mut best = (f64::INFINITY, Vec2::new(1.0, 0.0));
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    let inward = (b - a).perp().normalized();
                    let d = (p - a).dot(inward).abs();
                    if d < best.0 {
                        best = (d, -inward);
                    }
                }
                best.1
            }
        }
    }

    /// Minkowski gauge about the domain center: 0 at the center, 1 on the boundary.
    pub fn gauge(&self, p: Vec2) -> f64 {
        let c = self.center();
        let d = p - c;
        if d.norm() == 0.0 {
            return 0.0;
        }
        match &self.kind {
            DomainKind::Disk { radius, .. } => d.norm() / radius,
            DomainKind::Polygon { vertices } => {
                let n = vertices.len();
                let mut g: f64 = 0.0;
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    let outward = -(b - a).perp().normalized();
                    let support = (a - c).dot(outward);
                    g = g.max(d.dot(outward) / support);
                }
                g
            }
        }
    }

    /// Interval of `t` with `(x, t)` in the domain, for a vertical line.
    fn chord_vertical(&self, x: f64) -> Option<(f64, f64)> {
        match &self.kind {
            DomainKind::Disk { center, radius } => {
                let dx = x - center.x;
                let r2 = radius * radius - dx * dx;
                if r2 < 0.0 {
                    return None;
                }
                let s = sqrt(r2);
                Some((center.y - s, center.y + s))
            }
            DomainKind::Polygon { vertices } => clip_line(vertices, Vec2::new(x, 0.0), Vec2::new(0.0, 1.0)),
        }
    }

    fn chord_horizontal(&self, y: f64) -> Option<(f64, f64)> {
        match &self.kind {
            DomainKind::Disk { center, radius } => {
                let dy = y - center.y;
                let r2 = radius * radius - dy * dy;
                if r2 < 0.0 {
                    return None;
                }
                let s = sqrt(r2);
                Some((center.x - s, center.x + s))
            }
            DomainKind::Polygon { vertices } => clip_line(vertices, Vec2::new(0.0, y), Vec2::new(1.0, 0.0)),
        }
    }

    /// Parameter interval of the line `p + t d` inside the domain.
    pub fn clip_line(&self, p: Vec2, d: Vec2) -> Option<(f64, f64)> {
        match &self.kind {
            DomainKind::Disk { center, radius } => {
                let a = d.norm2();
                let w = p - *center;
                let b = w.dot(d);
                let c = w.norm2() - radius * radius;
                let disc = b * b - a * c;
                if disc < 0.0 || a == 0.0 {
                    return None;
                }
                let s = sqrt(disc);
                Some(((-b - s) / a, (-b + s) / a))
            }
            DomainKind::Polygon { vertices } => clip_line(vertices, p, d),
        }
    }

    /// Build the clipped grid for this domain.
    pub fn grid(&self) -> Arc<Grid> {
        Arc::new(Grid::build(self.clone()))
    }
}

fn polygon_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    let mut a = 0.0;
    for i in 0..n {
        a += v[i].cross(v[(i + 1) % n]);
    }
    0.5 * a
}

fn clip_line(vertices: &[Vec2], p: Vec2, d: Vec2) -> Option<(f64, f64)> {
    let n = vertices.len();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        let inward = (b - a).perp();
        // (p + t d - a) . inward >= 0
        let c0 = (p - a).dot(inward);
        let c1 = d.dot(inward);
        if c1.abs() < 1e-300 {
            if c0 < -1e-12 * inward.norm() {
                return None;
            }
        } else if c1 > 0.0 {
            lo = lo.max(-c0 / c1);
        } else {
            hi = hi.min(-c0 / c1);
        }
    }
    if lo > hi {
        None
    } else {
        Some((lo, hi))
    }
}

pub(crate) const NO_NODE: u32 = u32::MAX;

/// Axis-aligned uniform grid clipped to a domain. Nodes are the grid points
/// inside the domain followed by the extra boundary nodes where grid lines
/// cross the boundary (and polygon corners).
#[derive(Clone, Debug)]
pub struct Grid {
    pub domain: Domain,
    pub origin: Vec2,
    pub h: f64,
    /// Number of cells along x and y.
    pub nx: usize,
    pub ny: usize,
    pub nodes: Vec<Vec2>,
    pub on_boundary: Vec<bool>,
    /// `(nx+1) * (ny+1)` lattice -> node id or `NO_NODE`.
    lattice: Vec<u32>,
    /// CSR lists of nodes per cell.
    cell_start: Vec<u32>,
    cell_nodes: Vec<u32>,
}

impl Grid {
    fn build(domain: Domain) -> Grid {
        let h = domain.h;
        let (lo, hi) = domain.bbox();
        let nx = ceil((hi.x - lo.x) / h - 1e-9).max(1.0) as usize;
        let ny = ceil((hi.y - lo.y) / h - 1e-9).max(1.0) as usize;
        let scale = domain.diameter();
        let tol = 1e-12 * scale;
        let mut nodes = Vec::new();
        let mut on_boundary = Vec::new();
        let mut lattice = vec![NO_NODE; (nx + 1) * (ny + 1)];
        for j in 0..=ny {
            for i in 0..=nx {
                let p = Vec2::new(lo.x + i as f64 * h, lo.y + j as f64 * h);
                let d = domain.inside_distance(p);
                if d >= -tol {
                    lattice[j * (nx + 1) + i] = nodes.len() as u32;
                    nodes.push(p);
                    on_boundary.push(d <= tol);
                }
            }
        }
        // Boundary crossings of grid lines not already on a lattice node.
        let min_sep = 1e-6 * h;
        let mut extra: Vec<Vec2> = Vec::new();
        let near_lattice = |p: Vec2| -> bool {
            let fi = (p.x - lo.x) / h;
            let fj = (p.y - lo.y) / h;
            let ri = crate::math::round(fi);
            let rj = crate::math::round(fj);
            (fi - ri).abs() * h < min_sep && (fj - rj).abs() * h < min_sep
        };
        for i in 0..=nx {
            let x = lo.x + i as f64 * h;
            if let Some((a, b)) = domain.chord_vertical(x) {
                for y in [a, b] {
                    let p = Vec2::new(x, y);
                    if !near_lattice(p) {
                        extra.push(p);
                    }
                }
            }
        }
        for j in 0..=ny {
            let y = lo.y + j as f64 * h;
            if let Some((a, b)) = domain.chord_horizontal(y) {
                for x in [a, b] {
                    let p = Vec2::new(x, y);
                    if !near_lattice(p) {
                        extra.push(p);
                    }
                }
            }
        }
        if let DomainKind::Polygon { vertices } = &domain.kind {
            for v in vertices {
                if !near_lattice(*v) {
                    extra.push(*v);
                }
            }
        }
        let c = domain.center();
        extra.sort_by(|a, b| {
            let ta = crate::math::atan2(a.y - c.y, a.x - c.x);
            let tb = crate::math::atan2(b.y - c.y, b.x - c.x);
            ta.partial_cmp(&tb).unwrap_or(core::cmp::Ordering::Equal)
        });
        let mut kept: Vec<Vec2> = Vec::new();
        for p in extra {
            if kept.iter().rev().take(4).all(|q| (*q - p).norm() > min_sep)
                && kept.first().is_none_or(|q| (*q - p).norm() > min_sep)
            {
                kept.push(p);
            }
        }
        for p in kept {
            nodes.push(p);
            on_boundary.push(true);
        }

        let ncell = nx * ny;
        let cell_of = |p: Vec2| -> usize {
            let i = (floor((p.x - lo.x) / h).max(0.0) as usize).min(nx - 1);
            let j = (floor((p.y - lo.y) / h).max(0.0) as usize).min(ny - 1);
            j * nx + i
        };
        let mut counts = vec![0u32; ncell + 1];
        for p in &nodes {
            counts[cell_of(*p) + 1] += 1;
        }
        for k in 0..ncell {
            counts[k + 1] += counts[k];
        }
        let mut fill = counts.clone();
        let mut cell_nodes = vec![0u32; nodes.len()];
        for (id, p) in nodes.iter().enumerate() {
            let c = cell_of(*p);
            cell_nodes[fill[c] as usize] = id as u32;
            fill[c] += 1;
        }
        Grid { domain, origin: lo, h, nx, ny, nodes, on_boundary, lattice, cell_start: counts, cell_nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node id at lattice position `(i, j)` if it lies in the domain.
    pub fn node_at(&self, i: usize, j: usize) -> Option<usize> {
        if i > self.nx || j > self.ny {
            return None;
        }
        let id = self.lattice[j * (self.nx + 1) + i];
        (id != NO_NODE).then_some(id as usize)
    }

    /// Lattice position of a node, if it is a lattice node.
    pub fn lattice_pos(&self, id: usize) -> Option<(usize, usize)> {
        let p = self.nodes[id];
        let fi = (p.x - self.origin.x) / self.h;
        let fj = (p.y - self.origin.y) / self.h;
        let (i, j) = (crate::math::round(fi), crate::math::round(fj));
        if (fi - i).abs() > 1e-6 || (fj - j).abs() > 1e-6 || i < 0.0 || j < 0.0 {
            return None;
        }
        let (i, j) = (i as usize, j as usize);
        (self.node_at(i, j) == Some(id)).then_some((i, j))
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Cell index range `[i0, i1] x [j0, j1]` covering a box.
    pub fn cell_range(&self, lo: Vec2, hi: Vec2) -> (usize, usize, usize, usize) {
        let clampi = |v: f64, n: usize| -> usize { (floor(v).max(0.0) as usize).min(n - 1) };
        (
            clampi((lo.x - self.origin.x) / self.h, self.nx),
            clampi((hi.x - self.origin.x) / self.h, self.nx),
            clampi((lo.y - self.origin.y) / self.h, self.ny),
            clampi((hi.y - self.origin.y) / self.h, self.ny),
        )
    }

    pub fn nodes_in_cell(&self, c: usize) -> &[u32] {
        &self.cell_nodes[self.cell_start[c] as usize..self.cell_start[c + 1] as usize]
    }

    /// Lower-left corner of a cell.
    pub fn cell_corner(&self, c: usize) -> Vec2 {
        let (i, j) = (c % self.nx, c / self.nx);
        Vec2::new(self.origin.x + i as f64 * self.h, self.origin.y + j as f64 * self.h)
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&i| !self.on_boundary[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_grid_counts() {
        let d = Domain::rect(-1.0, 1.0, -1.0, 1.0, 0.25).unwrap();
        let g = d.grid();
        assert_eq!(g.len(), 81);
        assert_eq!(g.on_boundary.iter().filter(|b| **b).count(), 32);
        assert_eq!(g.node_at(4, 4).map(|i| g.nodes[i]), Some(Vec2::new(0.0, 0.0)));
    }

    #[test]
    fn disk_grid_has_rim_nodes() {
        let d = Domain::disk(Vec2::ZERO, 1.0, 0.25).unwrap();
        let g = d.grid();
        for (p, b) in g.nodes.iter().zip(&g.on_boundary) {
            if *b {
                assert!((p.norm() - 1.0).abs() < 1e-12);
            } else {
                assert!(p.norm() < 1.0);
            }
        }
        // (1, 0), (0, 1), ... are lattice nodes; rim crossings fill in the rest.
        assert!(g.on_boundary.iter().filter(|b| **b).count() > 16);
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(Domain::disk(Vec2::ZERO, -1.0, 0.1).is_err());
        assert!(Domain::disk(Vec2::ZERO, 1.0, 0.6).is_err());
        let cw = vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0), Vec2::new(1.0, 0.0)];
        assert!(Domain::polygon(cw, 0.1).is_err());
    }

    #[test]
    fn gauge_is_one_on_boundary() {
        let d = Domain::rect(-1.0, 1.0, -2.0, 2.0, 0.25).unwrap();
        assert!((d.gauge(Vec2::new(1.0, 0.3)) - 1.0).abs() < 1e-12);
        assert!((d.gauge(Vec2::new(0.0, -2.0)) - 1.0).abs() < 1e-12);
        assert!((d.gauge(Vec2::new(0.5, 0.0)) - 0.5).abs() < 1e-12);
    }
}
