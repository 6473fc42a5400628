//! Convex functions as maxima of affine pieces, scored with a cell-local
//! resistance that updates in time proportional to the changed nodes.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::geometry::{GridFn, Grid, Surface, HULL_MERGE_REL};
use crate::math::{Vec2, Vec3};
use crate::resistance::{eval_f_surface, PressureModel};

/// Affine function `g . x + c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane {
    pub g: Vec2,
    pub c: f64,
}

impl Plane {
    pub const ZERO: Plane = Plane { g: Vec2 { x: 0.0, y: 0.0 }, c: 0.0 };

    pub fn at(&self, x: Vec2) -> f64 {
        self.g.dot(x) + self.c
    }

    /// Plane through `(x, z)` with gradient `g`.
    pub fn through(x: Vec2, z: f64, g: Vec2) -> Plane {
        Plane { g, c: z - g.dot(x) }
    }
}

enum Cell {
    Empty,
    /// Lattice corners `(i, j), (i+1, j), (i, j+1), (i+1, j+1)`.
    Square([u32; 4]),
    /// Cell cut by the boundary: every node on its closed box.
    Clipped(Vec<u32>),
}

/// Per-cell lower-hull resistance on a fixed grid.
pub(crate) struct CellModel {
    grid: Arc<Grid>,
    cells: Vec<Cell>,
    node_start: Vec<u32>,
    node_cells: Vec<u32>,
    eps: f64,
}

impl CellModel {
    pub(crate) fn new(grid: Arc<Grid>, m: f64) -> CellModel {
        let (nx, ny, h) = (grid.nx, grid.ny, grid.h);
        let tol = 1e-7;
        let mut extra: Vec<Vec<u32>> = vec![Vec::new(); nx * ny];
        for id in 0..grid.len() {
            if grid.lattice_pos(id).is_some() {
                continue;
            }
            let p = grid.nodes[id];
            let fi = (p.x - grid.origin.x) / h;
            let fj = (p.y - grid.origin.y) / h;
            let range = |f: f64, n: usize| {
                let lo = crate::math::ceil(f - 1.0 - tol).max(0.0) as usize;
                let hi = (crate::math::floor(f + tol).max(0.0) as usize).min(n - 1);
                (lo, hi)
            };
            let (i0, i1) = range(fi, nx);
            let (j0, j1) = range(fj, ny);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    extra[j * nx + i].push(id as u32);
                }
            }
        }
        let mut cells = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let corners = [grid.node_at(i, j), grid.node_at(i + 1, j), grid.node_at(i, j + 1), grid.node_at(i + 1, j + 1)];
                let ex = &extra[j * nx + i];
                if ex.is_empty() && corners.iter().all(Option::is_some) {
                    let c = corners.map(|v| v.unwrap_or(0) as u32);
                    cells.push(Cell::Square(c));
                } else {
                    let mut pts: Vec<u32> = corners.iter().flatten().map(|v| *v as u32).collect();
                    pts.extend(ex.iter().copied());
                    pts.sort_unstable();
                    pts.dedup();
                    cells.push(if pts.len() >= 3 { Cell::Clipped(pts) } else { Cell::Empty });
                }
            }
        }
        let mut counts = vec![0u32; grid.len() + 1];
        let each = |cell: &Cell| -> Vec<u32> {
            match cell {
                Cell::Empty => Vec::new(),
                Cell::Square(c) => c.to_vec(),
                Cell::Clipped(p) => p.clone(),
            }
        };
        for cell in &cells {
            for n in each(cell) {
                counts[n as usize + 1] += 1;
            }
        }
        for k in 0..grid.len() {
            counts[k + 1] += counts[k];
        }
        let mut fill = counts.clone();
        let mut node_cells = vec![0u32; counts[grid.len()] as usize];
        for (ci, cell) in cells.iter().enumerate() {
            for n in each(cell) {
                node_cells[fill[n as usize] as usize] = ci as u32;
                fill[n as usize] += 1;
            }
        }
        let eps = HULL_MERGE_REL * (grid.domain.diameter() + m.abs());
        CellModel { grid, cells, node_start: counts, node_cells, eps }
    }

    pub(crate) fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn cells_of(&self, node: usize) -> &[u32] {
        &self.node_cells[self.node_start[node] as usize..self.node_start[node + 1] as usize]
    }

    /// Resistance of the lower hull of the cell's nodes.
    fn cell_value(&self, c: usize, vals: &[f64], f: &PressureModel) -> f64 {
        match &self.cells[c] {
            Cell::Empty => 0.0,
            Cell::Square([a, b, cc, d]) => {
                let h = self.grid.h;
                let (u00, u10, u01, u11) = (vals[*a as usize], vals[*b as usize], vals[*cc as usize], vals[*d as usize]);
                let (g1, g2) = if u00 + u11 <= u10 + u01 {
                    (Vec2::new(u10 - u00, u11 - u10), Vec2::new(u11 - u01, u01 - u00))
                } else {
                    (Vec2::new(u10 - u00, u01 - u00), Vec2::new(u11 - u01, u11 - u10))
                };
                0.5 * h * h * (f.value(g1 * (1.0 / h)) + f.value(g2 * (1.0 / h)))
            }
            Cell::Clipped(ids) => {
                let pts: Vec<Vec3> = ids.iter().map(|&i| self.grid.nodes[i as usize].lift(vals[i as usize])).collect();
                Surface::lower_hull(pts, self.eps).map_or(0.0, |s| eval_f_surface(&s, f))
            }
        }
    }
}

/// An edit of the plane set.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Edit {
    Add(Plane),
    Replace(u32, Plane),
    Remove(u32),
}

const BOUNDARY: u32 = u32::MAX;

/// `u = max(0, planes)` in the interior and `u = M` on the boundary nodes.
/// Plane 0 is the zero plane and is never edited.
pub(crate) struct PlaneState {
    model: CellModel,
    m: f64,
    planes: Vec<Option<Plane>>,
    uses: Vec<u32>,
    free: Vec<u32>,
    active: Vec<u32>,
    values: Vec<f64>,
    cell_f: Vec<f64>,
    total: f64,
    interior: Vec<u32>,
    rim: Vec<Vec2>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl PlaneState {
    pub(crate) fn new(model: CellModel, m: f64, f: &PressureModel, planes: &[Plane]) -> PlaneState {
        let grid = model.grid.clone();
        let interior: Vec<u32> = grid.interior_nodes().map(|i| i as u32).collect();
        let rim: Vec<Vec2> = (0..grid.len()).filter(|&i| grid.on_boundary[i]).map(|i| grid.nodes[i]).collect();
        let ncell = model.cells.len();
        let mut st = PlaneState {
            model,
            m,
            planes: vec![Some(Plane::ZERO)],
            uses: vec![0],
            free: Vec::new(),
            active: vec![BOUNDARY; grid.len()],
            values: vec![m; grid.len()],
            cell_f: vec![0.0; ncell],
            total: 0.0,
            interior,
            rim,
            stamp: vec![0; ncell],
            epoch: 0,
        };
        for p in planes {
            if *p != Plane::ZERO {
                let p = st.clip(*p);
                st.planes.push(Some(p));
                st.uses.push(0);
            }
        }
        st.refresh_all(f);
        st.prune();
        st
    }

    /// Recompute every node value and cell.
    fn refresh_all(&mut self, f: &PressureModel) {
        for u in self.uses.iter_mut() {
            *u = 0;
        }
        for idx in 0..self.interior.len() {
            let j = self.interior[idx] as usize;
            let (v, a) = self.max_at(self.model.grid.nodes[j]);
            self.values[j] = v;
            self.active[j] = a;
            self.uses[a as usize] += 1;
        }
        for c in 0..self.cell_f.len() {
            self.cell_f[c] = self.model.cell_value(c, &self.values, f);
        }
        self.total = self.cell_f.iter().sum();
    }

    fn max_at(&self, x: Vec2) -> (f64, u32) {
        let mut best = (0.0, 0u32);
        for (k, p) in self.planes.iter().enumerate().skip(1) {
            if let Some(p) = p {
                let v = p.at(x);
                if v > best.0 {
                    best = (v, k as u32);
                }
            }
        }
        best
    }

    /// Shift a plane down until it is at most `M` on the boundary nodes.
    pub(crate) fn clip(&self, mut p: Plane) -> Plane {
        let top = self.rim.iter().fold(f64::NEG_INFINITY, |a, x| a.max(p.at(*x)));
        if top > self.m {
            p.c -= top - self.m;
        }
        p
    }

    fn prune(&mut self) {
        for k in 1..self.planes.len() {
            if self.planes[k].is_some() && self.uses[k] == 0 {
                self.planes[k] = None;
                self.free.push(k as u32);
            }
        }
    }

    pub(crate) fn total(&self) -> f64 {
        self.total
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn grid(&self) -> &Arc<Grid> {
        self.model.grid()
    }

    pub(crate) fn interior(&self) -> &[u32] {
        &self.interior
    }

    pub(crate) fn active_plane(&self, node: usize) -> Option<(u32, Plane)> {
        let k = self.active[node];
        if k == BOUNDARY {
            return None;
        }
        self.planes[k as usize].map(|p| (k, p))
    }

    pub(crate) fn planes(&self) -> Vec<Plane> {
        self.planes.iter().flatten().copied().collect()
    }

    pub(crate) fn plane_count(&self) -> usize {
        self.planes.iter().filter(|p| p.is_some()).count()
    }

    pub(crate) fn to_gridfn(&self) -> Result<GridFn> {
        GridFn::new(self.model.grid.clone(), self.values.clone(), self.m)
    }

    /// Apply the edit if it lowers the cell resistance by more than `tol`.
    pub(crate) fn try_edit(&mut self, edit: Edit, f: &PressureModel, tol: f64) -> bool {
        let (k, new) = match edit {
            Edit::Add(p) => {
                let k = match self.free.pop() {
                    Some(k) => k,
                    None => {
                        self.planes.push(None);
                        self.uses.push(0);
                        (self.planes.len() - 1) as u32
                    }
                };
                (k, Some(p))
            }
            Edit::Replace(k, p) => (k, Some(p)),
            Edit::Remove(k) => (k, None),
        };
        if k == 0 || k as usize >= self.planes.len() {
            return false;
        }
        let old = self.planes[k as usize];
        self.planes[k as usize] = new;

        let grid = self.model.grid.clone();
        let mut changed: Vec<(u32, f64, u32)> = Vec::new();
        for idx in 0..self.interior.len() {
            let j = self.interior[idx] as usize;
            let x = grid.nodes[j];
            let (v, a) = if self.active[j] == k {
                self.max_at(x)
            } else if let Some(p) = new {
                let v = p.at(x);
                if v > self.values[j] {
                    (v, k)
                } else {
                    continue;
                }
            } else {
                continue;
            };
            if v != self.values[j] || a != self.active[j] {
                changed.push((j as u32, self.values[j], self.active[j]));
                self.values[j] = v;
                self.active[j] = a;
            }
        }

        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let mut cells: Vec<(u32, f64)> = Vec::new();
        let mut delta = 0.0;
        for &(j, old_v, _) in &changed {
            if self.values[j as usize] == old_v {
                continue;
            }
            for &c in self.model.cells_of(j as usize) {
                if self.stamp[c as usize] != self.epoch {
                    self.stamp[c as usize] = self.epoch;
                    let nv = self.model.cell_value(c as usize, &self.values, f);
                    delta += nv - self.cell_f[c as usize];
                    cells.push((c, self.cell_f[c as usize]));
                    self.cell_f[c as usize] = nv;
                }
            }
        }

        if delta < -tol {
            for &(j, _, old_a) in &changed {
                self.uses[old_a as usize] -= 1;
                self.uses[self.active[j as usize] as usize] += 1;
            }
            if new.is_none() {
                self.free.push(k);
            }
            self.prune();
            self.total = self.cell_f.iter().sum();
            return true;
        }
        for &(j, old_v, old_a) in &changed {
            self.values[j as usize] = old_v;
            self.active[j as usize] = old_a;
        }
        for &(c, old_f) in &cells {
            self.cell_f[c as usize] = old_f;
        }
        self.planes[k as usize] = old;
        if matches!(edit, Edit::Add(_)) {
            self.free.push(k);
        }
        false
    }
}

/// Distinct supporting planes of the lower-hull facets of `u`.
pub(crate) fn planes_of(surf: &Surface) -> Vec<Plane> {
    let mut out: Vec<Plane> = surf
        .grads
        .iter()
        .enumerate()
        .map(|(t, g)| {
            let p = surf.tri_xy(t)[0];
            Plane::through(p, surf.plane_value(t, p), *g)
        })
        .collect();
    out.sort_by(|a, b| {
        (a.g.x, a.g.y, a.c).partial_cmp(&(b.g.x, b.g.y, b.c)).unwrap_or(core::cmp::Ordering::Equal)
    });
    out.dedup_by(|a, b| (a.g.x - b.g.x).abs() <= 1e-12 && (a.g.y - b.g.y).abs() <= 1e-12 && (a.c - b.c).abs() <= 1e-12);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::resistance::eval_F;

    fn disk(h: f64) -> Arc<Grid> {
        Domain::disk(Vec2::new(0.0, 0.0), 1.0, h).unwrap().grid()
    }

    #[test]
    fn cell_total_matches_exact_for_affine_pieces() {
        let grid = disk(0.125);
        let f = PressureModel::Newton;
        let planes = [Plane { g: Vec2::new(0.3, -0.2), c: 0.1 }];
        let st = PlaneState::new(CellModel::new(grid.clone(), 1.0), 1.0, &f, &planes);
        let exact = eval_F(&st.to_gridfn().unwrap(), &f, None).unwrap();
        let rel = (st.total() - exact).abs() / exact;
        assert!(rel < 0.05, "cells {} exact {exact}", st.total());
        assert!(st.to_gridfn().unwrap().is_convex());
    }

    #[test]
    fn rejected_edit_restores_state() {
        let f = PressureModel::Newton;
        let mut st = PlaneState::new(CellModel::new(disk(0.1), 1.0), 1.0, &f, &[Plane { g: Vec2::new(1.0, 0.0), c: 0.0 }]);
        let before = (st.total(), st.values().to_vec(), st.plane_count());
        assert!(!st.try_edit(Edit::Remove(1), &f, f64::INFINITY));
        assert_eq!(st.total(), before.0);
        assert_eq!(st.values(), &before.1[..]);
        assert_eq!(st.plane_count(), before.2);
    }

    #[test]
    fn planes_round_trip_through_surface() {
        let grid = disk(0.1);
        let f = PressureModel::Newton;
        let planes = [Plane { g: Vec2::new(1.0, 0.0), c: -0.2 }, Plane { g: Vec2::new(-0.5, 0.8), c: -0.1 }];
        let st = PlaneState::new(CellModel::new(grid.clone(), 1.0), 1.0, &f, &planes);
        let u = st.to_gridfn().unwrap();
        let back = planes_of(&u.surface().unwrap());
        let st2 = PlaneState::new(CellModel::new(grid, 1.0), 1.0, &f, &back);
        let d = st.values().iter().zip(st2.values()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(d < 1e-12, "max diff {d}");
    }
}
