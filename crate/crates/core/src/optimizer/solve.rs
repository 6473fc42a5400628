//! Randomized descent over convex functions with `u = M` on the boundary.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{default_angle_tol, normal_cone_widths, Domain, GridFn, Surface};
use crate::math::{angle_between, Vec2};
use crate::resistance::{classify_hessian, eval_F, HessianClass, PressureModel};
use crate::stretch::{improvement_step, prepare_site, Improvement, SiteOptions};

use super::planes::{planes_of, CellModel, Edit, Plane, PlaneState};

/// Settings of [`solve_2d`].
#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    /// Cells across the domain's bounding box at the finest level.
    pub grid: usize,
    /// Coarse-to-fine levels; each coarser level halves the resolution.
    pub levels: usize,
    /// Total number of random trials over all levels.
    pub budget: usize,
    pub seed: u64,
    /// Starting perturbation amplitude as a fraction of `M`.
    pub amplitude: f64,
    /// Consecutive rejections before the amplitude halves.
    pub halve_after: usize,
    /// Amplitude fraction below which a level counts as stalled.
    pub min_amplitude: f64,
    /// Trials between nose-stretch rounds on the finest level; 0 disables.
    pub stretch_every: usize,
    /// Candidate vertices tried per nose-stretch round.
    pub stretch_candidates: usize,
    /// Acceptance threshold relative to the starting resistance.
    pub accept_tol: f64,
    /// Singular-node threshold; `None` uses `4 h / diam`.
    pub angle_tol: Option<f64>,
    pub hessian_tol: Option<f64>,
}

impl Default for SolveConfig {
    fn default() -> SolveConfig {
        SolveConfig {
            grid: 48,
            levels: 3,
            budget: 200_000,
            seed: 1,
            amplitude: 0.1,
            halve_after: 200,
            min_amplitude: 1e-7,
            stretch_every: 25_000,
            stretch_candidates: 3,
            accept_tol: 1e-10,
            angle_tol: None,
            hessian_tol: None,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |what: &'static str, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { Err(Error::Range { what, value: v }) };
        if self.grid < 2 {
            return Err(Error::Range { what: "grid resolution", value: self.grid as f64 });
        }
        if self.levels == 0 || self.budget == 0 || self.halve_after == 0 {
            return Err(Error::Invalid("levels, budget and halve_after must be positive".into()));
        }
        pos("amplitude", self.amplitude)?;
        pos("min_amplitude", self.min_amplitude)?;
        pos("accept_tol", self.accept_tol)?;
        if let Some(t) = self.angle_tol {
            pos("angle_tol", t)?;
        }
        if let Some(t) = self.hessian_tol {
            pos("hessian_tol", t)?;
        }
        Ok(())
    }
}

/// One accepted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEntry {
    /// Trial counter over all levels.
    pub iter: usize,
    pub level: usize,
    /// Cell resistance after the step.
    pub f: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub u: GridFn,
    /// Exact resistance of the lower-hull interpolant.
    pub f: f64,
    /// Cell resistance the search minimized.
    pub f_cells: f64,
    pub trace: Vec<TraceEntry>,
    pub trials: usize,
    pub accepted: usize,
    pub stretch_moves: usize,
    pub planes: usize,
    /// Levels that ended on the amplitude floor rather than the budget.
    pub stalled_levels: usize,
}

/// Cone `M * gauge(x)` as a fan of planes through the domain center.
fn cone_planes(domain: &Domain, m: f64, count: usize) -> Vec<Plane> {
    let c = domain.center();
    (0..count)
        .map(|k| {
            let a = 2.0 * core::f64::consts::PI * k as f64 / count as f64;
            let d = Vec2::new(crate::math::cos(a), crate::math::sin(a));
            let reach = domain.clip_line(c, d).map_or(1.0, |(_, hi)| hi).max(1e-300);
            Plane::through(c, 0.0, d * (m / reach))
        })
        .collect()
}

fn level_budgets(total: usize, levels: usize) -> Vec<usize> {
    if levels == 1 {
        return alloc::vec![total];
    }
    let last = total / 2;
    let each = (total - last) / (levels - 1);
    let mut v = alloc::vec![each; levels - 1];
    v.push(total - each * (levels - 1));
    v
}

fn propose(st: &PlaneState, rng: &mut ChaCha8Rng, amp: f64, scale: f64) -> Option<Edit> {
    let interior = st.interior();
    if interior.is_empty() {
        return None;
    }
    let node = interior[rng.gen_range(0..interior.len())] as usize;
    let x = st.grid().nodes[node];
    let z = st.values()[node];
    let (k, plane) = st.active_plane(node)?;
    let tilt = |rng: &mut ChaCha8Rng| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (amp / scale);
    let r: f64 = rng.gen();
    if k == 0 || r < 0.4 {
        // Cut: a new plane above the node.
        let g = if rng.gen::<f64>() < 0.15 { Vec2::new(0.0, 0.0) } else { plane.g + tilt(rng) };
        let p = Plane::through(x, z + amp * rng.gen::<f64>(), g);
        return Some(Edit::Add(st.clip(p)));
    }
    if r < 0.75 {
        let dz = amp * rng.gen_range(-1.0..1.0);
        let p = Plane::through(x, z + dz, plane.g + tilt(rng));
        return Some(Edit::Replace(k, st.clip(p)));
    }
    if r < 0.9 {
        // Merge: take the gradient of a neighbouring plane.
        let g = st.grid();
        let (i, j) = g.lattice_pos(node)?;
        let (a, b) = match rng.gen_range(0..4) {
            0 => (i + 1, j),
            1 => (i.checked_sub(1)?, j),
            2 => (i, j + 1),
            _ => (i, j.checked_sub(1)?),
        };
        let (k2, other) = st.active_plane(g.node_at(a, b)?)?;
        if k2 == k {
            return None;
        }
        return Some(Edit::Replace(k, st.clip(Plane::through(x, z, other.g))));
    }
    Some(Edit::Remove(k))
}

/// Graph vertices that are hull vertices but not singular, classified NEG,
/// farthest from the singular set first.
pub fn stretch_candidates(u: &GridFn, surf: &Surface, f: &PressureModel, theta: f64, hessian_tol: Option<f64>) -> Vec<Vec2> {
    let grid = u.grid();
    let widths = normal_cone_widths(u, surf);
    let inc = surf.node_incidence(grid);
    let singular: Vec<Vec2> = (0..grid.len()).filter(|&i| widths[i] > theta).map(|i| grid.nodes[i]).collect();
    let mut cands: Vec<(f64, Vec2)> = Vec::new();
    for i in grid.interior_nodes() {
        if widths[i] > theta || !is_vertex(surf, &inc[i]) {
            continue;
        }
        let g = inc[i].iter().fold(Vec2::new(0.0, 0.0), |a, &t| a + surf.grads[t as usize]) * (1.0 / inc[i].len().max(1) as f64);
        if classify_hessian(f, g, hessian_tol) != Ok(HessianClass::Neg) {
            continue;
        }
        let x = grid.nodes[i];
        let d = singular.iter().fold(f64::INFINITY, |m, s| m.min((*s - x).norm()));
        cands.push((d, x));
    }
    cands.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
    cands.into_iter().map(|c| c.1).collect()
}

/// A node is a hull vertex when its incident facets carry at least three
/// distinct normals.
pub(crate) fn is_vertex(surf: &Surface, tris: &[u32]) -> bool {
    let mut normals: Vec<crate::math::Vec3> = Vec::new();
    for &t in tris {
        let n = surf.normal(t as usize);
        if normals.iter().all(|m| angle_between(*m, n) > 1e-9) {
            normals.push(n);
            if normals.len() >= 3 {
                return true;
            }
        }
    }
    false
}

fn stretch_round(st: &mut PlaneState, f: &PressureModel, m: f64, cfg: &SolveConfig, tol: f64) -> Result<bool> {
    let u = st.to_gridfn()?;
    let surf = u.surface()?;
    let theta = cfg.angle_tol.unwrap_or_else(|| default_angle_tol(&u));
    let cands = stretch_candidates(&u, &surf, f, theta, cfg.hessian_tol);
    let opts = SiteOptions { hessian_tol: cfg.hessian_tol, ..SiteOptions::default() };
    for x in cands.into_iter().take(cfg.stretch_candidates) {
        let Ok(site) = prepare_site(&u, f, x, 0.05 * m, &opts) else { continue };
        let Ok(Improvement::Improved { u: v, .. }) = improvement_step(&u, &site, f) else { continue };
        let Ok(vs) = v.surface() else { continue };
        let cand = PlaneState::new(CellModel::new(u.grid().clone(), m), m, f, &planes_of(&vs));
        if cand.total() < st.total() - tol {
            *st = cand;
            return Ok(true);
        }
    }
    Ok(false)
}

/// Minimize `F` over convex `u` with `0 <= u <= M` and `u = M` on the
/// boundary, starting from the cone `M * gauge`.
pub fn solve_2d(domain: &Domain, m: f64, f: &PressureModel, cfg: &SolveConfig) -> Result<SolveResult> {
    cfg.validate()?;
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Range { what: "height", value: m });
    }
    let (lo, hi) = domain.bbox();
    let width = (hi.x - lo.x).max(hi.y - lo.y);
    let scale = 0.5 * domain.diameter();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut planes = cone_planes(domain, m, 64);
    let mut trace = Vec::new();
    let (mut trials, mut accepted, mut stretch_moves, mut stalled_levels) = (0usize, 0usize, 0usize, 0usize);
    let budgets = level_budgets(cfg.budget, cfg.levels);
    let mut st: Option<PlaneState> = None;
    for (level, budget) in budgets.iter().enumerate() {
        let cells = (cfg.grid >> (cfg.levels - 1 - level)).max(2);
        let dom = Domain { kind: domain.kind.clone(), h: width / cells as f64 };
        let grid = dom.grid();
        let mut state = PlaneState::new(CellModel::new(grid, m), m, f, &planes);
        let tol = cfg.accept_tol * state.total().abs().max(1e-300);
        trace.push(TraceEntry { iter: trials, level, f: state.total() });
        let finest = level + 1 == cfg.levels;
        let mut amp = cfg.amplitude * m;
        let mut rejections = 0usize;
        let mut stalled = false;
        for t in 0..*budget {
            trials += 1;
            if finest && cfg.stretch_every > 0 && t > 0 && t % cfg.stretch_every == 0 && stretch_round(&mut state, f, m, cfg, tol)? {
                stretch_moves += 1;
                accepted += 1;
                trace.push(TraceEntry { iter: trials, level, f: state.total() });
                continue;
            }
            let Some(edit) = propose(&state, &mut rng, amp, scale) else {
                rejections += 1;
                continue;
            };
            if state.try_edit(edit, f, tol) {
                accepted += 1;
                rejections = 0;
                trace.push(TraceEntry { iter: trials, level, f: state.total() });
            } else {
                rejections += 1;
                if rejections >= cfg.halve_after {
                    rejections = 0;
                    amp *= 0.5;
                    if amp < cfg.min_amplitude * m {
                        stalled = true;
                        break;
                    }
                }
            }
        }
        if stalled {
            stalled_levels += 1;
        }
        planes = state.planes();
        st = Some(state);
    }
    let state = st.ok_or_else(|| Error::Invalid("no levels".into()))?;
    let u = state.to_gridfn()?;
    let f_exact = eval_F(&u, f, None)?;
    Ok(SolveResult {
        f: f_exact,
        f_cells: state.total(),
        planes: state.plane_count(),
        u,
        trace,
        trials,
        accepted,
        stretch_moves,
        stalled_levels,
    })
}
