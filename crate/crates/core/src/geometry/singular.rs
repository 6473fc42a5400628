//! Discrete singular points: nodes whose normal cone is wide.

use alloc::vec::Vec;

use crate::error::Result;
use crate::math::{angle_between, Vec2, Vec3};

use super::gridfn::GridFn;
use super::surface::Surface;

/// Outward (downward) unit normal of the graph plane with gradient `g`.
pub fn graph_normal(g: Vec2) -> Vec3 {
    Vec3::new(g.x, g.y, -1.0).normalized()
}

/// Default angular tolerance `4 h / diam`.
pub fn default_angle_tol(u: &GridFn) -> f64 {
    4.0 * u.h() / u.domain().diameter()
}

/// Angular width of the discrete normal cone at every node: the largest
/// angle between normals of lower-hull triangles containing the node.
/// Boundary nodes get width zero; the rim is handled separately.
pub fn normal_cone_widths(u: &GridFn, surf: &Surface) -> Vec<f64> {
    let grid = u.grid();
    let inc = surf.node_incidence(grid);
    inc.iter()
        .enumerate()
        .map(|(i, ts)| {
            if grid.on_boundary[i] {
                return 0.0;
            }
            let ns: Vec<Vec3> = ts.iter().map(|&t| graph_normal(surf.grads[t as usize])).collect();
            let mut w: f64 = 0.0;
            for a in 0..ns.len() {
                for b in a + 1..ns.len() {
                    w = w.max(angle_between(ns[a], ns[b]));
                }
            }
            w
        })
        .collect()
}

/// Interior nodes whose normal-cone width exceeds `theta`.
pub fn singular_points(u: &GridFn, theta: f64) -> Result<Vec<usize>> {
    let surf = u.surface()?;
    Ok(singular_from_widths(&normal_cone_widths(u, &surf), theta))
}

pub fn singular_from_widths(widths: &[f64], theta: f64) -> Vec<usize> {
    (0..widths.len()).filter(|&i| widths[i] > theta).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::math::Vec2;

    #[test]
    fn cone_apex_is_singular() {
        for h in [1.0 / 16.0, 1.0 / 32.0] {
            let g = Domain::disk(Vec2::ZERO, 1.0, h).unwrap().grid();
            let u = GridFn::from_fn(g.clone(), 1.0, |p| p.norm()).unwrap();
            let apex = g.node_at(g.nx / 2, g.ny / 2).unwrap();
            assert_eq!(g.nodes[apex], Vec2::ZERO);
            let s = singular_points(&u, 1.2).unwrap();
            assert!(s.contains(&apex));
        }
    }

    #[test]
    fn smooth_paraboloid_refines_away() {
        let theta = 0.1;
        let mut counts = Vec::new();
        for h in [1.0 / 8.0, 1.0 / 32.0] {
            let g = Domain::disk(Vec2::ZERO, 1.0, h).unwrap().grid();
            let u = GridFn::from_fn(g, 1.0, |p| p.norm2()).unwrap();
            counts.push(singular_points(&u, theta).unwrap().len());
        }
        assert!(counts[0] > 0);
        assert_eq!(counts[1], 0);
    }

    #[test]
    fn ridge_lines() {
        let g = Domain::rect(-1.0, 1.0, -1.0, 1.0, 0.05).unwrap().grid();
        let u = GridFn::from_fn(g.clone(), 1.0, |p| p.x.abs().max(0.2)).unwrap();
        let s = singular_points(&u, 0.1).unwrap();
        assert!(!s.is_empty());
        for i in &s {
            assert!((g.nodes[*i].x.abs() - 0.2).abs() < 1e-9);
        }
        let all_interior_ridge = g.interior_nodes().filter(|&i| (g.nodes[i].x.abs() - 0.2).abs() < 1e-9).count();
        assert_eq!(s.len(), all_interior_ridge);
    }

    #[test]
    fn monotone_in_theta() {
        let g = Domain::disk(Vec2::ZERO, 1.0, 1.0 / 16.0).unwrap().grid();
        let u = GridFn::from_fn(g, 1.0, |p| p.norm2() + 0.3 * p.x.abs()).unwrap();
        let big = singular_points(&u, 0.05).unwrap();
        let small = singular_points(&u, 0.2).unwrap();
        assert!(small.iter().all(|i| big.contains(i)));
    }
}
