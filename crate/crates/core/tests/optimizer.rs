use nosestretch_core::geometry::{Domain, GridFn};
use nosestretch_core::optimizer::{reconstruct_from_singular, solve_2d, verify_solution, SolveConfig, VerifyTolerances};
use nosestretch_core::resistance::{eval_F, PressureModel};
use nosestretch_core::Vec2;

fn unit_disk(h: f64) -> Domain {
    Domain::disk(Vec2::new(0.0, 0.0), 1.0, h).unwrap()
}

fn small_config(seed: u64) -> SolveConfig {
    SolveConfig { grid: 24, levels: 2, budget: 6_000, seed, stretch_every: 0, ..Default::default() }
}

/// Area of the polygon through the boundary nodes, sorted by angle.
fn rim_polygon_area(u: &GridFn) -> f64 {
    let g = u.grid();
    let mut rim: Vec<Vec2> = (0..g.len()).filter(|&i| g.on_boundary[i]).map(|i| g.nodes[i]).collect();
    rim.sort_by(|a, b| a.y.atan2(a.x).partial_cmp(&b.y.atan2(b.x)).unwrap());
    let n = rim.len();
    (0..n).map(|k| rim[k].cross(rim[(k + 1) % n])).sum::<f64>() * 0.5
}

#[test]
fn quadratic_model_reaches_the_cap() {
    let r = solve_2d(&unit_disk(0.1), 1.0, &PressureModel::Quadratic, &SolveConfig::default()).unwrap();
    assert!(r.f <= 1e-6, "F = {}", r.f);
    assert!(r.u.values().iter().all(|v| (v - 1.0).abs() < 1e-3));
}

#[test]
fn iterates_are_feasible_and_trace_decreases() {
    let r = solve_2d(&unit_disk(0.1), 1.0, &PressureModel::Newton, &small_config(3)).unwrap();
    let u = &r.u;
    assert!(u.is_convex());
    assert!(u.values().iter().all(|v| *v >= 0.0 && *v <= 1.0));
    assert_eq!(u.boundary_gap(), 0.0);
    for w in r.trace.windows(2) {
        if w[0].level == w[1].level {
            assert!(w[1].f < w[0].f, "{:?}", w);
        }
    }
    let first = r.trace.iter().find(|e| e.level == 1).unwrap().f;
    assert!(r.f_cells < first);
}

#[test]
fn fixed_seed_is_deterministic() {
    let d = unit_disk(0.1);
    let a = solve_2d(&d, 1.0, &PressureModel::Newton, &small_config(11)).unwrap();
    let b = solve_2d(&d, 1.0, &PressureModel::Newton, &small_config(11)).unwrap();
    assert_eq!(a.u.values(), b.u.values());
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.f, b.f);
    let c = solve_2d(&d, 1.0, &PressureModel::Newton, &small_config(12)).unwrap();
    assert_ne!(a.u.values(), c.u.values());
}

#[test]
fn invalid_config_is_rejected() {
    let d = unit_disk(0.1);
    let bad = SolveConfig { amplitude: 0.0, ..Default::default() };
    assert!(solve_2d(&d, 1.0, &PressureModel::Newton, &bad).is_err());
    assert!(solve_2d(&d, -1.0, &PressureModel::Newton, &SolveConfig::default()).is_err());
}

#[test]
fn affine_model_is_constant_on_feasible_functions() {
    let (a, b) = (Vec2::new(0.1, 0.1), 1.0);
    let f = PressureModel::affine_plus(a, b).unwrap();
    let g = unit_disk(1.0 / 32.0).grid();
    let m = 1.0;
    let shapes: Vec<Box<dyn Fn(Vec2) -> f64>> = vec![
        Box::new(|_| 1.0),
        Box::new(|x: Vec2| x.norm()),
        Box::new(|x: Vec2| x.norm2()),
        Box::new(|x: Vec2| (x.norm() - 0.4).max(0.0) / 0.6),
        Box::new(|x: Vec2| x.norm2().max(0.8 * x.x + 0.1)),
    ];
    let mut values = Vec::new();
    for s in &shapes {
        let u = GridFn::from_fn(g.clone(), m, s).unwrap();
        assert!(u.boundary_gap() < 1e-12);
        values.push(eval_F(&u, &f, None).unwrap());
    }
    // (b - <a, grad u>) integrates to b |P| because u is constant on the rim.
    let u0 = GridFn::constant(g.clone(), m, m).unwrap();
    let expect = b * rim_polygon_area(&u0);
    for v in &values {
        assert!((v - expect).abs() <= 1e-10 * expect, "{v} vs {expect}");
    }
}

#[test]
fn uniform_cone_fails_the_gradient_gap() {
    let g = unit_disk(1.0 / 32.0).grid();
    let u = GridFn::from_fn(g, 0.5, |x| 0.5 * x.norm()).unwrap();
    let r = verify_solution(&u, &PressureModel::Newton, &VerifyTolerances::default()).unwrap();
    assert!(!r.gradient_gap.check.pass);
    assert!(r.gradient_gap.gap_mass > 0.9);
    assert!(r.boundary_check.value < 1e-15);
}

#[test]
fn pyramid_is_spanned_by_its_creases() {
    let h = 1.0 / 32.0;
    let g = unit_disk(h).grid();
    let dirs: Vec<Vec2> = (0..6).map(|k| {
        let t = std::f64::consts::PI / 3.0 * k as f64 + 0.1;
        Vec2::new(t.cos(), t.sin())
    }).collect();
    let u = GridFn::from_fn(g, 1.0, |x| dirs.iter().map(|d| d.dot(x)).fold(0.0, f64::max)).unwrap();
    let rec = reconstruct_from_singular(&u, 0.1).unwrap();
    assert!(!rec.impossible);
    let d = rec.hausdorff.unwrap();
    assert!(d <= 2.0 * h, "distance {d}");
}

#[test]
fn smooth_paraboloid_cannot_be_reconstructed() {
    let g = unit_disk(1.0 / 32.0).grid();
    let u = GridFn::from_fn(g, 1.0, |x| x.norm2()).unwrap();
    let rec = reconstruct_from_singular(&u, 0.2).unwrap();
    assert!(rec.impossible);
    assert_eq!(rec.singular_nodes, 0);
    assert!(rec.body.is_none());
}
