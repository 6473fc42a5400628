//! Acceptance run: one PASS/FAIL line per criterion. Exits nonzero when any
//! criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nosestretch_core::geometry::{
    default_angle_tol, epigraph_body, homothety, minkowski_blend, Domain, GridFn, PolyBody,
};
use nosestretch_core::optimizer::{
    reconstruct_from_singular, solve_2d, solve_radial_1d, verify_solution, SolveConfig, SolveResult, VerifyTolerances,
};
use nosestretch_core::resistance::{degeneracy_radius, eval_F, eval_F_body, PressureModel};
use nosestretch_core::stretch::{
    analytic_coeffs, fit_quadratic, improvement_step, prepare_site, sweep_resistance, Improvement, SiteOptions,
};
use nosestretch_core::toy::{toy_slope_identity, toy_sweep, ConvexFn1D, ToyFamily};
use nosestretch_core::{Vec2, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of one criterion: pass flag and a measurement summary.
type Outcome = (bool, String);

fn newton1(p: f64) -> f64 {
    1.0 / (1.0 + p * p)
}

fn parabola_family() -> ToyFamily {
    let u = ConvexFn1D::from_fn(|x| x * x, -1.0, 1.0, 2000).unwrap();
    ToyFamily::new(u, Vec2::new(0.0, -0.2)).unwrap()
}

fn paraboloid(h: f64) -> GridFn {
    let g = Domain::rect(-1.0, 1.0, -1.0, 1.0, h).unwrap().grid();
    GridFn::from_fn(g, 11.0, |p| p.x * p.x + 10.0 * p.y * p.y).unwrap()
}

fn fixture_opts() -> SiteOptions {
    SiteOptions { delta: Some(0.05), ..SiteOptions::default() }
}

fn c1_toy_linearity() -> Outcome {
    let t = Instant::now();
    let rows = toy_sweep(&parabola_family(), newton1, 11).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let res = rows.iter().fold(0.0_f64, |m, r| m.max(r.residual.abs()));
    (res <= 1e-8 && secs < 1.0, format!("max chord residual {res:.2e} (<= 1e-8), {secs:.3} s (< 1 s)"))
}

fn c2_toy_derivative() -> Outcome {
    let sl = toy_slope_identity(&parabola_family(), newton1, 1e-5).unwrap();
    let d_an = (sl.central - sl.analytic).abs();
    let d_lr = (sl.left - sl.right).abs();
    (
        d_an <= 1e-6 && d_lr <= 1e-6,
        format!("|central - analytic| {d_an:.2e}, |left - right| {d_lr:.2e} (both <= 1e-6)"),
    )
}

fn c3_homothety() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cube: Vec<Vec3> = (0..8).map(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64)).collect();
    let tetra = [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.2), Vec3::new(0.0, 1.0, 0.4), Vec3::new(0.3, 0.3, 1.0)];
    let random: Vec<Vec3> = (0..40).map(|_| Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let sq = Domain::rect(-1.0, 1.0, -1.0, 1.0, 0.125).unwrap().grid();
    let disk = Domain::disk(Vec2::ZERO, 1.0, 0.125).unwrap().grid();
    let cube = PolyBody::from_points(&cube).unwrap();
    let bodies = [
        cube.clone(),
        epigraph_body(&GridFn::from_fn(sq, 1.0, |p| p.x.abs().max(p.y.abs())).unwrap()).unwrap(),
        epigraph_body(&GridFn::from_fn(disk, 1.0, |p| p.norm()).unwrap()).unwrap(),
        PolyBody::from_points(&random).unwrap(),
        minkowski_blend(&cube, &PolyBody::from_points(&tetra).unwrap(), 0.3).unwrap(),
    ];
    let center = Vec3::new(0.3, -0.2, 0.1);
    let mut worst = 0.0_f64;
    for c in &bodies {
        let base = eval_F_body(c, &PressureModel::Newton).unwrap();
        for r in [0.5, 2.0] {
            let scaled = homothety(c, r, center).unwrap();
            // Also rebuild the hull from the mapped vertices.
            let pts: Vec<Vec3> = c.vertices().iter().map(|v| center + (*v - center) * r).collect();
            let rebuilt = PolyBody::from_points(&pts).unwrap();
            for body in [scaled, rebuilt] {
                let v = eval_F_body(&body, &PressureModel::Newton).unwrap();
                worst = worst.max((v - r * r * base).abs() / (r * r * base).abs());
            }
        }
    }
    (worst <= 1e-10, format!("max relative error {worst:.2e} over 5 bodies, r in {{0.5, 2}} (<= 1e-10)"))
}

fn c4_quadratic_law() -> Outcome {
    let t = Instant::now();
    let u = paraboloid(1.0 / 128.0);
    let f = PressureModel::Newton;
    let site = prepare_site(&u, &f, Vec2::ZERO, 0.02, &fixture_opts()).unwrap();
    let an = analytic_coeffs(&u, &site, &f).unwrap();
    let ss: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let samples = sweep_resistance(&u, &site, &f, &ss).unwrap();
    let fit = fit_quadratic(&samples, Some(an.coeffs.c0)).unwrap();
    let fu = eval_F(&u, &f, None).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let closed = 0.1 * 0.2_f64.atan();
    let a3 = fit.a3.unwrap();
    let rel = (a3 - closed).abs() / closed;
    let res = fit.residual_max / fu;
    (
        res <= 1e-3 && rel <= 0.02 && secs < 60.0,
        format!("fit residual {res:.2e} F(u) (<= 1e-3), a3 {a3:.6} vs {closed:.7} rel {rel:.2e} (<= 2%), {secs:.1} s (< 60 s)"),
    )
}

fn c5_strict_inequality() -> Outcome {
    let f = PressureModel::Newton;
    let h = 1.0 / 128.0;
    let sq = Domain::rect(-1.0, 1.0, -1.0, 1.0, h).unwrap().grid();
    type Fx = fn(Vec2) -> f64;
    let suite: [(Fx, Vec2, Option<f64>); 6] = [
        (|p| p.x * p.x + 10.0 * p.y * p.y, Vec2::ZERO, Some(0.05)),
        (|p| p.x * p.x + 10.0 * p.y * p.y, Vec2::ZERO, None),
        (|p| p.x * p.x + 10.0 * p.y * p.y, Vec2::new(0.1, 0.02), None),
        (|p| 2.0 * p.x * p.x + 8.0 * p.y * p.y, Vec2::ZERO, None),
        (|p| 0.5 * p.x * p.x + 0.3 * p.x * p.y + 4.0 * p.y * p.y, Vec2::new(0.05, -0.05), None),
        (|p| p.x.cosh() + 5.0 * p.y * p.y, Vec2::new(-0.1, 0.0), None),
    ];
    let mut valid = 0;
    let mut min_gap = f64::INFINITY;
    let mut fixture_gap = f64::NAN;
    for (k, (u, x, delta)) in suite.iter().enumerate() {
        let u = GridFn::from_fn(sq.clone(), 12.0, u).unwrap();
        let opts = SiteOptions { delta: *delta, ..SiteOptions::default() };
        let Ok(site) = prepare_site(&u, &f, *x, 0.02, &opts) else { continue };
        let Ok(an) = analytic_coeffs(&u, &site, &f) else { continue };
        valid += 1;
        let gap = an.coeffs.a3 - an.coeffs.a4;
        min_gap = min_gap.min(gap);
        if k == 0 {
            fixture_gap = gap;
        }
    }
    let oracle = 0.1 * 0.2_f64.atan() - 0.1 * 0.2 / 1.04;
    let rel = (fixture_gap - oracle).abs() / oracle;
    (
        valid > 0 && min_gap > 0.0 && rel <= 0.05,
        format!("{valid}/6 valid sites, min a3-a4 {min_gap:.3e} (> 0); fixture a3-a4 {fixture_gap:.4e} vs {oracle:.4e} rel {rel:.2e} (<= 5%)"),
    )
}

fn c6_improvement() -> Outcome {
    let u = paraboloid(1.0 / 128.0);
    let f = PressureModel::Newton;
    let site = prepare_site(&u, &f, Vec2::ZERO, 0.02, &fixture_opts()).unwrap();
    match improvement_step(&u, &site, &f).unwrap() {
        Improvement::Improved { u: v, s, f_before, f_after } => {
            let d = f_after - f_before;
            let change = u.max_abs_diff(&v);
            let outside = u
                .grid()
                .nodes
                .iter()
                .zip(u.values().iter().zip(v.values()))
                .filter(|(x, _)| !site.in_working_set(**x))
                .fold(0.0_f64, |m, (_, (a, b))| m.max((a - b).abs()));
            (
                d < 0.0 && change < site.eps && outside <= u.envelope_tol(),
                format!("s {s:.4}, dF {d:.3e} (< 0), max|u~-u| {change:.3e} (< {}), outside change {outside:.1e}", site.eps),
            )
        }
        other => (false, format!("no improvement: dF {:.3e}", other.delta_f())),
    }
}

fn c7_degeneracy_circle() -> Outcome {
    let target = 1.0 / 3.0_f64.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut root_err = 0.0_f64;
    for _ in 0..10 {
        let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = degeneracy_radius(&PressureModel::Newton, Vec2::new(a.cos(), a.sin()), 0.1, 1.0).unwrap().unwrap();
        root_err = root_err.max((r - target).abs());
    }
    let mut hess_err = 0.0_f64;
    for _ in 0..100 {
        let r: f64 = rng.gen_range(0.0..3.0);
        let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let xi = Vec2::new(r * a.cos(), r * a.sin());
        for f in [PressureModel::Newton, PressureModel::Quadratic] {
            let h = f.hessian(xi).unwrap();
            let d = 1e-4;
            let v = |x: f64, y: f64| f.value(Vec2::new(xi.x + x, xi.y + y));
            let fxx = (v(d, 0.0) - 2.0 * v(0.0, 0.0) + v(-d, 0.0)) / (d * d);
            let fyy = (v(0.0, d) - 2.0 * v(0.0, 0.0) + v(0.0, -d)) / (d * d);
            let fxy = (v(d, d) - v(d, -d) - v(-d, d) + v(-d, -d)) / (4.0 * d * d);
            let norm = (h.a * h.a + 2.0 * h.b * h.b + h.c * h.c).sqrt();
            let err = ((h.a - fxx).powi(2) + 2.0 * (h.b - fxy).powi(2) + (h.c - fyy).powi(2)).sqrt();
            hess_err = hess_err.max(err / norm.max(1.0));
        }
    }
    (
        root_err <= 1e-9 && hess_err <= 1e-6,
        format!("root error {root_err:.1e} (<= 1e-9), Hessian relative error {hess_err:.1e} (<= 1e-6)"),
    )
}

struct Solved {
    result: SolveResult,
    radial: f64,
    dp: f64,
    secs: f64,
}

fn solve_disk() -> Solved {
    let t = Instant::now();
    let cfg = SolveConfig { grid: 96, budget: 200_000, seed: 7, ..SolveConfig::default() };
    let dom = Domain::disk(Vec2::ZERO, 1.0, 2.0 / 96.0).unwrap();
    let result = solve_2d(&dom, 1.0, &PressureModel::Newton, &cfg).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let radial = solve_radial_1d(1.0, 1.0, &PressureModel::Newton, 200).unwrap().resistance;
    let (dp, _) = common::radial_dp(1.0, 1.0, newton1, 200, 200, 5.0);
    Solved { result, radial, dp, secs }
}

fn c8_radial(s: &Solved) -> Outcome {
    let rel = (s.result.f - s.radial).abs() / s.radial;
    let rel_dp = (s.radial - s.dp).abs() / s.dp;
    (
        rel <= 0.05 && rel_dp <= 5e-3 && s.secs < 600.0,
        format!(
            "F {:.6} vs radial {:.6} rel {rel:.2e} (<= 5%); radial vs DP {:.6} rel {rel_dp:.1e} (<= 0.5%); {:.1} s (< 600 s)",
            s.result.f, s.radial, s.dp, s.secs
        ),
    )
}

fn c9_structure(s: &Solved) -> Outcome {
    let r = verify_solution(&s.result.u, &PressureModel::Newton, &VerifyTolerances::default()).unwrap();
    let g = &r.gradient_gap.check;
    let e = &r.extreme_vs_singular.check;
    let d = &r.developability.check;
    let b = &r.boundary_check;
    (
        b.pass && g.pass && e.pass && d.pass,
        format!(
            "theta {:.4}: boundary {:.1e} [{}], gap fraction {:.3} >= {} [{}], extreme near singular {:.3} >= {} [{}], max|lambda_min| {:.3} <= {:.3} [{}]",
            r.angle_tol,
            b.value,
            tag(b.pass),
            g.value,
            g.tolerance,
            tag(g.pass),
            e.value,
            e.tolerance,
            tag(e.pass),
            d.value,
            d.tolerance,
            tag(d.pass)
        ),
    )
}

fn c10_reconstruction(s: &Solved) -> Outcome {
    let u = &s.result.u;
    let theta = default_angle_tol(u);
    let rec = reconstruct_from_singular(u, theta).unwrap();
    let tol = 3.0 * u.h();
    let haus = rec.hausdorff.unwrap_or(f64::INFINITY);
    let g = Domain::disk(Vec2::ZERO, 1.0, 1.0 / 32.0).unwrap().grid();
    let smooth = GridFn::from_fn(g, 1.0, |x| x.norm2()).unwrap();
    let flagged = reconstruct_from_singular(&smooth, 0.2).unwrap().impossible;
    (
        haus <= tol && flagged,
        format!("Hausdorff {haus:.2e} (<= 3h = {tol:.4}); |x|^2 flagged impossible: {flagged}"),
    )
}

fn c11_quadratic_floor() -> Outcome {
    let dom = Domain::disk(Vec2::ZERO, 1.0, 0.1).unwrap();
    let r = solve_2d(&dom, 1.0, &PressureModel::Quadratic, &SolveConfig::default()).unwrap();
    (r.f <= 1e-6, format!("F {:.2e} (<= 1e-6) with the default budget", r.f))
}

fn tag(pass: bool) -> &'static str {
    if pass {
        "ok"
    } else {
        "fail"
    }
}

fn run(id: u32, name: &str, check: impl FnOnce() -> Outcome) -> bool {
    let (pass, detail) = match catch_unwind(AssertUnwindSafe(check)) {
        Ok(o) => o,
        Err(e) => {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            (false, format!("panicked: {}", msg.unwrap_or_default()))
        }
    };
    println!("{} criterion {id:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn main() {
    let mut ok = true;
    ok &= run(1, "toy linearity", c1_toy_linearity);
    ok &= run(2, "toy derivative identity", c2_toy_derivative);
    ok &= run(3, "homothety scaling", c3_homothety);
    ok &= run(4, "quadratic law", c4_quadratic_law);
    ok &= run(5, "strict inequality a3 > a4", c5_strict_inequality);
    ok &= run(6, "improvement step", c6_improvement);
    ok &= run(7, "degeneracy circle", c7_degeneracy_circle);
    let solved = catch_unwind(solve_disk).ok();
    let solved = &solved;
    let with = |f: fn(&Solved) -> Outcome| move || match solved {
        Some(s) => f(s),
        None => (false, "solve_2d failed".to_string()),
    };
    ok &= run(8, "radial oracle agreement", with(c8_radial));
    ok &= run(9, "structural checks", with(c9_structure));
    ok &= run(10, "reconstruction", with(c10_reconstruction));
    ok &= run(11, "quadratic floor", c11_quadratic_floor);
    if !ok {
        std::process::exit(1);
    }
}
