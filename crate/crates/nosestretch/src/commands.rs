//! One function per subcommand. Each returns the artifacts it wrote or the
//! text it would print, so tests can drive them without a process.

use std::path::Path;

use nosestretch_core::geometry::Domain;
use nosestretch_core::optimizer::{solve_2d, solve_radial_1d, verify_solution, SolveConfig};
use nosestretch_core::resistance::PressureModel;
use nosestretch_core::stretch::{analytic_coeffs, fit_quadratic, prepare_site, sweep_resistance, SiteOptions};
use nosestretch_core::toy::{toy_slope_identity, toy_sweep, ConvexFn1D, ToyFamily};
use nosestretch_core::Vec2;
use serde::Serialize;

use crate::config::{
    Command, ExportObjArgs, RadialArgs, RunConfig, SolveArgs, StretchArgs, ToyArgs, Tolerances, VerifyArgs,
};
use crate::error::{CliError, CliResult};
use crate::format::{csv, nums, read_file, to_json_pretty, write_file, Num};
use crate::mesh::{load_mesh, obj_string, save_mesh};
use crate::report::{CoeffsOut, FitOut, SiteOut, VerifyOut};

/// Text destined for stdout and stderr.
#[derive(Debug, Default, PartialEq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
}

fn invalid(m: impl Into<String>) -> CliError {
    CliError::Validity(m.into())
}

/// Parse a pressure model: `newton`, `quadratic`, `affine:a1,a2,b`, `flat-disk:r`.
pub fn parse_pressure(spec: &str) -> CliResult<PressureModel> {
    let (name, params) = spec.split_once(':').unwrap_or((spec, ""));
    let vals = || -> CliResult<Vec<f64>> {
        params
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| invalid(format!("bad parameter {v:?} in {spec:?}"))))
            .collect()
    };
    match name {
        "newton" => Ok(PressureModel::Newton),
        "quadratic" => Ok(PressureModel::Quadratic),
        "affine" => match vals()?[..] {
            [a1, a2, b] => Ok(PressureModel::affine_plus(Vec2::new(a1, a2), b)?),
            _ => Err(invalid("affine needs a1,a2,b")),
        },
        "flat-disk" => match vals()?[..] {
            [r] => Ok(PressureModel::flat_disk(r)?),
            _ => Err(invalid("flat-disk needs r")),
        },
        _ => Err(invalid(format!("unknown pressure model {spec:?}"))),
    }
}

fn newton1d(p: f64) -> f64 {
    1.0 / (1.0 + p * p)
}

fn quadratic1d(p: f64) -> f64 {
    p * p
}

pub fn parse_f1(name: &str) -> CliResult<fn(f64) -> f64> {
    match name {
        "newton1d" => Ok(newton1d),
        "quadratic1d" => Ok(quadratic1d),
        _ => Err(invalid(format!("unknown 1D pressure law {name:?}"))),
    }
}

/// Parse a convex 1D function on `[a, b]`.
pub fn parse_u1(spec: &str, a: f64, b: f64, samples: usize) -> CliResult<ConvexFn1D> {
    if let Some(pts) = spec.strip_prefix("pts:") {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for pair in pts.split(';').filter(|p| !p.trim().is_empty()) {
            let (x, y) = pair.split_once(',').ok_or_else(|| invalid(format!("bad breakpoint {pair:?}")))?;
            let num = |t: &str| t.trim().parse::<f64>().map_err(|_| invalid(format!("bad number {t:?}")));
            xs.push(num(x)?);
            ys.push(num(y)?);
        }
        return Ok(ConvexFn1D::new(xs, ys)?);
    }
    let f: fn(f64) -> f64 = match spec {
        "x^2" => |x| x * x,
        "x^4" => |x| x * x * x * x,
        "|x|" => f64::abs,
        "cosh(x)" => f64::cosh,
        "exp(x)" => f64::exp,
        _ => return Err(invalid(format!("unknown function {spec:?}"))),
    };
    Ok(ConvexFn1D::from_fn(f, a, b, samples)?)
}

fn pair(v: &[f64], what: &str) -> CliResult<(f64, f64)> {
    match v {
        [a, b] => Ok((*a, *b)),
        _ => Err(invalid(format!("{what} needs two numbers"))),
    }
}

#[derive(Serialize)]
struct ToySummary<'a> {
    u: &'a str,
    f: &'a str,
    range: [Num; 2],
    nose: [Num; 2],
    tangency: [[Num; 2]; 2],
    tangent_slopes: [Num; 2],
    n: usize,
    max_residual: Num,
    slope_numeric: Num,
    slope_analytic: Num,
    slope_left: Num,
    slope_right: Num,
    slope_central: Num,
}

pub fn cmd_toy(args: &ToyArgs) -> CliResult<Output> {
    let (a, b) = pair(&args.range, "--range")?;
    let (ox, oy) = pair(&args.o, "--o")?;
    let f1 = parse_f1(&args.f)?;
    let u = parse_u1(&args.u, a, b, args.samples)?;
    let fam = ToyFamily::new(u, Vec2::new(ox, oy))?;
    let rows = toy_sweep(&fam, f1, args.n)?;
    let sl = toy_slope_identity(&fam, f1, 1e-5)?;
    let (a0, b0) = fam.tangency();
    let (ma, mb) = fam.tangent_slopes();
    let table = csv(&["s", "F", "chord", "residual"], rows.iter().map(|r| vec![r.s, r.f, r.chord, r.residual]))?;
    let summary = to_json_pretty(&ToySummary {
        u: &args.u,
        f: &args.f,
        range: nums([a, b]),
        nose: nums([ox, oy]),
        tangency: [nums([a0.x, a0.y]), nums([b0.x, b0.y])],
        tangent_slopes: nums([ma, mb]),
        n: rows.len(),
        max_residual: Num(rows.iter().fold(0.0_f64, |m, r| m.max(r.residual.abs()))),
        slope_numeric: Num(sl.numeric),
        slope_analytic: Num(sl.analytic),
        slope_left: Num(sl.left),
        slope_right: Num(sl.right),
        slope_central: Num(sl.central),
    })?;
    match &args.out {
        Some(dir) => {
            create_dir(dir)?;
            write_file(&dir.join("toy.csv"), &table)?;
            write_file(&dir.join("toy_summary.json"), &summary)?;
            Ok(Output::default())
        }
        None => Ok(Output { stdout: table, stderr: summary }),
    }
}

#[derive(Serialize)]
struct StretchReport {
    site: SiteOut,
    coeffs_analytic: CoeffsOut,
    coeffs_fit: FitOut,
    samples: Vec<(Num, Num)>,
    derivative_at_0: DerivativeOut,
    residuals: ResidualsOut,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct DerivativeOut {
    analytic: Num,
    fit: Num,
}

#[derive(Serialize)]
struct ResidualsOut {
    fit_max: Num,
    fit_rms: Num,
    fit_max_relative: Num,
    identity: Num,
    law_max: Num,
}

pub fn cmd_stretch(args: &StretchArgs, tol: &Tolerances) -> CliResult<Output> {
    let u = load_mesh(&args.mesh)?;
    let f = parse_pressure(&args.f)?;
    let (x, y) = pair(&args.x, "--x")?;
    if args.samples < 3 {
        return Err(invalid("--samples must be at least 3"));
    }
    let mut opts = SiteOptions { delta: args.delta, hessian_tol: tol.hessian, ..SiteOptions::default() };
    if let Some(a) = tol.angle {
        opts.angle_tol = a;
    }
    let site = prepare_site(&u, &f, Vec2::new(x, y), args.eps, &opts)?;
    let an = analytic_coeffs(&u, &site, &f)?;
    let n = args.samples;
    let ss: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let samples = sweep_resistance(&u, &site, &f, &ss)?;
    let fit = fit_quadratic(&samples, Some(an.coeffs.c0))?;
    let law_max = samples.iter().fold(0.0_f64, |m, (s, v)| m.max((an.coeffs.law(*s) - v).abs()));
    let mut warnings = site.warnings.clone();
    warnings.extend(an.warnings.iter().cloned());
    let report = StretchReport {
        site: (&site).into(),
        coeffs_analytic: CoeffsOut::new(&an),
        coeffs_fit: (&fit).into(),
        samples: samples.iter().map(|(s, v)| (Num(*s), Num(*v))).collect(),
        derivative_at_0: DerivativeOut { analytic: Num(an.coeffs.derivative_at_0()), fit: Num(fit.derivative_at_0) },
        residuals: ResidualsOut {
            fit_max: Num(fit.residual_max),
            fit_rms: Num(fit.residual_rms),
            fit_max_relative: Num(fit.residual_max / an.f_u.abs().max(f64::MIN_POSITIVE)),
            identity: Num(an.identity_residual),
            law_max: Num(law_max),
        },
        warnings,
    };
    emit(&args.out, to_json_pretty(&report)?)
}

fn emit(out: &Option<std::path::PathBuf>, text: String) -> CliResult<Output> {
    match out {
        Some(p) => {
            write_file(p, &text)?;
            Ok(Output::default())
        }
        None => Ok(Output { stdout: text, stderr: String::new() }),
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))
}

/// Tolerances from an optional JSON file, overridden by flags.
fn load_tolerances(file: &Option<std::path::PathBuf>, flags: &Tolerances) -> CliResult<Tolerances> {
    let Some(path) = file else { return Ok(flags.clone()) };
    let base: Tolerances = serde_json::from_str(&read_file(path)?)
        .map_err(|e| CliError::Io(format!("{}: tolerance schema: {e}", path.display())))?;
    Ok(flags.or(&base))
}

#[derive(Serialize)]
struct VerifyReport {
    f: String,
    resistance: Num,
    verification: VerifyOut,
}

pub fn cmd_verify(args: &VerifyArgs, flags: &Tolerances) -> CliResult<Output> {
    let u = load_mesh(&args.mesh)?;
    let f = parse_pressure(&args.f)?;
    let tol = load_tolerances(&args.tolerances, flags)?;
    let rep = verify_solution(&u, &f, &tol.verify())?;
    let resistance = nosestretch_core::resistance::eval_F(&u, &f, None)?;
    let out = emit(
        &args.out,
        to_json_pretty(&VerifyReport { f: args.f.clone(), resistance: Num(resistance), verification: (&rep).into() })?,
    )?;
    if args.strict && !rep.all_pass() {
        return Err(invalid("verification failed"));
    }
    Ok(out)
}

pub fn cmd_radial(args: &RadialArgs) -> CliResult<Output> {
    let f = parse_pressure(&args.f)?;
    let sol = solve_radial_1d(args.l, args.m, &f, args.n)?;
    let table = csv(&["r", "phi"], sol.r.iter().zip(&sol.phi).map(|(r, p)| vec![*r, *p]))?;
    let summary = to_json_pretty(&RadialSummary {
        resistance: Num(sol.resistance),
        flat_radius: Num(sol.flat_radius),
    })?;
    match &args.out {
        Some(p) => {
            write_file(p, &table)?;
            Ok(Output { stdout: String::new(), stderr: summary })
        }
        None => Ok(Output { stdout: table, stderr: summary }),
    }
}

#[derive(Serialize)]
struct RadialSummary {
    resistance: Num,
    flat_radius: Num,
}

#[derive(Serialize)]
struct SolveReport {
    f: String,
    #[serde(rename = "M")]
    m: Num,
    seed: u64,
    resistance: Num,
    resistance_cells: Num,
    trials: usize,
    accepted: usize,
    stretch_moves: usize,
    planes: usize,
    stalled_levels: usize,
    radial: Option<RadialComparison>,
    verification: VerifyOut,
}

#[derive(Serialize)]
struct RadialComparison {
    resistance: Num,
    flat_radius: Num,
    relative_gap: Num,
}

/// Intervals of the radial baseline reported next to disk solutions.
const RADIAL_BASELINE_N: usize = 400;

pub fn cmd_solve(args: &SolveArgs, global: &crate::config::GlobalArgs, config: &RunConfig) -> CliResult<Output> {
    let f = parse_pressure(&args.f)?;
    if global.threads == 0 {
        return Err(invalid("--threads must be positive"));
    }
    if !(args.r > 0.0 && args.r.is_finite()) {
        return Err(invalid(format!("--R must be positive, got {}", args.r)));
    }
    let h = 2.0 * args.r / args.grid.max(1) as f64;
    let domain = match args.domain.as_str() {
        "disk" => Domain::disk(Vec2::ZERO, args.r, h)?,
        "square" => Domain::rect(-args.r, args.r, -args.r, args.r, h)?,
        d => return Err(invalid(format!("unknown domain {d:?}"))),
    };
    let d = SolveConfig::default();
    let cfg = SolveConfig {
        grid: args.grid,
        levels: args.levels,
        budget: args.budget,
        seed: global.seed.unwrap_or(d.seed),
        accept_tol: global.tol.accept.unwrap_or(d.accept_tol),
        angle_tol: global.tol.angle,
        hessian_tol: global.tol.hessian,
        ..d
    };
    let res = solve_2d(&domain, args.m, &f, &cfg)?;
    let rep = verify_solution(&res.u, &f, &global.tol.verify())?;
    let radial = match args.domain.as_str() {
        "disk" => {
            let sol = solve_radial_1d(args.r, args.m, &f, RADIAL_BASELINE_N)?;
            Some(RadialComparison {
                resistance: Num(sol.resistance),
                flat_radius: Num(sol.flat_radius),
                relative_gap: Num((res.f - sol.resistance) / sol.resistance.abs().max(f64::MIN_POSITIVE)),
            })
        }
        _ => None,
    };
    let report = SolveReport {
        f: args.f.clone(),
        m: Num(args.m),
        seed: cfg.seed,
        resistance: Num(res.f),
        resistance_cells: Num(res.f_cells),
        trials: res.trials,
        accepted: res.accepted,
        stretch_moves: res.stretch_moves,
        planes: res.planes,
        stalled_levels: res.stalled_levels,
        radial,
        verification: (&rep).into(),
    };
    let trace = csv(
        &["iter", "F", "level"],
        res.trace.iter().map(|t| vec![t.iter as f64, t.f, t.level as f64]),
    )?;
    let report = to_json_pretty(&report)?;
    let config = to_json_pretty(config)?;
    create_dir(&args.out)?;
    save_mesh(&args.out.join("solution.json"), &res.u)?;
    write_file(&args.out.join("trace.csv"), &trace)?;
    write_file(&args.out.join("report.json"), &report)?;
    write_file(&args.out.join("config.json"), &config)?;
    if args.obj {
        write_file(&args.out.join("surface.obj"), &obj_string(&res.u)?)?;
    }
    Ok(Output::default())
}

pub fn cmd_export_obj(args: &ExportObjArgs) -> CliResult<Output> {
    let u = load_mesh(&args.mesh)?;
    write_file(&args.out, &obj_string(&u)?)?;
    Ok(Output::default())
}

/// Execute a parsed configuration.
pub fn run(config: &RunConfig) -> CliResult<Output> {
    let g = &config.global;
    if g.threads == 0 {
        return Err(invalid("--threads must be positive"));
    }
    match &config.command {
        Command::Toy(a) => cmd_toy(a),
        Command::Stretch(a) => cmd_stretch(a, &g.tol),
        Command::Solve(a) => cmd_solve(a, g, config),
        Command::Verify(a) => cmd_verify(a, &g.tol),
        Command::Radial(a) => cmd_radial(a),
        Command::ExportObj(a) => cmd_export_obj(a),
        Command::Run(a) => {
            let saved: RunConfig = serde_json::from_str(&read_file(&a.config)?)
                .map_err(|e| CliError::Io(format!("{}: config schema: {e}", a.config.display())))?;
            if matches!(saved.command, Command::Run(_)) {
                return Err(invalid("a saved configuration cannot replay another"));
            }
            run(&saved)
        }
    }
}
