//! Serializable views of core results.

use nosestretch_core::optimizer::{Check, VerificationReport, REPORT_NOTE};
use nosestretch_core::stretch::{AnalyticCoeffs, QuadCoeffs, QuadFit, StretchSite};
use serde::Serialize;

use crate::format::{nums, Num};

/// Infinite values stand for "unbounded" and are written as `null`.
fn bounded(x: f64) -> Option<Num> {
    (x != f64::INFINITY).then_some(Num(x))
}

#[derive(Serialize)]
pub struct CheckOut {
    /// `null` when unbounded.
    pub value: Option<Num>,
    pub tolerance: Num,
    pub pass: bool,
}

impl From<&Check> for CheckOut {
    fn from(c: &Check) -> Self {
        CheckOut { value: bounded(c.value), tolerance: Num(c.tolerance), pass: c.pass }
    }
}

#[derive(Serialize)]
pub struct GapOut {
    /// `(lo, hi, count)` bins of |grad u| over regular cells; `hi` is
    /// `null` on the open last bin.
    pub histogram: Vec<(Num, Option<Num>, usize)>,
    pub regular_cells: usize,
    pub gap_mass: Num,
    pub check: CheckOut,
}

#[derive(Serialize)]
pub struct ExtremeOut {
    pub extreme: usize,
    pub near_singular: usize,
    pub singular: usize,
    pub sharp_edges: usize,
    pub distance: Num,
    pub check: CheckOut,
}

#[derive(Serialize)]
pub struct DevelopOut {
    pub cells: usize,
    pub check: CheckOut,
}

#[derive(Serialize)]
pub struct PartitionOut {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
    pub outside: usize,
}

#[derive(Serialize)]
pub struct VerifyOut {
    pub all_pass: bool,
    pub note: &'static str,
    pub h: Num,
    pub angle_tol: Num,
    pub boundary_check: CheckOut,
    pub gradient_gap: GapOut,
    pub extreme_vs_singular: ExtremeOut,
    pub developability: DevelopOut,
    pub reconstruction_hausdorff: CheckOut,
    pub reconstruction_impossible: bool,
    pub region_partition: Option<PartitionOut>,
    pub singular_area_fraction: Num,
}

impl From<&VerificationReport> for VerifyOut {
    fn from(r: &VerificationReport) -> Self {
        let g = &r.gradient_gap;
        let e = &r.extreme_vs_singular;
        VerifyOut {
            all_pass: r.all_pass(),
            note: REPORT_NOTE,
            h: Num(r.h),
            angle_tol: Num(r.angle_tol),
            boundary_check: (&r.boundary_check).into(),
            gradient_gap: GapOut {
                histogram: g.histogram.iter().map(|(a, b, n)| (Num(*a), bounded(*b), *n)).collect(),
                regular_cells: g.regular_cells,
                gap_mass: Num(g.gap_mass),
                check: (&g.check).into(),
            },
            extreme_vs_singular: ExtremeOut {
                extreme: e.extreme,
                near_singular: e.near_singular,
                singular: e.singular,
                sharp_edges: e.sharp_edges,
                distance: Num(e.distance),
                check: (&e.check).into(),
            },
            developability: DevelopOut { cells: r.developability.cells, check: (&r.developability.check).into() },
            reconstruction_hausdorff: (&r.reconstruction_hausdorff).into(),
            reconstruction_impossible: r.reconstruction_impossible,
            region_partition: r.region_partition.as_ref().map(|p| PartitionOut {
                plus: p.plus,
                minus: p.minus,
                zero: p.zero,
                outside: p.outside,
            }),
            singular_area_fraction: Num(r.singular_area_fraction),
        }
    }
}

#[derive(Serialize)]
pub struct SiteOut {
    pub check_point: [Num; 2],
    pub anchor: [Num; 2],
    pub e1: [Num; 2],
    pub shear: Num,
    pub z0: Num,
    pub eps: Num,
    pub delta: Num,
    pub segment: [[Num; 3]; 2],
    pub s0: Num,
    pub s_max: Num,
    pub xi_minus: Num,
    pub xi_plus: Num,
    pub t_minus: Num,
    pub t_plus: Num,
    pub concavity_radius: Num,
    pub working_radius: Num,
}

impl From<&StretchSite> for SiteOut {
    fn from(s: &StretchSite) -> Self {
        let (a, b) = s.endpoints();
        let p = &s.profile;
        SiteOut {
            check_point: nums([s.check_point.x, s.check_point.y]),
            anchor: nums([s.anchor().x, s.anchor().y]),
            e1: nums([s.frame.e1.x, s.frame.e1.y]),
            shear: Num(s.shear()),
            z0: Num(s.z0),
            eps: Num(s.eps),
            delta: Num(s.delta),
            segment: [nums([a.x, a.y, a.z]), nums([b.x, b.y, b.z])],
            s0: Num(s.s0),
            s_max: Num(s.s_max),
            xi_minus: Num(p.xi_minus),
            xi_plus: Num(p.xi_plus),
            t_minus: Num(p.t_minus),
            t_plus: Num(p.t_plus),
            concavity_radius: Num(s.concavity_radius),
            working_radius: Num(s.working_radius),
        }
    }
}

#[derive(Serialize)]
pub struct CoeffsOut {
    pub a0: Num,
    pub a1: Num,
    pub a2: Num,
    pub a3: Num,
    pub a4: Num,
    pub b2: Num,
    pub b3: Num,
    pub b4: Num,
    pub c0: Num,
    pub c1: Num,
    pub a3_minus_a4: Num,
    pub f_u: Num,
}

impl CoeffsOut {
    pub fn new(an: &AnalyticCoeffs) -> Self {
        let c: &QuadCoeffs = &an.coeffs;
        CoeffsOut {
            a0: Num(c.a0),
            a1: Num(c.a1),
            a2: Num(c.a2),
            a3: Num(c.a3),
            a4: Num(c.a4),
            b2: Num(c.b2),
            b3: Num(c.b3),
            b4: Num(c.b4),
            c0: Num(c.c0),
            c1: Num(c.c1),
            a3_minus_a4: Num(c.a3 - c.a4),
            f_u: Num(an.f_u),
        }
    }
}

#[derive(Serialize)]
pub struct FitOut {
    /// `F(s) = p0 + p1 s + p2 s^2`.
    pub p: [Num; 3],
    pub c1: Option<Num>,
    pub a3: Option<Num>,
    pub a4: Option<Num>,
    pub value_at_0: Num,
}

impl From<&QuadFit> for FitOut {
    fn from(f: &QuadFit) -> Self {
        FitOut {
            p: nums(f.p),
            c1: f.c1.map(Num),
            a3: f.a3.map(Num),
            a4: f.a4.map(Num),
            value_at_0: Num(f.value_at_0),
        }
    }
}
