//! One descent step along the nose-stretch family.

use alloc::vec::Vec;

use crate::error::Result;
use crate::geometry::GridFn;
use crate::math::powi;
use crate::resistance::{eval_F, PressureModel};

use super::coeffs::analytic_coeffs;
use super::family::{check_member, family_at};
use super::site::StretchSite;

/// Tolerances of [`improvement_step`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImproveOptions {
    /// Required decrease, relative to `F(u)`.
    pub rel_tol: f64,
    /// `|a3 - c1|` below this (relative to `F(u)`) counts as a zero derivative.
    pub derivative_tol: f64,
    /// Probes `2^-k` for `k` up to this.
    pub max_k: u32,
}

impl Default for ImproveOptions {
    fn default() -> Self {
        ImproveOptions { rel_tol: 1e-10, derivative_tol: 1e-9, max_k: 8 }
    }
}

#[derive(Clone, Debug)]
pub enum Improvement {
    Improved { u: GridFn, s: f64, f_before: f64, f_after: f64 },
    NoImprovement { f_before: f64, best_delta: f64, tried: Vec<(f64, f64)> },
}

impl Improvement {
    /// `F(new) - F(u)`, or the best sampled change when nothing improved.
    pub fn delta_f(&self) -> f64 {
        match self {
            Improvement::Improved { f_before, f_after, .. } => f_after - f_before,
            Improvement::NoImprovement { best_delta, .. } => *best_delta,
        }
    }
}

pub fn improvement_step(u: &GridFn, site: &StretchSite, f: &PressureModel) -> Result<Improvement> {
    improvement_step_with(u, site, f, &ImproveOptions::default())
}

/// Move along the family in the direction of decreasing resistance, or
/// towards `s = 1` when the derivative at `0` vanishes.
pub fn improvement_step_with(u: &GridFn, site: &StretchSite, f: &PressureModel, opts: &ImproveOptions) -> Result<Improvement> {
    let coeffs = analytic_coeffs(u, site, f)?.coeffs;
    let f0 = eval_F(u, f, None)?;
    let scale = f0.abs().max(1e-300);
    let d = coeffs.derivative_at_0();
    let pow = |k: u32| powi(0.5, k as i32);
    let candidates: Vec<f64> = if d < -opts.derivative_tol * scale {
        (0..=opts.max_k).map(pow).filter(|s| *s <= site.s_max).collect()
    } else if d > opts.derivative_tol * scale {
        (1..=opts.max_k).map(|k| -pow(k)).filter(|s| *s >= site.s0).collect()
    } else {
        let near_one: Vec<f64> = core::iter::once(1.0).chain((1..=opts.max_k).map(|k| 1.0 - pow(k))).filter(|s| *s <= site.s_max).collect();
        if near_one.is_empty() {
            (0..=opts.max_k).map(pow).filter(|s| *s <= site.s_max).collect()
        } else {
            near_one
        }
    };
    let mut tried = Vec::new();
    let mut best: Option<(f64, f64, GridFn)> = None;
    for s in candidates {
        if s == 0.0 {
            continue;
        }
        let m = family_at(u, site, s)?;
        if !check_member(u, &m, site).ok() {
            continue;
        }
        let fs = eval_F(&m, f, None)?;
        tried.push((s, fs - f0));
        if best.as_ref().is_none_or(|b| fs < b.1) {
            best = Some((s, fs, m));
        }
    }
    match best {
        Some((s, fs, m)) if fs - f0 < -opts.rel_tol * scale => Ok(Improvement::Improved { u: m, s, f_before: f0, f_after: fs }),
        other => Ok(Improvement::NoImprovement {
            f_before: f0,
            best_delta: other.map_or(0.0, |b| b.1 - f0),
            tried,
        }),
    }
}
