//! Rotationally symmetric problem: minimize `2 pi int f1(phi') r dr` over
//! convex nondecreasing profiles with `0 <= phi <= M`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::resistance::PressureModel;

/// Piecewise-linear profile on `n` equal radial steps.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialSolution {
    /// Breakpoints `r_0 = 0 < ... < r_n = L`.
    pub r: Vec<f64>,
    /// Profile values at the breakpoints, `phi(0) = 0`.
    pub phi: Vec<f64>,
    /// Slope on each step.
    pub slopes: Vec<f64>,
    pub resistance: f64,
    /// Largest radius with `phi = 0`.
    pub flat_radius: f64,
}

/// Ring weights `pi (r_{i+1}^2 - r_i^2)`.
pub fn ring_weights(r: &[f64]) -> Vec<f64> {
    r.windows(2).map(|w| core::f64::consts::PI * (w[1] * w[1] - w[0] * w[0])).collect()
}

/// `sum_i w_i f1(p_i)`.
pub fn radial_resistance(weights: &[f64], slopes: &[f64], f: &PressureModel) -> f64 {
    weights.iter().zip(slopes).map(|(w, p)| w * f.value1(*p)).sum()
}

/// Pool-adjacent-violators: the nondecreasing sequence closest to `y` in
/// the Euclidean norm.
pub fn pav(y: &[f64]) -> Vec<f64> {
    // Blocks of (mean, count).
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(y.len());
    for &v in y {
        let mut cur = (v, 1usize);
        while let Some(&(m, c)) = blocks.last() {
            if m <= cur.0 {
                break;
            }
            blocks.pop();
            let n = c + cur.1;
            cur = ((m * c as f64 + cur.0 * cur.1 as f64) / n as f64, n);
        }
        blocks.push(cur);
    }
    let mut out = Vec::with_capacity(y.len());
    for (m, c) in blocks {
        out.extend(core::iter::repeat_n(m, c));
    }
    out
}

/// Projection onto `{0 <= p_1 <= ... <= p_n, sum p_i dr <= M}`:
/// `max(pav(q) - lambda, 0)` with the smallest admissible `lambda >= 0`.
pub fn project_slopes(q: &[f64], dr: f64, m: f64) -> Vec<f64> {
    let iso = pav(q);
    let rise = |lam: f64| iso.iter().map(|v| (v - lam).max(0.0)).sum::<f64>() * dr;
    let shifted = |lam: f64| iso.iter().map(|v| (v - lam).max(0.0)).collect::<Vec<f64>>();
    if rise(0.0) <= m {
        return shifted(0.0);
    }
    let (mut lo, mut hi) = (0.0, iso.iter().fold(0.0_f64, |a, v| a.max(*v)));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rise(mid) > m {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi.max(1.0) {
            break;
        }
    }
    shifted(hi)
}

fn descend(weights: &[f64], dr: f64, m: f64, f: &PressureModel, start: Vec<f64>, max_iter: usize) -> (Vec<f64>, f64) {
    let wmax = weights.iter().fold(0.0_f64, |a, w| a.max(*w));
    let mut p = project_slopes(&start, dr, m);
    let mut val = radial_resistance(weights, &p, f);
    let mut eta = 1.0 / wmax;
    let mut quiet = 0;
    for _ in 0..max_iter {
        let grad: Vec<f64> = weights.iter().zip(&p).map(|(w, pi)| w * f.gradient(crate::math::Vec2::new(*pi, 0.0)).x).collect();
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = p.iter().zip(&grad).map(|(pi, g)| pi - eta * g).collect();
            let q = project_slopes(&trial, dr, m);
            let v = radial_resistance(weights, &q, f);
            // Armijo condition along the projection arc.
            let dec: f64 = p.iter().zip(&q).zip(&grad).map(|((a, b), g)| g * (b - a)).sum();
            if v <= val + 1e-4 * dec {
                let gain = val - v;
                p = q;
                accepted = gain > 0.0;
                if gain <= 1e-15 * val.abs().max(1e-300) {
                    quiet += 1;
                } else {
                    quiet = 0;
                }
                val = v;
                eta *= 2.0;
                break;
            }
            eta *= 0.5;
        }
        if !accepted || quiet >= 50 {
            break;
        }
    }
    (p, val)
}

/// Minimize the radial resistance with `n` steps by projected descent from
/// several starting profiles (cone, flat noses, seeded random).
pub fn solve_radial_1d(l: f64, m: f64, f: &PressureModel, n: usize) -> Result<RadialSolution> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::Range { what: "radius", value: l });
    }
    if !(m.is_finite() && m >= 0.0) {
        return Err(Error::Range { what: "height", value: m });
    }
    if n == 0 {
        return Err(Error::Invalid("radial resolution must be positive".into()));
    }
    let dr = l / n as f64;
    let r: Vec<f64> = (0..=n).map(|i| if i == n { l } else { i as f64 * dr }).collect();
    let weights = ring_weights(&r);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    starts.push(alloc::vec![m / l; n]);
    for frac in [0.2, 0.35, 0.5, 0.65] {
        let r0 = frac * l;
        let s = m / (l - r0);
        starts.push(r[..n].iter().map(|ri| if ri + 0.5 * dr < r0 { 0.0 } else { s }).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..2 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 3.0 * m / l).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        starts.push(v);
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in starts {
        let (p, v) = descend(&weights, dr, m, f, s, 20_000);
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((p, v));
        }
    }
    let (slopes, resistance) = best.expect("at least one start");
    let mut phi = Vec::with_capacity(n + 1);
    phi.push(0.0);
    for p in &slopes {
        let last = *phi.last().unwrap_or(&0.0);
        phi.push((last + p * dr).min(m));
    }
    let flat = slopes.iter().position(|p| *p > 1e-9).unwrap_or(n);
    Ok(RadialSolution { flat_radius: r[flat], r, phi, slopes, resistance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pav_pools_violators() {
        assert_eq!(pav(&[1.0, 3.0, 2.0, 4.0]), alloc::vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(pav(&[3.0, 2.0, 1.0]), alloc::vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn projection_respects_budget() {
        let p = project_slopes(&[5.0, 1.0, 3.0, 7.0], 0.25, 1.0);
        assert!(p.windows(2).all(|w| w[0] <= w[1]));
        assert!(p.iter().all(|v| *v >= 0.0));
        assert!(p.iter().sum::<f64>() * 0.25 <= 1.0 + 1e-12);
    }

    #[test]
    fn zero_height_gives_disk_area() {
        let s = solve_radial_1d(1.0, 0.0, &PressureModel::Newton, 50).unwrap();
        assert!(s.phi.iter().all(|v| *v == 0.0));
        assert!((s.resistance - core::f64::consts::PI).abs() < 1e-12);
    }
}
