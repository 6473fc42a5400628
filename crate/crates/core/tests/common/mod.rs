//! Oracles shared by the integration tests.
#![allow(dead_code)]

/// Dynamic program over radial steps for the rotationally symmetric problem.
///
/// Slopes live on the lattice `j * dp`, heights on `k * dr * dp`, so every
/// step moves the height by exactly `j` lattice units. Convexity is a
/// nondecreasing slope index, handled with a prefix minimum over `j`.
/// Returns `(resistance, flat radius)`.
pub fn radial_dp(l: f64, m: f64, f1: impl Fn(f64) -> f64, n_r: usize, n_s: usize, p_max: f64) -> (f64, f64) {
    let dr = l / n_r as f64;
    let dp = p_max / n_s as f64;
    let n_h = (m / (dr * dp)).floor() as usize;
    let ns = n_s + 1;
    let inf = f64::INFINITY;
    // State (k, j): height index k, last slope index j.
    let mut val = vec![inf; (n_h + 1) * ns];
    let mut first = vec![u16::MAX; (n_h + 1) * ns];
    val[0] = 0.0;
    let mut pre = vec![inf; (n_h + 1) * ns];
    let mut pre_first = vec![u16::MAX; (n_h + 1) * ns];
    for i in 0..n_r {
        let (r0, r1) = (i as f64 * dr, (i + 1) as f64 * dr);
        let w = std::f64::consts::PI * (r1 * r1 - r0 * r0);
        let cost: Vec<f64> = (0..ns).map(|j| w * f1(j as f64 * dp)).collect();
        for k in 0..=n_h {
            let mut best = inf;
            let mut bf = u16::MAX;
            for j in 0..ns {
                let v = val[k * ns + j];
                if v < best {
                    best = v;
                    bf = first[k * ns + j];
                }
                pre[k * ns + j] = best;
                pre_first[k * ns + j] = bf;
            }
        }
        let mut next = vec![inf; (n_h + 1) * ns];
        let mut next_first = vec![u16::MAX; (n_h + 1) * ns];
        for k in 0..=n_h {
            for j in 0..ns {
                let p = pre[k * ns + j];
                if !p.is_finite() || k + j > n_h {
                    continue;
                }
                let idx = (k + j) * ns + j;
                let v = p + cost[j];
                if v < next[idx] {
                    next[idx] = v;
                    let pf = pre_first[k * ns + j];
                    next_first[idx] = if pf == u16::MAX && j > 0 { i as u16 } else { pf };
                }
            }
        }
        val = next;
        first = next_first;
    }
    let mut best = (inf, 0usize);
    for (idx, v) in val.iter().enumerate() {
        if *v < best.0 {
            best = (*v, idx);
        }
    }
    let fi = first[best.1];
    let flat = if fi == u16::MAX { l } else { fi as f64 * dr };
    (best.0, flat)
}
