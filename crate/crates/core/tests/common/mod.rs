//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's Gaussian or quantizer code.

#![allow(dead_code)]

use std::f64::consts::PI;

/// N(0, 1) density, written out independently of the crate.
pub fn normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Composite Simpson rule with `panels` (even) sub-intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels.is_multiple_of(2));
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Truncation point standing in for infinity, in standard deviations.
pub const TAIL: f64 = 12.0;

/// E[X | lo < X < hi] for X ~ N(0, sigma²) by quadrature.
pub fn quadrature_centroid(lo: f64, hi: f64, sigma: f64) -> f64 {
    let lo = lo.max(-TAIL * sigma);
    let hi = hi.min(TAIL * sigma);
    let dens = |x: f64| normal_density(x / sigma) / sigma;
    let mass = simpson(dens, lo, hi, 4000);
    let first = simpson(|x| x * dens(x), lo, hi, 4000);
    first / mass
}

/// Mean squared quantization error of `levels` (sorted) under N(0, sigma²),
/// by quadrature over the nearest-neighbour cells.
pub fn quadrature_distortion(levels: &[f64], sigma: f64) -> f64 {
    let dens = |x: f64| normal_density(x / sigma) / sigma;
    let mut total = 0.0;
    for (i, &q) in levels.iter().enumerate() {
        let lo = if i == 0 {
            -TAIL * sigma
        } else {
            0.5 * (levels[i - 1] + q)
        };
        let hi = if i + 1 == levels.len() {
            TAIL * sigma
        } else {
            0.5 * (q + levels[i + 1])
        };
        total += simpson(|x| (x - q) * (x - q) * dens(x), lo, hi, 4000);
    }
    total
}

/// Gradient of [`quadrature_distortion`] with respect to each level:
/// `-2 ∫_cell (x - q) p(x) dx` (boundary terms cancel at midpoints).
pub fn quadrature_distortion_gradient(levels: &[f64], sigma: f64) -> Vec<f64> {
    let dens = |x: f64| normal_density(x / sigma) / sigma;
    levels
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            let lo = if i == 0 {
                -TAIL * sigma
            } else {
                0.5 * (levels[i - 1] + q)
            };
            let hi = if i + 1 == levels.len() {
                TAIL * sigma
            } else {
                0.5 * (q + levels[i + 1])
            };
            -2.0 * simpson(|x| (x - q) * dens(x), lo, hi, 4000)
        })
        .collect()
}

/// Lloyd-Max levels for N(0, sigma²) by gradient descent on the quadrature
/// distortion, starting from an evenly spaced grid.
pub fn quadrature_lloyd_max(count: usize, sigma: f64) -> Vec<f64> {
    let mut levels: Vec<f64> = (0..count)
        .map(|i| sigma * (-2.0 + 4.0 * (i as f64 + 0.5) / count as f64))
        .collect();
    for _ in 0..2000 {
        let grad = quadrature_distortion_gradient(&levels, sigma);
        // Each level's cell mass is the natural step scale (Newton on the centroid condition).
        let dens = |x: f64| normal_density(x / sigma) / sigma;
        let mut max_step: f64 = 0.0;
        let steps: Vec<f64> = levels
            .iter()
            .enumerate()
            .map(|(i, &q)| {
                let lo = if i == 0 {
                    -TAIL * sigma
                } else {
                    0.5 * (levels[i - 1] + q)
                };
                let hi = if i + 1 == levels.len() {
                    TAIL * sigma
                } else {
                    0.5 * (q + levels[i + 1])
                };
                let mass = simpson(dens, lo, hi, 4000);
                grad[i] / (2.0 * mass)
            })
            .collect();
        for (q, s) in levels.iter_mut().zip(&steps) {
            *q -= s;
            max_step = max_step.max(s.abs());
        }
        if max_step < 1e-12 {
            break;
        }
    }
    levels
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Coefficient of determination of the least-squares line through (x, y).
pub fn linear_fit_r2(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (1.0 - ss_res / ss_tot, slope, intercept)
}
