//! Small numerical toolkit shared by the geometric and kinetic modules.

pub mod nelder_mead;
pub mod quadrature;

use std::f64::consts::{PI, TAU};

use serde::Serialize;

pub use nelder_mead::{minimize, NelderMeadOptions, NelderMeadResult};
pub use quadrature::GaussLegendre;

/// Reduces an angle to `[0, 2π)`.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle to `(-π, π]`.
#[inline]
pub fn wrap_signed(a: f64) -> f64 {
    let r = wrap_angle(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Geodesic distance on `ℝ/2πℤ`.
#[inline]
pub fn angle_dist(a: f64, b: f64) -> f64 {
    wrap_signed(a - b).abs()
}

/// Length of the shortest arc of `ℝ/2πℤ` containing all `angles`:
/// `2π` minus the largest gap between cyclically consecutive angles.
pub fn shortest_cover(angles: &[f64]) -> f64 {
    match angles.len() {
        0 | 1 => return 0.0,
        _ => {}
    }
    let mut w: Vec<f64> = angles.iter().map(|&a| wrap_angle(a)).collect();
    w.sort_by(f64::total_cmp);
    let mut max_gap = w[0] + TAU - w[w.len() - 1];
    for p in w.windows(2) {
        max_gap = max_gap.max(p[1] - p[0]);
    }
    TAU - max_gap
}

/// Three-angle specialization of [`shortest_cover`] without allocation.
#[inline]
pub fn shortest_cover3(a: f64, b: f64, c: f64) -> f64 {
    let mut w = [wrap_angle(a), wrap_angle(b), wrap_angle(c)];
    if w[0] > w[1] {
        w.swap(0, 1);
    }
    if w[1] > w[2] {
        w.swap(1, 2);
    }
    if w[0] > w[1] {
        w.swap(0, 1);
    }
    let gap = (w[1] - w[0]).max(w[2] - w[1]).max(w[0] + TAU - w[2]);
    TAU - gap
}

/// Ordinary least-squares fit of `log y = slope · log x + intercept`.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<LogLogFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LogLogFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Bisection for a sign change of `f` on `[a, b]`; returns the midpoint of
/// the final bracket.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let mut fa = f(a);
    for _ in 0..iters {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if (fm <= 0.0) == (fa <= 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
