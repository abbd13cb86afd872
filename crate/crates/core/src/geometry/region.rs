//! Inscribed disks, star-shaped boundary portions, segment clearance and
//! distances to unit circles.

use std::f64::consts::TAU;

use serde::Serialize;

use super::{dot, BoundaryCurve, Point};
use crate::error::{invalid, Error, Result};
use crate::numerics::{angle_dist, bisect, golden_max, minimize, NelderMeadOptions};

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn contains(&self, p: Point) -> bool {
        (p - self.center).norm() < self.radius
    }
}

/// Chebyshev disk of the domain.
pub fn max_inscribed_disk(curve: &BoundaryCurve) -> Disk {
    if let Some(d) = analytic_disk(curve) {
        return d;
    }
    searched_disk(curve)
}

/// Closed forms: the circle itself, `(0, b)` for the ellipse, `(0, r_N)` for
/// the rounded polygon, moved by the curve placement.
fn analytic_disk(curve: &BoundaryCurve) -> Option<Disk> {
    use super::curve::Shape;
    let (rot, shift) = curve.placement();
    let (c, r) = match curve.shape {
        Shape::Circle { center, radius } => (center, radius),
        Shape::Ellipse { b, .. } => (Point::new(0.0, 0.0), b),
        Shape::Ngon { n, .. } => (Point::new(0.0, 0.0), super::ngon_inradius(n)),
        Shape::Spline => return None,
    };
    Some(Disk {
        center: rot * c + shift,
        radius: r,
    })
}

/// Grid seed plus simplex polish; used for splines and as a cross-check.
pub fn searched_disk(curve: &BoundaryCurve) -> Disk {
    let [x0, x1, y0, y1] = curve.bbox();
    let g = 64;
    let (hx, hy) = ((x1 - x0) / g as f64, (y1 - y0) / g as f64);
    let mut best = (Point::new(0.0, 0.0), f64::INFINITY);
    for j in 0..g {
        for i in 0..g {
            let p = Point::new(x0 + (i as f64 + 0.5) * hx, y0 + (j as f64 + 0.5) * hy);
            let d = curve.signed_distance(p);
            if d < best.1 {
                best = (p, d);
            }
        }
    }
    let opts = NelderMeadOptions {
        initial_step: 0.5 * hx.max(hy),
        f_tol: 1e-13,
        x_tol: 1e-11,
        max_evals: 4000,
        restarts: 3,
    };
    let r = minimize(
        |v| curve.signed_distance(Point::new(v[0], v[1])),
        &[best.0.re, best.0.im],
        &opts,
    );
    let (center, f) = if r.f < best.1 {
        (Point::new(r.x[0], r.x[1]), r.f)
    } else {
        best
    };
    Disk {
        center,
        radius: -f,
    }
}

/// Boundary portion `E(η)`: points within `(1+η)R` of the disk center whose
/// segment to the center stays inside the domain. Intervals are
/// `(start, length)` in arc length.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StarRegion {
    pub eta: f64,
    pub intervals: Vec<(f64, f64)>,
}

impl StarRegion {
    pub fn full(eta: f64) -> Self {
        Self {
            eta,
            intervals: vec![(0.0, TAU)],
        }
    }

    pub fn is_full(&self) -> bool {
        self.measure() >= TAU - 1e-12
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|iv| iv.1).sum()
    }

    pub fn contains(&self, s: f64) -> bool {
        let s = s.rem_euclid(TAU);
        self.intervals
            .iter()
            .any(|&(a, l)| (s - a).rem_euclid(TAU) <= l)
    }

    /// Length of `[lo, hi] ∩ region` for `lo ≤ hi`, `hi - lo ≤ 2π`.
    pub fn overlap(&self, lo: f64, hi: f64) -> f64 {
        let mut total = 0.0;
        for &(a, l) in &self.intervals {
            let k0 = ((lo - a - l) / TAU).floor() as i64;
            let k1 = ((hi - a) / TAU).ceil() as i64;
            for k in k0..=k1 {
                let s = a + k as f64 * TAU;
                total += ((s + l).min(hi) - s.max(lo)).max(0.0);
            }
        }
        total.min(hi - lo)
    }
}

fn ray_clear(curve: &BoundaryCurve, from: Point, s: f64) -> bool {
    let x = curve.point(s);
    curve
        .intersect_segment(from, x)
        .iter()
        .all(|&(t, hs)| t >= 1.0 - 1e-9 || angle_dist(hs, s) < 1e-7 || (curve.point(hs) - x).norm() < 1e-9)
}

fn star_predicate(curve: &BoundaryCurve, disk: &Disk, eta: f64, s: f64) -> bool {
    let x = curve.point(s);
    (x - disk.center).norm() <= (1.0 + eta) * disk.radius && ray_clear(curve, disk.center, s)
}

pub fn star_region(curve: &BoundaryCurve, disk: &Disk, eta: f64) -> Result<StarRegion> {
    if !(eta >= 0.0) {
        return Err(invalid(format!("eta must be >= 0, got {eta}")));
    }
    Ok(intervals_of(|s| star_predicate(curve, disk, eta, s), eta))
}

/// Maximal intervals of `{s : pred(s)}` from 4096 samples, endpoints refined
/// by bisection.
fn intervals_of<F: Fn(f64) -> bool>(pred: F, eta: f64) -> StarRegion {
    let n = 4096;
    let h = TAU / n as f64;
    let flags: Vec<bool> = (0..n).map(|j| pred(j as f64 * h)).collect();
    if flags.iter().all(|&f| f) {
        return StarRegion::full(eta);
    }
    if flags.iter().all(|&f| !f) {
        return StarRegion {
            eta,
            intervals: Vec::new(),
        };
    }
    let edge = |a: f64, b: f64, a_in: bool| {
        bisect(
            |s| if pred(s) == a_in { -1.0 } else { 1.0 },
            a,
            b,
            40,
        )
    };
    // rotate so that index 0 is outside
    let first_out = flags.iter().position(|&f| !f).unwrap();
    let mut intervals = Vec::new();
    let mut j = 0;
    while j < n {
        let idx = (first_out + j) % n;
        if flags[idx] {
            let start_idx = idx;
            let mut len = 0;
            while len < n && flags[(start_idx + len) % n] {
                len += 1;
            }
            let sa = start_idx as f64 * h;
            let ea = (start_idx + len - 1) as f64 * h;
            let start = edge(sa - h, sa, false);
            let end = edge(ea, ea + h, true);
            intervals.push((start.rem_euclid(TAU), end - start));
            j += len;
        } else {
            j += 1;
        }
    }
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    StarRegion { eta, intervals }
}

/// Sublevel set `{|g(s) - x₀| ≤ (1+η)R}` as intervals.
pub fn radius_region(curve: &BoundaryCurve, disk: &Disk, eta: f64) -> StarRegion {
    intervals_of(
        |s| (curve.point(s) - disk.center).norm() <= (1.0 + eta) * disk.radius,
        eta,
    )
}

/// Whether the open segment `[z, x)` avoids the boundary.
pub fn segment_clearance(curve: &BoundaryCurve, x: Point, z: Point) -> Result<bool> {
    let (sx, d) = curve.nearest(x);
    if d > 1e-9 {
        return Err(invalid(format!("point ({}, {}) is {d:.3e} away from the curve", x.re, x.im)));
    }
    if !curve.contains(z) {
        return Err(Error::OutsideDomain { x: z.re, y: z.im });
    }
    Ok(curve
        .intersect_segment(z, x)
        .iter()
        .all(|&(t, hs)| t >= 1.0 - 1e-9 || angle_dist(hs, sx) < 1e-7 || (curve.point(hs) - x).norm() < 1e-9))
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum HausdorffMethod {
    Radial,
    TwoSided,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Hausdorff {
    pub distance: f64,
    pub method: HausdorffMethod,
}

/// Strict star-shapedness about `c`, tested through `(g - c)·n > 0`.
pub fn is_star_shaped(curve: &BoundaryCurve, c: Point) -> bool {
    curve.contains(c)
        && curve
            .samples(4096)
            .iter()
            .all(|p| dot(p.point() - c, p.outward()) > 0.0)
}

/// Hausdorff distance between the curve and the unit circle about `center`.
pub fn hausdorff_to_circle(curve: &BoundaryCurve, center: Point) -> Hausdorff {
    if is_star_shaped(curve, center) {
        let n = 4096;
        let h = TAU / n as f64;
        let dev = |s: f64| ((curve.point(s) - center).norm() - 1.0).abs();
        let (j, _) = (0..n)
            .map(|j| (j, dev(j as f64 * h)))
            .fold((0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
        let s0 = j as f64 * h;
        let (_, refined) = golden_max(dev, s0 - h, s0 + h, 1e-13);
        let breaks = curve.breakpoints();
        let at_breaks = breaks.iter().map(|&s| dev(s)).fold(0.0, f64::max);
        return Hausdorff {
            distance: refined.max(dev(s0)).max(at_breaks),
            method: HausdorffMethod::Radial,
        };
    }
    let n = 4096;
    let pts = curve.polyline(n);
    let circle: Vec<Point> = (0..n).map(|j| center + super::unit(TAU * j as f64 / n as f64)).collect();
    let one_way = |a: &[Point], b: &[Point]| {
        a.iter()
            .map(|p| b.iter().map(|q| (p - q).norm_sqr()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
            .sqrt()
    };
    Hausdorff {
        distance: one_way(&pts, &circle).max(one_way(&circle, &pts)),
        method: HausdorffMethod::TwoSided,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterObjective {
    Hausdorff,
    NormalDeviation,
}

/// Center minimizing the chosen objective, seeded at the centroid with a
/// restart from the inscribed-disk center.
pub fn best_circle_center(curve: &BoundaryCurve, objective: CenterObjective) -> Point {
    let f = |p: Point| match objective {
        CenterObjective::Hausdorff => hausdorff_to_circle(curve, p).distance,
        CenterObjective::NormalDeviation => {
            crate::stability::normal_deviation(curve, p).unwrap_or(f64::INFINITY)
        }
    };
    center_search(curve, f)
}

pub(crate) fn center_search<F: Fn(Point) -> f64>(curve: &BoundaryCurve, f: F) -> Point {
    let opts = NelderMeadOptions {
        initial_step: 0.05,
        f_tol: 1e-14,
        x_tol: 1e-10,
        max_evals: 3000,
        restarts: 3,
    };
    let seeds = [curve.centroid(), max_inscribed_disk(curve).center];
    let mut best = (seeds[0], f(seeds[0]));
    for seed in seeds {
        let r = minimize(|v| f(Point::new(v[0], v[1])), &[seed.re, seed.im], &opts);
        if r.f < best.1 {
            best = (Point::new(r.x[0], r.x[1]), r.f);
        }
    }
    best.0
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Geom1Report {
    pub samples: usize,
    /// `max(lhs - rhs)` over the samples.
    pub worst_margin: f64,
    pub violations: usize,
}

/// `|τ(x)·(x - x₀)/|x - x₀|| ≤ 2 √(K dist(x, ∂B_R(x₀)))` at `n` samples.
pub fn geom1_check(curve: &BoundaryCurve, disk: &Disk, n: usize) -> Geom1Report {
    let k = curve.curvature_bound();
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for p in curve.samples(n) {
        let v = p.point() - disk.center;
        let r = v.norm();
        let lhs = dot(p.tangent(), v / r).abs();
        let rhs = 2.0 * (k * (r - disk.radius).max(0.0)).sqrt();
        worst = worst.max(lhs - rhs);
        if lhs > rhs + 1e-9 {
            violations += 1;
        }
    }
    Geom1Report {
        samples: n,
        worst_margin: worst,
        violations,
    }
}

/// Every connected component of the radius sublevel set either misses
/// `region` or lies inside it.
pub fn continuation_closed(curve: &BoundaryCurve, disk: &Disk, region: &StarRegion) -> bool {
    let radius = radius_region(curve, disk, region.eta);
    radius.intervals.iter().all(|&(a, l)| {
        let covered = region.overlap(a, a + l);
        covered < 1e-6 || covered > l - 1e-6
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SegmentLemmaReport {
    pub eta: f64,
    pub checked: usize,
    pub failures: usize,
}

/// Checks `[z, x] ⊂ Ω ∪ {x}` for `x` in `E(η)` (`nx` samples) and `z` on a
/// polar grid of `B_{2R/3}(x₀)`.
pub fn segment_lemma_check(
    curve: &BoundaryCurve,
    disk: &Disk,
    eta: f64,
    nx: usize,
    nz: usize,
) -> Result<SegmentLemmaReport> {
    let region = star_region(curve, disk, eta)?;
    let mut checked = 0;
    let mut failures = 0;
    let zs: Vec<Point> = polar_grid(disk.center, 2.0 * disk.radius / 3.0, nz);
    for j in 0..nx {
        let s = TAU * j as f64 / nx as f64;
        if !region.contains(s) {
            continue;
        }
        let x = curve.point(s);
        for &z in &zs {
            checked += 1;
            if !segment_clearance(curve, x, z)? {
                failures += 1;
            }
        }
    }
    Ok(SegmentLemmaReport {
        eta,
        checked,
        failures,
    })
}

/// Roughly `n` points filling the closed disk: center plus rings.
pub(crate) fn polar_grid(c: Point, r: f64, n: usize) -> Vec<Point> {
    let rings = ((n as f64).sqrt() / 2.0).ceil().max(1.0) as usize;
    let mut out = vec![c];
    for k in 1..=rings {
        let rk = r * k as f64 / rings as f64;
        let m = (6 * k).max(1);
        for j in 0..m {
            out.push(c + super::unit(TAU * (j as f64 + 0.5 * (k % 2) as f64) / m as f64) * rk);
        }
    }
    out
}

/// Largest `η` in `candidates` (ascending) for which the segment lemma holds
/// on all samples, scanning until the first failure.
pub fn empirical_segment_eta(
    curve: &BoundaryCurve,
    disk: &Disk,
    candidates: &[f64],
    nx: usize,
    nz: usize,
) -> Result<Option<f64>> {
    let mut last = None;
    for &eta in candidates {
        if segment_lemma_check(curve, disk, eta, nx, nz)?.failures > 0 {
            break;
        }
        last = Some(eta);
    }
    Ok(last)
}
