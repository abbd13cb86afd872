//! Closed, counterclockwise, arc-length parametrized boundary curves of
//! length `2π`.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::Serialize;

use super::smooth::{check_points, PeriodicSpline, SmoothLoop, SmoothShape};
use super::{cross, dot, unit, Point, I};
use crate::error::{invalid, Result};
use crate::numerics::{quadrature::composite, GaussLegendre};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Circle,
    Ellipse,
    RoundedNgon,
    Spline,
}

impl CurveKind {
    pub fn name(self) -> &'static str {
        match self {
            CurveKind::Circle => "circle",
            CurveKind::Ellipse => "ellipse",
            CurveKind::RoundedNgon => "rounded_ngon",
            CurveKind::Spline => "spline",
        }
    }
}

/// One point of the boundary with its moving frame. `normal` is the outward
/// unit normal, `-i τ`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurveSample {
    pub s: f64,
    pub x: [f64; 2],
    pub tau: [f64; 2],
    pub normal: [f64; 2],
    pub kappa: f64,
}

impl CurveSample {
    pub fn point(&self) -> Point {
        Point::new(self.x[0], self.x[1])
    }
    pub fn tangent(&self) -> Point {
        Point::new(self.tau[0], self.tau[1])
    }
    pub fn outward(&self) -> Point {
        Point::new(self.normal[0], self.normal[1])
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Piece {
    Segment { start: Point, dir: Point, len: f64 },
    /// Counterclockwise arc starting at polar angle `theta0`.
    Arc { center: Point, radius: f64, theta0: f64, len: f64 },
    Smooth { lp: Arc<SmoothLoop> },
}

impl Piece {
    fn len(&self) -> f64 {
        match self {
            Piece::Segment { len, .. } | Piece::Arc { len, .. } => *len,
            Piece::Smooth { lp } => lp.length(),
        }
    }

    #[inline]
    fn eval(&self, u: f64) -> (Point, Point, f64) {
        match self {
            Piece::Segment { start, dir, .. } => (start + dir * u, *dir, 0.0),
            Piece::Arc {
                center,
                radius,
                theta0,
                ..
            } => {
                let e = unit(theta0 + u / radius);
                (center + e * radius, I * e, 1.0 / radius)
            }
            Piece::Smooth { lp } => lp.eval_s(u),
        }
    }
}

/// Exact shape data used for inside tests and distances.
#[derive(Debug, Clone)]
pub(crate) enum Shape {
    Circle { center: Point, radius: f64 },
    Ellipse { a: f64, b: f64 },
    Ngon { n: usize, lambda: f64 },
    Spline,
}

#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    kind: CurveKind,
    pub(crate) shape: Shape,
    pub(crate) pieces: Vec<Piece>,
    starts: Vec<f64>,
    curvature_bound: f64,
    origin_shift: f64,
    rot: Point,
    shift: Point,
    /// Local-frame polyline, roughly uniform in arc length.
    poly: Arc<Vec<Point>>,
    poly_s: Arc<Vec<f64>>,
}

const POLY: usize = 4096;

impl BoundaryCurve {
    fn assemble(kind: CurveKind, shape: Shape, pieces: Vec<Piece>, curvature_bound: f64) -> Self {
        let mut starts = Vec::with_capacity(pieces.len() + 1);
        let mut acc = 0.0;
        for p in &pieces {
            starts.push(acc);
            acc += p.len();
        }
        starts.push(acc);
        let mut c = BoundaryCurve {
            kind,
            shape,
            pieces,
            starts,
            curvature_bound,
            origin_shift: 0.0,
            rot: Point::new(1.0, 0.0),
            shift: Point::new(0.0, 0.0),
            poly: Arc::new(Vec::new()),
            poly_s: Arc::new(Vec::new()),
        };
        let total = c.local_length();
        let poly_s: Vec<f64> = (0..POLY).map(|j| total * j as f64 / POLY as f64).collect();
        let poly: Vec<Point> = poly_s.iter().map(|&s| c.eval_local(s).0).collect();
        c.poly = Arc::new(poly);
        c.poly_s = Arc::new(poly_s);
        c
    }

    /// Unit circle centered at the origin.
    pub fn circle() -> Self {
        let piece = Piece::Arc {
            center: Point::new(0.0, 0.0),
            radius: 1.0,
            theta0: 0.0,
            len: TAU,
        };
        Self::assemble(
            CurveKind::Circle,
            Shape::Circle {
                center: Point::new(0.0, 0.0),
                radius: 1.0,
            },
            vec![piece],
            1.0,
        )
    }

    /// Ellipse with semi-axes in ratio `aspect = a/b ≥ 1`, scaled to length `2π`.
    pub fn ellipse(aspect: f64) -> Result<Self> {
        if !(aspect >= 1.0) || !aspect.is_finite() {
            return Err(invalid(format!("ellipse aspect must be >= 1, got {aspect}")));
        }
        let lp = SmoothLoop::normalized(SmoothShape::Ellipse { a: aspect, b: 1.0 });
        let (a, b) = match lp.shape {
            SmoothShape::Ellipse { a, b } => (a, b),
            _ => unreachable!(),
        };
        Ok(Self::assemble(
            CurveKind::Ellipse,
            Shape::Ellipse { a, b },
            vec![Piece::Smooth { lp: Arc::new(lp) }],
            a / (b * b),
        ))
    }

    /// The rounded regular `N`-gon of length `2π`: the outer parallel set at
    /// distance `λ/2` of the regular `N`-gon with circumradius `λ/2`.
    pub fn rounded_ngon(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(invalid(format!("rounded_ngon needs n >= 3, got {n}")));
        }
        let lambda = ngon_lambda(n);
        let rho = lambda / 2.0;
        let half = PI / n as f64;
        let side = lambda * half.sin();
        let mut pieces = Vec::with_capacity(2 * n);
        for k in 0..n {
            let th = TAU * k as f64 / n as f64;
            let c = unit(th) * rho;
            pieces.push(Piece::Arc {
                center: c,
                radius: rho,
                theta0: th - half,
                len: rho * 2.0 * half,
            });
            let nk = unit(th + half);
            pieces.push(Piece::Segment {
                start: c + nk * rho,
                dir: I * nk,
                len: side,
            });
        }
        Ok(Self::assemble(
            CurveKind::RoundedNgon,
            Shape::Ngon { n, lambda },
            pieces,
            1.0 / rho,
        ))
    }

    /// Periodic C² cubic spline through `points`, oriented counterclockwise
    /// and rescaled to length `2π` about its centroid.
    pub fn spline(points: &[Point]) -> Result<Self> {
        check_points(points)?;
        let n = points.len() as f64;
        let c = points.iter().sum::<Point>() / n;
        let centered: Vec<Point> = points.iter().map(|p| p - c).collect();
        let sp = PeriodicSpline::through(&centered)?;
        let lp = SmoothLoop::normalized(SmoothShape::Spline(sp));
        let kmax = lp.max_abs_curvature();
        let curve = Self::assemble(
            CurveKind::Spline,
            Shape::Spline,
            vec![Piece::Smooth { lp: Arc::new(lp) }],
            kmax,
        );
        if !curve.polyline_is_simple() {
            return Err(invalid("spline curve self-intersects"));
        }
        Ok(curve)
    }

    /// Smoothed dumbbell: two overlapping unit disks with centers `±(1-δ)`,
    /// neck corners rounded by fillets of radius `fillet`, sampled and passed
    /// through [`BoundaryCurve::spline`].
    pub fn dumbbell(delta: f64, fillet: f64, samples: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) || !(fillet > 0.0) {
            return Err(invalid("dumbbell needs 0 < delta < 1 and fillet > 0"));
        }
        let d = 1.0 - delta;
        let right = Point::new(d, 0.0);
        let left = Point::new(-d, 0.0);
        let yf = ((1.0 + fillet).powi(2) - d * d).sqrt();
        let ftop = Point::new(0.0, yf);
        let fbot = Point::new(0.0, -yf);
        let a_r = (ftop - right).arg();
        let b_r = (right - ftop).arg();
        let sweep = PI + 2.0 * b_r;
        // (piece, traversed clockwise)
        let path = [
            (Piece::Arc { center: right, radius: 1.0, theta0: -a_r, len: 2.0 * a_r }, false),
            (Piece::Arc { center: ftop, radius: fillet, theta0: -PI - b_r, len: fillet * sweep }, true),
            (Piece::Arc { center: left, radius: 1.0, theta0: PI - a_r, len: 2.0 * a_r }, false),
            (Piece::Arc { center: fbot, radius: fillet, theta0: -b_r, len: fillet * sweep }, true),
        ];
        let total: f64 = path.iter().map(|(p, _)| p.len()).sum();
        let step = total / samples.max(16) as f64;
        let mut pts = Vec::new();
        for (p, cw) in &path {
            let len = p.len();
            let m = (len / step).ceil().max(1.0) as usize;
            for j in 0..m {
                let u = len * j as f64 / m as f64;
                pts.push(p.eval(if *cw { len - u } else { u }).0);
            }
        }
        Self::spline(&pts)
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    /// Upper bound on `|κ|`.
    pub fn curvature_bound(&self) -> f64 {
        self.curvature_bound
    }

    pub fn length(&self) -> f64 {
        TAU
    }

    fn local_length(&self) -> f64 {
        *self.starts.last().unwrap()
    }

    /// Same curve with the arc-length origin moved forward by `ds`.
    pub fn with_origin_shift(&self, ds: f64) -> Self {
        let mut c = self.clone();
        c.origin_shift = (c.origin_shift + ds).rem_euclid(self.local_length());
        c
    }

    /// Applies `x ↦ e^{iθ} x + t` on top of the current placement.
    pub fn with_rigid_motion(&self, angle: f64, translation: Point) -> Self {
        let mut c = self.clone();
        let r = unit(angle);
        c.rot = r * c.rot;
        c.shift = r * c.shift + translation;
        c
    }

    pub fn translated(&self, t: Point) -> Self {
        self.with_rigid_motion(0.0, t)
    }

    #[inline]
    pub(crate) fn to_local(&self, p: Point) -> Point {
        (p - self.shift) * self.rot.conj()
    }

    #[inline]
    pub(crate) fn to_global(&self, p: Point) -> Point {
        self.rot * p + self.shift
    }

    #[inline]
    fn local_param(&self, s: f64) -> f64 {
        (s + self.origin_shift).rem_euclid(self.local_length())
    }

    #[inline]
    fn global_param(&self, u: f64) -> f64 {
        (u - self.origin_shift).rem_euclid(self.local_length())
    }

    #[inline]
    fn piece_index(&self, u: f64) -> usize {
        match self.starts.binary_search_by(|p| p.total_cmp(&u)) {
            Ok(i) => i.min(self.pieces.len() - 1),
            Err(i) => (i - 1).min(self.pieces.len() - 1),
        }
    }

    #[inline]
    fn eval_local(&self, u: f64) -> (Point, Point, f64) {
        let i = self.piece_index(u);
        self.pieces[i].eval(u - self.starts[i])
    }

    /// Position, unit tangent and curvature at arc length `s` (any real `s`).
    #[inline]
    pub fn frame(&self, s: f64) -> (Point, Point, f64) {
        let (p, t, k) = self.eval_local(self.local_param(s));
        (self.to_global(p), self.rot * t, k)
    }

    #[inline]
    pub fn point(&self, s: f64) -> Point {
        self.frame(s).0
    }

    pub fn sample(&self, s: f64) -> CurveSample {
        let (p, t, k) = self.frame(s);
        let n = -I * t;
        CurveSample {
            s: s.rem_euclid(TAU),
            x: [p.re, p.im],
            tau: [t.re, t.im],
            normal: [n.re, n.im],
            kappa: k,
        }
    }

    /// `n` samples uniform in arc length, starting at `s = 0`.
    pub fn samples(&self, n: usize) -> Vec<CurveSample> {
        (0..n).map(|j| self.sample(TAU * j as f64 / n as f64)).collect()
    }

    /// Arc-length positions (in the current parametrization) where the
    /// curvature may jump, sorted in `[0, 2π)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = if self.pieces.len() > 1 {
            self.starts[..self.pieces.len()].to_vec()
        } else {
            match &self.pieces[0] {
                Piece::Smooth { lp } => {
                    let mut v = lp.knot_arclengths();
                    v.push(0.0);
                    v
                }
                _ => Vec::new(),
            }
        };
        for v in out.iter_mut() {
            *v = self.global_param(*v);
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// `∮ f ds` by composite Gauss–Legendre split at the breakpoints.
    pub fn integrate<F: FnMut(f64, Point, Point, f64) -> f64>(&self, panel: f64, mut f: F) -> f64 {
        let breaks = self.breakpoints();
        composite(0.0, TAU, &breaks, panel, GaussLegendre::g16(), |s| {
            let (p, t, k) = self.frame(s);
            f(s, p, t, k)
        })
    }

    pub fn area(&self) -> f64 {
        0.5 * self.integrate(TAU / 256.0, |_, p, t, _| cross(p, t))
    }

    pub fn centroid(&self) -> Point {
        let a = self.area();
        let cx = self.integrate(TAU / 256.0, |_, p, t, _| p.re * p.re * t.im) / (2.0 * a);
        let cy = -self.integrate(TAU / 256.0, |_, p, t, _| p.im * p.im * t.re) / (2.0 * a);
        Point::new(cx, cy)
    }

    /// Axis-aligned bounding box `[xmin, xmax, ymin, ymax]` (slightly padded).
    pub fn bbox(&self) -> [f64; 4] {
        let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for &p in self.poly.iter() {
            let q = self.to_global(p);
            b[0] = b[0].min(q.re);
            b[1] = b[1].max(q.re);
            b[2] = b[2].min(q.im);
            b[3] = b[3].max(q.im);
        }
        // chord sagitta at polyline spacing
        let h = TAU / POLY as f64;
        let pad = self.curvature_bound * h * h / 8.0 + 1e-12;
        [b[0] - pad, b[1] + pad, b[2] - pad, b[3] + pad]
    }

    /// Strict interior test.
    pub fn contains(&self, p: Point) -> bool {
        self.signed_distance(p) < 0.0
    }

    /// Signed distance to the curve, negative inside.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let q = self.to_local(p);
        match &self.shape {
            Shape::Circle { center, radius } => (q - center).norm() - radius,
            Shape::Ngon { n, lambda } => {
                let d = polygon_signed_distance(*n, *lambda, q);
                d - lambda / 2.0
            }
            Shape::Ellipse { a, b } => {
                let inside = (q.re / a).powi(2) + (q.im / b).powi(2) < 1.0;
                let d = self.nearest_local(q).1;
                if inside {
                    -d
                } else {
                    d
                }
            }
            Shape::Spline => {
                let d = self.nearest_local(q).1;
                if self.winding_local(q) != 0 {
                    -d
                } else {
                    d
                }
            }
        }
    }

    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        self.signed_distance(p).abs()
    }

    /// Arc length of a nearest boundary point and the distance to it.
    pub fn nearest(&self, p: Point) -> (f64, f64) {
        let (u, d) = self.nearest_local(self.to_local(p));
        (self.global_param(u), d)
    }

    fn nearest_local(&self, q: Point) -> (f64, f64) {
        if let Shape::Circle { center, radius } = &self.shape {
            let v = q - center;
            let u = if v.norm() > 0.0 { v.arg().rem_euclid(TAU) * radius } else { 0.0 };
            return (u, (v.norm() - radius).abs());
        }
        if self.pieces.len() > 1 {
            let mut best = (0.0, f64::INFINITY);
            for (i, piece) in self.pieces.iter().enumerate() {
                let (u, d) = nearest_on_piece(piece, q);
                if d < best.1 {
                    best = (self.starts[i] + u, d);
                }
            }
            return best;
        }
        // smooth loop: polyline seeds, then Newton on (γ(s) - q)·τ(s) = 0.
        // Every discrete local minimum within the chord error of the best one
        // is refined, since near-ties can swap after refinement.
        let n = self.poly.len();
        let d2: Vec<f64> = self.poly.iter().map(|p| (p - q).norm_sqr()).collect();
        let dmin = d2.iter().copied().fold(f64::INFINITY, f64::min).sqrt();
        let total = self.local_length();
        let h = total / POLY as f64;
        let margin = (1.0 + self.curvature_bound * (dmin + h)) * h * h + 1e-12;
        let mut best = (0.0, f64::INFINITY);
        for j in 0..n {
            let (prev, next) = (d2[(j + n - 1) % n], d2[(j + 1) % n]);
            if d2[j] > prev || d2[j] > next || d2[j].sqrt() > dmin + margin {
                continue;
            }
            let (u, d) = self.refine_nearest(q, self.poly_s[j], h);
            if d < best.1 {
                best = (u, d);
            }
        }
        best
    }

    fn refine_nearest(&self, q: Point, seed: f64, h: f64) -> (f64, f64) {
        let total = self.local_length();
        let mut u = seed;
        let (lo, hi) = (u - h, u + h);
        for _ in 0..30 {
            let (p, t, k) = self.eval_local(u.rem_euclid(total));
            let r = p - q;
            let g = dot(r, t);
            // d/ds (r·τ) = 1 + κ (r · iτ)
            let gp = 1.0 + k * dot(r, I * t);
            let step = if gp > 1e-3 { g / gp } else { g };
            u = (u - step).clamp(lo, hi);
            if step.abs() < 1e-14 {
                break;
            }
        }
        let u = u.rem_euclid(total);
        (u, (self.eval_local(u).0 - q).norm())
    }

    fn winding_local(&self, q: Point) -> i32 {
        let poly = &self.poly;
        let n = poly.len();
        let mut w = 0;
        for i in 0..n {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            if a.im <= q.im {
                if b.im > q.im && cross(b - a, q - a) > 0.0 {
                    w += 1;
                }
            } else if b.im <= q.im && cross(b - a, q - a) < 0.0 {
                w -= 1;
            }
        }
        w
    }

    fn polyline_is_simple(&self) -> bool {
        // coarse check on a decimated polyline
        let step = 8;
        let pts: Vec<Point> = self.poly.iter().step_by(step).copied().collect();
        let n = pts.len();
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = (pts[j], pts[(j + 1) % n]);
                if segments_cross(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    /// Intersections of the segment `a + t (b - a)`, `t ∈ [0, 1]`, with the
    /// curve, as `(t, s)` pairs sorted by `t`.
    pub fn intersect_segment(&self, a: Point, b: Point) -> Vec<(f64, f64)> {
        let (la, lb) = (self.to_local(a), self.to_local(b));
        let mut out = Vec::new();
        self.hits_local(la, lb - la, 0.0, 1.0, &mut |t, u| out.push((t, u)));
        let mut out: Vec<(f64, f64)> = out.into_iter().map(|(t, u)| (t, self.global_param(u))).collect();
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        out
    }

    /// First crossing of the ray `p + t d` with `t > t_min`: `(t, s, point)`.
    /// `d` need not be normalized; `t` is in units of `|d|`.
    pub fn ray_exit(&self, p: Point, d: Point, t_min: f64) -> Option<(f64, f64, Point)> {
        let lp = self.to_local(p);
        let ld = d * self.rot.conj();
        let reach = 4.0 * TAU / d.norm();
        let mut best: Option<(f64, f64)> = None;
        self.hits_local(lp, ld, t_min, reach, &mut |t, u| {
            if t > t_min && best.map_or(true, |(bt, _)| t < bt) {
                best = Some((t, u));
            }
        });
        best.map(|(t, u)| (t, self.global_param(u), p + d * t))
    }

    fn hits_local(&self, a: Point, d: Point, t_lo: f64, t_hi: f64, sink: &mut dyn FnMut(f64, f64)) {
        for (i, piece) in self.pieces.iter().enumerate() {
            let s0 = self.starts[i];
            match piece {
                Piece::Segment { start, dir, len } => {
                    let den = cross(d, *dir);
                    if den.abs() < 1e-300 {
                        continue;
                    }
                    let w = start - a;
                    let t = cross(w, *dir) / den;
                    let u = cross(w, d) / den;
                    if t >= t_lo && t <= t_hi && u >= 0.0 && u <= *len {
                        sink(t, s0 + u);
                    }
                }
                Piece::Arc {
                    center,
                    radius,
                    theta0,
                    len,
                } => {
                    let w = a - center;
                    let qa = d.norm_sqr();
                    let qb = dot(w, d);
                    let qc = w.norm_sqr() - radius * radius;
                    let disc = qb * qb - qa * qc;
                    if disc < 0.0 {
                        continue;
                    }
                    let sq = disc.sqrt();
                    // stable roots
                    let sgn = if qb >= 0.0 { 1.0 } else { -1.0 };
                    let q = -(qb + sgn * sq);
                    let roots = if q != 0.0 { [q / qa, qc / q] } else { [0.0, 0.0] };
                    let span = len / radius;
                    for (k, &t) in roots.iter().enumerate() {
                        if k == 1 && disc == 0.0 {
                            break;
                        }
                        if t < t_lo || t > t_hi {
                            continue;
                        }
                        let v = w + d * t;
                        let ang = (v.arg() - theta0).rem_euclid(TAU);
                        if ang <= span || ang >= TAU - 1e-14 {
                            let ang = if ang >= TAU - 1e-14 { 0.0 } else { ang };
                            sink(t, s0 + ang * radius);
                        }
                    }
                }
                Piece::Smooth { lp } => {
                    self.smooth_hits(lp, a, d, t_lo, t_hi, sink);
                }
            }
        }
    }

    fn smooth_hits(
        &self,
        lp: &SmoothLoop,
        a: Point,
        d: Point,
        t_lo: f64,
        t_hi: f64,
        sink: &mut dyn FnMut(f64, f64),
    ) {
        let poly = &lp.polyline;
        let n = poly.len();
        let len = lp.length();
        let h = len / n as f64;
        let side = |p: Point| cross(d, p - a);
        let mut prev = side(poly[0]);
        for j in 0..n {
            let next_p = poly[(j + 1) % n];
            let cur = side(next_p);
            if (prev <= 0.0) != (cur <= 0.0) {
                // bracket [j h, (j+1) h] in s for the sign of side(γ(s))
                let f = |s: f64| side(lp.eval_s(s).0);
                let (mut lo, mut hi) = (j as f64 * h, (j + 1) as f64 * h);
                let mut flo = prev;
                let mut s = lo + (hi - lo) * prev / (prev - cur);
                for _ in 0..60 {
                    let fs = f(s);
                    if fs == 0.0 {
                        break;
                    }
                    if (fs <= 0.0) == (flo <= 0.0) {
                        lo = s;
                        flo = fs;
                    } else {
                        hi = s;
                    }
                    // Newton step, guarded by the bracket
                    let (_, t, _) = lp.eval_s(s);
                    let der = cross(d, t);
                    let ns = if der != 0.0 { s - fs / der } else { f64::NAN };
                    s = if ns > lo && ns < hi { ns } else { 0.5 * (lo + hi) };
                    if hi - lo < 1e-15 {
                        break;
                    }
                }
                let p = lp.eval_s(s).0;
                let t = dot(p - a, d) / d.norm_sqr();
                if t >= t_lo && t <= t_hi {
                    sink(t, s.rem_euclid(len));
                }
            }
            prev = cur;
        }
    }

    /// Closed polyline of `n` points in global coordinates.
    pub fn polyline(&self, n: usize) -> Vec<Point> {
        (0..n).map(|j| self.point(TAU * j as f64 / n as f64)).collect()
    }

    /// Exact shape parameters for the rounded `N`-gon, if applicable.
    pub fn ngon_params(&self) -> Option<(usize, f64)> {
        match self.shape {
            Shape::Ngon { n, lambda } => Some((n, lambda)),
            _ => None,
        }
    }

    pub fn ellipse_axes(&self) -> Option<(f64, f64)> {
        match self.shape {
            Shape::Ellipse { a, b } => Some((a, b)),
            _ => None,
        }
    }

    /// Rigid placement `(rotation, translation)` applied to the canonical curve.
    pub fn placement(&self) -> (Point, Point) {
        (self.rot, self.shift)
    }
}

/// `λ_N = 2π / (π + N sin(π/N))`.
pub fn ngon_lambda(n: usize) -> f64 {
    let nf = n as f64;
    TAU / (PI + nf * (PI / nf).sin())
}

/// Signed distance to the regular `N`-gon with vertices `λ/2 · e^{2πik/N}`.
pub(crate) fn polygon_signed_distance(n: usize, lambda: f64, q: Point) -> f64 {
    let half = PI / n as f64;
    let apothem = 0.5 * lambda * half.cos();
    let sector = TAU / n as f64;
    let k = (q.arg().rem_euclid(TAU) / sector).floor() as usize % n;
    let th = sector * k as f64;
    let nk = unit(th + half);
    let h = dot(q, nk) - apothem;
    if h <= 0.0 {
        // the triangle (0, c_k, c_{k+1}) is the Voronoi cell of side k
        return h;
    }
    let c0 = unit(th) * (0.5 * lambda);
    let c1 = unit(th + sector) * (0.5 * lambda);
    let mut best = point_segment_distance(q, c0, c1);
    // neighbouring sides can only matter near the vertices
    let cm = unit(th - sector) * (0.5 * lambda);
    let c2 = unit(th + 2.0 * sector) * (0.5 * lambda);
    best = best.min(point_segment_distance(q, cm, c0));
    best = best.min(point_segment_distance(q, c1, c2));
    best
}

pub(crate) fn point_segment_distance(q: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let t = (dot(q - a, ab) / ab.norm_sqr()).clamp(0.0, 1.0);
    (q - (a + ab * t)).norm()
}

fn nearest_on_piece(piece: &Piece, q: Point) -> (f64, f64) {
    match piece {
        Piece::Segment { start, dir, len } => {
            let u = dot(q - start, *dir).clamp(0.0, *len);
            (u, (start + dir * u - q).norm())
        }
        Piece::Arc {
            center,
            radius,
            theta0,
            len,
        } => {
            let v = q - center;
            let span = len / radius;
            let ang = (v.arg() - theta0).rem_euclid(TAU);
            if ang <= span {
                return (ang * radius, (v.norm() - radius).abs());
            }
            let e0 = center + unit(*theta0) * *radius;
            let e1 = center + unit(theta0 + span) * *radius;
            let (d0, d1) = ((q - e0).norm(), (q - e1).norm());
            if d0 <= d1 {
                (0.0, d0)
            } else {
                (*len, d1)
            }
        }
        Piece::Smooth { .. } => unreachable!("smooth pieces are handled at loop level"),
    }
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 * d2 < 0.0 && d3 * d4 < 0.0
}
