//! Smooth closed loops (ellipse, periodic cubic spline) with an exact
//! arc-length reparametrization.
//!
//! The cumulative length `S(u)` is integrated panel-wise with a 16-point
//! Gauss–Legendre rule; `u(s)` is seeded by cubic Hermite interpolation on a
//! table uniform in `s` and finished with Newton steps on `S(u) - s`.

use std::f64::consts::TAU;

use super::{cross, Point};
use crate::error::{invalid, Result};
use crate::numerics::GaussLegendre;

const PANELS: usize = 512;
const TABLE: usize = 4096;

#[derive(Debug, Clone)]
pub(crate) enum SmoothShape {
    Ellipse { a: f64, b: f64 },
    Spline(PeriodicSpline),
}

impl SmoothShape {
    fn period(&self) -> f64 {
        match self {
            SmoothShape::Ellipse { .. } => TAU,
            SmoothShape::Spline(sp) => sp.period(),
        }
    }

    /// Position, first and second derivative at parameter `u`.
    #[inline]
    fn eval(&self, u: f64) -> (Point, Point, Point) {
        match self {
            SmoothShape::Ellipse { a, b } => {
                let (s, c) = u.sin_cos();
                (
                    Point::new(a * c, b * s),
                    Point::new(-a * s, b * c),
                    Point::new(-a * c, -b * s),
                )
            }
            SmoothShape::Spline(sp) => sp.eval(u),
        }
    }

    fn scaled(&self, k: f64) -> Self {
        match self {
            SmoothShape::Ellipse { a, b } => SmoothShape::Ellipse { a: a * k, b: b * k },
            SmoothShape::Spline(sp) => SmoothShape::Spline(sp.scaled(k)),
        }
    }

    /// Parameter breakpoints where higher derivatives may jump.
    fn knots(&self) -> Vec<f64> {
        match self {
            SmoothShape::Ellipse { .. } => Vec::new(),
            SmoothShape::Spline(sp) => sp.knots[..sp.knots.len() - 1].to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SmoothLoop {
    pub(crate) shape: SmoothShape,
    length: f64,
    panel_u: Vec<f64>,
    panel_s: Vec<f64>,
    table_u: Vec<f64>,
    table_du: Vec<f64>,
    /// Points uniform in arc length, used to seed nearest-point and
    /// intersection searches.
    pub(crate) polyline: Vec<Point>,
}

impl SmoothLoop {
    /// Builds the loop and rescales it to length `2π`.
    pub(crate) fn normalized(shape: SmoothShape) -> Self {
        let raw = Self::build(shape);
        let k = TAU / raw.length;
        Self::build(raw.shape.scaled(k))
    }

    fn build(shape: SmoothShape) -> Self {
        let period = shape.period();
        let mut cuts: Vec<f64> = shape.knots();
        let sub = (PANELS / cuts.len().max(1)).max(2);
        if cuts.is_empty() {
            cuts.push(0.0);
        }
        cuts.push(period);
        let mut panel_u = Vec::new();
        for w in cuts.windows(2) {
            for k in 0..sub {
                panel_u.push(w[0] + (w[1] - w[0]) * k as f64 / sub as f64);
            }
        }
        panel_u.push(period);
        let rule = GaussLegendre::g16();
        let mut panel_s = vec![0.0; panel_u.len()];
        for i in 1..panel_u.len() {
            let seg = rule.integrate(panel_u[i - 1], panel_u[i], |u| shape.eval(u).1.norm());
            panel_s[i] = panel_s[i - 1] + seg;
        }
        let length = *panel_s.last().unwrap();
        let mut lp = SmoothLoop {
            shape,
            length,
            panel_u,
            panel_s,
            table_u: Vec::new(),
            table_du: Vec::new(),
            polyline: Vec::new(),
        };
        // table uniform in s, solved by bracketing panel + Newton
        let mut table_u = Vec::with_capacity(TABLE + 1);
        let mut table_du = Vec::with_capacity(TABLE + 1);
        let mut polyline = Vec::with_capacity(TABLE);
        for j in 0..=TABLE {
            let s = length * j as f64 / TABLE as f64;
            let u = lp.solve_u(s, None);
            let (p, d1, _) = lp.shape.eval(u);
            table_u.push(u);
            table_du.push(1.0 / d1.norm());
            if j < TABLE {
                polyline.push(p);
            }
        }
        lp.table_u = table_u;
        lp.table_du = table_du;
        lp.polyline = polyline;
        lp
    }

    pub(crate) fn length(&self) -> f64 {
        self.length
    }

    /// Cumulative arc length at parameter `u ∈ [0, period]`.
    fn arc_length(&self, u: f64) -> f64 {
        let i = match self.panel_u.binary_search_by(|p| p.total_cmp(&u)) {
            Ok(i) => return self.panel_s[i],
            Err(i) => i.saturating_sub(1).min(self.panel_u.len() - 2),
        };
        let u0 = self.panel_u[i];
        self.panel_s[i]
            + GaussLegendre::g16().integrate(u0, u, |v| self.shape.eval(v).1.norm())
    }

    fn solve_u(&self, s: f64, guess: Option<f64>) -> f64 {
        let period = self.shape.period();
        let mut u = match guess {
            Some(g) => g,
            None => {
                let i = match self.panel_s.binary_search_by(|p| p.total_cmp(&s)) {
                    Ok(i) => return self.panel_u[i],
                    Err(i) => i.saturating_sub(1).min(self.panel_s.len() - 2),
                };
                let f = (s - self.panel_s[i]) / (self.panel_s[i + 1] - self.panel_s[i]);
                self.panel_u[i] + f * (self.panel_u[i + 1] - self.panel_u[i])
            }
        };
        for _ in 0..8 {
            let r = self.arc_length(u.clamp(0.0, period)) - s;
            let du = r / self.shape.eval(u).1.norm();
            u -= du;
            if du.abs() < 1e-15 * period.max(1.0) {
                break;
            }
        }
        u.clamp(0.0, period)
    }

    /// Parameter `u` at arc length `s ∈ [0, length)`.
    pub(crate) fn u_of_s(&self, s: f64) -> f64 {
        let s = s.rem_euclid(self.length);
        let h = self.length / TABLE as f64;
        let j = ((s / h) as usize).min(TABLE - 1);
        let t = (s - j as f64 * h) / h;
        let (u0, u1) = (self.table_u[j], self.table_u[j + 1]);
        let (d0, d1) = (self.table_du[j] * h, self.table_du[j + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let guess = (2.0 * t3 - 3.0 * t2 + 1.0) * u0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * u1
            + (t3 - t2) * d1;
        self.solve_u(s, Some(guess))
    }

    /// Point, unit tangent and signed curvature at arc length `s`.
    #[inline]
    pub(crate) fn eval_s(&self, s: f64) -> (Point, Point, f64) {
        let u = self.u_of_s(s);
        let (p, d1, d2) = self.shape.eval(u);
        let speed = d1.norm();
        (p, d1 / speed, cross(d1, d2) / speed.powi(3))
    }

    /// Arc-length positions of the spline knots (empty for the ellipse).
    pub(crate) fn knot_arclengths(&self) -> Vec<f64> {
        self.shape
            .knots()
            .into_iter()
            .map(|u| self.arc_length(u))
            .filter(|&s| s > 0.0 && s < self.length)
            .collect()
    }

    pub(crate) fn max_abs_curvature(&self) -> f64 {
        let n = TABLE * 4;
        (0..n)
            .map(|j| self.eval_s(self.length * j as f64 / n as f64).2.abs())
            .fold(0.0, f64::max)
    }
}

/// Periodic cubic interpolating spline with chord-length knots.
#[derive(Debug, Clone)]
pub(crate) struct PeriodicSpline {
    pts: Vec<Point>,
    knots: Vec<f64>,
    m: Vec<Point>,
}

impl PeriodicSpline {
    pub(crate) fn through(points: &[Point]) -> Result<Self> {
        let mut pts: Vec<Point> = points.to_vec();
        if pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() < 1e-12 {
            pts.pop();
        }
        if pts.len() < 4 {
            return Err(invalid("spline needs at least 4 distinct points"));
        }
        // counterclockwise orientation
        let area2: f64 = (0..pts.len())
            .map(|i| cross(pts[i], pts[(i + 1) % pts.len()]))
            .sum();
        if area2 < 0.0 {
            pts.reverse();
        }
        let n = pts.len();
        let mut knots = Vec::with_capacity(n + 1);
        knots.push(0.0);
        for i in 0..n {
            let h = (pts[(i + 1) % n] - pts[i]).norm();
            if h < 1e-12 {
                return Err(invalid(format!("spline points {i} and {} coincide", (i + 1) % n)));
            }
            knots.push(knots[i] + h);
        }
        let h: Vec<f64> = (0..n).map(|i| knots[i + 1] - knots[i]).collect();
        // cyclic tridiagonal system for the second derivatives
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![Point::new(0.0, 0.0); n];
        for i in 0..n {
            let hp = h[(i + n - 1) % n];
            let hi = h[i];
            sub[i] = hp;
            diag[i] = 2.0 * (hp + hi);
            sup[i] = hi;
            let next = pts[(i + 1) % n];
            let prev = pts[(i + n - 1) % n];
            rhs[i] = ((next - pts[i]) / hi - (pts[i] - prev) / hp) * 6.0;
        }
        let rx: Vec<f64> = rhs.iter().map(|p| p.re).collect();
        let ry: Vec<f64> = rhs.iter().map(|p| p.im).collect();
        let mx = solve_cyclic(&sub, &diag, &sup, &rx);
        let my = solve_cyclic(&sub, &diag, &sup, &ry);
        let m = mx.into_iter().zip(my).map(|(a, b)| Point::new(a, b)).collect();
        Ok(Self { pts, knots, m })
    }

    fn period(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    fn scaled(&self, k: f64) -> Self {
        Self {
            pts: self.pts.iter().map(|p| p * k).collect(),
            knots: self.knots.iter().map(|u| u * k).collect(),
            m: self.m.iter().map(|p| p / k).collect(),
        }
    }

    fn eval(&self, u: f64) -> (Point, Point, Point) {
        let period = self.period();
        let u = u.rem_euclid(period);
        let n = self.pts.len();
        let i = match self.knots.binary_search_by(|k| k.total_cmp(&u)) {
            Ok(i) => i.min(n - 1),
            Err(i) => (i - 1).min(n - 1),
        };
        let (u0, u1) = (self.knots[i], self.knots[i + 1]);
        let h = u1 - u0;
        let (y0, y1) = (self.pts[i], self.pts[(i + 1) % n]);
        let (m0, m1) = (self.m[i], self.m[(i + 1) % n]);
        let a = u1 - u;
        let b = u - u0;
        let p = m0 * (a * a * a / (6.0 * h))
            + m1 * (b * b * b / (6.0 * h))
            + (y0 / h - m0 * (h / 6.0)) * a
            + (y1 / h - m1 * (h / 6.0)) * b;
        let d1 = -m0 * (a * a / (2.0 * h)) + m1 * (b * b / (2.0 * h)) - (y0 / h - m0 * (h / 6.0))
            + (y1 / h - m1 * (h / 6.0));
        let d2 = m0 * (a / h) + m1 * (b / h);
        (p, d1, d2)
    }
}

/// Solves a cyclic tridiagonal system (Sherman–Morrison on top of Thomas).
/// `sub[0]` is the top-right corner and `sup[n-1]` the bottom-left one.
fn solve_cyclic(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let alpha = sup[n - 1];
    let beta = sub[0];
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;
    let x = thomas(sub, &d, sup, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = thomas(sub, &d, sup, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

pub(crate) fn check_points(points: &[Point]) -> Result<()> {
    if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
        return Err(invalid("spline points must be finite"));
    }
    Ok(())
}
