//! Exact unit-length divergence-free fields: vortices and the distance
//! gradient field `m = i∇dist(·, ∂Ω_N)` of the rounded polygon.
//!
//! The polygon field is built from `N` strips where `m` is constant and
//! parallel to a flat side, and `N` vortex patches around the arc centers.
//! Its jump set is the union of the segments from the origin to the arc
//! centers.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{cross, dot, unit, BoundaryCurve, CurveKind, Point, I};
use crate::numerics::{minimize, quadrature::composite, GaussLegendre, NelderMeadOptions};

/// Points closer than this to a jump segment count as on it.
pub const JUMP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct JumpSegment {
    pub a: Point,
    pub b: Point,
    /// Direction of `b - a`.
    pub theta: f64,
    /// Trace on the left of the oriented segment.
    pub m_minus: Point,
    /// Trace on the right.
    pub m_plus: Point,
    pub amplitude: f64,
    pub half_angle: f64,
}

impl JumpSegment {
    pub fn new(a: Point, b: Point, m_minus: Point, m_plus: Point) -> Self {
        let amplitude = (m_plus - m_minus).norm();
        Self {
            a,
            b,
            theta: (b - a).arg(),
            m_minus,
            m_plus,
            amplitude,
            half_angle: (0.5 * amplitude).min(1.0).asin(),
        }
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn tangent(&self) -> Point {
        unit(self.theta)
    }

    /// Unit normal pointing to the right side (`m_plus`).
    pub fn normal(&self) -> Point {
        -I * self.tangent()
    }

    pub fn distance(&self, p: Point) -> f64 {
        crate::geometry::curve::point_segment_distance(p, self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Vortex,
    Strip(usize),
    Patch(usize),
}

impl Region {
    pub fn id(self) -> i64 {
        match self {
            Region::Vortex => -1,
            Region::Strip(k) => k as i64,
            Region::Patch(k) => -(k as i64) - 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldKind {
    Vortex { center: Point, alpha: f64 },
    DistGrad { n: usize, lambda: f64 },
}

#[derive(Debug, Clone)]
pub struct UnitField {
    curve: BoundaryCurve,
    kind: FieldKind,
    jumps: Vec<JumpSegment>,
    /// Segments across which `m` is continuous but not smooth.
    interfaces: Vec<(Point, Point)>,
}

impl UnitField {
    /// `m(x) = α i (x - c)/|x - c|`.
    pub fn vortex(curve: &BoundaryCurve, center: Point, alpha: f64) -> Result<Self> {
        if alpha != 1.0 && alpha != -1.0 {
            return Err(invalid(format!("alpha must be +1 or -1, got {alpha}")));
        }
        if !curve.contains(center) {
            return Err(invalid(format!(
                "vortex center ({}, {}) is not inside the domain",
                center.re, center.im
            )));
        }
        Ok(Self {
            curve: curve.clone(),
            kind: FieldKind::Vortex { center, alpha },
            jumps: Vec::new(),
            interfaces: Vec::new(),
        })
    }

    /// `m_N = i∇dist(·, ∂Ω_N)` on a rounded polygon.
    pub fn distgrad(curve: &BoundaryCurve) -> Result<Self> {
        if curve.kind() != CurveKind::RoundedNgon {
            return Err(invalid(format!(
                "distgrad field needs a rounded_ngon curve, got {}",
                curve.kind().name()
            )));
        }
        let (n, lambda) = curve.ngon_params().unwrap();
        let (rot, shift) = curve.placement();
        let g = |p: Point| rot * p + shift;
        let half = PI / n as f64;
        let rho = 0.5 * lambda;
        let mut jumps = Vec::with_capacity(n);
        let mut interfaces = Vec::with_capacity(2 * n);
        for k in 0..n {
            let th = TAU * k as f64 / n as f64;
            let ck = unit(th) * rho;
            let left = -I * unit(th + half);
            let right = -I * unit(th - half);
            jumps.push(JumpSegment::new(g(Point::new(0.0, 0.0)), g(ck), rot * left, rot * right));
            interfaces.push((g(ck), g(ck + unit(th + half) * rho)));
            interfaces.push((g(ck), g(ck + unit(th - half) * rho)));
        }
        Ok(Self {
            curve: curve.clone(),
            kind: FieldKind::DistGrad { n, lambda },
            jumps,
            interfaces,
        })
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn curve(&self) -> &BoundaryCurve {
        &self.curve
    }

    pub fn jumps(&self) -> &[JumpSegment] {
        &self.jumps
    }

    pub fn interfaces(&self) -> &[(Point, Point)] {
        &self.interfaces
    }

    fn on_singular_set(&self, x: Point) -> bool {
        match self.kind {
            FieldKind::Vortex { center, .. } => (x - center).norm() <= JUMP_TOL,
            FieldKind::DistGrad { .. } => self.jumps.iter().any(|j| j.distance(x) <= JUMP_TOL),
        }
    }

    /// Value at an interior point off the jump set.
    pub fn eval(&self, x: Point) -> Result<Point> {
        self.eval_with_region(x).map(|(m, _)| m)
    }

    pub fn region(&self, x: Point) -> Result<Region> {
        self.eval_with_region(x).map(|(_, r)| r)
    }

    pub fn eval_with_region(&self, x: Point) -> Result<(Point, Region)> {
        if !self.curve.contains(x) {
            return Err(Error::OutsideDomain { x: x.re, y: x.im });
        }
        if self.on_singular_set(x) {
            return Err(Error::OnJumpSet { x: x.re, y: x.im });
        }
        Ok(self.closure(x))
    }

    /// Evaluates the analytic closures anywhere in the plane (the polygon
    /// field extends as `i∇` of the signed distance). On the jump set the
    /// left trace is returned; at a vortex center the zero vector.
    #[inline]
    pub fn eval_extended(&self, x: Point) -> Point {
        self.closure(x).0
    }

    #[inline]
    fn closure(&self, x: Point) -> (Point, Region) {
        match self.kind {
            FieldKind::Vortex { center, alpha } => {
                let v = x - center;
                let r = v.norm();
                if r == 0.0 {
                    (Point::new(0.0, 0.0), Region::Vortex)
                } else {
                    (I * v * (alpha / r), Region::Vortex)
                }
            }
            FieldKind::DistGrad { n, lambda } => {
                let (rot, shift) = self.curve.placement();
                let q = (x - shift) * rot.conj();
                let (m, r) = distgrad_local(n, lambda, q);
                (rot * m, r)
            }
        }
    }

    /// Sign of `m·τ` along the boundary at arc length `s`.
    pub fn boundary_trace(&self, s: f64) -> f64 {
        let (p, t, _) = self.curve.frame(s);
        dot(self.eval_extended(p), t).signum()
    }

    /// `∮ m·ν` over the circle `∂B_r(c)`, split at every crossing with the
    /// jump set and the smoothness interfaces.
    pub fn flux_through_circle(&self, c: Point, r: f64) -> f64 {
        let mut breaks: Vec<f64> = Vec::new();
        let segs = self
            .jumps
            .iter()
            .map(|j| (j.a, j.b))
            .chain(self.interfaces.iter().copied());
        for (a, b) in segs {
            for phi in circle_segment_angles(c, r, a, b) {
                breaks.push(phi);
            }
        }
        breaks.sort_by(f64::total_cmp);
        composite(0.0, TAU, &breaks, TAU / 64.0, GaussLegendre::g16(), |phi| {
            let e = unit(phi);
            dot(self.eval_extended(c + e * r), e) * r
        })
    }

    /// Raster dump `x,y,m1,m2,region` of interior grid points.
    pub fn write_raster_csv<W: Write>(&self, n: usize, mut w: W) -> Result<()> {
        let [x0, x1, y0, y1] = self.curve.bbox();
        writeln!(w, "x,y,m1,m2,region")?;
        for j in 0..n {
            for i in 0..n {
                let p = Point::new(
                    x0 + (x1 - x0) * (i as f64 + 0.5) / n as f64,
                    y0 + (y1 - y0) * (j as f64 + 0.5) / n as f64,
                );
                if let Ok((m, r)) = self.eval_with_region(p) {
                    writeln!(w, "{},{},{},{},{}", p.re, p.im, m.re, m.im, r.id())?;
                }
            }
        }
        Ok(())
    }

    pub fn write_jumps_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "ax,ay,bx,by,amplitude,half_angle")?;
        for j in &self.jumps {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                j.a.re, j.a.im, j.b.re, j.b.im, j.amplitude, j.half_angle
            )?;
        }
        Ok(())
    }
}

/// Polygon field in its canonical frame.
#[inline]
fn distgrad_local(n: usize, lambda: f64, q: Point) -> (Point, Region) {
    let half = PI / n as f64;
    let sector = TAU / n as f64;
    let k = ((q.arg().rem_euclid(TAU) / sector).floor() as usize) % n;
    let th = sector * k as f64;
    let nk = unit(th + half);
    let apothem = 0.5 * lambda * half.cos();
    if dot(q, nk) <= apothem {
        return (-I * nk, Region::Strip(k));
    }
    let ck = unit(th) * (0.5 * lambda);
    let u = dot(q - ck, I * nk);
    let side = lambda * half.sin();
    let patch = if u < 0.0 {
        k
    } else if u > side {
        (k + 1) % n
    } else {
        return (-I * nk, Region::Strip(k));
    };
    let c = unit(sector * patch as f64) * (0.5 * lambda);
    let v = q - c;
    (-I * v / v.norm(), Region::Patch(patch))
}

/// Polar angles (about `c`) where the circle `∂B_r(c)` meets segment `[a, b]`.
fn circle_segment_angles(c: Point, r: f64, a: Point, b: Point) -> Vec<f64> {
    let d = b - a;
    let w = a - c;
    let qa = d.norm_sqr();
    let qb = dot(w, d);
    let qc = w.norm_sqr() - r * r;
    let disc = qb * qb - qa * qc;
    if disc < 0.0 || qa == 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    [(-qb - sq) / qa, (-qb + sq) / qa]
        .into_iter()
        .filter(|t| (0.0..=1.0).contains(t))
        .map(|t| (w + d * t).arg().rem_euclid(TAU))
        .collect()
}

pub fn vortex_value(x: Point, center: Point, alpha: f64) -> Point {
    let v = x - center;
    I * v * (alpha / v.norm())
}

/// Interior midpoint cells of an `n × n` grid over the bounding box, with
/// the field value at each: `(points, values, cell area)`.
pub fn interior_cells(field: &UnitField, n: usize) -> (Vec<Point>, Vec<Point>, f64) {
    let [x0, x1, y0, y1] = field.curve.bbox();
    let (hx, hy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
    let mut pts = Vec::new();
    let mut vals = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let p = Point::new(x0 + (i as f64 + 0.5) * hx, y0 + (j as f64 + 0.5) * hy);
            if field.curve.contains(p) {
                pts.push(p);
                vals.push(field.eval_extended(p));
            }
        }
    }
    (pts, vals, hx * hy)
}

/// `∫_Ω |m - α i (x-c)/|x-c||⁴ dx` by midpoint quadrature.
pub fn l4_vortex_deviation(field: &UnitField, center: Point, alpha: f64, grid_n: usize) -> Result<f64> {
    if grid_n < 64 {
        return Err(invalid(format!("grid_n must be >= 64, got {grid_n}")));
    }
    let (pts, vals, area) = interior_cells(field, grid_n);
    Ok(l4_on_cells(&pts, &vals, area, center, alpha))
}

fn l4_on_cells(pts: &[Point], vals: &[Point], area: f64, c: Point, alpha: f64) -> f64 {
    pts.iter()
        .zip(vals)
        .map(|(&p, &m)| {
            let v = p - c;
            let r = v.norm();
            if r == 0.0 {
                return 0.0;
            }
            (m - I * v * (alpha / r)).norm_sqr().powi(2)
        })
        .sum::<f64>()
        * area
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VortexFit {
    pub center: Point,
    pub alpha: f64,
    pub deviation: f64,
    /// Deviation of the other orientation at its own best center.
    pub deviation_flipped: f64,
}

/// Best vortex in the L⁴ sense: simplex search over the center for both
/// orientations, seeded at the inscribed-disk center.
pub fn best_vortex_fit(field: &UnitField, grid_n: usize) -> Result<VortexFit> {
    if grid_n < 64 {
        return Err(invalid(format!("grid_n must be >= 64, got {grid_n}")));
    }
    let (pts, vals, area) = interior_cells(field, grid_n);
    let seed = crate::geometry::max_inscribed_disk(&field.curve).center;
    let opts = NelderMeadOptions {
        initial_step: 0.05,
        f_tol: 1e-16,
        x_tol: 1e-9,
        max_evals: 600,
        restarts: 1,
    };
    let mut fits = Vec::new();
    for alpha in [1.0, -1.0] {
        let r = minimize(
            |v| l4_on_cells(&pts, &vals, area, Point::new(v[0], v[1]), alpha),
            &[seed.re, seed.im],
            &opts,
        );
        let at_seed = l4_on_cells(&pts, &vals, area, seed, alpha);
        let (c, f) = if r.f <= at_seed {
            (Point::new(r.x[0], r.x[1]), r.f)
        } else {
            (seed, at_seed)
        };
        fits.push((alpha, c, f));
    }
    let (best, other) = if fits[0].2 <= fits[1].2 {
        (fits[0], fits[1])
    } else {
        (fits[1], fits[0])
    };
    Ok(VortexFit {
        center: best.1,
        alpha: best.0,
        deviation: best.2,
        deviation_flipped: other.2,
    })
}

/// Rankine–Hugoniot defect `|m₋·n_J - m₊·n_J|`.
pub fn rankine_hugoniot_defect(j: &JumpSegment) -> f64 {
    let n = j.normal();
    (dot(j.m_minus, n) - dot(j.m_plus, n)).abs()
}

/// Orientation-independent check that the traces are unit vectors whose
/// difference is normal-free: `[m]·n_J = 0` and `[m] ∥ τ_J`.
pub fn jump_is_tangential(j: &JumpSegment) -> bool {
    cross(j.m_plus - j.m_minus, j.tangent()).abs() < 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn omega(n: usize) -> BoundaryCurve {
        BoundaryCurve::rounded_ngon(n).unwrap()
    }

    #[test]
    fn vortex_basics() {
        let c = BoundaryCurve::circle();
        let f = UnitField::vortex(&c, Point::new(0.0, 0.0), 1.0).unwrap();
        let m = f.eval(Point::new(0.5, 0.0)).unwrap();
        assert!((m - Point::new(0.0, 1.0)).norm() < 1e-15);
        assert!(f.flux_through_circle(Point::new(0.2, 0.0), 0.5).abs() < 1e-10);
        let g = UnitField::vortex(&c, Point::new(0.0, 0.0), -1.0).unwrap();
        for j in 0..64 {
            let s = TAU * j as f64 / 64.0;
            assert_eq!(g.boundary_trace(s), -1.0);
            assert_eq!(f.boundary_trace(s), 1.0);
        }
        assert!(UnitField::vortex(&c, Point::new(2.0, 0.0), 1.0).is_err());
        assert!(matches!(f.eval(Point::new(2.0, 0.0)), Err(Error::OutsideDomain { .. })));
        assert!(matches!(f.eval(Point::new(0.0, 0.0)), Err(Error::OnJumpSet { .. })));
        assert!(f.jumps().is_empty());
    }

    #[test]
    fn distgrad_structure() {
        let f = UnitField::distgrad(&omega(6)).unwrap();
        assert_eq!(f.jumps().len(), 6);
        for j in f.jumps() {
            assert!((j.amplitude - 1.0).abs() < 1e-12);
            assert!((j.amplitude - 2.0 * j.half_angle.sin()).abs() < 1e-12);
            assert!(rankine_hugoniot_defect(j) < 1e-15);
            assert!(jump_is_tangential(j));
        }
        assert!(UnitField::distgrad(&BoundaryCurve::circle()).is_err());
        // boundary trace is -τ
        for s in f.curve().samples(500) {
            let m = f.eval_extended(s.point());
            assert!((m + s.tangent()).norm() < 1e-12, "s={}", s.s);
        }
    }

    #[test]
    fn distgrad_matches_numerical_gradient_of_distance() {
        for n in [6, 8] {
            let c = omega(n);
            let f = UnitField::distgrad(&c).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let h = 1e-6;
            let mut checked = 0;
            while checked < 2000 {
                let p = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if !c.contains(p) || f.jumps().iter().any(|j| j.distance(p) < 1e-3) {
                    continue;
                }
                let d = |q: Point| -c.signed_distance(q);
                let grad = Point::new(
                    (d(p + Point::new(h, 0.0)) - d(p - Point::new(h, 0.0))) / (2.0 * h),
                    (d(p + Point::new(0.0, h)) - d(p - Point::new(0.0, h))) / (2.0 * h),
                );
                let m = f.eval(p).unwrap();
                assert!((m - I * grad).norm() < 1e-6, "{p}: {m} vs {}", I * grad);
                assert!((m.norm() - 1.0).abs() < 1e-14);
                checked += 1;
            }
        }
    }

    #[test]
    fn interfaces_are_continuous() {
        let f = UnitField::distgrad(&omega(8)).unwrap();
        for &(a, b) in f.interfaces() {
            for j in 1..20 {
                let p = a + (b - a) * (j as f64 / 20.0);
                let t = (b - a) / (b - a).norm();
                let off = I * t * 1e-13;
                let (m1, m2) = (f.eval_extended(p + off), f.eval_extended(p - off));
                assert!((m1 - m2).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn flux_vanishes_on_random_circles() {
        let c = omega(8);
        let f = UnitField::distgrad(&c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut done = 0;
        while done < 100 {
            let p = Point::new(rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9));
            let r = rng.gen_range(0.02..0.6);
            if c.signed_distance(p) > -r {
                continue;
            }
            let flux = f.flux_through_circle(p, r);
            assert!(flux.abs() <= 1e-8 * TAU * r, "{p} r={r}: {flux}");
            done += 1;
        }
    }

    #[test]
    fn regions_and_errors() {
        let c = omega(6);
        let f = UnitField::distgrad(&c).unwrap();
        // strip point near the middle of side 0
        let p = unit(PI / 6.0) * 0.6;
        let (m, r) = f.eval_with_region(p).unwrap();
        assert_eq!(r, Region::Strip(0));
        assert!((m - (-I * unit(PI / 6.0))).norm() < 1e-15);
        // near a vertex center, beyond the polygon
        let (_, lambda) = c.ngon_params().unwrap();
        let ck = Point::new(0.5 * lambda, 0.0);
        let p = ck + Point::new(0.3, 0.0);
        let (m, r) = f.eval_with_region(p).unwrap();
        assert_eq!(r, Region::Patch(0));
        assert!((m - (-I)).norm() < 1e-15);
        assert!(matches!(f.eval(Point::new(0.2, 0.0)), Err(Error::OnJumpSet { .. })));
        assert!(f.eval(Point::new(0.2, 1e-6)).is_ok());
        assert!(matches!(f.eval(Point::new(3.0, 0.0)), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn large_n_is_close_to_the_clockwise_vortex() {
        let n = 64;
        let c = omega(n);
        let f = UnitField::distgrad(&c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst: f64 = 0.0;
        let mut k = 0;
        while k < 5000 {
            let p = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if !c.contains(p) || f.jumps().iter().any(|j| j.distance(p) < 0.1) {
                continue;
            }
            let m = f.eval(p).unwrap();
            worst = worst.max((m - vortex_value(p, Point::new(0.0, 0.0), -1.0)).norm());
            k += 1;
        }
        assert!(worst * n as f64 <= 10.0, "C = {}", worst * n as f64);
    }

    #[test]
    fn l4_deviation() {
        let c = BoundaryCurve::circle();
        let f = UnitField::vortex(&c, Point::new(0.0, 0.0), 1.0).unwrap();
        assert!(l4_vortex_deviation(&f, Point::new(0.0, 0.0), 1.0, 128).unwrap() < 1e-10);
        let flipped = l4_vortex_deviation(&f, Point::new(0.0, 0.0), -1.0, 128).unwrap();
        assert!(flipped >= 1.0, "{flipped}");
        assert!(l4_vortex_deviation(&f, Point::new(0.0, 0.0), 1.0, 32).is_err());
        let g = UnitField::distgrad(&omega(8)).unwrap();
        let fit = best_vortex_fit(&g, 128).unwrap();
        assert_eq!(fit.alpha, -1.0);
        assert!(fit.center.norm() < 1e-3);
        assert!(fit.deviation_flipped > 1.0);
    }
}
