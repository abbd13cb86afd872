//! Boundary curves of simply connected planar domains and the geometric
//! quantities built on them.
//!
//! Points are complex numbers (`ℝ² ≅ ℂ`), so that multiplication by `i` is
//! the quarter turn used throughout: `n = -iτ` is the outward normal.

pub mod curve;
pub mod region;
mod smooth;
pub mod spec;

use num_complex::Complex64;

pub use curve::{ngon_lambda, BoundaryCurve, CurveKind, CurveSample};
pub use region::{
    best_circle_center, geom1_check, hausdorff_to_circle, is_star_shaped, max_inscribed_disk,
    segment_clearance,
    segment_lemma_check, star_region, CenterObjective, Disk, Geom1Report, Hausdorff,
    HausdorffMethod, SegmentLemmaReport, StarRegion,
};
pub use spec::CurveSpec;

pub type Point = Complex64;

pub const I: Point = Complex64::new(0.0, 1.0);

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a.re * b.re + a.im * b.im
}

/// `a ∧ b`.
#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a.re * b.im - a.im * b.re
}

/// `e^{iθ}`.
#[inline]
pub fn unit(theta: f64) -> Point {
    let (s, c) = theta.sin_cos();
    Point::new(c, s)
}

/// Inradius of the rounded `N`-gon, `λ_N (1 + cos(π/N)) / 2`.
pub fn ngon_inradius(n: usize) -> f64 {
    let l = ngon_lambda(n);
    0.5 * l * (1.0 + (std::f64::consts::PI / n as f64).cos())
}

#[cfg(test)]
mod tests;
