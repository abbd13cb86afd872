//! Both sides of the stability estimates and the sharpness sweeps.

use std::f64::consts::TAU;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fields::{best_vortex_fit, UnitField};
use crate::geometry::{
    best_circle_center, hausdorff_to_circle, is_star_shaped, BoundaryCurve, CenterObjective, Point,
};
use crate::kinetic::{nu_total, CostKind};
use crate::numerics::{loglog_fit, LogLogFit};
use crate::report::Series;

const PANEL: f64 = TAU / 256.0;

/// Grid used for the L⁴ vortex fit.
pub const L4_GRID: usize = 256;

fn outward(t: Point) -> Point {
    Point::new(t.im, -t.re)
}

fn check_center(curve: &BoundaryCurve, center: Point) -> Result<()> {
    if curve.distance_to_boundary(center) < 1e-9 {
        return Err(invalid("center lies on the boundary"));
    }
    Ok(())
}

/// `∫ |n(x) - (x - c)/|x - c||² dH¹(x)`.
pub fn normal_deviation(curve: &BoundaryCurve, center: Point) -> Result<f64> {
    check_center(curve, center)?;
    Ok(curve.integrate(PANEL, |_, p, t, _| {
        let v = p - center;
        (outward(t) - v / v.norm()).norm_sqr()
    }))
}

/// `∫ |n(x) - (x - c)/|x - c|| dH¹(x)`.
pub fn normal_deviation_l1(curve: &BoundaryCurve, center: Point) -> Result<f64> {
    check_center(curve, center)?;
    Ok(curve.integrate(PANEL, |_, p, t, _| {
        let v = p - center;
        (outward(t) - v / v.norm()).norm()
    }))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AuxCheck {
    /// Hausdorff distance to the unit circle about the center.
    pub lhs: f64,
    /// `∫ |n - n_*|`.
    pub rhs: f64,
    pub pass: bool,
}

/// Distance to the unit circle against the L¹ normal deviation, for curves
/// strictly star-shaped about `center`.
pub fn lemma_aux_check(curve: &BoundaryCurve, center: Point) -> Result<AuxCheck> {
    if !is_star_shaped(curve, center) {
        return Err(Error::Precondition(format!(
            "curve is not strictly star-shaped about ({}, {})",
            center.re, center.im
        )));
    }
    let lhs = hausdorff_to_circle(curve, center).distance;
    let rhs = normal_deviation_l1(curve, center)?;
    Ok(AuxCheck {
        lhs,
        rhs,
        pass: lhs <= rhs + 1e-8,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CauchySchwarz {
    pub l1: f64,
    pub l2_sq: f64,
    /// `(∫|n-n_*|)² - 2π ∫|n-n_*|²`, non-positive when the chain holds.
    pub margin: f64,
    pub holds: bool,
}

pub fn cauchy_schwarz_chain(curve: &BoundaryCurve, center: Point) -> Result<CauchySchwarz> {
    let l1 = normal_deviation_l1(curve, center)?;
    let l2_sq = normal_deviation(curve, center)?;
    let margin = l1 * l1 - curve.length() * l2_sq;
    Ok(CauchySchwarz {
        l1,
        l2_sq,
        margin,
        holds: margin <= 1e-12 * (1.0 + l1 * l1),
    })
}

/// Ratios against the dissipation; `None` when `ν = 0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Ratios {
    pub lhs_over_nu: Option<f64>,
    pub hausdorff_over_sqrt_nu: Option<f64>,
    pub l4_over_nu_2_3: Option<f64>,
}

impl Ratios {
    fn new(lhs: f64, hausdorff: f64, l4: f64, nu: f64) -> Self {
        let r = |num: f64, den: f64| (nu > 0.0).then(|| num / den);
        Ratios {
            lhs_over_nu: r(lhs, nu),
            hausdorff_over_sqrt_nu: r(hausdorff, nu.sqrt()),
            l4_over_nu_2_3: r(l4, nu.powf(2.0 / 3.0)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub curve: String,
    pub lhs_normal_dev: f64,
    pub best_center: [f64; 2],
    pub hausdorff: f64,
    pub nu_ars: f64,
    pub nu_cubic: f64,
    pub l4_deviation: f64,
    pub vortex_alpha: f64,
    pub vortex_center: [f64; 2],
    /// Ratios against `ν_ars`.
    pub ratios: Ratios,
    pub cauchy_schwarz: CauchySchwarz,
}

fn curve_label(curve: &BoundaryCurve) -> String {
    if let Some((n, _)) = curve.ngon_params() {
        format!("rounded_ngon:{n}")
    } else if let Some((a, b)) = curve.ellipse_axes() {
        format!("ellipse:{:.6}", a / b)
    } else {
        curve.kind().name().to_string()
    }
}

pub fn check_main2(curve: &BoundaryCurve, field: &UnitField) -> Result<StabilityReport> {
    let center = best_circle_center(curve, CenterObjective::NormalDeviation);
    let lhs = normal_deviation(curve, center)?;
    let hausdorff = hausdorff_to_circle(curve, center).distance;
    let nu_ars = nu_total(field, CostKind::ArsWall)?.nu_total;
    let nu_cubic = nu_total(field, CostKind::Cubic)?.nu_total;
    let fit = best_vortex_fit(field, L4_GRID)?;
    Ok(StabilityReport {
        curve: curve_label(curve),
        lhs_normal_dev: lhs,
        best_center: [center.re, center.im],
        hausdorff,
        nu_ars,
        nu_cubic,
        l4_deviation: fit.deviation,
        vortex_alpha: fit.alpha,
        vortex_center: [fit.center.re, fit.center.im],
        ratios: Ratios::new(lhs, hausdorff, fit.deviation, nu_ars),
        cauchy_schwarz: cauchy_schwarz_chain(curve, center)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub lhs_normal_dev: f64,
    pub nu: f64,
    pub n2_lhs: f64,
    pub n2_nu: f64,
    pub lhs_over_nu: f64,
    pub hausdorff: f64,
    pub hausdorff_over_sqrt_nu: f64,
    pub l4_deviation: f64,
    pub l4_over_nu_2_3: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSlopes {
    pub lhs: LogLogFit,
    pub nu: LogLogFit,
    pub hausdorff: LogLogFit,
    pub sqrt_nu: LogLogFit,
    pub l4: LogLogFit,
    pub nu_2_3: LogLogFit,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub cost_kind: CostKind,
    pub rows: Vec<SweepRow>,
    /// Fits use the rows with `n >= FIT_MIN_N`; `None` with fewer than two.
    pub slopes: Option<SweepSlopes>,
    pub max_lhs_over_nu: f64,
    pub max_hausdorff_over_sqrt_nu: f64,
    pub max_l4_over_nu_2_3: f64,
}

/// Smallest N entering the slope fits.
pub const FIT_MIN_N: usize = 8;

pub const CSV_HEADER: &str = "n,lhs_normal_dev,nu,n2_lhs,n2_nu,lhs_over_nu,hausdorff,hausdorff_over_sqrt_nu,l4_deviation,l4_over_nu_2_3";

impl SweepTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                r.n,
                r.lhs_normal_dev,
                r.nu,
                r.n2_lhs,
                r.n2_nu,
                r.lhs_over_nu,
                r.hausdorff,
                r.hausdorff_over_sqrt_nu,
                r.l4_deviation,
                r.l4_over_nu_2_3
            )?;
        }
        Ok(())
    }

    /// Log-log series for plotting; each is also a CSV column.
    pub fn series(&self) -> Vec<Series> {
        let xs: Vec<f64> = self.rows.iter().map(|r| r.n as f64).collect();
        let col = |label: &str, f: fn(&SweepRow) -> f64| Series {
            label: label.to_string(),
            xs: xs.clone(),
            ys: self.rows.iter().map(f).collect(),
        };
        vec![
            col("lhs_normal_dev", |r| r.lhs_normal_dev),
            col("nu", |r| r.nu),
            col("hausdorff", |r| r.hausdorff),
            col("l4_deviation", |r| r.l4_deviation),
        ]
    }
}

/// Stability quantities on `Ω_N` for each `N`, with log-log slopes.
pub fn sharpness_sweep(ns: &[usize], cost_kind: CostKind) -> Result<SweepTable> {
    if let Some(&n) = ns.iter().find(|&&n| n < 3) {
        return Err(invalid(format!("N must be >= 3, got {n}")));
    }
    let rows = ns
        .par_iter()
        .map(|&n| {
            let curve = BoundaryCurve::rounded_ngon(n)?;
            let field = UnitField::distgrad(&curve)?;
            let rep = check_main2(&curve, &field)?;
            let nu = match cost_kind {
                CostKind::ArsWall => rep.nu_ars,
                CostKind::Cubic => rep.nu_cubic,
            };
            let n2 = (n * n) as f64;
            Ok(SweepRow {
                n,
                lhs_normal_dev: rep.lhs_normal_dev,
                nu,
                n2_lhs: n2 * rep.lhs_normal_dev,
                n2_nu: n2 * nu,
                lhs_over_nu: rep.lhs_normal_dev / nu,
                hausdorff: rep.hausdorff,
                hausdorff_over_sqrt_nu: rep.hausdorff / nu.sqrt(),
                l4_deviation: rep.l4_deviation,
                l4_over_nu_2_3: rep.l4_deviation / nu.powf(2.0 / 3.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let fit_rows: Vec<&SweepRow> = rows.iter().filter(|r| r.n >= FIT_MIN_N).collect();
    let xs: Vec<f64> = fit_rows.iter().map(|r| r.n as f64).collect();
    let fit = |f: fn(&SweepRow) -> f64| {
        let ys: Vec<f64> = fit_rows.iter().map(|r| f(r)).collect();
        loglog_fit(&xs, &ys)
    };
    let slopes = (|| {
        Some(SweepSlopes {
            lhs: fit(|r| r.lhs_normal_dev)?,
            nu: fit(|r| r.nu)?,
            hausdorff: fit(|r| r.hausdorff)?,
            sqrt_nu: fit(|r| r.nu.sqrt())?,
            l4: fit(|r| r.l4_deviation)?,
            nu_2_3: fit(|r| r.nu.powf(2.0 / 3.0))?,
        })
    })();
    let max = |f: fn(&SweepRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    Ok(SweepTable {
        cost_kind,
        slopes,
        max_lhs_over_nu: max(|r| r.lhs_over_nu),
        max_hausdorff_over_sqrt_nu: max(|r| r.hausdorff_over_sqrt_nu),
        max_l4_over_nu_2_3: max(|r| r.l4_over_nu_2_3),
        rows,
    })
}
