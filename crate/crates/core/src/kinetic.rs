//! Entropies, jump entropy productions, wall costs and the dissipation `ν`.
//!
//! Entropies are vector maps `Φ` on the unit circle with
//! `dΦ(e^{iθ})/dθ = λ_Φ(θ) i e^{iθ}`. For a density `f` we use
//! `Φ_f(z) = ∫_{z·e^{is} > 0} f(s) e^{is} ds`, for which
//! `λ_{Φ_f}(θ) = f(θ + π/2) + f(θ - π/2)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fields::{JumpSegment, UnitField};
use crate::geometry::{dot, unit, Point};
use crate::numerics::{golden_max, quadrature::composite, GaussLegendre};

/// The half-wave profile: `π`-periodic, `g(s) = π/4 - |s - π/4|` on
/// `[-π/4, 3π/4]`.
pub fn half_wave_g(s: f64) -> f64 {
    let t = (s + FRAC_PI_4).rem_euclid(PI) - FRAC_PI_4;
    FRAC_PI_4 - (t - FRAC_PI_4).abs()
}

pub type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Entropy {
    /// `Σ₁(m) = (4/3)(m₂³, m₁³)`.
    Sigma1,
    /// `Σ₂(m) = (2/3)(-m₁³ - 3m₁m₂², m₂³ + 3m₂m₁²)`.
    Sigma2,
    /// `Φ_{f^σ}` with `f^σ(s) = g(s - σ)/2`.
    HalfWave { sigma: f64 },
    /// `Φ_f` for a general periodic density with known kinks.
    Density { f: Density, kinks: Vec<f64> },
}

impl std::fmt::Debug for Entropy {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Entropy::Sigma1 => write!(fm, "Sigma1"),
            Entropy::Sigma2 => write!(fm, "Sigma2"),
            Entropy::HalfWave { sigma } => write!(fm, "HalfWave({sigma})"),
            Entropy::Density { kinks, .. } => write!(fm, "Density(kinks={kinks:?})"),
        }
    }
}

impl Entropy {
    pub fn name(&self) -> String {
        match self {
            Entropy::Sigma1 => "sigma1".into(),
            Entropy::Sigma2 => "sigma2".into(),
            Entropy::HalfWave { sigma } => format!("half_wave({sigma})"),
            Entropy::Density { .. } => "phi_f".into(),
        }
    }

    pub fn eval(&self, z: Point) -> Result<Point> {
        check_unit(z)?;
        Ok(self.eval_unchecked(z))
    }

    fn eval_unchecked(&self, z: Point) -> Point {
        let (m1, m2) = (z.re, z.im);
        match self {
            Entropy::Sigma1 => Point::new(m2.powi(3), m1.powi(3)) * (4.0 / 3.0),
            Entropy::Sigma2 => {
                Point::new(-m1.powi(3) - 3.0 * m1 * m2 * m2, m2.powi(3) + 3.0 * m2 * m1 * m1)
                    * (2.0 / 3.0)
            }
            Entropy::HalfWave { sigma } => {
                let sigma = *sigma;
                // kinks of g(· - σ) sit at σ + π/4 + kπ/2
                let kinks: Vec<f64> = (-8..=8).map(|k| sigma + FRAC_PI_4 + k as f64 * FRAC_PI_2).collect();
                phi_f_integral(&|s| 0.5 * half_wave_g(s - sigma), &kinks, z)
            }
            Entropy::Density { f, kinks } => {
                let mut all = Vec::new();
                for &k in kinks {
                    for w in -2..=2 {
                        all.push(k + w as f64 * 2.0 * PI);
                    }
                }
                phi_f_integral(&|s| f(s), &all, z)
            }
        }
    }

    /// Generator `λ_Φ(θ)`.
    pub fn lambda(&self, theta: f64) -> f64 {
        match self {
            Entropy::Sigma1 => -2.0 * (2.0 * theta).sin(),
            Entropy::Sigma2 => 2.0 * (2.0 * theta).cos(),
            Entropy::HalfWave { sigma } => {
                0.5 * (half_wave_g(theta + FRAC_PI_2 - sigma) + half_wave_g(theta - FRAC_PI_2 - sigma))
            }
            Entropy::Density { f, .. } => f(theta + FRAC_PI_2) + f(theta - FRAC_PI_2),
        }
    }
}

fn check_unit(z: Point) -> Result<()> {
    if (z.norm() - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("entropy argument must be a unit vector, |z| = {}", z.norm())));
    }
    Ok(())
}

fn phi_f_integral(f: &dyn Fn(f64) -> f64, kinks: &[f64], z: Point) -> Point {
    let th = z.arg();
    let (a, b) = (th - FRAC_PI_2, th + FRAC_PI_2);
    let mut inner: Vec<f64> = kinks.iter().copied().filter(|&k| k > a && k < b).collect();
    inner.sort_by(f64::total_cmp);
    let rule = GaussLegendre::g16();
    let re = composite(a, b, &inner, PI / 16.0, rule, |s| f(s) * s.cos());
    let im = composite(a, b, &inner, PI / 16.0, rule, |s| f(s) * s.sin());
    Point::new(re, im)
}

/// `Φ_f(z) = ∫_{z·e^{is} > 0} f(s) e^{is} ds` for a density with the given
/// kink locations (any lift; they are wrapped as needed).
pub fn phi_f_eval(f: &dyn Fn(f64) -> f64, kinks: &[f64], z: Point) -> Result<Point> {
    check_unit(z)?;
    let mut all = Vec::new();
    for &k in kinks {
        for w in -2..=2 {
            all.push(k + w as f64 * 2.0 * PI);
        }
    }
    Ok(phi_f_integral(f, &all, z))
}

fn check_amplitude(amplitude: f64) -> Result<f64> {
    if !(amplitude >= -1e-12 && amplitude <= 2.0 + 1e-12) {
        return Err(invalid(format!("jump amplitude must lie in [0, 2], got {amplitude}")));
    }
    Ok(amplitude.clamp(0.0, 2.0))
}

/// The small- and large-angle branches of the wall cost at half angle `x`.
pub fn wall_cost_branches(x: f64) -> [f64; 2] {
    [
        2.0 * (x.sin() - x * x.cos()).abs(),
        2.0 * ((x - FRAC_PI_2) * x.cos() - x.sin() + SQRT_2).abs(),
    ]
}

/// Wall cost `c` as a function of the half angle `X ∈ [0, π/2]`.
pub fn wall_cost_of_half_angle(x: f64) -> f64 {
    wall_cost_branches(x)[if x <= FRAC_PI_4 { 0 } else { 1 }]
}

/// `c(2 sin X)`: energy per unit length of an optimal transition across a
/// jump of amplitude `2 sin X`.
pub fn wall_cost_ars(amplitude: f64) -> Result<f64> {
    let a = check_amplitude(amplitude)?;
    Ok(wall_cost_of_half_angle((0.5 * a).asin()))
}

pub fn wall_cost_cubic(amplitude: f64) -> Result<f64> {
    let a = check_amplitude(amplitude)?;
    Ok(a * a * a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    Cubic,
    ArsWall,
}

impl std::str::FromStr for CostKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cubic" => Ok(CostKind::Cubic),
            "ars" | "ars_wall" => Ok(CostKind::ArsWall),
            other => Err(invalid(format!("unknown cost `{other}` (expected cubic or ars)"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentContribution {
    pub id: usize,
    pub length: f64,
    pub amplitude: f64,
    pub cost_density: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DissipationReport {
    pub nu_total: f64,
    pub per_segment: Vec<SegmentContribution>,
    pub cost_kind: CostKind,
}

/// `ν = 2 Σ |J_k| c(amp_k)` for the wall cost; `Σ |J_k| amp_k³` for the
/// cubic upper-bound surrogate.
pub fn nu_total(field: &UnitField, cost_kind: CostKind) -> Result<DissipationReport> {
    let mut per_segment = Vec::with_capacity(field.jumps().len());
    for (id, j) in field.jumps().iter().enumerate() {
        let length = j.length();
        let (cost_density, factor) = match cost_kind {
            CostKind::ArsWall => (wall_cost_ars(j.amplitude)?, 2.0),
            CostKind::Cubic => (wall_cost_cubic(j.amplitude)?, 1.0),
        };
        per_segment.push(SegmentContribution {
            id,
            length,
            amplitude: j.amplitude,
            cost_density,
            contribution: factor * length * cost_density,
        });
    }
    let nu_total = per_segment.iter().map(|c| c.contribution).sum();
    Ok(DissipationReport {
        nu_total,
        per_segment,
        cost_kind,
    })
}

/// `|[Φ(m)]·n_J|` on one jump (traces are constant along the segment).
pub fn jump_production_density(j: &JumpSegment, e: &Entropy) -> f64 {
    let d = e.eval_unchecked(j.m_plus) - e.eval_unchecked(j.m_minus);
    dot(d, j.normal()).abs()
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductionReport {
    pub entropy: String,
    pub jump_total: f64,
    pub per_segment: Vec<f64>,
    /// Largest `|∮ Φ(m)·ν|` over test circles that avoid the jump set.
    pub smooth_flux_max: f64,
    pub disks_checked: usize,
}

/// Total `|∇·Φ(m)|`: exact jump part plus flux checks on test circles
/// `(center, radius)` that stay off the jump set (these should vanish).
pub fn entropy_production(
    field: &UnitField,
    entropy: &Entropy,
    test_disks: &[(Point, f64)],
) -> ProductionReport {
    let per_segment: Vec<f64> = field
        .jumps()
        .iter()
        .map(|j| j.length() * jump_production_density(j, entropy))
        .collect();
    let mut smooth_flux_max: f64 = 0.0;
    let mut disks_checked = 0;
    for &(c, r) in test_disks {
        let crosses = field
            .jumps()
            .iter()
            .any(|j| j.distance(c) <= r + 1e-12)
            || matches!(field.kind(), crate::fields::FieldKind::Vortex { center, .. } if (center - c).norm() <= r);
        if crosses || field.curve().signed_distance(c) > -r {
            continue;
        }
        disks_checked += 1;
        let flux = entropy_flux_through_circle(field, entropy, c, r);
        smooth_flux_max = smooth_flux_max.max(flux.abs());
    }
    ProductionReport {
        entropy: entropy.name(),
        jump_total: per_segment.iter().sum(),
        per_segment,
        smooth_flux_max,
        disks_checked,
    }
}

fn entropy_flux_through_circle(field: &UnitField, e: &Entropy, c: Point, r: f64) -> f64 {
    let mut breaks: Vec<f64> = Vec::new();
    for &(a, b) in field.interfaces() {
        let d = b - a;
        let w = a - c;
        let (qa, qb, qc) = (d.norm_sqr(), dot(w, d), w.norm_sqr() - r * r);
        let disc = qb * qb - qa * qc;
        if disc >= 0.0 {
            for t in [(-qb - disc.sqrt()) / qa, (-qb + disc.sqrt()) / qa] {
                if (0.0..=1.0).contains(&t) {
                    breaks.push((w + d * t).arg().rem_euclid(2.0 * PI));
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    let panel = if matches!(e, Entropy::HalfWave { .. } | Entropy::Density { .. }) {
        2.0 * PI / 128.0
    } else {
        2.0 * PI / 64.0
    };
    composite(0.0, 2.0 * PI, &breaks, panel, GaussLegendre::g8(), |phi| {
        let en = unit(phi);
        let m = field.eval_extended(c + en * r);
        dot(e.eval_unchecked(m / m.norm()), en) * r
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HalfWaveSweep {
    pub sigmas: Vec<f64>,
    /// Total jump production for each `σ`.
    pub per_sigma_total: Vec<f64>,
    pub max_over_sigma: f64,
    /// Σ over segments of the per-segment max over the sampled `σ`
    /// (lattice supremum of the production measures).
    pub lattice_sup_sampled: f64,
    /// Same with each per-segment max refined by golden-section search.
    pub lattice_sup_refined: f64,
}

/// Sweeps `σ ∈ [0, π)` over `count` values (half-wave densities are
/// `π`-periodic in `σ`).
pub fn half_wave_sweep(field: &UnitField, count: usize) -> HalfWaveSweep {
    let sigmas: Vec<f64> = (0..count).map(|k| PI * k as f64 / count as f64).collect();
    let jumps = field.jumps();
    let table: Vec<Vec<f64>> = sigmas
        .iter()
        .map(|&sigma| {
            let e = Entropy::HalfWave { sigma };
            jumps
                .iter()
                .map(|j| j.length() * jump_production_density(j, &e))
                .collect()
        })
        .collect();
    let per_sigma_total: Vec<f64> = table.iter().map(|row| row.iter().sum()).collect();
    let max_over_sigma = per_sigma_total.iter().copied().fold(0.0, f64::max);
    let mut lattice_sup_sampled = 0.0;
    let mut lattice_sup_refined = 0.0;
    let h = PI / count.max(1) as f64;
    for (k, j) in jumps.iter().enumerate() {
        let (best_i, best) = table
            .iter()
            .enumerate()
            .map(|(i, row)| (i, row[k]))
            .fold((0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
        lattice_sup_sampled += best;
        let s0 = sigmas.get(best_i).copied().unwrap_or(0.0);
        let (_, refined) = golden_max(
            |sigma| j.length() * jump_production_density(j, &Entropy::HalfWave { sigma }),
            s0 - h,
            s0 + h,
            1e-10,
        );
        lattice_sup_refined += refined.max(best);
    }
    HalfWaveSweep {
        sigmas,
        per_sigma_total,
        max_over_sigma,
        lattice_sup_sampled,
        lattice_sup_refined,
    }
}

/// Table `(amplitude, c_ars, c_cubic)` on `n + 1` uniform amplitudes.
pub fn cost_table(n: usize) -> Vec<(f64, f64, f64)> {
    (0..=n)
        .map(|k| {
            let a = 2.0 * k as f64 / n as f64;
            (a, wall_cost_ars(a).unwrap(), wall_cost_cubic(a).unwrap())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryCurve;

    #[test]
    fn wall_cost_values() {
        assert_eq!(wall_cost_ars(0.0).unwrap(), 0.0);
        assert!((wall_cost_ars(1.0).unwrap() - 0.0931005).abs() < 1e-6);
        assert!((wall_cost_ars(2.0).unwrap() - 0.8284271).abs() < 1e-6);
        let x = FRAC_PI_4;
        let a = 2.0 * (x.sin() - x * x.cos());
        let b = 2.0 * ((x - FRAC_PI_2) * x.cos() - x.sin() + SQRT_2);
        assert!((a - b).abs() < 1e-12 && (a - 0.3034928).abs() < 1e-6);
        assert!(wall_cost_ars(2.5).is_err() && wall_cost_ars(-0.1).is_err());
        let x = 0.01;
        let ratio = wall_cost_ars(2.0 * f64::sin(x)).unwrap() / x.powi(3);
        assert!((ratio / (2.0 / 3.0) - 1.0).abs() < 0.01);
        assert!((wall_cost_cubic(2.0 * (PI / 8.0).sin()).unwrap() - 0.4483415).abs() < 1e-6);
    }

    #[test]
    fn wall_cost_is_increasing_and_below_cubic_surrogate() {
        let t = cost_table(10_000);
        for w in t.windows(2) {
            assert!(w[1].1 > w[0].1);
        }
        for &(a, c, cubic) in &t[1..] {
            assert!(c > 0.0 && 2.0 * c <= cubic + 1e-15, "a={a}");
        }
    }

    #[test]
    fn phi_f_convention() {
        let one = |_: f64| 1.0;
        let v = phi_f_eval(&one, &[], Point::new(1.0, 0.0)).unwrap();
        assert!((v - Point::new(2.0, 0.0)).norm() < 1e-13);
        let zero = |_: f64| 0.0;
        assert_eq!(phi_f_eval(&zero, &[], unit(0.3)).unwrap(), Point::new(0.0, 0.0));
        assert!(phi_f_eval(&one, &[], Point::new(1.1, 0.0)).is_err());
    }

    #[test]
    fn lambda_identity_by_finite_differences() {
        let entropies = [
            Entropy::Sigma1,
            Entropy::Sigma2,
            Entropy::HalfWave { sigma: 0.0 },
            Entropy::HalfWave { sigma: 0.7 },
        ];
        let h = 1e-5;
        for e in &entropies {
            for k in 0..64 {
                let th = 2.0 * PI * (k as f64 + 0.3) / 64.0;
                let d = (e.eval(unit(th + h)).unwrap() - e.eval(unit(th - h)).unwrap()) / (2.0 * h);
                let expect = unit(th) * Point::new(0.0, 1.0) * e.lambda(th);
                assert!((d - expect).norm() < 1e-6, "{e:?} θ={th}: {d} vs {expect}");
            }
        }
    }

    #[test]
    fn dissipation_on_the_hexagon() {
        let f = UnitField::distgrad(&BoundaryCurve::rounded_ngon(6).unwrap()).unwrap();
        let cubic = nu_total(&f, CostKind::Cubic).unwrap();
        let lambda = crate::geometry::ngon_lambda(6);
        assert!((cubic.nu_total - 3.0 * lambda).abs() < 1e-12);
        assert!((cubic.nu_total - 3.0691641).abs() < 1e-6);
        let ars = nu_total(&f, CostKind::ArsWall).unwrap();
        assert!((ars.nu_total - 6.0 * lambda * wall_cost_ars(1.0).unwrap()).abs() < 1e-12);
        let sum: f64 = ars.per_segment.iter().map(|c| c.contribution).sum();
        assert_eq!(sum, ars.nu_total);
        let v = UnitField::vortex(&BoundaryCurve::circle(), Point::new(0.0, 0.0), 1.0).unwrap();
        assert_eq!(nu_total(&v, CostKind::ArsWall).unwrap().nu_total, 0.0);
    }

    #[test]
    fn limits_of_n_squared_nu() {
        let n = 4096;
        let f = UnitField::distgrad(&BoundaryCurve::rounded_ngon(n).unwrap()).unwrap();
        let n2 = (n * n) as f64;
        let ars = nu_total(&f, CostKind::ArsWall).unwrap().nu_total * n2;
        let cubic = nu_total(&f, CostKind::Cubic).unwrap().nu_total * n2;
        assert!((ars / (2.0 * PI.powi(3) / 3.0) - 1.0).abs() < 1e-3, "{ars}");
        assert!((cubic / (4.0 * PI.powi(3)) - 1.0).abs() < 1e-3, "{cubic}");
    }

    #[test]
    fn productions() {
        let f = UnitField::distgrad(&BoundaryCurve::rounded_ngon(8).unwrap()).unwrap();
        let disks: Vec<(Point, f64)> = (0..40)
            .map(|k| (unit(0.37 * k as f64) * (0.2 + 0.015 * k as f64), 0.05))
            .collect();
        let rep = entropy_production(&f, &Entropy::Sigma1, &disks);
        assert!(rep.disks_checked > 10 && rep.smooth_flux_max < 1e-10, "{rep:?}");
        let direct: f64 = f
            .jumps()
            .iter()
            .map(|j| {
                let d = Entropy::Sigma1.eval(j.m_plus).unwrap() - Entropy::Sigma1.eval(j.m_minus).unwrap();
                j.length() * dot(d, j.normal()).abs()
            })
            .sum();
        assert!((rep.jump_total - direct).abs() < 1e-14);
        let hw = entropy_production(&f, &Entropy::HalfWave { sigma: 0.3 }, &disks);
        assert!(hw.smooth_flux_max < 1e-8, "{}", hw.smooth_flux_max);
        let v = UnitField::vortex(&BoundaryCurve::circle(), Point::new(0.0, 0.0), 1.0).unwrap();
        let vd: Vec<(Point, f64)> = (0..20).map(|k| (unit(k as f64) * 0.5, 0.2)).collect();
        for e in [Entropy::Sigma1, Entropy::Sigma2, Entropy::HalfWave { sigma: 0.1 }] {
            let r = entropy_production(&v, &e, &vd);
            assert!(r.jump_total == 0.0 && r.smooth_flux_max < 1e-8, "{e:?}: {r:?}");
        }
    }

    #[test]
    fn half_wave_sup_attains_half_nu() {
        let f = UnitField::distgrad(&BoundaryCurve::rounded_ngon(8).unwrap()).unwrap();
        let nu = nu_total(&f, CostKind::ArsWall).unwrap().nu_total;
        let sweep = half_wave_sweep(&f, 32);
        assert!(sweep.lattice_sup_sampled <= 0.5 * nu * (1.0 + 1e-9));
        assert!(sweep.lattice_sup_sampled >= 0.95 * 0.5 * nu);
        assert!((sweep.lattice_sup_refined / (0.5 * nu) - 1.0).abs() < 1e-6);
        assert!(sweep.max_over_sigma <= sweep.lattice_sup_sampled + 1e-15);
    }
}
