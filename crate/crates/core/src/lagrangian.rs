//! Monte-Carlo Lagrangian representation of a BV eikonal field.
//!
//! Characteristics fly straight, `ẋ = e^{is}`. At a jump a curve crosses if
//! its direction is admissible for the far trace and otherwise reflects
//! specularly about the jump line, `s ↦ 2θ_J - s`, which accumulates the
//! angular variation `μ`. Curves end on `∂Ω` or at the horizon.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fields::{FieldKind, JumpSegment, UnitField, JUMP_TOL};
use crate::geometry::{cross, dot, unit, Point, I};
use crate::numerics::{angle_dist, quadrature::composite, wrap_angle, GaussLegendre};

/// Event cap per trajectory.
pub const MAX_EVENTS: usize = 1_000_000;
/// Hits closer than this to a junction of several jump segments stop the curve.
const JUNCTION_TOL: f64 = 1e-9;
const BOUNDARY_STREAM: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Boundary,
    Horizon,
    /// Reached a point where several jump segments meet.
    Junction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Breakpoint {
    pub t: f64,
    pub x: Point,
    /// Direction right after `t`.
    pub s: f64,
    /// Angular variation added at this breakpoint.
    pub dmu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub t_minus: f64,
    pub t_plus: f64,
    /// The birth point first, then one entry per jump event; the end point is
    /// `end`.
    pub breakpoints: Vec<Breakpoint>,
    pub end: Point,
    pub mu: f64,
    pub termination: Termination,
    pub reflections: usize,
    pub crossings: usize,
    /// Smallest `m·e^{is}` on the continuing side over all events.
    pub min_admissibility: f64,
}

impl Trajectory {
    /// Position and direction at time `t`, if alive then.
    pub fn state_at(&self, t: f64) -> Option<(Point, f64)> {
        if t < self.t_minus || t >= self.t_plus {
            return None;
        }
        let i = self.breakpoints.partition_point(|b| b.t <= t).max(1) - 1;
        let b = &self.breakpoints[i];
        Some((b.x + unit(b.s) * (t - b.t), b.s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpOutcome {
    Cross,
    Reflect { s: f64, dmu: f64 },
}

/// Jump rule for a curve with direction `s` hitting `j`.
pub fn jump_rule(j: &JumpSegment, s: f64) -> JumpOutcome {
    let d = unit(s);
    let far = if dot(d, j.normal()) > 0.0 { j.m_plus } else { j.m_minus };
    if dot(far, d) > 0.0 {
        JumpOutcome::Cross
    } else {
        let r = wrap_angle(2.0 * j.theta - s);
        JumpOutcome::Reflect {
            s: r,
            dmu: angle_dist(s, r),
        }
    }
}

fn junctions(jumps: &[JumpSegment]) -> Vec<Point> {
    let ends: Vec<Point> = jumps.iter().flat_map(|j| [j.a, j.b]).collect();
    let mut out: Vec<Point> = Vec::new();
    for (i, p) in ends.iter().enumerate() {
        let shared = ends.iter().enumerate().any(|(k, q)| k / 2 != i / 2 && (p - q).norm() < 1e-12);
        if shared && !out.iter().any(|q| (p - q).norm() < 1e-12) {
            out.push(*p);
        }
    }
    out
}

/// First hit of the ray `x + t e^{is}`, `t > t_min`, with a jump segment
/// other than `skip`: `(t, index)`.
fn first_jump_hit(jumps: &[JumpSegment], x: Point, d: Point, skip: Option<usize>) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for (k, j) in jumps.iter().enumerate() {
        if Some(k) == skip {
            continue;
        }
        let e = j.b - j.a;
        let den = cross(d, e);
        if den.abs() < 1e-300 {
            continue;
        }
        let w = j.a - x;
        let t = cross(w, e) / den;
        let u = cross(w, d) / den;
        if t > 1e-13 && (0.0..=1.0).contains(&u) && best.map_or(true, |(bt, _)| t < bt) {
            best = Some((t, k));
        }
    }
    best
}

struct Tracer<'a> {
    field: &'a UnitField,
    junctions: Vec<Point>,
}

impl<'a> Tracer<'a> {
    fn new(field: &'a UnitField) -> Self {
        Self {
            field,
            junctions: junctions(field.jumps()),
        }
    }

    fn run(&self, x0: Point, s0: f64, t0: f64, horizon: f64, boundary_start: bool) -> Result<Trajectory> {
        let jumps = self.field.jumps();
        let curve = self.field.curve();
        let mut bps = vec![Breakpoint { t: t0, x: x0, s: wrap_angle(s0), dmu: 0.0 }];
        let (mut x, mut s, mut t) = (x0, wrap_angle(s0), t0);
        let mut skip: Option<usize> = None;
        let mut mu = 0.0;
        let (mut reflections, mut crossings) = (0usize, 0usize);
        let mut min_adm = f64::INFINITY;
        let mut from_boundary = boundary_start;
        loop {
            if reflections + crossings >= MAX_EVENTS {
                return Err(Error::Runaway(MAX_EVENTS));
            }
            let d = unit(s);
            let t_min = if from_boundary { 1e-9 } else { 1e-13 };
            let exit = curve.ray_exit(x, d, t_min).map(|(te, _, p)| (te, p));
            let hit = first_jump_hit(jumps, x, d, skip);
            let (t_exit, p_exit) = match exit {
                Some(e) => e,
                None => {
                    // grazing exit lost to rounding: the curve is at the boundary
                    return Ok(self.finish(bps, x, t, mu, Termination::Boundary, reflections, crossings, min_adm));
                }
            };
            let next = match hit {
                Some((th, k)) if th < t_exit => Some((th, k)),
                _ => None,
            };
            let dt = next.map_or(t_exit, |n| n.0);
            if t + dt >= horizon {
                let end = x + d * (horizon - t);
                return Ok(self.finish(bps, end, horizon, mu, Termination::Horizon, reflections, crossings, min_adm));
            }
            let Some((dt, k)) = next else {
                return Ok(self.finish(bps, p_exit, t + t_exit, mu, Termination::Boundary, reflections, crossings, min_adm));
            };
            x += d * dt;
            t += dt;
            from_boundary = false;
            if self.junctions.iter().any(|q| (x - q).norm() < JUNCTION_TOL) {
                return Ok(self.finish(bps, x, t, mu, Termination::Junction, reflections, crossings, min_adm));
            }
            let j = &jumps[k];
            match jump_rule(j, s) {
                JumpOutcome::Cross => {
                    crossings += 1;
                    let far = if dot(d, j.normal()) > 0.0 { j.m_plus } else { j.m_minus };
                    min_adm = min_adm.min(dot(far, d));
                    bps.push(Breakpoint { t, x, s, dmu: 0.0 });
                }
                JumpOutcome::Reflect { s: r, dmu } => {
                    reflections += 1;
                    let near = if dot(d, j.normal()) > 0.0 { j.m_minus } else { j.m_plus };
                    min_adm = min_adm.min(dot(near, unit(r)));
                    mu += dmu;
                    s = r;
                    bps.push(Breakpoint { t, x, s, dmu });
                }
            }
            skip = Some(k);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        breakpoints: Vec<Breakpoint>,
        end: Point,
        t_plus: f64,
        mu: f64,
        termination: Termination,
        reflections: usize,
        crossings: usize,
        min_admissibility: f64,
    ) -> Trajectory {
        Trajectory {
            t_minus: breakpoints[0].t,
            t_plus,
            breakpoints,
            end,
            mu,
            termination,
            reflections,
            crossings,
            min_admissibility,
        }
    }
}

/// Traces the characteristic through `(x0, s0)` from time `t0` to the
/// boundary or `horizon`.
pub fn trace(field: &UnitField, x0: Point, s0: f64, t0: f64, horizon: f64) -> Result<Trajectory> {
    let m = field.eval(x0)?;
    if dot(m, unit(s0)) <= 0.0 {
        return Err(invalid(format!("direction {s0} is not admissible at the start point")));
    }
    if !(horizon > t0) {
        return Err(invalid("horizon must exceed the start time"));
    }
    Tracer::new(field).run(x0, s0, t0, horizon, false)
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSpec {
    pub horizon: f64,
    pub interior_count: usize,
    /// Density of boundary-born samples relative to interior ones; 1 gives
    /// all trajectories the same weight.
    pub boundary_rate: f64,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(interior_count: usize, seed: u64) -> Self {
        Self {
            horizon: 3.0 * PI,
            interior_count,
            boundary_rate: 1.0,
            seed,
        }
    }

    /// Spec whose expected total number of curves (interior plus boundary
    /// births over the horizon) is `curves`.
    pub fn with_total(field: &UnitField, curves: usize, seed: u64) -> Self {
        Self::with_total_over(field, curves, 3.0 * PI, seed)
    }

    /// As [`EnsembleSpec::with_total`] with a custom horizon.
    pub fn with_total_over(field: &UnitField, curves: usize, horizon: f64, seed: u64) -> Self {
        let mut spec = Self::new(curves, seed);
        spec.horizon = horizon;
        let ratio = boundary_influx_rate(field) * spec.horizon / (PI * field.curve().area());
        spec.interior_count = ((curves as f64 / (1.0 + ratio)).round() as usize).max(1);
        spec
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Birth {
    pub t: f64,
    /// Boundary arc length.
    pub sb: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Ensemble {
    pub spec: EnsembleSpec,
    /// `|E_m| = π|Ω|`.
    pub epigraph_mass: f64,
    /// Total boundary influx per unit time.
    pub influx_rate: f64,
    pub interior_weight: f64,
    pub boundary_weight: f64,
    pub interior: Vec<Trajectory>,
    pub boundary: Vec<Trajectory>,
    pub births: Vec<Birth>,
}

impl Ensemble {
    pub fn trajectories(&self) -> impl Iterator<Item = (&Trajectory, f64)> {
        self.interior
            .iter()
            .map(move |t| (t, self.interior_weight))
            .chain(self.boundary.iter().map(move |t| (t, self.boundary_weight)))
    }

    pub fn len(&self) -> usize {
        self.interior.len() + self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn junction_stops(&self) -> usize {
        self.trajectories()
            .filter(|(t, _)| t.termination == Termination::Junction)
            .count()
    }

    /// CSV of breakpoints (`curve,t,x,y,s,dmu`) for the first `cap` curves.
    pub fn write_breakpoints_csv<W: Write>(&self, cap: usize, mut w: W) -> Result<()> {
        writeln!(w, "curve,t,x,y,s,dmu")?;
        for (i, (tr, _)) in self.trajectories().take(cap.min(1000)).enumerate() {
            for b in &tr.breakpoints {
                writeln!(w, "{i},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}", b.t, b.x.re, b.x.im, b.s, b.dmu)?;
            }
            writeln!(w, "{i},{:.12e},{:.12e},{:.12e},,", tr.t_plus, tr.end.re, tr.end.im)?;
        }
        Ok(())
    }
}

/// `∫ (1 + m·ν_in) dH¹`: the boundary influx `∫∫ (iτ·e^{is})⁺ 1_{m·e^{is}>0}`.
/// The inner integral over `s` is `1 + cos β`, `β` the angle between `m`
/// and the inward normal.
pub fn boundary_influx_rate(field: &UnitField) -> f64 {
    let curve = field.curve();
    let breaks = curve.breakpoints();
    composite(0.0, TAU, &breaks, TAU / 256.0, GaussLegendre::g16(), |sb| {
        let (p, tau, _) = curve.frame(sb);
        influx_density_total(field.eval_extended(p), tau)
    })
}

fn influx_density_total(m: Point, tau: Point) -> f64 {
    let n = m.norm();
    if n == 0.0 {
        return 1.0;
    }
    1.0 + dot(m / n, I * tau)
}

fn sample_interior(field: &UnitField, rng: &mut ChaCha8Rng, bbox: &[f64; 4]) -> (Point, f64) {
    let curve = field.curve();
    loop {
        let x = Point::new(
            bbox[0] + (bbox[1] - bbox[0]) * rng.gen::<f64>(),
            bbox[2] + (bbox[3] - bbox[2]) * rng.gen::<f64>(),
        );
        let s = TAU * rng.gen::<f64>();
        if !curve.contains(x) || field.jumps().iter().any(|j| j.distance(x) <= JUMP_TOL) {
            continue;
        }
        if dot(field.eval_extended(x), unit(s)) > 0.0 {
            return (x, s);
        }
    }
}

fn sample_birth(field: &UnitField, rng: &mut ChaCha8Rng, horizon: f64) -> Birth {
    let curve = field.curve();
    let t = horizon * rng.gen::<f64>();
    loop {
        let sb = TAU * rng.gen::<f64>();
        let s = TAU * rng.gen::<f64>();
        let (p, tau, _) = curve.frame(sb);
        let e = unit(s);
        let inward = dot(I * tau, e);
        if inward <= 0.0 || dot(field.eval_extended(p), e) <= 0.0 {
            continue;
        }
        if rng.gen::<f64>() < inward {
            return Birth { t, sb, s };
        }
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Samples and traces the ensemble. Interior curves start at `t = 0`
/// uniformly on `E_m`; boundary births form a Poisson process over
/// `[0, T] × ∂Ω × S¹` with the influx density. Trajectory `i` draws from its
/// own stream, so results do not depend on the worker count.
pub fn sample_ensemble(field: &UnitField, spec: &EnsembleSpec) -> Result<Ensemble> {
    let curve = field.curve();
    let diam = {
        let b = curve.bbox();
        (b[1] - b[0]).hypot(b[3] - b[2])
    };
    if !(spec.horizon >= diam) {
        return Err(invalid(format!(
            "horizon {} is shorter than the domain diameter {diam}",
            spec.horizon
        )));
    }
    if !(spec.boundary_rate >= 0.0) {
        return Err(invalid("boundary rate must be nonnegative"));
    }
    let epigraph_mass = PI * curve.area();
    let influx_rate = boundary_influx_rate(field);
    let interior_weight = epigraph_mass / spec.interior_count.max(1) as f64;
    let boundary_weight = interior_weight / spec.boundary_rate;
    let bbox = curve.bbox();
    let tracer = Tracer::new(field);
    let interior = (0..spec.interior_count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(spec.seed, i as u64);
            let (x, s) = sample_interior(field, &mut rng, &bbox);
            tracer.run(x, s, 0.0, spec.horizon, false)
        })
        .collect::<Result<Vec<_>>>()?;
    let births: Vec<Birth> = if spec.boundary_rate > 0.0 && spec.interior_count > 0 {
        let mean = influx_rate * spec.horizon / boundary_weight;
        let mut rng = stream_rng(spec.seed, u64::MAX);
        let count = Poisson::new(mean)
            .map_err(|e| invalid(format!("poisson mean {mean}: {e}")))?
            .sample(&mut rng) as usize;
        (0..count)
            .into_par_iter()
            .map(|j| sample_birth(field, &mut stream_rng(spec.seed, BOUNDARY_STREAM + j as u64), spec.horizon))
            .collect()
    } else {
        Vec::new()
    };
    let boundary = births
        .par_iter()
        .map(|b| tracer.run(curve.point(b.sb), b.s, b.t, spec.horizon, true))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble {
        spec: spec.clone(),
        epigraph_mass,
        influx_rate,
        interior_weight,
        boundary_weight,
        interior,
        boundary,
        births,
    })
}

/// Length of `[a0, a1] ∩ (c - π/2, c + π/2)` on the circle (`a1 - a0 ≤ 2π`).
fn half_circle_overlap(a0: f64, a1: f64, c: f64) -> f64 {
    let mut total = 0.0;
    let lo = c - FRAC_PI_2 + TAU * ((a0 - (c - FRAC_PI_2)) / TAU).floor();
    for k in -1..=1 {
        let l = lo + TAU * k as f64;
        total += ((l + PI).min(a1) - l.max(a0)).max(0.0);
    }
    total
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Bins {
    pub nx: usize,
    pub ny: usize,
    pub ns: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepresentationReport {
    pub t: f64,
    pub bins: Bins,
    pub alive: usize,
    /// Alive weight over `|E_m|`.
    pub mass_ratio: f64,
    pub tv: f64,
}

/// Exact masses of `1_{E_m} L²×L¹` on the bins, by `q×q` midpoint
/// sub-sampling in space and exact angular overlaps.
pub fn epigraph_bin_masses(field: &UnitField, bins: Bins, q: usize) -> Vec<f64> {
    let curve = field.curve();
    let bb = curve.bbox();
    let (hx, hy) = ((bb[1] - bb[0]) / bins.nx as f64, (bb[3] - bb[2]) / bins.ny as f64);
    let hs = TAU / bins.ns as f64;
    let cell = hx * hy / (q * q) as f64;
    let rows: Vec<Vec<f64>> = (0..bins.nx * bins.ny)
        .into_par_iter()
        .map(|idx| {
            let (ix, iy) = (idx % bins.nx, idx / bins.nx);
            let mut row = vec![0.0; bins.ns];
            for a in 0..q {
                for b in 0..q {
                    let x = Point::new(
                        bb[0] + hx * (ix as f64 + (a as f64 + 0.5) / q as f64),
                        bb[2] + hy * (iy as f64 + (b as f64 + 0.5) / q as f64),
                    );
                    if !curve.contains(x) {
                        continue;
                    }
                    let m = field.eval_extended(x);
                    if m.norm() == 0.0 {
                        continue;
                    }
                    let c = m.arg();
                    for (k, r) in row.iter_mut().enumerate() {
                        *r += cell * half_circle_overlap(hs * k as f64, hs * (k + 1) as f64, c);
                    }
                }
            }
            row
        })
        .collect();
    rows.concat()
}

fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
    if sp == 0.0 || sq == 0.0 {
        return 1.0;
    }
    0.5 * p.iter().zip(q).map(|(a, b)| (a / sp - b / sq).abs()).sum::<f64>()
}

/// Binned total-variation distance between the alive trajectories at time
/// `t` and the uniform measure on the epigraph `E_m`.
pub fn representation_check(ensemble: &Ensemble, field: &UnitField, t: f64, bins: Bins) -> Result<RepresentationReport> {
    if !(t > 0.0 && t < ensemble.spec.horizon) {
        return Err(invalid(format!("time {t} outside (0, T)")));
    }
    let bb = field.curve().bbox();
    let (hx, hy, hs) = (
        (bb[1] - bb[0]) / bins.nx as f64,
        (bb[3] - bb[2]) / bins.ny as f64,
        TAU / bins.ns as f64,
    );
    let mut hist = vec![0.0; bins.nx * bins.ny * bins.ns];
    let mut alive = 0usize;
    let mut weight = 0.0;
    for (tr, w) in ensemble.trajectories() {
        let Some((x, s)) = tr.state_at(t) else { continue };
        let ix = (((x.re - bb[0]) / hx) as usize).min(bins.nx - 1);
        let iy = (((x.im - bb[2]) / hy) as usize).min(bins.ny - 1);
        let is = ((wrap_angle(s) / hs) as usize).min(bins.ns - 1);
        hist[(iy * bins.nx + ix) * bins.ns + is] += w;
        alive += 1;
        weight += w;
    }
    if alive == 0 {
        return Err(Error::Empty(format!("no trajectory alive at t = {t}")));
    }
    let exact = epigraph_bin_masses(field, bins, 24);
    Ok(RepresentationReport {
        t,
        bins,
        alive,
        mass_ratio: weight / ensemble.epigraph_mass,
        tv: total_variation(&hist, &exact),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InfluxReport {
    pub births: usize,
    pub boundary_bins: usize,
    pub angle_bins: usize,
    pub expected_births: f64,
    pub tv: f64,
}

/// Binned TV distance of the births over (boundary parameter, direction)
/// against the density `(iτ·e^{is})⁺ 1_{m·e^{is}>0}`.
pub fn influx_check(ensemble: &Ensemble, field: &UnitField, boundary_bins: usize, angle_bins: usize) -> Result<InfluxReport> {
    if ensemble.births.is_empty() {
        return Err(Error::Empty("no boundary births".into()));
    }
    let (hb, ha) = (TAU / boundary_bins as f64, TAU / angle_bins as f64);
    let mut hist = vec![0.0; boundary_bins * angle_bins];
    for b in &ensemble.births {
        let i = ((b.sb / hb) as usize).min(boundary_bins - 1);
        let k = ((wrap_angle(b.s) / ha) as usize).min(angle_bins - 1);
        hist[i * angle_bins + k] += 1.0;
    }
    let curve = field.curve();
    let rule = GaussLegendre::g16();
    let exact: Vec<f64> = (0..boundary_bins * angle_bins)
        .into_par_iter()
        .map(|idx| {
            let (i, k) = (idx / angle_bins, idx % angle_bins);
            let (a0, a1) = (ha * k as f64, ha * (k + 1) as f64);
            let breaks = curve.breakpoints();
            composite(hb * i as f64, hb * (i + 1) as f64, &breaks, hb / 4.0, rule, |sb| {
                let (p, tau, _) = curve.frame(sb);
                let m = field.eval_extended(p);
                let (cn, cm) = ((I * tau).arg(), m.arg());
                let mut kinks = Vec::new();
                for c in [cn, cm] {
                    for off in [-FRAC_PI_2, FRAC_PI_2] {
                        for w in -1..=1 {
                            kinks.push(c + off + TAU * w as f64);
                        }
                    }
                }
                kinks.sort_by(f64::total_cmp);
                composite(a0, a1, &kinks, ha, rule, |s| {
                    let e = unit(s);
                    if dot(m, e) > 0.0 {
                        dot(I * tau, e).max(0.0)
                    } else {
                        0.0
                    }
                })
            })
        })
        .collect();
    Ok(InfluxReport {
        births: ensemble.births.len(),
        boundary_bins,
        angle_bins,
        expected_births: ensemble.influx_rate * ensemble.spec.horizon / ensemble.boundary_weight,
        tv: total_variation(&hist, &exact),
    })
}

/// Spatial filter for the dissipation estimate.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionFilter {
    Full,
    Disk { center: Point, radius: f64 },
}

impl RegionFilter {
    fn contains(&self, x: Point) -> bool {
        match *self {
            RegionFilter::Full => true,
            RegionFilter::Disk { center, radius } => (x - center).norm() <= radius,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DissipationEstimate {
    pub window: (f64, f64),
    pub rate: f64,
    pub std_error: f64,
    pub events: usize,
    pub bootstrap_resamples: usize,
}

/// `Σ ω-weighted μ-increments in region × window / |window|`, discarding
/// the burn-in `min(π, T/3)`; bootstrap standard error over trajectories.
pub fn dissipation_decomposition(ensemble: &Ensemble, region: RegionFilter) -> Result<DissipationEstimate> {
    let horizon = ensemble.spec.horizon;
    let t0 = PI.min(horizon / 3.0);
    let len = horizon - t0;
    let mut contrib: Vec<f64> = Vec::with_capacity(ensemble.len());
    let mut events = 0usize;
    for (tr, w) in ensemble.trajectories() {
        let mut c = 0.0;
        for b in tr.breakpoints.iter().filter(|b| b.dmu > 0.0 && b.t >= t0 && region.contains(b.x)) {
            c += b.dmu;
            events += 1;
        }
        contrib.push(w * c / len);
    }
    if contrib.is_empty() {
        return Err(Error::Empty("ensemble has no trajectories".into()));
    }
    let rate: f64 = contrib.iter().sum();
    let resamples = 200;
    let n = contrib.len();
    let boots: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(ensemble.spec.seed ^ 0x5eed_b007, r as u64);
            (0..n).map(|_| contrib[rng.gen_range(0..n)]).sum::<f64>()
        })
        .collect();
    let mean = boots.iter().sum::<f64>() / resamples as f64;
    let var = boots.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    Ok(DissipationEstimate {
        window: (t0, horizon),
        rate,
        std_error: var.sqrt(),
        events,
        bootstrap_resamples: resamples,
    })
}

/// A straight jump through the origin with tangent `e^{iθ}` and traces
/// `m∓ = n e^{∓iX}`, `n = -ie^{iθ}`.
pub fn planar_jump(theta: f64, half_angle: f64) -> JumpSegment {
    let n = -I * unit(theta);
    JumpSegment::new(
        -unit(theta) * 0.5,
        unit(theta) * 0.5,
        n * unit(-half_angle),
        n * unit(half_angle),
    )
}

/// Incident flux per unit length onto the jump from one side: directions
/// admissible for `m` and pointing along `toward`, weighted by `e^{is}·toward`.
fn incident_flux(m: Point, toward: Point) -> f64 {
    1.0 + dot(m, toward)
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanarJumpReport {
    pub half_angle: f64,
    pub crossings: usize,
    pub rate: f64,
    pub std_error: f64,
    pub closed_form: f64,
    /// Largest binned TV between outgoing directions and the exact outgoing
    /// flux density, over the two sides.
    pub outgoing_tv: f64,
}

/// Dissipation rate per unit length of a planar jump for a flux-equilibrated
/// (uniform-epigraph) incident population, by Monte Carlo over `hits` jump
/// encounters.
pub fn planar_jump_rate(half_angle: f64, hits: usize, seed: u64) -> Result<PlanarJumpReport> {
    if !(half_angle > 0.0 && half_angle <= FRAC_PI_2) {
        return Err(invalid("half angle must lie in (0, π/2]"));
    }
    if hits < 2 {
        return Err(invalid("need at least 2 hits"));
    }
    let j = planar_jump(FRAC_PI_2, half_angle);
    let n = j.normal();
    let sides = [(j.m_minus, n), (j.m_plus, -n)];
    let flux = [incident_flux(sides[0].0, sides[0].1), incident_flux(sides[1].0, sides[1].1)];
    let total = flux[0] + flux[1];
    let nb = 72;
    let chunks = 64usize;
    let per = hits.div_ceil(chunks);
    let parts: Vec<(f64, f64, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let (mut sum, mut sq) = (0.0, 0.0);
            let mut hist = vec![0.0; 2 * nb];
            for _ in 0..per.min(hits.saturating_sub(c * per)) {
                let side = usize::from(rng.gen::<f64>() * total >= flux[0]);
                let (m, toward) = sides[side];
                let s = loop {
                    let s = toward.arg() + PI * (rng.gen::<f64>() - 0.5);
                    let e = unit(s);
                    if dot(m, e) > 0.0 && rng.gen::<f64>() < dot(e, toward) {
                        break s;
                    }
                };
                let (out_side, out_s, dmu) = match jump_rule(&j, s) {
                    JumpOutcome::Cross => (1 - side, s, 0.0),
                    JumpOutcome::Reflect { s, dmu } => (side, s, dmu),
                };
                sum += dmu;
                sq += dmu * dmu;
                let k = ((wrap_angle(out_s) / TAU * nb as f64) as usize).min(nb - 1);
                hist[out_side * nb + k] += 1.0;
            }
            (sum, sq, hist)
        })
        .collect();
    let (mut sum, mut sq) = (0.0, 0.0);
    let mut hist = vec![0.0; 2 * nb];
    for (a, b, h) in parts {
        sum += a;
        sq += b;
        for (x, y) in hist.iter_mut().zip(h) {
            *x += y;
        }
    }
    let nh = hits as f64;
    let mean = sum / nh;
    let var = (sq / nh - mean * mean).max(0.0);
    // exact outgoing density on side S: directions away from the jump into S,
    // admissible for m_S, weighted by |e^{is}·n|
    let mut outgoing_tv: f64 = 0.0;
    for (side, &(m, toward)) in sides.iter().enumerate() {
        let away = -toward;
        let exact: Vec<f64> = (0..nb)
            .map(|k| {
                let (a0, a1) = (TAU * k as f64 / nb as f64, TAU * (k + 1) as f64 / nb as f64);
                let mut kinks = vec![m.arg() - FRAC_PI_2, m.arg() + FRAC_PI_2, away.arg() - FRAC_PI_2, away.arg() + FRAC_PI_2];
                kinks.extend(kinks.clone().iter().flat_map(|k| [k - TAU, k + TAU]));
                kinks.sort_by(f64::total_cmp);
                composite(a0, a1, &kinks, a1 - a0, GaussLegendre::g16(), |s| {
                    let e = unit(s);
                    if dot(m, e) > 0.0 {
                        dot(e, away).max(0.0)
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        outgoing_tv = outgoing_tv.max(total_variation(&hist[side * nb..(side + 1) * nb], &exact));
    }
    Ok(PlanarJumpReport {
        half_angle,
        crossings: hits,
        rate: total * mean,
        std_error: total * (var / nh).sqrt(),
        closed_form: 4.0 * (half_angle.sin() - half_angle * half_angle.cos()),
        outgoing_tv,
    })
}

/// The same rate by deterministic quadrature of the jump rule over the
/// incident flux density on both sides.
pub fn planar_jump_rate_quadrature(half_angle: f64) -> f64 {
    let j = planar_jump(FRAC_PI_2, half_angle);
    let n = j.normal();
    let mut total = 0.0;
    for (m, toward) in [(j.m_minus, n), (j.m_plus, -n)] {
        let c = toward.arg();
        let kinks = [m.arg() - FRAC_PI_2, m.arg() + FRAC_PI_2, c + FRAC_PI_2 - half_angle, c - FRAC_PI_2 + half_angle];
        let mut lifted: Vec<f64> = kinks.iter().flat_map(|k| [k - TAU, *k, k + TAU]).collect();
        lifted.sort_by(f64::total_cmp);
        total += composite(c - FRAC_PI_2, c + FRAC_PI_2, &lifted, PI / 64.0, GaussLegendre::g16(), |s| {
            let e = unit(s);
            if dot(m, e) <= 0.0 {
                return 0.0;
            }
            match jump_rule(&j, s) {
                JumpOutcome::Cross => 0.0,
                JumpOutcome::Reflect { dmu, .. } => dmu * dot(e, toward),
            }
        });
    }
    total
}

/// Whether the field has a vortex (its center is a null set for tracing).
pub fn has_vortex(field: &UnitField) -> bool {
    matches!(field.kind(), FieldKind::Vortex { .. })
}
