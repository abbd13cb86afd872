//! The geometric defect `a(x̂)` of boundary triples and its integrals.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::geometry::{cross, dot, BoundaryCurve, Disk, Point, StarRegion};
use crate::numerics::{minimize, shortest_cover3, wrap_angle, NelderMeadOptions};

/// Polar grid used for the outer search: radii `0..=GRID-1`, `GRID` angles.
pub const GRID: usize = 33;
/// Grid points per sign choice used to start the simplex polish.
const SEEDS: usize = 3;
/// Seeds actually polished, best grid values first.
const POLISHED: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct DefectTrace {
    pub grid: usize,
    pub grid_best: f64,
    pub polished_best: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectResult {
    pub a: f64,
    pub z0: Point,
    pub alphas: [f64; 3],
    /// `true` when the line enters the domain at `x_k` (`t_k > 0`).
    pub signs: [bool; 3],
    pub objective_trace: DefectTrace,
}

/// Boundary point with its unit tangent.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub x: Point,
    pub tau: Point,
}

impl Node {
    pub fn at(curve: &BoundaryCurve, s: f64) -> Self {
        let (x, tau, _) = curve.frame(s);
        Self { x, tau }
    }
}

const SIGNS: [[f64; 3]; 8] = [
    [1., 1., 1.],
    [1., 1., -1.],
    [1., -1., 1.],
    [1., -1., -1.],
    [-1., 1., 1.],
    [-1., 1., -1.],
    [-1., -1., 1.],
    [-1., -1., -1.],
];

/// Constraint margin for a concurrency point and a sign choice, before
/// clipping at zero. The covering term enters unclipped so that the margin
/// still points toward feasibility where it is negative; wherever the margin
/// is positive it agrees with the defining one.
#[inline]
fn margin(nodes: &[Node; 3], z0: Point, signs: &[f64; 3]) -> f64 {
    let mut m = f64::INFINITY;
    let mut ang = [0.0; 3];
    for k in 0..3 {
        let d = z0 - nodes[k].x;
        let r = d.norm();
        if r < 1e-14 {
            return f64::NEG_INFINITY;
        }
        let e = d * (signs[k] / r);
        m = m.min(-dot(nodes[k].tau, e));
        ang[k] = e.im.atan2(e.re);
    }
    m.min(shortest_cover3(ang[0], ang[1], ang[2]) - PI)
}

/// Best margin over the 8 sign choices at `z0`, clipped at zero.
pub fn objective_at(nodes: &[Node; 3], z0: Point) -> f64 {
    SIGNS
        .iter()
        .map(|s| margin(nodes, z0, s))
        .fold(0.0, f64::max)
}

/// Points of the unit disk from unconstrained coordinates (radial projection).
#[inline]
fn project(disk_center: Point, radius: f64, w: &[f64]) -> Point {
    let p = Point::new(w[0], w[1]);
    let r = p.norm();
    disk_center + if r > 1.0 { p / r } else { p } * radius
}

fn check_triple(curve: &BoundaryCurve, triple: &[f64; 3]) -> Result<()> {
    let len = curve.length();
    for i in 0..3 {
        if !triple[i].is_finite() {
            return Err(invalid("triple parameters must be finite"));
        }
        for j in i + 1..3 {
            let d = (triple[i] - triple[j]).rem_euclid(len);
            if d.min(len - d) <= 1e-6 {
                return Err(invalid(format!(
                    "degenerate triple: parameters {} and {} coincide",
                    triple[i], triple[j]
                )));
            }
        }
    }
    Ok(())
}

/// `a(x̂)` for boundary parameters `triple`, with concurrency points in the
/// closed disk of radius `R/2` about the inscribed-disk center.
pub fn defect_a(curve: &BoundaryCurve, disk: &Disk, triple: [f64; 3]) -> Result<DefectResult> {
    check_triple(curve, &triple)?;
    let nodes = [0, 1, 2].map(|k| Node::at(curve, triple[k]));
    Ok(defect_nodes(&nodes, disk))
}

/// Core maximization on precomputed nodes (coincident nodes allowed).
pub fn defect_nodes(nodes: &[Node; 3], disk: &Disk) -> DefectResult {
    let (c, rad) = (disk.center, 0.5 * disk.radius);
    let mut evaluations = 0usize;
    // grid pass: geometry once per point, then all sign choices
    let mut top = [[(f64::NEG_INFINITY, [0.0; 2]); SEEDS]; 8];
    for i in 0..GRID {
        let r = i as f64 / (GRID - 1) as f64;
        let na = if i == 0 { 1 } else { GRID };
        for j in 0..na {
            let th = TAU * j as f64 / GRID as f64;
            let w = [r * th.cos(), r * th.sin()];
            let z0 = project(c, rad, &w);
            let mut t = [0.0; 3];
            let mut ang = [0.0; 3];
            let mut ok = true;
            for k in 0..3 {
                let d = z0 - nodes[k].x;
                let n = d.norm();
                ok &= n >= 1e-14;
                t[k] = dot(nodes[k].tau, d) / n;
                ang[k] = d.im.atan2(d.re);
            }
            evaluations += 1;
            if !ok {
                continue;
            }
            for (si, signs) in SIGNS.iter().enumerate() {
                let mut m = f64::INFINITY;
                let mut a = ang;
                for k in 0..3 {
                    m = m.min(-signs[k] * t[k]);
                    if signs[k] < 0.0 {
                        a[k] += PI;
                    }
                }
                let v = m.min(shortest_cover3(a[0], a[1], a[2]) - PI);
                let top = &mut top[si];
                if let Some(pos) = top.iter().position(|t| v > t.0) {
                    top[pos..].rotate_right(1);
                    top[pos] = (v, w);
                }
            }
        }
    }
    let mut seeds: Vec<(f64, usize, [f64; 2])> = top
        .iter()
        .enumerate()
        .flat_map(|(si, t)| t.iter().filter(|t| t.0.is_finite()).map(move |&(v, w)| (v, si, w)))
        .collect();
    seeds.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    seeds.truncate(POLISHED);
    let grid_best = seeds.iter().map(|s| s.0).fold(0.0, f64::max);
    let mut best = (0.0, c, 0usize);
    let opts = NelderMeadOptions {
        initial_step: 0.5 / (GRID - 1) as f64,
        f_tol: 1e-15,
        x_tol: 1e-13,
        max_evals: 2000,
        restarts: 3,
    };
    for &(v, si, w) in &seeds {
        if v > best.0 {
            best = (v, project(c, rad, &w), si);
        }
        let r = minimize(|w| -margin(nodes, project(c, rad, w), &SIGNS[si]), &w, &opts);
        evaluations += r.evals;
        if -r.f > best.0 {
            best = (-r.f, project(c, rad, &r.x), si);
        }
    }
    let (a, z0, si) = best;
    let signs = SIGNS[si];
    let mut alphas = [0.0; 3];
    for k in 0..3 {
        let e = (z0 - nodes[k].x) * signs[k];
        alphas[k] = wrap_angle(e.im.atan2(e.re));
    }
    DefectResult {
        a,
        z0,
        alphas,
        signs: signs.map(|s| s > 0.0),
        objective_trace: DefectTrace {
            grid: GRID,
            grid_best,
            polished_best: a,
            evaluations,
        },
    }
}

/// Incircle of the triangle cut out by the three normal lines at the triple.
/// Concurrent or parallel normals give radius 0 and the least-squares
/// concurrency point.
pub fn incircle_candidate(curve: &BoundaryCurve, triple: [f64; 3]) -> (Point, f64) {
    let nodes = triple.map(|s| Node::at(curve, s));
    incircle_of_normals(&nodes)
}

pub fn incircle_of_normals(nodes: &[Node; 3]) -> (Point, f64) {
    let normal = |k: usize| -crate::geometry::I * nodes[k].tau;
    let meet = |i: usize, j: usize| -> Option<Point> {
        let (ni, nj) = (normal(i), normal(j));
        let den = cross(ni, nj);
        if den.abs() < 1e-14 {
            return None;
        }
        let t = cross(nodes[j].x - nodes[i].x, nj) / den;
        Some(nodes[i].x + ni * t)
    };
    if let (Some(a), Some(b), Some(c)) = (meet(1, 2), meet(0, 2), meet(0, 1)) {
        let area = 0.5 * cross(b - a, c - a).abs();
        if area >= 1e-12 {
            let (la, lb, lc) = ((b - c).norm(), (a - c).norm(), (a - b).norm());
            let per = la + lb + lc;
            return ((a * la + b * lb + c * lc) / per, 2.0 * area / per);
        }
    }
    // least-squares point: Σ ττᵀ (p - x_k) = 0
    let (mut m11, mut m12, mut m22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for n in nodes {
        let (t, p) = (n.tau, dot(n.tau, n.x));
        m11 += t.re * t.re;
        m12 += t.re * t.im;
        m22 += t.im * t.im;
        b1 += t.re * p;
        b2 += t.im * p;
    }
    let det = m11 * m22 - m12 * m12;
    let p = if det.abs() > 1e-14 {
        Point::new((m22 * b1 - m12 * b2) / det, (m11 * b2 - m12 * b1) / det)
    } else {
        (nodes[0].x + nodes[1].x + nodes[2].x) / 3.0
    };
    (p, 0.0)
}

/// Composite nodes on a boundary region: `M` nodes shared among the
/// intervals in proportion to their length, midpoint rule inside each.
#[derive(Debug, Clone, Serialize)]
pub struct TripleGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TripleGrid {
    pub fn new(region: &StarRegion, m: usize) -> Self {
        let measure = region.measure();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        if region.is_full() {
            let h = TAU / m as f64;
            for i in 0..m {
                nodes.push(h * i as f64);
                weights.push(h);
            }
            return Self { nodes, weights };
        }
        for &(a, l) in &region.intervals {
            if l <= 0.0 {
                continue;
            }
            let k = ((m as f64 * l / measure).round() as usize).max(1);
            let h = l / k as f64;
            for i in 0..k {
                nodes.push((a + h * (i as f64 + 0.5)).rem_euclid(TAU));
                weights.push(h);
            }
        }
        Self { nodes, weights }
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegralA2 {
    pub value: f64,
    pub nodes: usize,
    pub region_measure: f64,
    pub distinct_triples: usize,
    pub monte_carlo: Option<MonteCarlo>,
}

/// `∫_{region³} a² d(H¹)^{⊗3}` by the tensor composite rule. Symmetry of `a`
/// under permutations is used to evaluate each unordered triple once.
pub fn integral_a2(curve: &BoundaryCurve, disk: &Disk, region: &StarRegion, m: usize) -> Result<IntegralA2> {
    if m < 8 {
        return Err(invalid(format!("integral_a2 needs at least 8 nodes, got {m}")));
    }
    let grid = TripleGrid::new(region, m);
    let nodes: Vec<Node> = grid.nodes.iter().map(|&s| Node::at(curve, s)).collect();
    let n = nodes.len();
    let mut triples = Vec::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                triples.push((i, j, k));
            }
        }
    }
    let terms: Vec<f64> = triples
        .par_iter()
        .map(|&(i, j, k)| {
            let mult = match (i == j, j == k) {
                (true, true) => 1.0,
                (false, false) => 6.0,
                _ => 3.0,
            };
            let a = defect_nodes(&[nodes[i], nodes[j], nodes[k]], disk).a;
            mult * grid.weights[i] * grid.weights[j] * grid.weights[k] * a * a
        })
        .collect();
    Ok(IntegralA2 {
        value: terms.iter().sum(),
        nodes: n,
        region_measure: grid.total_weight(),
        distinct_triples: triples.len(),
        monte_carlo: None,
    })
}

fn sample_region(region: &StarRegion, u: f64) -> f64 {
    let mut t = u * region.measure();
    for &(a, l) in &region.intervals {
        if t <= l {
            return (a + t).rem_euclid(TAU);
        }
        t -= l;
    }
    let &(a, l) = region.intervals.last().expect("non-empty region");
    (a + l).rem_euclid(TAU)
}

/// Uniform Monte-Carlo estimate of the same integral; sample `i` uses
/// stream `i` of the seeded generator.
pub fn integral_a2_mc(
    curve: &BoundaryCurve,
    disk: &Disk,
    region: &StarRegion,
    samples: usize,
    seed: u64,
) -> Result<MonteCarlo> {
    if samples < 2 {
        return Err(invalid("Monte-Carlo integration needs at least 2 samples"));
    }
    if region.measure() <= 0.0 {
        return Err(crate::Error::Empty("star region is empty".into()));
    }
    let vol = region.measure().powi(3);
    let vals: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let t: [f64; 3] = [0, 1, 2].map(|_| sample_region(region, rng.gen::<f64>()));
            let nodes = t.map(|s| Node::at(curve, s));
            let a = defect_nodes(&nodes, disk).a;
            a * a * vol
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / samples as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
    Ok(MonteCarlo {
        samples,
        seed,
        estimate: mean,
        std_error: (var / samples as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzProbe {
    pub pairs: usize,
    pub seed: u64,
    pub scale: f64,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub curvature_bound: f64,
}

fn geodesic(len: f64, a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(len);
    d.min(len - d)
}

/// Max of `|a(x̂) - a(x̂')| / dist(x̂, x̂')` over random pairs, where `x̂'`
/// perturbs each parameter of `x̂` by at most `scale`. The product metric is
/// Euclidean in the three geodesic distances.
pub fn lipschitz_probe(
    curve: &BoundaryCurve,
    disk: &Disk,
    pairs: usize,
    scale: f64,
    seed: u64,
) -> Result<LipschitzProbe> {
    if pairs < 100 {
        return Err(invalid(format!("lipschitz probe needs at least 100 pairs, got {pairs}")));
    }
    if !(scale > 0.0) {
        return Err(invalid("perturbation scale must be positive"));
    }
    let len = curve.length();
    let ratios: Vec<f64> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let t: [f64; 3] = [0, 1, 2].map(|_| rng.gen::<f64>() * len);
            let t2: [f64; 3] = t.map(|s| s + scale * (2.0 * rng.gen::<f64>() - 1.0));
            let d = (0..3).map(|k| geodesic(len, t[k], t2[k]).powi(2)).sum::<f64>().sqrt();
            if d == 0.0 {
                return 0.0;
            }
            let a1 = defect_nodes(&t.map(|s| Node::at(curve, s)), disk).a;
            let a2 = defect_nodes(&t2.map(|s| Node::at(curve, s)), disk).a;
            (a1 - a2).abs() / d
        })
        .collect();
    Ok(LipschitzProbe {
        pairs,
        seed,
        scale,
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        mean_ratio: ratios.iter().sum::<f64>() / pairs as f64,
        curvature_bound: curve.curvature_bound(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::max_inscribed_disk;

    #[test]
    fn circle_has_no_defect() {
        let c = BoundaryCurve::circle();
        let d = max_inscribed_disk(&c);
        for k in 0..20 {
            let t = [0.1 + 0.3 * k as f64, 2.0 + 0.17 * k as f64, 4.5 - 0.05 * k as f64];
            let r = defect_a(&c, &d, t).unwrap();
            assert!(r.a <= 1e-6, "{t:?}: {}", r.a);
        }
        let (p, r) = incircle_candidate(&c, [0.0, 1.0, 3.0]);
        assert!(p.norm() < 1e-12 && r == 0.0);
        assert!(defect_a(&c, &d, [1.0, 1.0 + 1e-8, 3.0]).is_err());
    }

    #[test]
    fn result_satisfies_definition() {
        let c = BoundaryCurve::ellipse(1.3).unwrap();
        let d = max_inscribed_disk(&c);
        let t = [0.3, 1.2, 4.0];
        let r = defect_a(&c, &d, t).unwrap();
        assert!(r.a > 0.1);
        assert!((r.z0 - d.center).norm() <= 0.5 * d.radius + 1e-12);
        let mut l = [0.0; 3];
        for k in 0..3 {
            let (x, tau, _) = c.frame(t[k]);
            let e = crate::geometry::unit(r.alphas[k]);
            assert!(dot(tau, e) <= -r.a + 1e-9);
            assert!(cross(e, r.z0 - x).abs() < 1e-9);
            assert_eq!(dot(r.z0 - x, e) > 0.0, r.signs[k]);
            l[k] = r.alphas[k];
        }
        assert!(r.a <= (shortest_cover3(l[0], l[1], l[2]) - PI).max(0.0) + 1e-9);
        assert!(r.a <= PI);
    }

    #[test]
    fn incircle_of_a_known_triangle() {
        // normals along the sides of the 3-4-5 triangle with vertices 0, 4, 3i
        let nodes = [
            Node { x: Point::new(2.0, 0.0), tau: Point::new(0.0, 1.0) },
            Node { x: Point::new(0.0, 1.0), tau: Point::new(1.0, 0.0) },
            Node { x: Point::new(2.0, 1.5), tau: Point::new(0.6, 0.8) },
        ];
        let (p, r) = incircle_of_normals(&nodes);
        assert!((r - 1.0).abs() < 1e-12 && (p - Point::new(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn candidate_dominance_and_symmetry() {
        let c = BoundaryCurve::rounded_ngon(6).unwrap();
        let d = max_inscribed_disk(&c);
        let triples = [[0.3, 2.2, 4.4], [0.1, 1.0, 3.3], [5.0, 1.7, 3.9]];
        for t in triples {
            let r = defect_a(&c, &d, t).unwrap();
            let (p, _) = incircle_candidate(&c, t);
            if (p - d.center).norm() <= 0.5 * d.radius {
                let nodes = t.map(|s| Node::at(&c, s));
                assert!(r.a >= objective_at(&nodes, p) - 1e-12);
            }
            let perm = defect_a(&c, &d, [t[2], t[0], t[1]]).unwrap();
            assert!((perm.a - r.a).abs() < 1e-9, "{} vs {}", perm.a, r.a);
        }
    }

    #[test]
    fn rigid_motion_invariance() {
        let c = BoundaryCurve::ellipse(1.3).unwrap();
        let moved = c.with_rigid_motion(0.7, Point::new(0.3, -1.1));
        let (d, dm) = (max_inscribed_disk(&c), max_inscribed_disk(&moved));
        for t in [[0.2, 2.3, 4.1], [1.0, 1.5, 5.5]] {
            let a = defect_a(&c, &d, t).unwrap().a;
            let b = defect_a(&moved, &dm, t).unwrap().a;
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn triple_grid_weights() {
        let g = TripleGrid::new(&StarRegion::full(0.1), 24);
        assert!((g.total_weight() - TAU).abs() < 1e-12);
        let r = StarRegion { eta: 0.1, intervals: vec![(6.0, 1.0), (2.0, 0.5)] };
        assert!((TripleGrid::new(&r, 24).total_weight() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn circle_integral_vanishes() {
        let c = BoundaryCurve::circle();
        let d = max_inscribed_disk(&c);
        let v = integral_a2(&c, &d, &StarRegion::full(0.1), 16).unwrap();
        assert!(v.value <= 1e-10);
        assert!(integral_a2(&c, &d, &StarRegion::full(0.1), 7).is_err());
    }

    #[test]
    fn lipschitz_probe_is_seeded() {
        let c = BoundaryCurve::circle();
        let d = max_inscribed_disk(&c);
        let p = lipschitz_probe(&c, &d, 100, 0.05, 3).unwrap();
        assert!(p.max_ratio <= 1e-4);
        let e = BoundaryCurve::rounded_ngon(8).unwrap();
        let de = max_inscribed_disk(&e);
        let p1 = lipschitz_probe(&e, &de, 100, 0.05, 9).unwrap();
        let p2 = lipschitz_probe(&e, &de, 100, 0.05, 9).unwrap();
        assert_eq!(p1.max_ratio.to_bits(), p2.max_ratio.to_bits());
        assert!(p1.max_ratio.is_finite());
    }
}
