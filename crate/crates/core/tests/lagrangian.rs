use std::f64::consts::PI;

use eikstab::fields::UnitField;
use eikstab::geometry::*;
use eikstab::kinetic::{nu_total, CostKind};
use eikstab::lagrangian::*;

fn ensemble(curve: BoundaryCurve, curves: usize, seed: u64) -> (UnitField, Ensemble) {
    let f = UnitField::distgrad(&curve).unwrap();
    let e = sample_ensemble(&f, &EnsembleSpec::with_total(&f, curves, seed)).unwrap();
    (f, e)
}

#[test]
fn pentagon_jump_rate_matches_nu() {
    let (f, e) = ensemble(BoundaryCurve::rounded_ngon(5).unwrap(), 150_000, 5);
    let nu = nu_total(&f, CostKind::ArsWall).unwrap().nu_total;
    let d = dissipation_decomposition(&e, RegionFilter::Full).unwrap();
    assert!(d.events > 0);
    assert!((d.rate / nu - 1.0).abs() < 0.15, "{} vs {nu}", d.rate);
    assert_eq!(e.junction_stops(), 0);
}

#[test]
fn trajectories_are_straight_inside_the_domain() {
    let (f, e) = ensemble(BoundaryCurve::rounded_ngon(6).unwrap(), 4_000, 9);
    let c = f.curve();
    for (tr, w) in e.trajectories() {
        assert!(w > 0.0);
        assert!(tr.t_plus > tr.t_minus && tr.t_plus - tr.t_minus <= e.spec.horizon + 1e-12);
        assert_eq!(tr.breakpoints.len(), 1 + tr.reflections + tr.crossings);
        let mu: f64 = tr.breakpoints.iter().map(|b| b.dmu).sum();
        assert!((mu - tr.mu).abs() < 1e-12 && tr.mu >= 0.0);
        for b in &tr.breakpoints {
            assert!(c.signed_distance(b.x) <= 1e-9);
        }
        // breakpoint positions follow from the previous one by free flight
        for w in tr.breakpoints.windows(2) {
            let p = w[0].x + Point::from_polar(1.0, w[0].s) * (w[1].t - w[0].t);
            assert!((p - w[1].x).norm() < 1e-9);
        }
        if tr.termination == Termination::Boundary {
            assert!(c.distance_to_boundary(tr.end) < 1e-8);
        }
        let mid = 0.5 * (tr.t_minus + tr.t_plus);
        let (x, _) = tr.state_at(mid).unwrap();
        assert!(c.signed_distance(x) <= 1e-9);
    }
}

#[test]
fn vortex_curves_never_dissipate() {
    let f = UnitField::vortex(&BoundaryCurve::circle(), Point::new(0.0, 0.0), -1.0).unwrap();
    let e = sample_ensemble(&f, &EnsembleSpec::with_total(&f, 20_000, 4)).unwrap();
    assert!(e.trajectories().all(|(t, _)| t.mu == 0.0 && t.reflections == 0));
    assert_eq!(dissipation_decomposition(&e, RegionFilter::Full).unwrap().rate, 0.0);
}

#[test]
fn no_dissipation_away_from_the_jumps() {
    let (f, e) = ensemble(BoundaryCurve::rounded_ngon(8).unwrap(), 50_000, 13);
    // halfway between the first two jump directions
    let mut dirs: Vec<f64> = f
        .jumps()
        .iter()
        .map(|j| if j.a.norm() > j.b.norm() { j.a.arg() } else { j.b.arg() })
        .collect();
    dirs.sort_by(f64::total_cmp);
    let th = 0.5 * (dirs[0] + dirs[1]);
    let center = Point::from_polar(0.7, th);
    let gap = f.jumps().iter().map(|j| j.distance(center)).fold(f64::INFINITY, f64::min);
    assert!(gap > 0.2);
    let away = dissipation_decomposition(&e, RegionFilter::Disk { center, radius: 0.1 }).unwrap();
    assert_eq!(away.events, 0);
    assert_eq!(away.rate, 0.0);
    let full = dissipation_decomposition(&e, RegionFilter::Full).unwrap();
    assert!(full.rate > 0.0);
}

#[test]
fn seeds_change_samples_not_statistics() {
    let (f, a) = ensemble(BoundaryCurve::rounded_ngon(8).unwrap(), 60_000, 1);
    let (_, b) = ensemble(BoundaryCurve::rounded_ngon(8).unwrap(), 60_000, 2);
    assert_ne!(a.births.first().map(|x| x.sb), b.births.first().map(|x| x.sb));
    let ra = dissipation_decomposition(&a, RegionFilter::Full).unwrap();
    let rb = dissipation_decomposition(&b, RegionFilter::Full).unwrap();
    let se = (ra.std_error.powi(2) + rb.std_error.powi(2)).sqrt();
    assert!((ra.rate - rb.rate).abs() < 5.0 * se, "{} vs {} (se {se})", ra.rate, rb.rate);
    let bins = Bins { nx: 6, ny: 6, ns: 6 };
    for e in [&a, &b] {
        let r = representation_check(e, &f, PI / 2.0, bins).unwrap();
        assert!((r.mass_ratio - 1.0).abs() < 0.02 && r.tv < 0.1, "{r:?}");
    }
}
