use std::f64::consts::{PI, TAU};

use super::region::{continuation_closed, empirical_segment_eta, is_star_shaped, searched_disk};
use super::*;

fn families() -> Vec<BoundaryCurve> {
    vec![
        BoundaryCurve::circle(),
        BoundaryCurve::ellipse(1.2).unwrap(),
        BoundaryCurve::ellipse(2.0).unwrap(),
        BoundaryCurve::rounded_ngon(3).unwrap(),
        BoundaryCurve::rounded_ngon(6).unwrap(),
        BoundaryCurve::rounded_ngon(17).unwrap(),
        BoundaryCurve::dumbbell(0.2, 0.05, 400).unwrap(),
    ]
}

#[test]
fn perimeter_is_two_pi() {
    for c in families() {
        let l = c.integrate(TAU / 128.0, |_, _, _, _| 1.0);
        assert!((l - TAU).abs() < 1e-12, "{:?}: {l}", c.kind());
    }
    for n in [3, 4, 6, 8, 64, 512] {
        let c = BoundaryCurve::rounded_ngon(n).unwrap();
        let total: f64 = c.pieces.iter().map(|p| match p {
            curve::Piece::Segment { len, .. } | curve::Piece::Arc { len, .. } => *len,
            _ => 0.0,
        }).sum();
        assert!((total - TAU).abs() < 1e-12, "N={n}: {total}");
    }
}

#[test]
fn unit_speed_and_frame() {
    for c in families() {
        let n = 2000;
        let h = 1e-6;
        for j in 0..n {
            let s = TAU * (j as f64 + 0.37) / n as f64;
            let (p, t, _) = c.frame(s);
            // central difference of g against the tangent
            let d = (c.point(s + h) - c.point(s - h)) / (2.0 * h);
            assert!((d - t).norm() < 2e-6 * (1.0 + c.curvature_bound()), "{:?} s={s}", c.kind());
            assert!((t.norm() - 1.0).abs() < 1e-12);
            let sm = c.sample(s);
            assert!((sm.outward() - (-I * t)).norm() < 1e-15);
            assert!((sm.point() - p).norm() < 1e-15);
        }
    }
}

#[test]
fn arc_length_parametrization_is_exact_on_the_ellipse() {
    let c = BoundaryCurve::ellipse(2.0).unwrap();
    // chord sums on a fine partition converge to the parameter increment
    let n = 200;
    for j in 0..n {
        let a = TAU * j as f64 / n as f64;
        let b = a + TAU / n as f64;
        let len = crate::numerics::GaussLegendre::g16().integrate(a, b, |s| {
            let h = 1e-5;
            ((c.point(s + h) - c.point(s - h)) / (2.0 * h)).norm()
        });
        assert!((len - (b - a)).abs() < 1e-10 * (b - a) + 1e-11, "{j}: {}", len - (b - a));
    }
}

#[test]
fn curvature_bounds() {
    for c in families() {
        let k = c.curvature_bound();
        for p in c.samples(10_000) {
            assert!(p.kappa.abs() <= k * (1.0 + 1e-9), "{:?}", c.kind());
        }
    }
    for n in [3, 6, 8, 100] {
        assert!(BoundaryCurve::rounded_ngon(n).unwrap().curvature_bound() <= 2.0);
    }
    // closed-form ellipse curvature max a/b² after rescaling
    let c = BoundaryCurve::ellipse(1.2).unwrap();
    let (a, b) = c.ellipse_axes().unwrap();
    let kmax = c.samples(20_000).iter().map(|p| p.kappa).fold(0.0, f64::max);
    assert!((kmax - a / (b * b)).abs() < 1e-6, "{kmax} vs {}", a / (b * b));
    // finite-difference curvature oracle
    let h = 1e-4;
    for j in 0..50 {
        let s = TAU * j as f64 / 50.0;
        let fd = (c.point(s + h) - c.point(s) * 2.0 + c.point(s - h)) / (h * h);
        let k = c.frame(s).2;
        assert!((fd.norm() - k).abs() < 1e-5);
    }
}

#[test]
fn ngon_closed_forms() {
    let l6 = ngon_lambda(6);
    assert!((l6 - TAU / (PI + 3.0)).abs() < 1e-15);
    assert!((l6 - 1.0230547).abs() < 1e-7);
    let c = BoundaryCurve::rounded_ngon(6).unwrap();
    // segment pieces have length λ sin(π/6)
    let seg = c.pieces.iter().find_map(|p| match p {
        curve::Piece::Segment { len, .. } => Some(*len),
        _ => None,
    });
    assert!((seg.unwrap() - l6 * 0.5).abs() < 1e-15);
    let c512 = BoundaryCurve::rounded_ngon(512).unwrap();
    assert!(hausdorff_to_circle(&c512, Point::new(0.0, 0.0)).distance < 1e-4);
}

#[test]
fn inscribed_disks() {
    let d = searched_disk(&BoundaryCurve::circle());
    assert!(d.center.norm() < 1e-10 && (d.radius - 1.0).abs() < 1e-10, "{d:?}");
    let d = searched_disk(&BoundaryCurve::rounded_ngon(6).unwrap());
    assert!((d.radius - ngon_inradius(6)).abs() < 1e-8, "{d:?}");
    assert!((d.radius - 0.954523).abs() < 1e-6);
    let e = BoundaryCurve::ellipse(1.5).unwrap();
    let d = searched_disk(&e);
    let (_, b) = e.ellipse_axes().unwrap();
    assert!((d.radius - b).abs() < 1e-8, "{} vs {b}", d.radius);
    for c in families() {
        let d = max_inscribed_disk(&c);
        let g = searched_disk(&c);
        assert!((d.radius - g.radius).abs() < 1e-8, "{:?}", c.kind());
        assert!(1.0 / c.curvature_bound() <= d.radius + 1e-12 && d.radius <= 1.0 + 1e-12);
    }
}

#[test]
fn inradius_against_distance_transform() {
    // brute-force oracle on a 2048² grid
    let c = BoundaryCurve::rounded_ngon(6).unwrap();
    let [x0, x1, y0, y1] = c.bbox();
    let n = 2048;
    let mut best = f64::INFINITY;
    for j in (n / 2 - 40)..(n / 2 + 40) {
        for i in (n / 2 - 40)..(n / 2 + 40) {
            let p = Point::new(
                x0 + (x1 - x0) * (i as f64 + 0.5) / n as f64,
                y0 + (y1 - y0) * (j as f64 + 0.5) / n as f64,
            );
            best = best.min(c.signed_distance(p));
        }
    }
    let h = (x1 - x0) / n as f64;
    assert!((-best - ngon_inradius(6)).abs() < 2.0 * h);
}

#[test]
fn star_regions() {
    let c = BoundaryCurve::circle();
    let d = max_inscribed_disk(&c);
    assert!(star_region(&c, &d, 0.0).unwrap().is_full());
    let c8 = BoundaryCurve::rounded_ngon(8).unwrap();
    let d8 = max_inscribed_disk(&c8);
    assert!(star_region(&c8, &d8, 1.0).unwrap().is_full());
    let db = BoundaryCurve::dumbbell(0.2, 0.05, 400).unwrap();
    let dd = max_inscribed_disk(&db);
    let r = star_region(&db, &dd, 0.05).unwrap();
    assert!(!r.intervals.is_empty() && !r.is_full(), "{r:?}");
    // every interior sample honours both conditions
    for j in 0..997 {
        let s = TAU * j as f64 / 997.0;
        if r.contains(s) {
            let x = db.point(s);
            assert!((x - dd.center).norm() <= 1.05 * dd.radius + 1e-9);
        }
    }
    let k = c8.curvature_bound();
    let r8 = star_region(&c8, &d8, 1.0 / (4.0 * k)).unwrap();
    assert!(continuation_closed(&c8, &d8, &r8));
}

#[test]
fn segment_clearance_cases() {
    let c = BoundaryCurve::circle();
    for j in 0..32 {
        let x = c.point(TAU * j as f64 / 32.0);
        assert!(segment_clearance(&c, x, Point::new(0.0, 0.0)).unwrap());
    }
    assert!(segment_clearance(&c, Point::new(0.5, 0.0), Point::new(0.0, 0.0)).is_err());
    let db = BoundaryCurve::dumbbell(0.2, 0.05, 400).unwrap();
    let [_, x1, ..] = db.bbox();
    let r = max_inscribed_disk(&db).radius;
    let (left, right) = (Point::new(r - x1, 0.0), Point::new(x1 - r, 0.0));
    // through the neck: clear; over the neck: blocked
    let (s_far, _) = db.nearest(right + Point::new(5.0, 0.0));
    assert!(segment_clearance(&db, db.point(s_far), left).unwrap());
    let (s_top, _) = db.nearest(right + Point::new(0.0, 5.0));
    let z = left + Point::new(0.0, 0.85 * r);
    assert!(!segment_clearance(&db, db.point(s_top), z).unwrap());
    let c6 = BoundaryCurve::rounded_ngon(6).unwrap();
    let d6 = max_inscribed_disk(&c6);
    let eta0 = 1.0 / (8.0 * c6.curvature_bound());
    let rep = segment_lemma_check(&c6, &d6, eta0, 256, 60).unwrap();
    assert!(rep.checked > 0 && rep.failures == 0, "{rep:?}");
    let emp = empirical_segment_eta(&c6, &d6, &[eta0, 0.25, 0.5, 1.0], 64, 20).unwrap();
    assert!(emp.unwrap() >= eta0);
}

#[test]
fn hausdorff_cases() {
    let h = hausdorff_to_circle(&BoundaryCurve::circle(), Point::new(0.0, 0.0));
    assert!(h.distance < 1e-12 && h.method == HausdorffMethod::Radial);
    for n in [6, 8, 32] {
        let c = BoundaryCurve::rounded_ngon(n).unwrap();
        let h = hausdorff_to_circle(&c, Point::new(0.0, 0.0));
        assert!((h.distance - (1.0 - ngon_inradius(n))).abs() < 1e-12, "N={n}: {}", h.distance);
    }
    let shifted = BoundaryCurve::circle().translated(Point::new(0.1, 0.0));
    let h = hausdorff_to_circle(&shifted, Point::new(0.0, 0.0));
    assert!((h.distance - 0.1).abs() < 1e-12, "{}", h.distance);
    let best = best_circle_center(&shifted, CenterObjective::Hausdorff);
    assert!((best - Point::new(0.1, 0.0)).norm() < 1e-6, "{best}");
    let db = BoundaryCurve::dumbbell(0.2, 0.05, 400).unwrap();
    // the neck center sees the whole boundary; a lobe center does not
    assert!(is_star_shaped(&db, Point::new(0.0, 0.0)));
    let dd = max_inscribed_disk(&db);
    assert!(!is_star_shaped(&db, dd.center));
    let h = hausdorff_to_circle(&db, dd.center);
    assert_eq!(h.method, HausdorffMethod::TwoSided);
}

#[test]
fn geom1_holds_on_families() {
    for c in families() {
        let d = max_inscribed_disk(&c);
        let rep = geom1_check(&c, &d, 10_000);
        assert_eq!(rep.violations, 0, "{:?}: {rep:?}", c.kind());
    }
}

#[test]
fn origin_shift_and_rigid_motion_invariance() {
    for c in families() {
        let shifted = c.with_origin_shift(0.731);
        let d0 = max_inscribed_disk(&c);
        let d1 = max_inscribed_disk(&shifted);
        assert!((d0.radius - d1.radius).abs() < 1e-9);
        assert!((c.area() - shifted.area()).abs() < 1e-9);
        assert!((c.point(0.731) - shifted.point(0.0)).norm() < 1e-12);
        let moved = c.with_rigid_motion(0.4, Point::new(0.3, -0.2));
        assert!((moved.area() - c.area()).abs() < 1e-9);
        let d2 = max_inscribed_disk(&moved);
        assert!((d2.radius - d0.radius).abs() < 1e-9, "{:?}", c.kind());
    }
}

#[test]
fn isoperimetric_sanity() {
    assert!((BoundaryCurve::circle().area() - PI).abs() < 1e-12);
    for c in families().into_iter().skip(1) {
        let a = c.area();
        assert!(a < PI - 1e-8, "{:?}: {a}", c.kind());
    }
    let c = BoundaryCurve::ellipse(1.0).unwrap();
    assert!((c.area() - PI).abs() < 1e-10);
}

#[test]
fn segment_intersections_and_rays() {
    let c = BoundaryCurve::rounded_ngon(8).unwrap();
    let hits = c.intersect_segment(Point::new(-2.0, 0.1), Point::new(2.0, 0.1));
    assert_eq!(hits.len(), 2);
    for &(_, s) in &hits {
        assert!(c.point(s).im - 0.1 < 1e-12);
    }
    let e = BoundaryCurve::ellipse(1.7).unwrap();
    let (t, s, p) = e.ray_exit(Point::new(0.1, 0.05), Point::new(0.6, 0.8), 0.0).unwrap();
    assert!((e.point(s) - p).norm() < 1e-10, "{t}");
    assert!(e.distance_to_boundary(p) < 1e-10);
}

#[test]
fn curve_spec_parsing() {
    assert_eq!(CurveSpec::parse("kind=rounded_ngon,n=8").unwrap(), CurveSpec::RoundedNgon { n: 8 });
    assert_eq!(CurveSpec::parse("rounded_ngon:n=8").unwrap(), CurveSpec::RoundedNgon { n: 8 });
    assert_eq!(CurveSpec::parse("circle").unwrap(), CurveSpec::Circle);
    let e = CurveSpec::parse("kind=ellipse,aspekt=2").unwrap_err().to_string();
    assert!(e.contains("aspekt"), "{e}");
    let e = CurveSpec::parse("kind=rounded_ngon,n=two").unwrap_err().to_string();
    assert!(e.contains("`n`"), "{e}");
    let e = CurveSpec::parse("kind=ellipse,aspect=0.5").unwrap().build().unwrap_err().to_string();
    assert!(e.contains("aspect"), "{e}");
    let spec = CurveSpec::parse("kind=ellipse,aspect=1.3").unwrap();
    assert_eq!(CurveSpec::parse(&spec.to_string()).unwrap(), spec);
}

#[test]
fn spline_roundtrip_through_csv() {
    let dir = std::env::temp_dir().join(format!("eikstab-spline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("pts.csv");
    let mut text = String::from("x,y\n");
    for j in 0..64 {
        let t = TAU * j as f64 / 64.0;
        text += &format!("{},{}\n", 1.3 * t.cos(), t.sin() + 0.05 * (3.0 * t).sin());
    }
    std::fs::write(&path, text).unwrap();
    let c = CurveSpec::Spline { points: path.clone() }.build().unwrap();
    assert!((c.integrate(TAU / 128.0, |_, _, _, _| 1.0) - TAU).abs() < 1e-10);
    let mut buf = Vec::new();
    spec::write_samples_csv(&c, 16, &mut buf).unwrap();
    let s = String::from_utf8(buf).unwrap();
    assert_eq!(s.lines().count(), 17);
    assert!(s.starts_with("s,x,y,tau_x,tau_y,kappa"));
    std::fs::remove_dir_all(&dir).ok();
}
