use eikstab::energy::*;
use eikstab::fields::UnitField;
use eikstab::geometry::BoundaryCurve;

fn octagon(eps: f64, n: usize) -> (EnergyBreakdown, EnergyBreakdown) {
    let f = UnitField::distgrad(&BoundaryCurve::rounded_ngon(8).unwrap()).unwrap();
    let g = mollify_field(&f, eps, n).unwrap();
    (evaluate_f_eps(&g, eps).unwrap(), evaluate_e_ag(&g, eps).unwrap())
}

#[test]
fn octagon_energy_is_resolved() {
    let (a, ag) = octagon(0.04, 512);
    let (b, _) = octagon(0.04, 1024);
    assert!((a.total / b.total - 1.0).abs() < 0.02, "{} vs {}", a.total, b.total);
    assert!((a.dirichlet / b.dirichlet - 1.0).abs() < 0.05);
    // the stray field shrinks with h; its relative change says nothing
    assert!(b.magnetostatic < a.magnetostatic);
    // grid F and E_AG differ by the magnetostatic and m₃ terms only
    assert!((a.total - ag.total - a.magnetostatic - a.m3_term).abs() < 1e-10 * a.total);
    assert_eq!(ag.stray_l2_sq, a.stray_l2_sq);
}

#[test]
fn energy_drops_with_epsilon() {
    let (coarse, _) = octagon(0.08, 512);
    let (fine, _) = octagon(0.04, 512);
    assert!(fine.total < coarse.total);
    for e in [&coarse, &fine] {
        assert!(e.dirichlet > 0.0 && e.penalty >= 0.0 && e.m3_term == 0.0);
    }
}
