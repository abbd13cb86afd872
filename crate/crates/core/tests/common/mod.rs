#![allow(dead_code)]

use eikstab::defect::{objective_at, Node};
use eikstab::geometry::{BoundaryCurve, Disk, Point};

/// Exhaustive search for `a`: a `g×g` Cartesian grid over the closed disk
/// `B_{R/2}(x₀)` (all 8 sign choices at every node), then `zooms` rounds that
/// re-grid a window a quarter the size around each of the `keep` best nodes.
pub fn brute_force_a(curve: &BoundaryCurve, disk: &Disk, triple: [f64; 3], g: usize, zooms: usize, keep: usize) -> f64 {
    let nodes = triple.map(|s| Node::at(curve, s));
    let rad = 0.5 * disk.radius;
    let scan = |center: Point, half: f64, out: &mut Vec<(f64, Point)>| {
        let h = 2.0 * half / (g - 1) as f64;
        for i in 0..g {
            for j in 0..g {
                let z = center + Point::new(-half + h * i as f64, -half + h * j as f64);
                if (z - disk.center).norm() <= rad {
                    out.push((objective_at(&nodes, z), z));
                }
            }
        }
    };
    let mut pts = Vec::new();
    scan(disk.center, rad, &mut pts);
    let mut half = rad;
    for _ in 0..zooms {
        pts.sort_by(|a, b| b.0.total_cmp(&a.0));
        pts.truncate(keep);
        half *= 0.25;
        let centers: Vec<Point> = pts.iter().map(|p| p.1).collect();
        for c in centers {
            scan(c, half, &mut pts);
        }
    }
    pts.iter().map(|p| p.0).fold(0.0, f64::max)
}
