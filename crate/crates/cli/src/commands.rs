use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::path::PathBuf;

use clap::Args;
use eikstab::defect::{defect_a, integral_a2, integral_a2_mc, lipschitz_probe};
use eikstab::energy::{evaluate, mollify_field, Functional};
use eikstab::fields::{rankine_hugoniot_defect, UnitField};
use eikstab::geometry::{
    geom1_check, max_inscribed_disk, spec::write_samples_csv, star_region, BoundaryCurve, CurveSpec,
    Point, StarRegion,
};
use eikstab::kinetic::{cost_table, nu_total, wall_cost_ars, wall_cost_branches, CostKind};
use eikstab::lagrangian::{
    dissipation_decomposition, influx_check, planar_jump_rate_quadrature, representation_check,
    sample_ensemble, Bins, EnsembleSpec, RegionFilter,
};
use eikstab::report::Assertion;
use eikstab::stability::{
    cauchy_schwarz_chain, check_main2, lemma_aux_check, normal_deviation, sharpness_sweep,
};
use serde_json::json;

use crate::{Failure, Global, Outcome, Table};

fn parse_curve(s: &str) -> Result<CurveSpec, String> {
    CurveSpec::parse(s).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum FieldChoice {
    Distgrad,
    Vortex,
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    /// Eikonal field: distance gradient (rounded polygons) or vortex.
    #[arg(long, value_enum, default_value = "distgrad")]
    field: FieldChoice,
    /// Vortex orientation, +1 or -1.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    alpha: f64,
}

impl FieldArgs {
    fn build(&self, curve: &BoundaryCurve) -> Result<UnitField, Failure> {
        Ok(match self.field {
            FieldChoice::Distgrad => UnitField::distgrad(curve)?,
            FieldChoice::Vortex => UnitField::vortex(curve, max_inscribed_disk(curve).center, self.alpha)?,
        })
    }
}

fn build_curve(spec: &CurveSpec) -> Result<BoundaryCurve, Failure> {
    Ok(spec.build()?)
}

fn require_seed(global: &Global, command: &str) -> Result<u64, Failure> {
    global
        .seed
        .ok_or_else(|| Failure::Usage(format!("`{command}` is stochastic: --seed is required")))
}

#[derive(Args, Debug)]
pub struct GenDomain {
    #[arg(long, value_parser = parse_curve)]
    curve: CurveSpec,
    /// Number of equally spaced samples in the CSV table.
    #[arg(long, default_value_t = 512)]
    samples: usize,
    /// Sample table path (`s,x,y,tau_x,tau_y,kappa`).
    #[arg(long)]
    samples_csv: Option<PathBuf>,
}

impl GenDomain {
    pub fn run(&self, _: &Global) -> Result<Outcome, Failure> {
        let curve = build_curve(&self.curve)?;
        if let Some(p) = &self.samples_csv {
            let mut buf = Vec::new();
            write_samples_csv(&curve, self.samples, &mut buf)?;
            std::fs::write(p, buf)?;
        }
        let disk = max_inscribed_disk(&curve);
        let g1 = geom1_check(&curve, &disk, 10_000);
        let closure = (curve.point(TAU) - curve.point(0.0)).norm();
        Ok(Outcome {
            results: json!({
                "curve": self.curve,
                "length": curve.length(),
                "area": curve.area(),
                "centroid": curve.centroid(),
                "curvature_bound": curve.curvature_bound(),
                "inscribed_disk": disk,
                "geom1": g1,
            }),
            assertions: vec![
                Assertion::near("length", curve.length(), TAU, 1e-9),
                Assertion::at_most("closure_gap", closure, 1e-9),
                Assertion::at_most("geom1_violations", g1.violations as f64, 0.0),
            ],
            table: None,
        })
    }
}

#[derive(Args, Debug)]
pub struct Defect {
    #[arg(long, value_parser = parse_curve)]
    curve: CurveSpec,
    /// Arc-length parameters `s1,s2,s3`.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    triple: Vec<f64>,
}

impl Defect {
    pub fn run(&self, _: &Global) -> Result<Outcome, Failure> {
        let t: [f64; 3] = self
            .triple
            .clone()
            .try_into()
            .map_err(|_| Failure::Usage("--triple needs exactly three values".into()))?;
        let curve = build_curve(&self.curve)?;
        let disk = max_inscribed_disk(&curve);
        let r = defect_a(&curve, &disk, t)?;
        Ok(Outcome {
            assertions: vec![Assertion::at_least("a", r.a, 0.0)],
            results: json!({ "curve": self.curve, "disk": disk, "triple": t, "defect": r }),
            table: None,
        })
    }
}

#[derive(Args, Debug)]
pub struct DefectIntegral {
    #[arg(long, value_parser = parse_curve)]
    curve: CurveSpec,
    /// `full` or `star:<eta>`.
    #[arg(long, default_value = "full")]
    region: String,
    /// Quadrature nodes per factor.
    #[arg(long, default_value_t = 24)]
    nodes: usize,
    /// Monte-Carlo samples for a cross-check (needs --seed).
    #[arg(long)]
    mc: Option<usize>,
    /// Pairs for the Lipschitz probe (needs --seed).
    #[arg(long)]
    lipschitz_pairs: Option<usize>,
}

impl DefectIntegral {
    pub fn run(&self, global: &Global) -> Result<Outcome, Failure> {
        let curve = build_curve(&self.curve)?;
        let disk = max_inscribed_disk(&curve);
        let region = if self.region == "full" {
            StarRegion::full(0.0)
        } else if let Some(eta) = self.region.strip_prefix("star:") {
            let eta: f64 = eta
                .parse()
                .map_err(|_| Failure::Usage(format!("--region: cannot parse eta `{eta}`")))?;
            star_region(&curve, &disk, eta)?
        } else {
            return Err(Failure::Usage(format!(
                "--region: expected `full` or `star:<eta>`, got `{}`",
                self.region
            )));
        };
        let mut q = integral_a2(&curve, &disk, &region, self.nodes)?;
        if let Some(samples) = self.mc {
            let seed = require_seed(global, "defect-integral --mc")?;
            q.monte_carlo = Some(integral_a2_mc(&curve, &disk, &region, samples, seed)?);
        }
        let lip = match self.lipschitz_pairs {
            Some(pairs) => {
                let seed = require_seed(global, "defect-integral --lipschitz-pairs")?;
                Some(lipschitz_probe(&curve, &disk, pairs, 0.05, seed)?)
            }
            None => None,
        };
        let mut assertions = vec![Assertion::at_least("integral", q.value, 0.0)];
        if let Some(p) = &lip {
            assertions.push(Assertion::at_most(
                "lipschitz_ratio_over_k",
                p.max_ratio / p.curvature_bound,
                50.0,
            ));
        }
        Ok(Outcome {
            results: json!({
                "curve": self.curve,
                "region": region,
                "integral": q,
                "lipschitz": lip,
            }),
            assertions,
            table: None,
        })
    }
}

#[derive(Args, Debug)]
pub struct Nu {
    #[arg(long, value_parser = parse_curve)]
    curve: CurveSpec,
    #[command(flatten)]
    field: FieldArgs,
    /// `cubic` or `ars`.
    #[arg(long, default_value = "ars")]
    cost: String,
    /// Rows of the cost table (`amplitude, c_ars, c_cubic`) used for --csv/--plot.
    #[arg(long, default_value_t = 64)]
    table_rows: usize,
}

impl Nu {
    pub fn run(&self, _: &Global) -> Result<Outcome, Failure> {
        let cost: CostKind = self.cost.parse()?;
        let curve = build_curve(&self.curve)?;
        let field = self.field.build(&curve)?;
        let rep = nu_total(&field, cost)?;
        let rh = field.jumps().iter().map(rankine_hugoniot_defect).fold(0.0, f64::max);
        let rows = cost_table(self.table_rows.max(1));
        let rows: Vec<_> = rows.into_iter().filter(|r| r.0 > 0.0).collect();
        Ok(Outcome {
            results: json!({ "curve": self.curve, "dissipation": rep }),
            assertions: vec![
                Assertion::at_least("nu", rep.nu_total, 0.0),
                Assertion::at_most("rankine_hugoniot_max", rh, 1e-12),
            ],
            table: Some(Table {
                title: "jump cost".into(),
                x_label: "amplitude".into(),
                y_label: "cost per length".into(),
                x_name: "amplitude".into(),
                xs: rows.iter().map(|r| r.0).collect(),
                columns: vec![
                    ("c_ars".into(), rows.iter().map(|r| r.1).collect()),
                    ("c_cubic".into(), rows.iter().map(|r| r.2).collect()),
                ],
            }),
        })
    }
}

#[derive(Args, Debug)]
pub struct Lagrangian {
    #[arg(long, value_parser = parse_curve)]
    curve: CurveSpec,
    #[command(flatten)]
    field: FieldArgs,
    /// Expected total number of characteristics (interior and boundary-born).
    #[arg(long, default_value_t = 200_000)]
    curves: usize,
    #[arg(long, default_value_t = 3.0 * PI)]
    horizon: f64,
    /// Time of the representation check.
    #[arg(long, default_value_t = PI / 2.0)]
    t: f64,
    /// Spatial and angular bins `nx,ny,ns` of the representation check.
    #[arg(long, value_delimiter = ',', default_value = "8,8,8")]
    bins: Vec<usize>,
    /// Breakpoint CSV of up to 1000 trajectories.
    #[arg(long)]
    trajectories_csv: Option<PathBuf>,
}

impl Lagrangian {
    pub fn run(&self, global: &Global) -> Result<Outcome, Failure> {
        let seed = require_seed(global, "lagrangian")?;
        let [nx, ny, ns]: [usize; 3] = self
            .bins
            .clone()
            .try_into()
            .map_err(|_| Failure::Usage("--bins needs three values".into()))?;
        let curve = build_curve(&self.curve)?;
        let field = self.field.build(&curve)?;
        let spec = EnsembleSpec::with_total_over(&field, self.curves, self.horizon, seed);
        let ens = sample_ensemble(&field, &spec)?;
        if let Some(p) = &self.trajectories_csv {
            let mut buf = Vec::new();
            ens.write_breakpoints_csv(1000, &mut buf)?;
            std::fs::write(p, buf)?;
        }
        let rep = representation_check(&ens, &field, self.t, Bins { nx, ny, ns })?;
        let influx = if ens.births.is_empty() {
            None
        } else {
            Some(influx_check(&ens, &field, 16, 16)?)
        };
        let diss = dissipation_decomposition(&ens, RegionFilter::Full)?;
        let nu = nu_total(&field, CostKind::ArsWall)?.nu_total;
        let mut assertions = vec![
            Assertion::at_most("representation_tv", rep.tv, 0.08),
            Assertion::at_most("junction_stops", ens.junction_stops() as f64, 0.0),
        ];
        if let Some(i) = &influx {
            assertions.push(Assertion::at_most("influx_tv", i.tv, 0.05));
        }
        if nu > 0.0 {
            assertions.push(Assertion::within("rate_over_nu", diss.rate / nu, Some(0.85), Some(1.15)));
        } else {
            assertions.push(Assertion::at_most("rate", diss.rate, 0.0));
        }
        Ok(Outcome {
            results: json!({
                "curve": self.curve,
                "spec": spec,
                "trajectories": ens.len(),
                "interior": ens.interior.len(),
                "boundary": ens.boundary.len(),
                "junction_stops": ens.junction_stops(),
                "epigraph_mass": ens.epigraph_mass,
                "influx_rate": ens.influx_rate,
                "representation": rep,
                "influx": influx,
                "dissipation": diss,
                "nu_ars": nu,
            }),
            assertions,
            table: None,
        })
    }
}

#[derive(Args, Debug)]
pub struct Energy {
    #[arg(long, value_parser = parse_curve)]
    curve: CurveSpec,
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, default_value_t = 0.02)]
    eps: f64,
    #[arg(long, default_value_t = 1024)]
    grid: usize,
    /// `F` or `AG`.
    #[arg(long, default_value = "F")]
    functional: String,
    /// Raster dump `x,y,m1,m2,m3,mask`.
    #[arg(long)]
    raster_csv: Option<PathBuf>,
    /// Keep every k-th cell per direction in the raster dump.
    #[arg(long, default_value_t = 4)]
    raster_stride: usize,
}

impl Energy {
    pub fn run(&self, _: &Global) -> Result<Outcome, Failure> {
        let functional: Functional = self.functional.parse()?;
        let curve = build_curve(&self.curve)?;
        let field = self.field.build(&curve)?;
        let grid = mollify_field(&field, self.eps, self.grid)?;
        if let Some(p) = &self.raster_csv {
            let mut buf = Vec::new();
            grid.write_raster_csv(self.raster_stride, &mut buf)?;
            std::fs::write(p, buf)?;
        }
        let e = evaluate(&grid, self.eps, functional)?;
        let nu_cubic = nu_total(&field, CostKind::Cubic)?.nu_total;
        Ok(Outcome {
            results: json!({ "curve": self.curve, "energy": e, "nu_cubic": nu_cubic, "max_norm": grid.max_norm() }),
            assertions: vec![
                Assertion::at_least("dirichlet", e.dirichlet, 0.0),
                Assertion::at_least("magnetostatic", e.magnetostatic, 0.0),
                Assertion::at_least("penalty", e.penalty, 0.0),
                Assertion::at_most("max_norm", grid.max_norm(), 1.0 + 1e-12),
            ],
            table: None,
        })
    }
}

#[derive(Args, Debug)]
pub struct Stability {
    #[arg(long, value_parser = parse_curve)]
    curve: CurveSpec,
    #[command(flatten)]
    field: FieldArgs,
}

impl Stability {
    pub fn run(&self, _: &Global) -> Result<Outcome, Failure> {
        let curve = build_curve(&self.curve)?;
        let field = self.field.build(&curve)?;
        let rep = check_main2(&curve, &field)?;
        let center = Point::new(rep.best_center[0], rep.best_center[1]);
        let aux = lemma_aux_check(&curve, center).ok();
        let mut assertions = vec![
            Assertion::at_least("lhs_normal_dev", rep.lhs_normal_dev, 0.0),
            Assertion::holds("cauchy_schwarz", rep.cauchy_schwarz.holds),
            Assertion::holds("best_center_inside", curve.contains(center)),
        ];
        if let Some(a) = &aux {
            assertions.push(Assertion::holds("lemma_aux", a.pass));
        }
        Ok(Outcome {
            results: json!({ "curve": self.curve, "report": rep, "lemma_aux": aux }),
            assertions,
            table: None,
        })
    }
}

#[derive(Args, Debug)]
pub struct Sharpness {
    /// Polygon sizes.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    n: Vec<usize>,
    /// `cubic` or `ars`.
    #[arg(long, default_value = "ars")]
    cost: String,
}

impl Sharpness {
    pub fn run(&self, _: &Global) -> Result<Outcome, Failure> {
        let cost: CostKind = self.cost.parse()?;
        let table = sharpness_sweep(&self.n, cost)?;
        let mut assertions = Vec::new();
        if let Some(s) = &table.slopes {
            assertions.push(Assertion::near("slope_lhs", s.lhs.slope, -2.0, 0.15));
            assertions.push(Assertion::near("slope_nu", s.nu.slope, -2.0, 0.15));
        }
        let limit = match cost {
            CostKind::ArsWall => 2.0 * PI.powi(3) / 3.0,
            CostKind::Cubic => 4.0 * PI.powi(3),
        };
        if let Some(last) = table.rows.iter().filter(|r| r.n >= 64).last() {
            assertions.push(Assertion::near("n2_nu_over_limit", last.n2_nu / limit, 1.0, 0.02));
        }
        let xs: Vec<f64> = table.rows.iter().map(|r| r.n as f64).collect();
        let columns = table.series().into_iter().map(|s| (s.label, s.ys)).collect();
        Ok(Outcome {
            results: json!({ "sweep": table, "n2_nu_limit": limit }),
            assertions,
            table: Some(Table {
                title: "rounded polygons".into(),
                x_label: "N".into(),
                y_label: "value".into(),
                x_name: "n".into(),
                xs,
                columns,
            }),
        })
    }
}

#[derive(Args, Debug)]
pub struct Selftest {
    /// Only the fast tier.
    #[arg(long)]
    quick: bool,
}

/// Points of the additive golden-ratio sequence on `[0, 2π)`.
fn weyl(k: usize) -> f64 {
    const G: f64 = 0.618_033_988_749_894_8;
    TAU * ((k as f64 + 1.0) * G).fract()
}

impl Selftest {
    pub fn run(&self, _: &Global) -> Result<Outcome, Failure> {
        let mut a = Vec::new();
        let origin = Point::new(0.0, 0.0);
        let circle = BoundaryCurve::circle();
        let disk = max_inscribed_disk(&circle);
        let mut worst = 0.0f64;
        for k in 0..200 {
            let t = [weyl(3 * k), weyl(3 * k + 1), weyl(3 * k + 2)];
            if let Ok(r) = defect_a(&circle, &disk, t) {
                worst = worst.max(r.a);
            }
        }
        a.push(Assertion::at_most("disk_defect_max", worst, 1e-6));
        a.push(Assertion::at_most("disk_normal_deviation", normal_deviation(&circle, origin)?, 1e-10));
        let vortex = UnitField::vortex(&circle, origin, -1.0)?;
        a.push(Assertion::at_most("vortex_nu", nu_total(&vortex, CostKind::ArsWall)?.nu_total, 0.0));
        let [b0, b1] = wall_cost_branches(FRAC_PI_4);
        a.push(Assertion::at_most("wall_cost_continuity", (b0 - b1).abs(), 1e-12));
        a.push(Assertion::near("wall_cost_1", wall_cost_ars(1.0)?, 0.0931005, 1e-6));
        a.push(Assertion::near("wall_cost_2", wall_cost_ars(2.0)?, 0.8284271, 1e-6));
        let x = 0.01f64;
        a.push(Assertion::near("wall_cost_small_ratio", wall_cost_ars(2.0 * x.sin())? / x.powi(3), 2.0 / 3.0, 2.0 / 300.0));
        let x = PI / 8.0;
        a.push(Assertion::near(
            "planar_jump_quadrature",
            planar_jump_rate_quadrature(x),
            4.0 * (x.sin() - x * x.cos()),
            1e-10,
        ));
        for n in [3usize, 6, 8, 64] {
            let c = BoundaryCurve::rounded_ngon(n)?;
            a.push(Assertion::near(format!("ngon{n}_length"), c.length(), TAU, 1e-9));
            let f = UnitField::distgrad(&c)?;
            let rh = f.jumps().iter().map(rankine_hugoniot_defect).fold(0.0, f64::max);
            a.push(Assertion::at_most(format!("ngon{n}_rankine_hugoniot"), rh, 1e-12));
        }
        let aux = lemma_aux_check(&circle, origin)?;
        a.push(Assertion::holds("circle_lemma_aux", aux.pass));
        let e = BoundaryCurve::ellipse(1.2)?;
        a.push(Assertion::holds("ellipse_cauchy_schwarz", cauchy_schwarz_chain(&e, e.centroid())?.holds));
        if !self.quick {
            let t = sharpness_sweep(&[8, 16, 32, 64], CostKind::ArsWall)?;
            if let Some(s) = &t.slopes {
                a.push(Assertion::near("sharpness_slope_lhs", s.lhs.slope, -2.0, 0.15));
                a.push(Assertion::near("sharpness_slope_hausdorff", s.hausdorff.slope, -2.0, 0.15));
                a.push(Assertion::near("sharpness_slope_l4", s.l4.slope, -4.0, 0.3));
            }
            let last = t.rows.last().map_or(f64::NAN, |r| r.n2_nu);
            a.push(Assertion::near("n2_nu_ars_limit_ratio", last / (2.0 * PI.powi(3) / 3.0), 1.0, 0.02));
            for n in [6usize, 12, 24, 48] {
                let c = BoundaryCurve::rounded_ngon(n)?;
                a.push(Assertion::holds(format!("ngon{n}_lemma_aux"), lemma_aux_check(&c, origin)?.pass));
            }
        }
        let passed = a.iter().filter(|x| x.pass).count();
        Ok(Outcome {
            results: json!({ "tier": if self.quick { "quick" } else { "full" }, "checks": a.len(), "passed": passed }),
            assertions: a,
            table: None,
        })
    }
}
