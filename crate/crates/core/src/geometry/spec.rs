//! Text curve specs (`kind=rounded_ngon,n=8` or `rounded_ngon:n=8`) and CSV
//! sample tables.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{BoundaryCurve, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveSpec {
    Circle,
    Ellipse { aspect: f64 },
    RoundedNgon { n: usize },
    Spline { points: PathBuf },
    Dumbbell { delta: f64, fillet: f64 },
}

fn spec_err(msg: impl Into<String>) -> Error {
    Error::CurveSpec(msg.into())
}

impl CurveSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (head, rest) = match text.split_once(':') {
            Some((h, r)) if !h.contains('=') => (Some(h.trim()), r),
            None if !text.contains('=') => (Some(text), ""),
            _ => (None, text),
        };
        let mut kind = head.map(str::to_string);
        let mut kv: Vec<(String, String)> = Vec::new();
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| spec_err(format!("expected key=value, got `{part}`")))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k == "kind" {
                if kind.is_some() {
                    return Err(spec_err("key `kind` given twice"));
                }
                kind = Some(v);
            } else {
                kv.push((k, v));
            }
        }
        let kind = kind.ok_or_else(|| spec_err("missing key `kind`"))?;
        let allowed: &[&str] = match kind.as_str() {
            "circle" => &[],
            "ellipse" => &["aspect"],
            "rounded_ngon" | "ngon" => &["n"],
            "spline" => &["points"],
            "dumbbell" => &["delta", "fillet"],
            other => return Err(spec_err(format!("unknown value `{other}` for key `kind`"))),
        };
        if let Some((k, _)) = kv.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(spec_err(format!("unknown key `{k}` for kind `{kind}`")));
        }
        let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let num = |key: &str, default: Option<f64>| -> Result<f64> {
            match get(key) {
                Some(v) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| spec_err(format!("key `{key}`: cannot parse `{v}` as a number"))),
                None => default.ok_or_else(|| spec_err(format!("missing key `{key}`"))),
            }
        };
        Ok(match kind.as_str() {
            "circle" => CurveSpec::Circle,
            "ellipse" => CurveSpec::Ellipse {
                aspect: num("aspect", None)?,
            },
            "rounded_ngon" | "ngon" => {
                let v = get("n").ok_or_else(|| spec_err("missing key `n`"))?;
                let n = v
                    .parse::<usize>()
                    .map_err(|_| spec_err(format!("key `n`: cannot parse `{v}` as an integer")))?;
                CurveSpec::RoundedNgon { n }
            }
            "spline" => CurveSpec::Spline {
                points: PathBuf::from(get("points").ok_or_else(|| spec_err("missing key `points`"))?),
            },
            _ => CurveSpec::Dumbbell {
                delta: num("delta", Some(0.2))?,
                fillet: num("fillet", Some(0.05))?,
            },
        })
    }

    pub fn build(&self) -> Result<BoundaryCurve> {
        match self {
            CurveSpec::Circle => Ok(BoundaryCurve::circle()),
            CurveSpec::Ellipse { aspect } => BoundaryCurve::ellipse(*aspect)
                .map_err(|e| spec_err(format!("key `aspect`: {e}"))),
            CurveSpec::RoundedNgon { n } => {
                BoundaryCurve::rounded_ngon(*n).map_err(|e| spec_err(format!("key `n`: {e}")))
            }
            CurveSpec::Spline { points } => {
                let pts = read_points_csv(points)
                    .map_err(|e| spec_err(format!("key `points`: {e}")))?;
                BoundaryCurve::spline(&pts).map_err(|e| spec_err(format!("key `points`: {e}")))
            }
            CurveSpec::Dumbbell { delta, fillet } => BoundaryCurve::dumbbell(*delta, *fillet, 400),
        }
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveSpec::Circle => write!(f, "kind=circle"),
            CurveSpec::Ellipse { aspect } => write!(f, "kind=ellipse,aspect={aspect}"),
            CurveSpec::RoundedNgon { n } => write!(f, "kind=rounded_ngon,n={n}"),
            CurveSpec::Spline { points } => write!(f, "kind=spline,points={}", points.display()),
            CurveSpec::Dumbbell { delta, fillet } => {
                write!(f, "kind=dumbbell,delta={delta},fillet={fillet}")
            }
        }
    }
}

/// Reads `x,y` rows; a non-numeric first row is taken as a header.
pub fn read_points_csv(path: &Path) -> Result<Vec<Point>> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<(f64, f64)> = match cols.as_slice() {
            [x, y, ..] => x.parse().ok().zip(y.parse().ok()),
            _ => None,
        };
        match parsed {
            Some((x, y)) => out.push(Point::new(x, y)),
            None if i == 0 => continue,
            None => return Err(spec_err(format!("line {}: expected `x,y`", i + 1))),
        }
    }
    Ok(out)
}

/// Writes `n` samples as `s,x,y,tau_x,tau_y,kappa`.
pub fn write_samples_csv<W: Write>(curve: &BoundaryCurve, n: usize, mut w: W) -> Result<()> {
    writeln!(w, "s,x,y,tau_x,tau_y,kappa")?;
    for p in curve.samples(n) {
        writeln!(
            w,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            p.s, p.x[0], p.x[1], p.tau[0], p.tau[1], p.kappa
        )?;
    }
    Ok(())
}
