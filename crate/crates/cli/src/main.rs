//! `eikstab` command-line runner.

mod commands;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eikstab::report::{loglog_svg, write_csv, Report};

pub const OUT_DIR_ENV: &str = "EIKSTAB_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "eikstab", version, about = "Stability checks for zero-energy eikonal states")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for stochastic commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON report path; defaults to `$EIKSTAB_OUT_DIR/<command>.json`, else stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// SVG log-log plot of the command's series.
    #[arg(long, global = true)]
    plot: Option<PathBuf>,
    /// CSV table of the command's series.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// `key=value` file of flags; the command line takes precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Record wall-clock time in the report (breaks byte-identical output).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a boundary curve and export its samples.
    GenDomain(commands::GenDomain),
    /// Defect value a for one boundary triple.
    Defect(commands::Defect),
    /// Integral of a² over triples of a boundary region.
    DefectIntegral(commands::DefectIntegral),
    /// Jump dissipation ν of a field.
    Nu(commands::Nu),
    /// Monte-Carlo characteristic ensemble and its checks.
    Lagrangian(commands::Lagrangian),
    /// Grid energy of the mollified field.
    Energy(commands::Energy),
    /// Both sides of the stability estimates for one curve.
    Stability(commands::Stability),
    /// Stability quantities across the rounded-polygon family.
    Sharpness(commands::Sharpness),
    /// Built-in check suite.
    Selftest(commands::Selftest),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::GenDomain(_) => "gen-domain",
            Command::Defect(_) => "defect",
            Command::DefectIntegral(_) => "defect-integral",
            Command::Nu(_) => "nu",
            Command::Lagrangian(_) => "lagrangian",
            Command::Energy(_) => "energy",
            Command::Stability(_) => "stability",
            Command::Sharpness(_) => "sharpness",
            Command::Selftest(_) => "selftest",
        }
    }
}

const COMMANDS: [&str; 9] = [
    "gen-domain",
    "defect",
    "defect-integral",
    "nu",
    "lagrangian",
    "energy",
    "stability",
    "sharpness",
    "selftest",
];

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<eikstab::Error> for Failure {
    fn from(e: eikstab::Error) -> Self {
        use eikstab::Error::*;
        match e {
            InvalidArgument(_) | CurveSpec(_) | Precondition(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// What a command produced, before it is written out.
pub struct Outcome {
    pub results: serde_json::Value,
    pub assertions: Vec<eikstab::report::Assertion>,
    pub table: Option<Table>,
}

pub struct Table {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_name: String,
    pub xs: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

fn read_config(path: &Path) -> Result<Vec<String>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Failure::Usage(format!("config {} line {}: expected key=value", path.display(), i + 1))
        })?;
        let k = k.trim();
        match v.trim() {
            "true" => out.push(format!("--{k}")),
            v => out.push(format!("--{k}={v}")),
        }
    }
    Ok(out)
}

/// Splices config entries right after the subcommand, dropping keys that
/// the command line sets itself.
fn expand_config(argv: Vec<String>) -> Result<Vec<String>, Failure> {
    let mut path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| Failure::Usage("--config needs a path".into()))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let flag_name = |a: &str| a.strip_prefix("--").map(|f| f.split('=').next().unwrap_or(f).to_string());
    let given: Vec<String> = rest.iter().filter_map(|a| flag_name(a)).collect();
    let extra: Vec<String> = read_config(Path::new(&path))?
        .into_iter()
        .filter(|e| flag_name(e).map_or(true, |k| !given.contains(&k)))
        .collect();
    let at = rest
        .iter()
        .position(|a| COMMANDS.contains(&a.as_str()))
        .map_or(rest.len(), |i| i + 1);
    rest.splice(at..at, extra);
    Ok(rest)
}

fn default_out(command: &str) -> Option<PathBuf> {
    std::env::var_os(OUT_DIR_ENV)
        .filter(|d| !d.is_empty())
        .map(|d| PathBuf::from(d).join(format!("{command}.json")))
}

fn write_table(table: &Table, global: &Global) -> Result<(), Failure> {
    if let Some(path) = &global.csv {
        let mut header = vec![table.x_name.as_str()];
        header.extend(table.columns.iter().map(|(n, _)| n.as_str()));
        let mut cols = vec![table.xs.clone()];
        cols.extend(table.columns.iter().map(|(_, c)| c.clone()));
        let mut buf = Vec::new();
        write_csv(&mut buf, &header, &cols)?;
        std::fs::write(path, buf)?;
    }
    if let Some(path) = &global.plot {
        let series: Vec<_> = table
            .columns
            .iter()
            .map(|(label, ys)| eikstab::report::Series {
                label: label.clone(),
                xs: table.xs.clone(),
                ys: ys.clone(),
            })
            .collect();
        std::fs::write(path, loglog_svg(&table.title, &table.x_label, &table.y_label, &series)?)?;
    }
    Ok(())
}

fn execute(cli: Cli, config: BTreeMap<String, String>) -> Result<bool, Failure> {
    let name = cli.command.name();
    let global = cli.global.clone();
    let start = std::time::Instant::now();
    let run = || -> Result<Outcome, Failure> {
        match &cli.command {
            Command::GenDomain(c) => c.run(&global),
            Command::Defect(c) => c.run(&global),
            Command::DefectIntegral(c) => c.run(&global),
            Command::Nu(c) => c.run(&global),
            Command::Lagrangian(c) => c.run(&global),
            Command::Energy(c) => c.run(&global),
            Command::Stability(c) => c.run(&global),
            Command::Sharpness(c) => c.run(&global),
            Command::Selftest(c) => c.run(&global),
        }
    };
    let outcome = match global.workers {
        Some(0) => return Err(Failure::Usage("--workers must be at least 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Failure::Runtime(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    if global.table_requested() {
        match &outcome.table {
            Some(t) => write_table(t, &global)?,
            None => eprintln!("note: `{name}` has no series; --csv/--plot ignored"),
        }
    }
    let mut report = Report::new(name, config, global.seed).with_results(&outcome.results)?;
    for a in outcome.assertions {
        report.push(a);
    }
    if global.timing {
        report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    }
    let json = report.to_json()?;
    match global.out.clone().or_else(|| default_out(name)) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, &json)?;
        }
        None => print!("{json}"),
    }
    for f in report.failures() {
        eprintln!(
            "FAIL {}: value {} outside [{}, {}]",
            f.name,
            f.value,
            f.lower.map_or("-inf".into(), |v| v.to_string()),
            f.upper.map_or("inf".into(), |v| v.to_string())
        );
    }
    Ok(report.passed())
}

impl Global {
    fn table_requested(&self) -> bool {
        self.csv.is_some() || self.plot.is_some()
    }
}

/// Flags as given (after config expansion), for the report's config echo.
fn config_echo(argv: &[String]) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    let mut i = 1;
    while i < argv.len() {
        let a = &argv[i];
        if let Some(flag) = a.strip_prefix("--") {
            if let Some((k, v)) = flag.split_once('=') {
                map.insert(k.to_string(), v.to_string());
            } else if i + 1 < argv.len() && !argv[i + 1].starts_with("--") {
                map.insert(flag.to_string(), argv[i + 1].clone());
                i += 1;
            } else {
                map.insert(flag.to_string(), "true".to_string());
            }
        }
        i += 1;
    }
    for k in ["out", "plot", "csv", "workers", "timing"] {
        map.remove(k);
    }
    map
}

/// Runs the tool on `argv` (including the program name) and returns the
/// exit code: 0 when every assertion passes, 1 on a failed assertion or a
/// runtime error, 2 on usage errors.
pub fn run(argv: Vec<String>) -> u8 {
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(Failure::Usage(m)) | Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli, config_echo(&argv)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            1
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args().collect()))
}
