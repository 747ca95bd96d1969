//! Command-line driver.
//!
//! Every command resolves its parameters from built-in defaults, an optional
//! JSON config file and the command-line flags, in that order of precedence
//! from lowest to highest. The resolved parameters are written as a manifest,
//! and feeding a manifest back through `--config` repeats the run exactly.
//!
//! Exit codes: 0 on success, 1 for usage or parameter errors, 2 when a
//! verification fails.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::analysis::SignConvention;
use crate::brownian::sample_path_scaled;
use crate::curves::{cells, curve_eval, naive_gap, CurveSpec, Family, ScaleSchedule};
use crate::report::{fmt_f64, to_json, Csv, SCHEMA_VERSION};
use crate::verify::{self, CoverParams, Suite, SuiteOptions};
use crate::{Error, Result, VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "driftfill", version, about = "Hilbert-type drifts that make Brownian motion space filling")]
struct Cli {
    /// JSON file with parameters; flags override it. Manifests are accepted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a curve at all cells of a given depth.
    Curve(CurveArgs),
    /// Check that shifted cubes cover a shifted target cube, path by path.
    Cover(CoverArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Dump a Brownian path on its grid.
    Path(PathArgs),
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Args, Serialize)]
struct Output {
    /// Main output file (default: stdout). The manifest goes next to it.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CurveArgs {
    /// standard, generalized, alternate or naive.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// constant or harmonic (generalized family only).
    #[arg(long)]
    schedule: Option<String>,
    /// Offset of the harmonic schedule.
    #[arg(long)]
    offset: Option<f64>,
    #[arg(long)]
    depth: Option<usize>,
    /// Add one interpolated row inside every gap of the Cantor parameter set.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    dense: bool,
    /// Print the jump of the naive curve at t = 1/2 instead of samples.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    gap: bool,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct CurveConfig {
    pub family: String,
    pub d: usize,
    pub alpha: f64,
    pub rho: f64,
    pub schedule: String,
    pub offset: f64,
    pub depth: usize,
    pub dense: bool,
    pub gap: bool,
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig {
            family: "standard".into(),
            d: 2,
            alpha: 0.9,
            rho: 0.2,
            schedule: "constant".into(),
            offset: 0.0,
            depth: 6,
            dense: false,
            gap: false,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct CoverArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// Number of paths.
    #[arg(long)]
    seeds: Option<u64>,
    /// First seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Grid level of the paths.
    #[arg(long)]
    level: Option<usize>,
    /// Digits of the base cell, e.g. 12031120.
    #[arg(long)]
    base: Option<String>,
    /// Witness depth.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    cells_per_axis: Option<usize>,
    /// Fraction of paths that must be fully covered.
    #[arg(long)]
    threshold: Option<f64>,
    /// path_minus_curve (B - G) or curve_plus_path (G + h).
    #[arg(long)]
    convention: Option<String>,
    /// Largest lag of the path modulus.
    #[arg(long)]
    s_max: Option<f64>,
    /// Replace the paths by zero.
    #[arg(long)]
    #[serde(skip)]
    no_noise: bool,
    /// Per-path CSV table.
    #[arg(long)]
    #[serde(skip)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct CoverConfig {
    pub d: usize,
    pub alpha: f64,
    pub rho: f64,
    pub seeds: u64,
    pub seed: u64,
    pub level: usize,
    pub base: String,
    pub depth: usize,
    pub cells_per_axis: usize,
    pub threshold: f64,
    pub convention: String,
    pub s_max: f64,
    pub noise: bool,
}

impl Default for CoverConfig {
    fn default() -> Self {
        let p = CoverParams::default();
        CoverConfig {
            d: p.d,
            alpha: p.alpha,
            rho: p.rho,
            seeds: p.seeds.len() as u64,
            seed: 0,
            level: p.level,
            base: p.base.iter().map(|a| char::from(b'0' + a)).collect(),
            depth: p.depth,
            cells_per_axis: p.cells_per_axis,
            threshold: p.threshold,
            convention: p.convention.name().into(),
            s_max: p.s_max,
            noise: p.noise,
        }
    }
}

impl CoverConfig {
    fn params(&self) -> Result<CoverParams> {
        let base = self
            .base
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|v| v as u8)
                    .ok_or_else(|| crate::error::param(format!("base digit {c:?} is not a decimal digit")))
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(CoverParams {
            d: self.d,
            alpha: self.alpha,
            rho: self.rho,
            seeds: (self.seed..self.seed + self.seeds).collect(),
            level: self.level,
            base,
            depth: self.depth,
            cells_per_axis: self.cells_per_axis,
            threshold: self.threshold,
            noise: self.noise,
            convention: self.convention.parse::<SignConvention>()?,
            s_max: self.s_max,
        })
    }
}

#[derive(Debug, Args, Serialize)]
struct VerifyArgs {
    /// traversal, curves, lemma, moments, dimension or all.
    suite: Option<String>,
    /// Reduced sample counts.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    quick: bool,
    /// Dimension of the lemma suite.
    #[arg(long)]
    d: Option<usize>,
    /// Target dimension of the dimension suite.
    #[arg(long)]
    lambda: Option<f64>,
    /// First seed of the Monte Carlo loops.
    #[arg(long)]
    seed: Option<u64>,
    /// Table of checks.
    #[arg(long)]
    #[serde(skip)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    pub suite: String,
    pub quick: bool,
    pub d: Option<usize>,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let o = SuiteOptions::default();
        VerifyConfig { suite: "all".into(), quick: o.quick, d: o.d, lambda: o.lambda, seed: o.seed }
    }
}

#[derive(Debug, Args, Serialize)]
struct PathArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    level: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Multiplier of the Gaussian increments; 0 gives the zero path.
    #[arg(long)]
    noise_scale: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PathConfig {
    pub d: usize,
    pub level: usize,
    pub seed: u64,
    pub noise_scale: f64,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig { d: 2, level: 10, seed: 0, noise_scale: 1.0 }
    }
}

/// Defaults, overridden by the config file, overridden by the flags.
fn resolve<T: Default + Serialize + DeserializeOwned>(file: Option<&Value>, flags: Value) -> Result<T> {
    let mut merged = match serde_json::to_value(T::default())? {
        Value::Object(m) => m,
        _ => unreachable!("configs are structs"),
    };
    let mut overlay = |v: &Value| -> Result<()> {
        let Value::Object(m) = v else {
            return Err(crate::error::param("config file must hold a JSON object"));
        };
        for (k, v) in m {
            if merged.contains_key(k) && !v.is_null() {
                merged.insert(k.clone(), v.clone());
            }
        }
        Ok(())
    };
    if let Some(f) = file {
        overlay(f)?;
    }
    overlay(&flags)?;
    serde_json::from_value(Value::Object(merged)).map_err(|e| crate::error::param(format!("bad parameter: {e}")))
}

fn manifest<T: Serialize>(command: &str, config: &T) -> Result<Value> {
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("version".into(), json!(VERSION));
    m.insert("command".into(), json!(command));
    if let Value::Object(c) = serde_json::to_value(config)? {
        m.extend(c);
    }
    Ok(Value::Object(m))
}

fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes the main output and the manifest: next to `out` when given,
/// otherwise to stdout and stderr.
fn emit(out: Option<&Path>, body: &str, manifest: &Value) -> Result<()> {
    let m = to_json(manifest)?;
    match out {
        Some(p) => {
            fs::write(p, body)?;
            fs::write(sidecar(p), m)?;
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            std::io::stderr().write_all(m.as_bytes())?;
        }
    }
    Ok(())
}

fn curve_spec(c: &CurveConfig) -> Result<CurveSpec> {
    let family: Family = c.family.parse()?;
    match (family, c.schedule.as_str()) {
        (_, "constant") => CurveSpec::from_parts(family, c.d, c.alpha, c.rho),
        (Family::Generalized, "harmonic") => CurveSpec::generalized_mixed(c.d, ScaleSchedule::harmonic(c.offset, c.d)),
        (_, "harmonic") => Err(crate::error::param("the harmonic schedule needs the generalized family")),
        (_, other) => Err(crate::error::param(format!("unknown schedule {other:?}"))),
    }
}

fn cmd_curve(c: &CurveConfig) -> Result<String> {
    if c.gap {
        if c.family != "naive" {
            return Err(crate::error::param("--gap needs --family naive"));
        }
        let mut csv = Csv::new(&["alpha", "depth", "gap"]);
        csv.row(&[fmt_f64(c.alpha), c.depth.to_string(), fmt_f64(naive_gap(c.alpha, c.depth)?)]);
        return Ok(csv.into_string());
    }
    let spec = curve_spec(c)?;
    let d = spec.d();
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    header.extend(["depth".to_string(), "err_bound".to_string()]);
    let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    let err = fmt_f64(spec.tail_bound(c.depth));
    let depth = c.depth.to_string();
    let rows = cells(&spec, &[], c.depth)?;
    let dense = c.dense && spec.is_cantor();
    let len = spec.time_length(c.depth);
    for i in 0..rows.len() {
        let (t, p) = &rows[i];
        let t = *t;
        let mut cells = vec![fmt_f64(t)];
        cells.extend(p.as_slice().iter().map(|&x| fmt_f64(x)));
        cells.extend([depth.clone(), err.clone()]);
        csv.row(&cells);
        if dense && i + 1 < rows.len() {
            let mid = 0.5 * (t + len + rows[i + 1].0);
            let v = curve_eval(mid, &spec, c.depth)?;
            let mut cells = vec![fmt_f64(mid)];
            cells.extend(v.point.as_slice().iter().map(|&x| fmt_f64(x)));
            cells.extend([depth.clone(), fmt_f64(v.err_bound)]);
            csv.row(&cells);
        }
    }
    Ok(csv.into_string())
}

fn cmd_path(c: &PathConfig) -> Result<(String, Value)> {
    let p = sample_path_scaled(c.d, c.level, c.seed, c.noise_scale)?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=c.d).map(|i| format!("b{i}")));
    let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    let n = p.intervals();
    for k in 0..=n {
        let mut cells = vec![fmt_f64(k as f64 / n as f64)];
        cells.extend(p.value(k).as_slice().iter().map(|&x| fmt_f64(x)));
        csv.row(&cells);
    }
    Ok((csv.into_string(), manifest("path", c)?))
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Messages go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: Cli) -> Result<bool> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    }
    let file = match &cli.config {
        Some(p) => Some(serde_json::from_str::<Value>(&fs::read_to_string(p)?)?),
        None => None,
    };
    let file = file.as_ref();
    match cli.command {
        Command::Curve(a) => {
            let c: CurveConfig = resolve(file, serde_json::to_value(&a)?)?;
            let body = cmd_curve(&c)?;
            emit(a.output.out.as_deref(), &body, &manifest("curve", &c)?)?;
            Ok(true)
        }
        Command::Path(a) => {
            let c: PathConfig = resolve(file, serde_json::to_value(&a)?)?;
            let (body, m) = cmd_path(&c)?;
            emit(a.output.out.as_deref(), &body, &m)?;
            Ok(true)
        }
        Command::Cover(a) => {
            let mut flags = serde_json::to_value(&a)?;
            if a.no_noise {
                flags["noise"] = json!(false);
            }
            let c: CoverConfig = resolve(file, flags)?;
            let m = manifest("cover", &c)?;
            let result = verify::cover_run(&c.params()?)?;
            if let Some(p) = &a.csv {
                let mut csv =
                    Csv::new(&["seed", "modulus", "n0", "overlap_met", "cells_total", "cells_hit", "fraction"]);
                for s in &result.per_seed {
                    csv.row(&[
                        s.coverage.seed.to_string(),
                        fmt_f64(s.modulus),
                        s.n0.map_or_else(|| "NA".to_string(), |n| n.to_string()),
                        s.overlap_met.to_string(),
                        s.coverage.cells_total.to_string(),
                        s.coverage.cells_hit.to_string(),
                        fmt_f64(s.coverage.fraction()),
                    ]);
                }
                fs::write(p, csv.as_str())?;
            }
            if let Some(reason) = &result.failure {
                eprintln!("cover failed: {reason}");
            }
            let passed = result.passed;
            let body = to_json(&json!({ "manifest": m, "passed": passed, "result": result }))?;
            emit(a.output.out.as_deref(), &body, &m)?;
            Ok(passed)
        }
        Command::Verify(a) => {
            let c: VerifyConfig = resolve(file, serde_json::to_value(&a)?)?;
            let suite: Suite = c.suite.parse()?;
            let opts = SuiteOptions { quick: c.quick, d: c.d, lambda: c.lambda, seed: c.seed };
            let m = manifest("verify", &c)?;
            let reports = verify::run(suite, &opts)?;
            let passed = reports.iter().all(|r| r.passed);
            if let Some(p) = &a.csv {
                let mut csv = Csv::new(&["suite", "check", "passed", "known_failure"]);
                for r in &reports {
                    for ch in &r.checks {
                        csv.row(&[
                            r.suite.clone(),
                            ch.name.clone(),
                            ch.passed.to_string(),
                            ch.known_failure.to_string(),
                        ]);
                    }
                }
                fs::write(p, csv.as_str())?;
            }
            for r in &reports {
                for ch in &r.checks {
                    let status = match (ch.passed, ch.known_failure) {
                        (true, _) => "PASS",
                        (false, true) => "XFAIL",
                        (false, false) => "FAIL",
                    };
                    eprintln!("{status} {}::{}", r.suite, ch.name);
                }
            }
            let body = to_json(&json!({ "manifest": m, "passed": passed, "suites": reports }))?;
            emit(a.output.out.as_deref(), &body, &m)?;
            Ok(passed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_defaults() {
        let file = json!({ "alpha": 0.8, "depth": 3, "version": "ignored" });
        let flags = json!({ "depth": 4, "rho": null });
        let c: CurveConfig = resolve(Some(&file), flags).unwrap();
        assert_eq!((c.alpha, c.depth, c.rho), (0.8, 4, 0.2));
        assert!(resolve::<CurveConfig>(Some(&json!([1])), json!({})).is_err());
        assert!(resolve::<CurveConfig>(None, json!({ "depth": "x" })).is_err());
    }

    #[test]
    fn standard_curve_rows() {
        let c = CurveConfig { depth: 3, ..CurveConfig::default() };
        let out = cmd_curve(&c).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,depth,err_bound");
        assert_eq!(lines.len(), 1 + 64);
    }

    #[test]
    fn dense_rows_fill_gaps() {
        let c = CurveConfig { family: "generalized".into(), depth: 2, dense: true, ..CurveConfig::default() };
        assert_eq!(cmd_curve(&c).unwrap().lines().count(), 1 + 16 + 15);
        let c = CurveConfig { family: "naive".into(), gap: true, depth: 30, ..CurveConfig::default() };
        let out = cmd_curve(&c).unwrap();
        assert!(out.starts_with("alpha,depth,gap\n"));
    }

    #[test]
    fn cover_config_round_trip() {
        let c = CoverConfig::default();
        let p = c.params().unwrap();
        assert_eq!(p.base, CoverParams::default().base);
        assert_eq!(p.seeds.len(), 20);
        assert!(CoverConfig { base: "12x".into(), ..c }.params().is_err());
    }
}
