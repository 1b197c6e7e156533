//! Run configuration: flat `section.key = value` lines.
//!
//! Blank lines and `#` comments are ignored. Every key has a default, so the
//! empty file is a valid configuration (the canonical exterior-of-the-unit-disk
//! run with `m = 2`). [`RunConfig::to_text`] writes every key in a fixed order
//! with shortest round-trip number formatting; that text is what
//! [`RunConfig::hash`] digests.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::asymptotics::Side;
use crate::comparison::{Barrier, SubParams, SuperParams};
use crate::error::{Error, Result};
use crate::geometry::{build_masked_grid, HoleGeometry, RadialGrid};
use crate::solver::{GrowthPolicy, InitialData, Mesh, SimulationConfig};

/// Every problem found in a configuration, one message per line or field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0.join("; "))
    }
}

impl std::error::Error for ConfigErrors {}

/// Hole families accepted by the configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HoleKind {
    Disk,
    Ellipse,
    /// Closed polygon read from `geometry.points_file`.
    Curve,
}

/// Spatial discretizations accepted by the configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    /// Log-uniform rings; radial data around a centered disk only.
    Radial,
    Masked,
}

/// Initial data families accepted by the configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialKind {
    Bump,
    Ring,
    /// Cell values in the binary field format, matched to the initial grid.
    File,
}

/// Which barriers `check-comparison` and experiments build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComparisonSide {
    Super,
    Sub,
    Both,
    None,
}

/// A validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub hole_kind: HoleKind,
    pub hole_radius: f64,
    pub semi_axes: (f64, f64),
    pub points_file: String,

    pub m: f64,
    pub grid: GridKind,
    /// Log-spacing of radial grids.
    pub dlog: f64,
    /// Initial outer radius of radial grids.
    pub r_out: f64,
    /// Spacing of masked grids.
    pub h: f64,
    /// Initial side length of masked grids.
    pub extent: f64,
    pub safety: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub checkpoint_ratio: f64,
    pub support_threshold: f64,
    pub growth: GrowthPolicy,
    /// Exponent of the inner split radius; `None` uses each side's default.
    pub split_exponent: Option<f64>,

    pub initial: InitialKind,
    pub center: (f64, f64),
    pub radius: f64,
    pub width: f64,
    pub amplitude: f64,
    pub initial_file: String,

    /// `δ / δ_*`.
    pub delta_fraction: f64,
    /// Radii of the compact-set probes (on the positive x-axis).
    pub probes: Vec<f64>,

    pub side: ComparisonSide,
    /// Barrier start time `T`.
    pub big_t: f64,
    pub mu: f64,
    pub eta_super: f64,
    pub kappa0_super: f64,
    pub k: f64,
    pub eta_sub: f64,
    pub kappa0_sub: f64,
    /// `None` uses half of `ᾱ₀`.
    pub alpha0: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            hole_kind: HoleKind::Disk,
            hole_radius: 1.0,
            semi_axes: (1.0, 0.75),
            points_file: String::new(),
            m: 2.0,
            grid: GridKind::Radial,
            dlog: 0.01,
            r_out: 6.0,
            h: 0.1,
            extent: 8.0,
            safety: 0.45,
            t_start: 3.0,
            t_end: 1e5,
            checkpoint_ratio: 10f64.powf(0.125),
            support_threshold: 1e-12,
            growth: GrowthPolicy::Extend,
            split_exponent: None,
            initial: InitialKind::Ring,
            center: (2.0, 0.5),
            radius: 2.0,
            width: 0.8,
            amplitude: 1.0,
            initial_file: String::new(),
            delta_fraction: 0.5,
            probes: vec![std::f64::consts::E],
            side: ComparisonSide::Both,
            big_t: 10.0,
            mu: 0.1,
            eta_super: 1.5,
            kappa0_super: 0.1,
            k: 1.0,
            eta_sub: 0.5,
            kappa0_sub: 0.1,
            alpha0: None,
        }
    }
}

/// The keys, in the order [`RunConfig::to_text`] writes them.
pub const KEYS: [&str; 34] = [
    "geometry.kind",
    "geometry.radius",
    "geometry.semi_axes",
    "geometry.points_file",
    "solver.m",
    "solver.grid",
    "solver.dlog",
    "solver.r_out",
    "solver.h",
    "solver.extent",
    "solver.safety",
    "solver.t_start",
    "solver.t_end",
    "solver.checkpoint_ratio",
    "solver.support_threshold",
    "solver.growth",
    "solver.split_exponent",
    "initial.kind",
    "initial.center",
    "initial.radius",
    "initial.width",
    "initial.amplitude",
    "initial.file",
    "asymptotics.delta_fraction",
    "asymptotics.probes",
    "comparison.side",
    "comparison.T",
    "comparison.mu",
    "comparison.eta_super",
    "comparison.kappa0_super",
    "comparison.k",
    "comparison.eta_sub",
    "comparison.kappa0_sub",
    "comparison.alpha0",
];

fn num(v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("expected a finite number, got `{v}`"))
}

fn pair(v: &str) -> std::result::Result<(f64, f64), String> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok((num(a)?, num(b)?)),
        _ => Err(format!("expected two comma-separated numbers, got `{v}`")),
    }
}

fn list(v: &str) -> std::result::Result<Vec<f64>, String> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|p| num(p.trim())).collect()
}

fn auto_num(v: &str) -> std::result::Result<Option<f64>, String> {
    if v == "auto" {
        Ok(None)
    } else {
        num(v).map(Some)
    }
}

fn choice<T: Copy>(v: &str, options: &[(&str, T)]) -> std::result::Result<T, String> {
    options.iter().find(|(n, _)| *n == v).map(|(_, t)| *t).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        format!("expected one of {}, got `{v}`", names.join("|"))
    })
}

const HOLE_KINDS: [(&str, HoleKind); 3] = [("disk", HoleKind::Disk), ("ellipse", HoleKind::Ellipse), ("curve", HoleKind::Curve)];
const GRID_KINDS: [(&str, GridKind); 2] = [("radial", GridKind::Radial), ("masked", GridKind::Masked)];
const GROWTH: [(&str, GrowthPolicy); 2] = [("extend", GrowthPolicy::Extend), ("abort", GrowthPolicy::Abort)];
const INITIAL_KINDS: [(&str, InitialKind); 3] = [
    ("bump", InitialKind::Bump),
    ("ring", InitialKind::Ring),
    ("file", InitialKind::File),
];
const SIDES: [(&str, ComparisonSide); 4] = [
    ("super", ComparisonSide::Super),
    ("sub", ComparisonSide::Sub),
    ("both", ComparisonSide::Both),
    ("none", ComparisonSide::None),
];

fn name_of<T: PartialEq + Copy>(v: T, options: &[(&'static str, T)]) -> &'static str {
    options.iter().find(|(_, t)| *t == v).map(|(n, _)| *n).unwrap_or("?")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".to_string(), |x| format!("{x}"))
}

/// Splits text into `(line number, key, value)` triples, or a message for
/// lines without `=`.
fn lines(text: &str) -> Vec<(usize, std::result::Result<(String, String), String>)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                return None;
            }
            Some((
                i + 1,
                line.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| format!("line {}: expected `key = value`, got `{line}`", i + 1)),
            ))
        })
        .collect()
}

/// Parses and validates a configuration; every problem is reported.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let mut c = RunConfig::default();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (ln, entry) in lines(text) {
        let (key, v) = match entry {
            Ok(kv) => kv,
            Err(msg) => {
                errors.push(msg);
                continue;
            }
        };
        if let Some(first) = seen.insert(key.clone(), ln) {
            errors.push(format!("line {ln}: duplicate key `{key}` (first set on line {first})"));
            continue;
        }
        let v = v.as_str();
        let r: std::result::Result<(), String> = (|| {
            match key.as_str() {
                "geometry.kind" => c.hole_kind = choice(v, &HOLE_KINDS)?,
                "geometry.radius" => c.hole_radius = num(v)?,
                "geometry.semi_axes" => c.semi_axes = pair(v)?,
                "geometry.points_file" => c.points_file = v.to_string(),
                "solver.m" => c.m = num(v)?,
                "solver.grid" => c.grid = choice(v, &GRID_KINDS)?,
                "solver.dlog" => c.dlog = num(v)?,
                "solver.r_out" => c.r_out = num(v)?,
                "solver.h" => c.h = num(v)?,
                "solver.extent" => c.extent = num(v)?,
                "solver.safety" => c.safety = num(v)?,
                "solver.t_start" => c.t_start = num(v)?,
                "solver.t_end" => c.t_end = num(v)?,
                "solver.checkpoint_ratio" => c.checkpoint_ratio = num(v)?,
                "solver.support_threshold" => c.support_threshold = num(v)?,
                "solver.growth" => c.growth = choice(v, &GROWTH)?,
                "solver.split_exponent" => c.split_exponent = auto_num(v)?,
                "initial.kind" => c.initial = choice(v, &INITIAL_KINDS)?,
                "initial.center" => c.center = pair(v)?,
                "initial.radius" => c.radius = num(v)?,
                "initial.width" => c.width = num(v)?,
                "initial.amplitude" => c.amplitude = num(v)?,
                "initial.file" => c.initial_file = v.to_string(),
                "asymptotics.delta_fraction" => c.delta_fraction = num(v)?,
                "asymptotics.probes" => c.probes = list(v)?,
                "comparison.side" => c.side = choice(v, &SIDES)?,
                "comparison.T" => c.big_t = num(v)?,
                "comparison.mu" => c.mu = num(v)?,
                "comparison.eta_super" => c.eta_super = num(v)?,
                "comparison.kappa0_super" => c.kappa0_super = num(v)?,
                "comparison.k" => c.k = num(v)?,
                "comparison.eta_sub" => c.eta_sub = num(v)?,
                "comparison.kappa0_sub" => c.kappa0_sub = num(v)?,
                "comparison.alpha0" => c.alpha0 = auto_num(v)?,
                _ => return Err("unknown key".to_string()),
            }
            Ok(())
        })();
        if let Err(msg) = r {
            if msg == "unknown key" {
                errors.push(format!("line {ln}: unknown key `{key}`"));
            } else {
                errors.push(format!("line {ln}: {key}: {msg}"));
            }
        }
    }
    if errors.is_empty() {
        errors.extend(c.invariant_errors());
    }
    if errors.is_empty() {
        Ok(c)
    } else {
        Err(ConfigErrors(errors))
    }
}

impl RunConfig {
    /// Violated invariants, each naming its field.
    pub fn invariant_errors(&self) -> Vec<String> {
        let mut e = Vec::new();
        let mut need = |ok: bool, msg: &str| {
            if !ok {
                e.push(msg.to_string());
            }
        };
        need(self.m > 1.0, "solver.m: m > 1 required");
        match self.hole_kind {
            HoleKind::Disk => need(self.hole_radius > 0.0, "geometry.radius: must be positive"),
            HoleKind::Ellipse => need(
                self.semi_axes.0 > 0.0 && self.semi_axes.1 > 0.0,
                "geometry.semi_axes: must be positive",
            ),
            HoleKind::Curve => need(!self.points_file.is_empty(), "geometry.points_file: required for curve holes"),
        }
        need(
            self.grid == GridKind::Masked || self.hole_kind == HoleKind::Disk,
            "solver.grid: radial grids need a disk hole",
        );
        need(
            self.grid == GridKind::Masked || self.initial != InitialKind::Bump || (self.center.0 == 0.0 && self.center.1 == 0.0),
            "initial.center: radial grids need a centered bump",
        );
        need(self.dlog > 0.0, "solver.dlog: must be positive");
        need(self.r_out > 0.0, "solver.r_out: must be positive");
        need(self.h > 0.0, "solver.h: must be positive");
        need(self.extent > 0.0, "solver.extent: must be positive");
        need(self.safety > 0.0 && self.safety <= 1.0, "solver.safety: must lie in (0, 1]");
        need(self.t_start > std::f64::consts::E, "solver.t_start: must exceed e");
        need(self.t_end >= self.t_start, "solver.t_end: must not precede solver.t_start");
        need(self.checkpoint_ratio > 1.0, "solver.checkpoint_ratio: must exceed 1");
        need(self.support_threshold >= 0.0, "solver.support_threshold: must be non-negative");
        need(
            self.split_exponent.map_or(true, |p| p > 0.0),
            "solver.split_exponent: must be positive",
        );
        need(self.radius > 0.0, "initial.radius: must be positive");
        need(self.width > 0.0, "initial.width: must be positive");
        need(self.amplitude > 0.0, "initial.amplitude: must be positive");
        need(
            self.initial != InitialKind::File || !self.initial_file.is_empty(),
            "initial.file: required for file data",
        );
        need(
            self.delta_fraction > 0.0 && self.delta_fraction < 1.0,
            "asymptotics.delta_fraction: δ/δ_* must lie in (0, 1)",
        );
        need(self.probes.iter().all(|&r| r > 0.0), "asymptotics.probes: radii must be positive");
        need(self.big_t > std::f64::consts::E, "comparison.T: must exceed e");
        need(self.mu > 0.0 && self.mu < 1.0, "comparison.mu: must lie in (0, 1)");
        need(self.eta_super > 1.0, "comparison.eta_super: must exceed 1");
        need(self.kappa0_super > 0.0, "comparison.kappa0_super: must be positive");
        need(self.k > 0.0, "comparison.k: must be positive");
        need(self.eta_sub > 0.0 && self.eta_sub < 1.0, "comparison.eta_sub: must lie in (0, 1)");
        need(
            self.kappa0_sub > 0.0 && self.kappa0_sub < 1.0,
            "comparison.kappa0_sub: must lie in (0, 1)",
        );
        need(self.alpha0.map_or(true, |a| a > 0.0), "comparison.alpha0: must be positive");
        e
    }

    /// Every key in [`KEYS`] order, one `key = value` per line.
    pub fn to_text(&self) -> String {
        let f = |x: f64| format!("{x}");
        let values: [String; 34] = [
            name_of(self.hole_kind, &HOLE_KINDS).into(),
            f(self.hole_radius),
            format!("{},{}", self.semi_axes.0, self.semi_axes.1),
            self.points_file.clone(),
            f(self.m),
            name_of(self.grid, &GRID_KINDS).into(),
            f(self.dlog),
            f(self.r_out),
            f(self.h),
            f(self.extent),
            f(self.safety),
            f(self.t_start),
            f(self.t_end),
            f(self.checkpoint_ratio),
            f(self.support_threshold),
            name_of(self.growth, &GROWTH).into(),
            fmt_opt(self.split_exponent),
            name_of(self.initial, &INITIAL_KINDS).into(),
            format!("{},{}", self.center.0, self.center.1),
            f(self.radius),
            f(self.width),
            f(self.amplitude),
            self.initial_file.clone(),
            f(self.delta_fraction),
            self.probes.iter().map(|p| format!("{p}")).collect::<Vec<_>>().join(","),
            name_of(self.side, &SIDES).into(),
            f(self.big_t),
            f(self.mu),
            f(self.eta_super),
            f(self.kappa0_super),
            f(self.k),
            f(self.eta_sub),
            f(self.kappa0_sub),
            fmt_opt(self.alpha0),
        ];
        KEYS.iter().zip(values.iter()).map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// SHA-256 of the normalized text, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    /// First 16 hex digits of [`Self::hash`], used as a directory name.
    pub fn short_hash(&self) -> String {
        self.hash()[..16].to_string()
    }

    /// The hole, reading the polygon file for curve holes.
    pub fn hole(&self, base: &Path) -> Result<HoleGeometry> {
        match self.hole_kind {
            HoleKind::Disk => HoleGeometry::disk(self.hole_radius),
            HoleKind::Ellipse => HoleGeometry::ellipse(self.semi_axes.0, self.semi_axes.1),
            HoleKind::Curve => {
                let path = resolve(base, &self.points_file);
                HoleGeometry::curve(read_points(&path)?)
            }
        }
    }

    /// The initial mesh for `hole`.
    pub fn mesh(&self, hole: &HoleGeometry) -> Result<Mesh> {
        Ok(match self.grid {
            GridKind::Radial => Mesh::Radial(RadialGrid::log_uniform(hole.outer_radius(), self.r_out, self.dlog)?),
            GridKind::Masked => Mesh::Masked(build_masked_grid(hole.clone(), self.extent, self.h)?),
        })
    }

    /// The initial data; file data are read relative to `base`.
    pub fn initial_data(&self, base: &Path, cells: usize) -> Result<InitialData> {
        Ok(match self.initial {
            InitialKind::Bump => InitialData::Bump {
                center: [self.center.0, self.center.1],
                radius: self.radius,
                amplitude: self.amplitude,
            },
            InitialKind::Ring => InitialData::Ring {
                radius: self.radius,
                width: self.width,
                amplitude: self.amplitude,
            },
            InitialKind::File => {
                let (_, values) = crate::harness::io::read_field(&resolve(base, &self.initial_file))?;
                if values.len() != cells {
                    return Err(Error::param(format!("initial file has {} values for {cells} cells", values.len())));
                }
                InitialData::Values(values)
            }
        })
    }

    pub fn simulation(&self, keep_snapshots: bool) -> SimulationConfig {
        SimulationConfig {
            safety: self.safety,
            t_end: self.t_end,
            checkpoint_ratio: self.checkpoint_ratio,
            support_threshold: self.support_threshold,
            growth: self.growth,
            keep_snapshots,
            ..SimulationConfig::default()
        }
    }

    /// The same configuration with relative file paths resolved against
    /// `base`, so that a run directory can be read back from anywhere.
    pub fn with_absolute_paths(&self, base: &Path) -> RunConfig {
        let base = if base.is_absolute() {
            base.to_path_buf()
        } else {
            std::env::current_dir().map(|d| d.join(base)).unwrap_or_else(|_| base.to_path_buf())
        };
        let fix = |f: &str| {
            if f.is_empty() {
                String::new()
            } else {
                resolve(&base, f).to_string_lossy().into_owned()
            }
        };
        RunConfig {
            points_file: fix(&self.points_file),
            initial_file: fix(&self.initial_file),
            ..self.clone()
        }
    }

    /// The barriers selected by `comparison.side`, before calibration.
    pub fn barriers(&self, alpha_bar: f64) -> Result<Vec<Barrier>> {
        let mut out = Vec::new();
        if matches!(self.side, ComparisonSide::Super | ComparisonSide::Both) {
            out.push(Barrier::Super(SuperParams::new(
                self.eta_super,
                self.kappa0_super,
                self.mu,
                self.k,
                self.big_t,
            )?));
        }
        if matches!(self.side, ComparisonSide::Sub | ComparisonSide::Both) {
            let p = SubParams::new(
                self.eta_sub,
                self.kappa0_sub,
                self.mu,
                self.alpha0.unwrap_or(alpha_bar / 2.0),
                self.big_t,
            )?;
            p.check_alpha_bar(alpha_bar)?;
            out.push(Barrier::Sub(p));
        }
        Ok(out)
    }
}

fn resolve(base: &Path, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Reads whitespace-separated `x y` pairs.
pub fn read_points(path: &Path) -> Result<Vec<[f64; 2]>> {
    let text = std::fs::read_to_string(path)?;
    let nums: Vec<f64> = text
        .split_whitespace()
        .map(|w| {
            w.parse::<f64>().map_err(|_| Error::Format {
                path: path.into(),
                message: format!("not a number: `{w}`"),
            })
        })
        .collect::<Result<_>>()?;
    if nums.len() % 2 != 0 {
        return Err(Error::Format {
            path: path.into(),
            message: "odd number of coordinates".into(),
        });
    }
    Ok(nums.chunks(2).map(|c| [c[0], c[1]]).collect())
}

/// Contents of a `check-comparison --params` file: `eta`, `kappa0`, `mu`,
/// `k` (super side) or `alpha0` (sub side), and `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct BarrierParams {
    pub eta: f64,
    pub kappa0: f64,
    pub mu: f64,
    pub k: Option<f64>,
    pub alpha0: Option<f64>,
    pub big_t: f64,
}

/// Parses a barrier parameter file.
pub fn parse_params(text: &str) -> Result<BarrierParams, ConfigErrors> {
    let mut errors = Vec::new();
    let mut values: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    for (ln, entry) in lines(text) {
        let (key, v) = match entry {
            Ok(kv) => kv,
            Err(msg) => {
                errors.push(msg);
                continue;
            }
        };
        if !["eta", "kappa0", "mu", "k", "alpha0", "T"].contains(&key.as_str()) {
            errors.push(format!("line {ln}: unknown key `{key}`"));
            continue;
        }
        match num(&v) {
            Ok(x) => {
                if values.insert(key.clone(), (ln, x)).is_some() {
                    errors.push(format!("line {ln}: duplicate key `{key}`"));
                }
            }
            Err(msg) => errors.push(format!("line {ln}: {key}: {msg}")),
        }
    }
    for key in ["eta", "kappa0", "mu", "T"] {
        if !values.contains_key(key) {
            errors.push(format!("missing key `{key}`"));
        }
    }
    if !errors.is_empty() {
        return Err(ConfigErrors(errors));
    }
    let get = |k: &str| values.get(k).map(|v| v.1);
    Ok(BarrierParams {
        eta: get("eta").unwrap(),
        kappa0: get("kappa0").unwrap(),
        mu: get("mu").unwrap(),
        k: get("k"),
        alpha0: get("alpha0"),
        big_t: get("T").unwrap(),
    })
}

impl BarrierParams {
    /// The barrier of `side`; the subsolution defaults `α₀` to `ᾱ₀/2`.
    pub fn barrier(&self, side: Side, alpha_bar: f64) -> Result<Barrier> {
        match side {
            Side::Super => {
                let k = self.k.ok_or_else(|| Error::param("the supersolution needs `k`"))?;
                Ok(Barrier::Super(SuperParams::new(self.eta, self.kappa0, self.mu, k, self.big_t)?))
            }
            Side::Sub => {
                let p = SubParams::new(self.eta, self.kappa0, self.mu, self.alpha0.unwrap_or(alpha_bar / 2.0), self.big_t)?;
                p.check_alpha_bar(alpha_bar)?;
                Ok(Barrier::Sub(p))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults_and_round_trips() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        let text = c.to_text();
        let again = parse_config(&text).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_text(), text);
        assert_eq!(c.hash(), again.hash());
    }

    #[test]
    fn minimal_config_round_trips() {
        let c = parse_config("# tiny\nsolver.m = 3\n\nsolver.t_end = 1e4  # short\n").unwrap();
        assert_eq!(c.m, 3.0);
        assert_eq!(c.t_end, 1e4);
        assert_eq!(parse_config(&c.to_text()).unwrap().to_text(), c.to_text());
    }

    #[test]
    fn unknown_key_is_named_with_its_line() {
        let e = parse_config("solver.m = 2\nsolver.mm = 2\n").unwrap_err();
        assert_eq!(e.0.len(), 1);
        assert!(e.0[0].contains("solver.mm") && e.0[0].contains("line 2"), "{e}");
    }

    #[test]
    fn invariant_violation_is_reported() {
        let e = parse_config("solver.m = 0.5").unwrap_err();
        assert!(e.0.iter().any(|m| m.contains("m > 1 required")), "{e}");
    }

    #[test]
    fn type_mismatch_and_duplicates_collect() {
        let e = parse_config("solver.m = two\ngeometry.kind = square\nsolver.h = 0.1\nsolver.h = 0.2\nnonsense\n").unwrap_err();
        assert_eq!(e.0.len(), 4, "{e}");
        assert!(e.0[0].contains("line 1") && e.0[0].contains("solver.m"));
        assert!(e.0[1].contains("disk|ellipse|curve"));
        assert!(e.0[2].contains("duplicate"));
        assert!(e.0[3].contains("line 5"));
    }

    #[test]
    fn hash_changes_with_content_only() {
        let a = parse_config("solver.m = 2").unwrap();
        let b = parse_config("solver.m = 2.0  # same value").unwrap();
        let c = parse_config("solver.m = 2.5").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.short_hash().len(), 16);
    }

    #[test]
    fn params_file() {
        let p = parse_params("eta = 1.2\nkappa0 = 1\nmu = 0.1\nk = 1\nT = 100\n").unwrap();
        assert!(p.barrier(Side::Super, 0.09).is_ok());
        assert!(p.barrier(Side::Sub, 0.09).is_err());
        let e = parse_params("eta = 1.2\nkappa = 1\n").unwrap_err();
        assert!(e.0.iter().any(|m| m.contains("`kappa`")));
        assert!(e.0.iter().any(|m| m.contains("missing key `kappa0`")));
    }
}
