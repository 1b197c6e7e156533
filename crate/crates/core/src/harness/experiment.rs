//! End-to-end experiments: stationary potential, simulation, asymptotic
//! diagnostics and barrier comparisons, persisted under a directory named by
//! the configuration hash.
//!
//! Layout of a run directory:
//!
//! ```text
//! config.txt                normalized configuration
//! checkpoints.csv           t, mass, weighted_moment, zeta_minus, zeta_plus, sup_u, outflow
//! snapshots/snap_NNNN.bin   solver state at each checkpoint (+ .edges for radial meshes)
//! functionals.csv           mass ratio, support ratios and error functionals per checkpoint
//! probes.csv                compact-set ratios at the probe radii
//! profile.csv               scaled profile of the last snapshot against F_*
//! comparison.csv            sampled 𝒜, ℬ of each barrier at its sign threshold
//! ordering.csv              barrier ordering against the solver output
//! *.svg                     trend panels
//! summary.txt               hash, version, wall time, verdicts, file manifest
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::asymptotics::{compact_limit, outer_error, to_scaled_variables, weighted_error, RegionKind, ScaledProfile, Side, TrendSeries};
use crate::comparison::{
    calibrate, find_sign_threshold, sample_ab, verify_ordering, Barrier, OrderingReport, SweepOptions, ThresholdReport,
};
use crate::error::{Error, Result};
use crate::geometry::HoleGeometry;
use crate::harness::config::{parse_config, HoleKind, RunConfig};
use crate::harness::io;
use crate::harness::plots::{emit_plots, Diagnostics};
use crate::solver::{run, Checkpoint, InitialData, RunRecord, SolverState};
use crate::special::CriticalOuterSpec;
use crate::stationary::{alpha_bar_0, solve_stationary_numeric, DiskPotential, Potential, StationaryField};

/// Version recorded in run summaries.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Ladder of `log T` values searched for sign thresholds.
pub const SIGN_LADDER: [f64; 12] = [5.0, 10.0, 15.0, 20.0, 30.0, 40.0, 60.0, 80.0, 100.0, 150.0, 200.0, 250.0];

/// Outcome of one criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Not enough data (for instance a run too short to span the decades).
    Skipped,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "pass" => Some(Verdict::Pass),
            "fail" => Some(Verdict::Fail),
            "skipped" => Some(Verdict::Skipped),
            _ => None,
        }
    }
}

/// What an experiment produced.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub config_hash: String,
    pub tool_version: String,
    pub wall_seconds: f64,
    pub criteria: Vec<(String, Verdict)>,
    /// Files relative to the run directory.
    pub files: Vec<String>,
    /// True when the run has fewer than two checkpoints.
    pub degenerate: bool,
    /// True when the results were found on disk instead of recomputed.
    pub cached: bool,
    pub dir: PathBuf,
}

impl RunSummary {
    /// No criterion failed.
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|(_, v)| *v != Verdict::Fail)
    }

    pub fn verdict(&self, name: &str) -> Option<Verdict> {
        self.criteria.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    fn write(&self, extra: &[(String, String)]) -> Result<()> {
        let mut kv = vec![
            ("config_hash".to_string(), self.config_hash.clone()),
            ("tool_version".into(), self.tool_version.clone()),
            ("wall_seconds".into(), format!("{}", self.wall_seconds)),
            ("degenerate".into(), self.degenerate.to_string()),
        ];
        kv.extend(extra.iter().cloned());
        kv.extend(
            self.criteria
                .iter()
                .map(|(n, v)| (format!("criterion.{n}"), v.as_str().to_string())),
        );
        kv.extend(self.files.iter().map(|f| ("file".to_string(), f.clone())));
        io::write_key_values(&self.dir.join("summary.txt"), &kv)
    }

    /// Reads `summary.txt` from a run directory.
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join("summary.txt");
        let kv = io::read_key_values(&path)?;
        let bad = |message: String| Error::Format {
            path: path.clone(),
            message,
        };
        let get = |k: &str| kv.iter().find(|(key, _)| key == k).map(|(_, v)| v.clone());
        let mut criteria = Vec::new();
        for (k, v) in &kv {
            if let Some(name) = k.strip_prefix("criterion.") {
                criteria.push((
                    name.to_string(),
                    Verdict::parse(v).ok_or_else(|| bad(format!("bad verdict `{v}`")))?,
                ));
            }
        }
        Ok(RunSummary {
            config_hash: get("config_hash").ok_or_else(|| bad("missing config_hash".into()))?,
            tool_version: get("tool_version").unwrap_or_default(),
            wall_seconds: get("wall_seconds").and_then(|v| v.parse().ok()).unwrap_or(f64::NAN),
            criteria,
            files: kv.iter().filter(|(k, _)| k == "file").map(|(_, v)| v.clone()).collect(),
            degenerate: get("degenerate").as_deref() == Some("true"),
            cached: false,
            dir: dir.to_path_buf(),
        })
    }

    /// Every manifest file exists and is non-empty.
    pub fn manifest_complete(&self) -> bool {
        self.files
            .iter()
            .all(|f| fs::metadata(self.dir.join(f)).map(|m| m.len() > 0).unwrap_or(false))
    }
}

/// The stationary potential of a configured hole: the closed form for disks
/// centered at the origin, the numerical solution otherwise.
pub enum PotentialField {
    Disk(DiskPotential),
    Numeric(Box<StationaryField>),
}

impl Potential for PotentialField {
    fn phi(&self, x: [f64; 2]) -> f64 {
        match self {
            PotentialField::Disk(p) => p.phi(x),
            PotentialField::Numeric(p) => p.phi(x),
        }
    }

    fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        match self {
            PotentialField::Disk(p) => p.grad(x),
            PotentialField::Numeric(p) => p.grad(x),
        }
    }
}

/// Tolerance of numerical stationary solves.
pub const STATIONARY_TOL: f64 = 1e-10;

/// Builds the hole and its potential.
pub fn stationary_stage(cfg: &RunConfig, base: &Path) -> Result<(HoleGeometry, PotentialField)> {
    let hole = cfg.hole(base)?;
    let phi = match cfg.hole_kind {
        HoleKind::Disk => PotentialField::Disk(DiskPotential { radius: cfg.hole_radius }),
        _ => PotentialField::Numeric(Box::new(solve_stationary_numeric(&hole, STATIONARY_TOL)?)),
    };
    Ok((hole, phi))
}

/// Runs the configured simulation, keeping a snapshot at every checkpoint.
pub fn simulate_stage(cfg: &RunConfig, base: &Path, hole: &HoleGeometry, phi: &dyn Potential) -> Result<(RunRecord, SolverState)> {
    let mesh = cfg.mesh(hole)?;
    let cells = SolverState::new(mesh.clone(), cfg.m, cfg.t_start, &InitialData::Zero)?.u().len();
    let data = cfg.initial_data(base, cells)?;
    let state = SolverState::new(mesh, cfg.m, cfg.t_start, &data)?;
    run(state, &cfg.simulation(true), Some(phi))
}

/// Writes `config.txt`, `checkpoints.csv` and the snapshots of a run.
pub fn write_run(dir: &Path, cfg: &RunConfig, record: &RunRecord) -> Result<Vec<String>> {
    fs::create_dir_all(dir.join("snapshots"))?;
    fs::write(dir.join("config.txt"), cfg.to_text())?;
    io::write_checkpoints(&dir.join("checkpoints.csv"), record)?;
    let mut files = vec!["config.txt".to_string(), "checkpoints.csv".to_string()];
    for (k, snap) in record.snapshots.iter().enumerate() {
        for p in io::write_snapshot(&dir.join("snapshots").join(format!("snap_{k:04}.bin")), snap)? {
            files.push(p.strip_prefix(dir).unwrap_or(&p).to_string_lossy().into_owned());
        }
    }
    Ok(files)
}

/// Reads a run directory written by [`write_run`].
pub fn load_run(dir: &Path) -> Result<(RunConfig, RunRecord)> {
    let cfg = parse_config(&fs::read_to_string(dir.join("config.txt"))?)?;
    let checkpoints = io::read_checkpoints(&dir.join("checkpoints.csv"))?;
    let hole = cfg.hole(dir)?;
    let mut snapshots = Vec::new();
    for k in 0..checkpoints.len() {
        let path = dir.join("snapshots").join(format!("snap_{k:04}.bin"));
        if path.exists() {
            snapshots.push(io::read_snapshot(&path, Some(hole.clone()))?);
        }
    }
    if !snapshots.is_empty() && snapshots.len() != checkpoints.len() {
        return Err(Error::Format {
            path: dir.into(),
            message: "snapshots do not match the checkpoints".into(),
        });
    }
    Ok((
        cfg,
        RunRecord {
            checkpoints,
            snapshots,
            steps: 0,
            growths: 0,
        },
    ))
}

/// Asymptotic diagnostics of a run.
#[derive(Clone, Debug)]
pub struct AsymptoticReport {
    pub spec: CriticalOuterSpec,
    pub delta: f64,
    pub diagnostics: Diagnostics,
    /// `(t, probe radius, scaled value, limit, ratio)`.
    pub probes: Vec<[f64; 5]>,
    /// Scaled profile of the last snapshot with `t > e`.
    pub profile: Option<ScaledProfile>,
    pub criteria: Vec<(String, Verdict)>,
}

/// Powers of ten from `10³` that are checkpoint times.
pub fn decades(checkpoints: &[Checkpoint]) -> Vec<f64> {
    (3..=20)
        .map(|k| 10f64.powi(k))
        .filter(|&d| checkpoints.iter().any(|c| ((c.t - d) / d).abs() < 1e-9))
        .collect()
}

fn trend(times: &[f64], values: &[f64], target: f64, at: &[f64]) -> Result<Verdict> {
    if at.len() < 2 {
        return Ok(Verdict::Skipped);
    }
    let series = TrendSeries::new(times.to_vec(), values.to_vec(), target)?;
    if series.deviations(at)?.iter().any(|d| !d.is_finite()) {
        return Ok(Verdict::Fail);
    }
    Ok(Verdict::from_bool(series.approaches_target(at)?))
}

/// Computes every functional at every checkpoint with `t > e` and judges the
/// trends across the decades from `10³` on: mass ratio and support ratio
/// approaching 1, inner and outer errors decreasing.
pub fn asymptotics_stage(cfg: &RunConfig, record: &RunRecord, phi: &dyn Potential) -> Result<AsymptoticReport> {
    let first = record.checkpoints.first().ok_or(Error::ShortSeries { needed: 1, got: 0 })?;
    let m_phi = first.weighted_moment;
    let spec = CriticalOuterSpec::new(cfg.m, m_phi)?;
    let delta = cfg.delta_fraction * spec.delta_star();
    let mut d = Diagnostics::default();
    for (k, c) in record.checkpoints.iter().enumerate() {
        if c.t <= std::f64::consts::E {
            continue;
        }
        d.t.push(c.t);
        d.mass_ratio.push(c.t.ln() * c.mass / (2.0 * cfg.m * m_phi));
        d.support_minus.push(c.zeta_minus / spec.support_radius(c.t));
        d.support_plus.push(c.zeta_plus / spec.support_radius(c.t));
        let (w, o) = match record.snapshots.get(k) {
            Some(s) => (
                weighted_error(s, phi, &spec, delta).map_or(f64::NAN, |e| e.abs_max()),
                outer_error(s, phi, &spec, delta).map_or(f64::NAN, |e| e.abs_max()),
            ),
            None => (f64::NAN, f64::NAN),
        };
        d.weighted_error.push(w);
        d.outer_error.push(o);
    }
    let mut probes = Vec::new();
    if !record.snapshots.is_empty() {
        let points: Vec<[f64; 2]> = cfg.probes.iter().map(|&r| [r, 0.0]).collect();
        for (probe, r) in compact_limit(&record.snapshots, phi, &spec, &points)?.iter().zip(&cfg.probes) {
            for (i, &t) in probe.scaled.times.iter().enumerate() {
                let ratio = probe.ratio.as_ref().map_or(f64::NAN, |s| s.values[i]);
                probes.push([t, *r, probe.scaled.values[i], probe.limit, ratio]);
            }
        }
    }
    let profile = match record.snapshots.iter().rev().find(|s| s.t() > std::f64::consts::E) {
        Some(s) => {
            let xi: Vec<f64> = (0..=120).map(|k| spec.xi_star() * 1.2 * k as f64 / 120.0).collect();
            Some(to_scaled_variables(s, &spec, &xi, 0.0)?)
        }
        None => None,
    };
    let at = decades(&record.checkpoints);
    let mut criteria = vec![
        ("mass_trend".to_string(), trend(&d.t, &d.mass_ratio, 1.0, &at)?),
        ("support_trend".to_string(), trend(&d.t, &d.support_plus, 1.0, &at)?),
    ];
    criteria.push(("inner_trend".into(), trend(&d.t, &d.weighted_error, 0.0, &at)?));
    criteria.push(("outer_trend".into(), trend(&d.t, &d.outer_error, 0.0, &at)?));
    Ok(AsymptoticReport {
        spec,
        delta,
        diagnostics: d,
        probes,
        profile,
        criteria,
    })
}

/// Writes `functionals.csv`, `probes.csv` and `profile.csv`.
pub fn write_asymptotics(dir: &Path, rep: &AsymptoticReport) -> Result<Vec<String>> {
    let d = &rep.diagnostics;
    let rows: Vec<Vec<f64>> = (0..d.t.len())
        .map(|i| {
            vec![
                d.t[i],
                d.mass_ratio[i],
                d.support_minus[i],
                d.support_plus[i],
                d.weighted_error[i],
                d.outer_error[i],
            ]
        })
        .collect();
    io::write_csv(
        &dir.join("functionals.csv"),
        &["t", "mass_ratio", "support_minus", "support_plus", "weighted_error", "outer_error"],
        &rows,
    )?;
    io::write_csv(
        &dir.join("probes.csv"),
        &["t", "r", "scaled", "limit", "ratio"],
        &rep.probes.iter().map(|p| p.to_vec()).collect::<Vec<_>>(),
    )?;
    let profile_rows: Vec<Vec<f64>> = rep
        .profile
        .as_ref()
        .map(|p| p.xi.iter().zip(&p.w).map(|(&x, &w)| vec![x, w, rep.spec.f_star(x)]).collect())
        .unwrap_or_default();
    io::write_csv(&dir.join("profile.csv"), &["xi", "w", "f_star"], &profile_rows)?;
    Ok(vec!["functionals.csv".into(), "probes.csv".into(), "profile.csv".into()])
}

/// One barrier's comparison results.
#[derive(Clone, Debug)]
pub struct BarrierOutcome {
    pub barrier: Barrier,
    pub thresholds: Vec<(RegionKind, ThresholdReport)>,
    pub ordering: Option<OrderingReport>,
}

/// Regions whose sign claims each side must satisfy.
pub fn claimed_regions(side: Side) -> &'static [RegionKind] {
    match side {
        Side::Super => &[RegionKind::InnerOuter, RegionKind::InnerInner],
        Side::Sub => &[RegionKind::Inner],
    }
}

/// Sign-threshold searches for each configured barrier, and the ordering
/// check against the run (calibrated at the checkpoint `t = T`) when the run
/// reaches `T`.
pub fn comparison_stage(
    cfg: &RunConfig,
    record: &RunRecord,
    hole: &HoleGeometry,
    phi: &dyn Potential,
    spec: &CriticalOuterSpec,
    delta: f64,
) -> Result<Vec<BarrierOutcome>> {
    let alpha_bar = alpha_bar_0(phi, hole, 0.1, 256);
    let mut out = Vec::new();
    for barrier in cfg.barriers(alpha_bar)? {
        let mut opts = SweepOptions::new(delta);
        opts.split_exponent = cfg.split_exponent;
        opts.min_samples = opts.n_times * opts.n_radii * opts.n_angles;
        let thresholds = claimed_regions(barrier.side())
            .iter()
            .map(|&region| Ok((region, find_sign_threshold(&barrier, phi, hole, spec, region, &opts, &SIGN_LADDER)?)))
            .collect::<Result<Vec<_>>>()?;
        let ordering = if cfg.big_t <= cfg.t_end && record.checkpoints.len() > 1 {
            let at_t = record
                .snapshots
                .iter()
                .find(|s| ((s.t() - cfg.big_t) / cfg.big_t).abs() < 1e-9)
                .ok_or_else(|| Error::Calibration(format!("comparison.T = {} is not a checkpoint time", cfg.big_t)))?;
            let calibrated = calibrate(&barrier, phi, spec, at_t, delta)?;
            Some(verify_ordering(&record.snapshots, &calibrated, phi, spec, delta, cfg.t_end)?)
        } else {
            None
        };
        out.push(BarrierOutcome {
            barrier,
            thresholds,
            ordering,
        });
    }
    Ok(out)
}

fn side_code(side: Side) -> f64 {
    match side {
        Side::Super => 0.0,
        Side::Sub => 1.0,
    }
}

/// Name of a region in criteria and on the command line.
pub fn region_name(r: RegionKind) -> &'static str {
    match r {
        RegionKind::Inner => "inner",
        RegionKind::InnerInner => "inner-inner",
        RegionKind::InnerOuter => "inner-outer",
        RegionKind::Outer => "outer",
    }
}

/// Parses a name produced by [`region_name`].
pub fn parse_region(name: &str) -> Option<RegionKind> {
    [RegionKind::Inner, RegionKind::InnerInner, RegionKind::InnerOuter, RegionKind::Outer]
        .into_iter()
        .find(|&r| region_name(r) == name)
}

fn region_code(r: RegionKind) -> f64 {
    match r {
        RegionKind::Inner => 0.0,
        RegionKind::InnerInner => 1.0,
        RegionKind::InnerOuter => 2.0,
        RegionKind::Outer => 3.0,
    }
}

/// Writes `comparison.csv` (𝒜, ℬ sampled at each found threshold on a
/// coarse grid) and `ordering.csv`, and returns the comparison verdicts.
pub fn write_comparison(
    dir: &Path,
    outcomes: &[BarrierOutcome],
    hole: &HoleGeometry,
    phi: &dyn Potential,
    spec: &CriticalOuterSpec,
    delta: f64,
) -> Result<(Vec<String>, Vec<(String, Verdict)>)> {
    let mut samples = Vec::new();
    let mut order_rows = Vec::new();
    let mut criteria = Vec::new();
    for o in outcomes {
        let side = o.barrier.side();
        let tag = match side {
            Side::Super => "super",
            Side::Sub => "sub",
        };
        for (region, th) in &o.thresholds {
            let name = format!("signs_{tag}_{}", region_name(*region));
            criteria.push((name, Verdict::from_bool(th.log_t0.is_some())));
            if let Some(log_t0) = th.log_t0 {
                let b = o.barrier.with_log_t0(log_t0)?;
                let opts = SweepOptions {
                    n_times: 10,
                    n_radii: 20,
                    ..SweepOptions::new(delta)
                };
                for s in sample_ab(&b, phi, hole, spec, *region, &opts)? {
                    samples.push(vec![
                        side_code(side),
                        region_code(*region),
                        log_t0,
                        s.tau,
                        s.x[0],
                        s.x[1],
                        s.value.a_scaled,
                        s.value.b_scaled,
                        s.value.log_scale,
                    ]);
                }
            }
        }
        match &o.ordering {
            Some(r) => {
                order_rows.push(vec![
                    side_code(side),
                    o.barrier.eta(),
                    r.kappa0,
                    r.times.len() as f64,
                    r.samples as f64,
                    r.passed_samples as f64,
                    r.worst_violation,
                ]);
                let v = if r.degenerate {
                    Verdict::Skipped
                } else {
                    Verdict::from_bool(r.passed())
                };
                criteria.push((format!("ordering_{tag}"), v));
            }
            None => criteria.push((format!("ordering_{tag}"), Verdict::Skipped)),
        }
    }
    io::write_csv(
        &dir.join("comparison.csv"),
        &["side", "region", "log_t0", "tau", "x", "y", "a_scaled", "b_scaled", "log_scale"],
        &samples,
    )?;
    io::write_csv(
        &dir.join("ordering.csv"),
        &["side", "eta", "kappa0", "times", "samples", "passed", "worst_violation"],
        &order_rows,
    )?;
    Ok((vec!["comparison.csv".into(), "ordering.csv".into()], criteria))
}

/// Simulates `cfg` into `dir`: the run files of [`write_run`] plus
/// `run_summary.txt` (hash, grid, tolerances, wall time).
pub fn simulate_to_dir(cfg: &RunConfig, base: &Path, dir: &Path) -> Result<RunRecord> {
    let cfg = &cfg.with_absolute_paths(base);
    let start = Instant::now();
    let (hole, phi) = stationary_stage(cfg, base).map_err(|e| e.in_stage("stationary"))?;
    let (record, last) = simulate_stage(cfg, base, &hole, &phi).map_err(|e| e.in_stage("simulate"))?;
    write_run(dir, cfg, &record)?;
    let kv = vec![
        ("config_hash".to_string(), cfg.hash()),
        ("tool_version".to_string(), TOOL_VERSION.to_string()),
        ("grid".to_string(), last.mesh().describe()),
        ("safety".to_string(), format!("{}", cfg.safety)),
        ("support_threshold".to_string(), format!("{}", cfg.support_threshold)),
        ("stationary_tol".to_string(), format!("{STATIONARY_TOL}")),
        ("steps".to_string(), record.steps.to_string()),
        ("growths".to_string(), record.growths.to_string()),
        ("wall_seconds".to_string(), format!("{}", start.elapsed().as_secs_f64())),
    ];
    io::write_key_values(&dir.join("run_summary.txt"), &kv)?;
    Ok(record)
}

/// Recomputes the asymptotic diagnostics of a run directory and writes the
/// functional CSVs and the trend panels next to the run files.
pub fn verify_run_dir(dir: &Path) -> Result<(AsymptoticReport, Vec<String>)> {
    let (cfg, record) = load_run(dir)?;
    let (_, phi) = stationary_stage(&cfg, dir)?;
    let rep = asymptotics_stage(&cfg, &record, &phi)?;
    let mut files = write_asymptotics(dir, &rep)?;
    if let (Some(profile), true) = (&rep.profile, rep.diagnostics.t.len() >= 2) {
        for p in emit_plots(dir, &rep.diagnostics, profile, &rep.spec)? {
            files.push(p.strip_prefix(dir).unwrap_or(&p).to_string_lossy().into_owned());
        }
    }
    Ok((rep, files))
}

/// Runs every stage for `cfg` under `out_root/<short hash>`; file paths in
/// the configuration are resolved against `base`. A directory that already
/// holds a complete summary for the same configuration is returned as is,
/// marked cached.
pub fn run_experiment(cfg: &RunConfig, out_root: &Path, base: &Path) -> Result<RunSummary> {
    let cfg = &cfg.with_absolute_paths(base);
    let dir = out_root.join(cfg.short_hash());
    if let Ok(mut s) = RunSummary::read(&dir) {
        if s.config_hash == cfg.hash() && s.manifest_complete() {
            s.cached = true;
            return Ok(s);
        }
    }
    fs::create_dir_all(&dir)?;
    let start = Instant::now();
    let (hole, phi) = stationary_stage(cfg, base).map_err(|e| e.in_stage("stationary"))?;
    let (record, last) = simulate_stage(cfg, base, &hole, &phi).map_err(|e| e.in_stage("simulate"))?;
    let mut files = write_run(&dir, cfg, &record).map_err(|e| e.in_stage("simulate"))?;
    let degenerate = record.checkpoints.len() < 2;
    let asym = asymptotics_stage(cfg, &record, &phi).map_err(|e| e.in_stage("verify-asymptotics"))?;
    files.extend(write_asymptotics(&dir, &asym).map_err(|e| e.in_stage("verify-asymptotics"))?);
    let mut criteria = asym.criteria.clone();
    let outcomes = comparison_stage(cfg, &record, &hole, &phi, &asym.spec, asym.delta).map_err(|e| e.in_stage("check-comparison"))?;
    let (cmp_files, cmp_criteria) =
        write_comparison(&dir, &outcomes, &hole, &phi, &asym.spec, asym.delta).map_err(|e| e.in_stage("check-comparison"))?;
    files.extend(cmp_files);
    criteria.extend(cmp_criteria);
    if let (Some(profile), true) = (&asym.profile, asym.diagnostics.t.len() >= 2) {
        for p in emit_plots(&dir, &asym.diagnostics, profile, &asym.spec).map_err(|e| e.in_stage("plots"))? {
            files.push(p.strip_prefix(&dir).unwrap_or(&p).to_string_lossy().into_owned());
        }
    }
    let summary = RunSummary {
        config_hash: cfg.hash(),
        tool_version: TOOL_VERSION.to_string(),
        wall_seconds: start.elapsed().as_secs_f64(),
        criteria,
        files,
        degenerate,
        cached: false,
        dir: dir.clone(),
    };
    let extra = vec![
        ("grid".to_string(), last.mesh().describe()),
        ("steps".to_string(), record.steps.to_string()),
        ("growths".to_string(), record.growths.to_string()),
        ("safety".to_string(), format!("{}", cfg.safety)),
        ("support_threshold".to_string(), format!("{}", cfg.support_threshold)),
        ("m_phi_star".to_string(), format!("{}", asym.spec.m_phi_star())),
    ];
    summary.write(&extra)?;
    Ok(summary)
}
