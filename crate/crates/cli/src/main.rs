//! `pmelab`: command-line front end of the porous-medium laboratory.
//!
//! Exit codes: 0 when every criterion passes, 1 when a criterion fails,
//! 2 for usage, configuration and input errors, 3 for numerical faults.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pmelab::asymptotics::Side;
use pmelab::comparison::{calibrate, sample_ab, sandwich_check, sandwich_gap_limit, verify_ordering, verify_residual_signs, SweepOptions};
use pmelab::geometry::HoleGeometry;
use pmelab::harness::config::{parse_config, parse_params, read_points};
use pmelab::harness::experiment::{
    decades, load_run, parse_region, run_experiment, simulate_to_dir, stationary_stage, verify_run_dir, PotentialField, Verdict,
    STATIONARY_TOL,
};
use pmelab::harness::io::{write_csv, write_key_values};
use pmelab::harness::plots::{render_svg, Plot, Series};
use pmelab::special::{dipole, CriticalOuterSpec, DipoleSpec, ProfileSpec};
use pmelab::stationary::{alpha_bar_0, check_gradient_bounds, phi_disk, solve_stationary_numeric, DiskPotential, Potential};
use pmelab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "pmelab",
    version,
    about = "Porous medium equation in exterior domains: simulation and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Super,
    Sub,
    Sandwich,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the stationary potential of a hole and certify its gradient bounds.
    Stationary {
        /// `disk:R`, `ellipse:A,B` or `curve:FILE`.
        #[arg(long, default_value = "disk:1")]
        hole: String,
        #[arg(long, default_value_t = STATIONARY_TOL)]
        tol: f64,
        /// Binary field file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate and plot the Barenblatt profile F_M and the dipole D_M.
    Profile {
        #[arg(long, default_value_t = 2.0)]
        m: f64,
        /// Mass of the Barenblatt profile and first moment of the dipole.
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the solver for a configuration file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Compute the asymptotic functionals of a run directory and judge their trends.
    VerifyAsymptotics {
        #[arg(long)]
        run_dir: PathBuf,
    },
    /// Check barrier sign conditions, barrier ordering, or the nested-hole sandwich.
    CheckComparison {
        #[arg(long, value_enum)]
        side: SideArg,
        /// Barrier parameters (`eta`, `kappa0`, `mu`, `k` or `alpha0`, `T`).
        #[arg(long, required_if_eq_any = [("side", "super"), ("side", "sub")])]
        params: Option<PathBuf>,
        /// `inner`, `inner-inner` or `inner-outer`.
        #[arg(long, required_if_eq_any = [("side", "super"), ("side", "sub")])]
        region: Option<String>,
        /// Run whose geometry and `M_φ*` are used, and whose snapshots are
        /// compared with the calibrated barrier.
        #[arg(long)]
        run_dir: Option<PathBuf>,
        /// Without a run: the hole, `m` and `M_φ*`.
        #[arg(long, default_value = "disk:1")]
        hole: String,
        #[arg(long, default_value_t = 2.0)]
        m: f64,
        #[arg(long)]
        m_phi: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        delta_fraction: f64,
        /// Sandwich: run directories with the small hole, the middle hole and the big hole.
        #[arg(long, num_args = 3, value_names = ["SMALL", "MIDDLE", "BIG"], required_if_eq("side", "sandwich"))]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run every stage for a configuration under `<out-root>/<config hash>`.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "runs")]
        out_root: PathBuf,
    },
}

fn parse_hole(spec: &str) -> Result<HoleGeometry> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let nums = || -> Result<Vec<f64>> {
        rest.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parameter(format!("bad number in --hole `{spec}`")))
            })
            .collect()
    };
    match (kind, nums()) {
        ("disk", Ok(v)) if v.len() == 1 => HoleGeometry::disk(v[0]),
        ("ellipse", Ok(v)) if v.len() == 2 => HoleGeometry::ellipse(v[0], v[1]),
        ("curve", _) if !rest.is_empty() => HoleGeometry::curve(read_points(Path::new(rest))?),
        _ => Err(Error::Parameter(format!(
            "--hole expects disk:R, ellipse:A,B or curve:FILE, got `{spec}`"
        ))),
    }
}

fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn kv(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn print_kv(pairs: &[(String, String)]) {
    for (k, v) in pairs {
        println!("{k} = {v}");
    }
}

fn verdict_line(name: &str, v: Verdict) {
    println!("{:<8} {name}", v.as_str().to_uppercase());
}

fn stationary(hole: &str, tol: f64, out: &Path) -> Result<bool> {
    let hole = parse_hole(hole)?;
    let field = solve_stationary_numeric(&hole, tol)?;
    field.write_binary(out)?;
    let g = check_gradient_bounds(&field)?;
    let mut report = kv(&[
        ("grid", field.grid().descriptor()),
        ("residual", format!("{:e}", field.residual())),
        ("c_far", format!("{}", field.c_far())),
        ("c_low", format!("{}", g.c_low)),
        ("c_high", format!("{}", g.c_high)),
        ("r_split", format!("{}", g.r_split)),
        ("radial_min", format!("{}", g.radial_min)),
        ("radial_max", format!("{}", g.radial_max)),
        ("alpha_bar_0", format!("{}", alpha_bar_0(&field, &hole, 0.1, 256))),
    ]);
    let mut ok = g.r_split.is_finite();
    if hole.is_radial() {
        let r = hole.outer_radius();
        let mut err: f64 = 0.0;
        for (_, x) in field.fluid_cells() {
            err = err.max((field.phi(x) - phi_disk(r, x)?).abs());
        }
        report.push(("disk_max_error".into(), format!("{err:e}")));
        ok &= err <= 1e-4;
    }
    write_key_values(&out.with_extension("txt"), &report)?;
    print_kv(&report);
    Ok(ok)
}

fn profile(m: f64, mass: f64, points: usize, out_dir: &Path) -> Result<bool> {
    if points < 2 {
        return Err(Error::ShortSeries { needed: 2, got: points });
    }
    fs::create_dir_all(out_dir)?;
    let f = ProfileSpec::new(m, 2, mass)?;
    let d = DipoleSpec::new(m, mass)?;
    let grid = |end: f64| -> Vec<f64> { (0..points).map(|k| end * k as f64 / (points - 1) as f64).collect() };
    let xi = grid(1.1 * f.xi());
    let fm: Vec<f64> = xi.iter().map(|&s| f.profile(s)).collect();
    let x = grid(1.1 * d.xi());
    let dm = x.iter().map(|&s| dipole(&d, s, 1.0)).collect::<Result<Vec<f64>>>()?;
    write_csv(
        &out_dir.join("profile.csv"),
        &["xi", "F_M"],
        &xi.iter().zip(&fm).map(|(a, b)| vec![*a, *b]).collect::<Vec<_>>(),
    )?;
    write_csv(
        &out_dir.join("dipole.csv"),
        &["x", "D_M"],
        &x.iter().zip(&dm).map(|(a, b)| vec![*a, *b]).collect::<Vec<_>>(),
    )?;
    let panel = |title: String, xl: &str, label: &str, xs: &[f64], ys: &[f64]| Plot {
        title,
        x_label: xl.into(),
        y_label: label.into(),
        series: vec![Series::new(label, xs, ys)],
        reference: None,
    };
    fs::write(
        out_dir.join("F_M.svg"),
        render_svg(&panel(format!("Barenblatt profile, m = {m}, M = {mass}"), "ξ", "F_M", &xi, &fm))?,
    )?;
    fs::write(
        out_dir.join("D_M.svg"),
        render_svg(&panel(format!("dipole at t = 1, m = {m}, M = {mass}"), "x", "D_M", &x, &dm))?,
    )?;
    println!("wrote profile.csv, dipole.csv, F_M.svg, D_M.svg to {}", out_dir.display());
    Ok(true)
}

fn simulate(config: &Path, out_dir: &Path) -> Result<bool> {
    let cfg = parse_config(&fs::read_to_string(config)?)?;
    let record = simulate_to_dir(&cfg, &config_dir(config), out_dir)?;
    println!("{} checkpoints written to {}", record.checkpoints.len(), out_dir.display());
    Ok(true)
}

fn verify_asymptotics(run_dir: &Path) -> Result<bool> {
    let (rep, files) = verify_run_dir(run_dir)?;
    for (name, v) in &rep.criteria {
        verdict_line(name, *v);
    }
    println!("wrote {}", files.join(", "));
    Ok(rep.criteria.iter().all(|(_, v)| *v != Verdict::Fail))
}

#[allow(clippy::too_many_arguments)]
fn check_barrier(
    side: Side,
    params: &Path,
    region: &str,
    run_dir: Option<&Path>,
    hole: &str,
    m: f64,
    m_phi: Option<f64>,
    delta_fraction: f64,
    out_dir: &Path,
) -> Result<bool> {
    let region = parse_region(region).ok_or_else(|| Error::Parameter(format!("unknown region `{region}`")))?;
    let bp = parse_params(&fs::read_to_string(params)?)?;
    let run = run_dir.map(load_run).transpose()?;
    let (hole, phi, spec) = match (&run, run_dir) {
        (Some((cfg, record)), Some(dir)) => {
            let (hole, phi) = stationary_stage(cfg, dir)?;
            let m_phi = record
                .checkpoints
                .first()
                .ok_or(Error::ShortSeries { needed: 1, got: 0 })?
                .weighted_moment;
            (hole, phi, CriticalOuterSpec::new(cfg.m, m_phi)?)
        }
        _ => {
            let m_phi = m_phi.ok_or_else(|| Error::Parameter("--m-phi is required without --run-dir".into()))?;
            let hole = parse_hole(hole)?;
            let phi = if hole.is_radial() {
                PotentialField::Disk(DiskPotential {
                    radius: hole.outer_radius(),
                })
            } else {
                PotentialField::Numeric(Box::new(solve_stationary_numeric(&hole, STATIONARY_TOL)?))
            };
            (hole, phi, CriticalOuterSpec::new(m, m_phi)?)
        }
    };
    if !(delta_fraction > 0.0 && delta_fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "--delta-fraction must lie in (0, 1), got {delta_fraction}"
        )));
    }
    let delta = delta_fraction * spec.delta_star();
    let barrier = bp.barrier(side, alpha_bar_0(&phi, &hole, 0.1, 256))?;
    let opts = SweepOptions::new(delta);
    let report = verify_residual_signs(&barrier, &phi, &hole, &spec, region, &opts)?;
    fs::create_dir_all(out_dir)?;
    let samples = sample_ab(&barrier, &phi, &hole, &spec, region, &opts)?;
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| vec![s.tau, s.x[0], s.x[1], s.value.a_scaled, s.value.b_scaled, s.value.log_scale])
        .collect();
    write_csv(
        &out_dir.join("ab_samples.csv"),
        &["tau", "x", "y", "a_scaled", "b_scaled", "log_scale"],
        &rows,
    )?;
    let mut out = kv(&[
        ("samples", report.samples.to_string()),
        ("log_T", format!("{}", report.log_t0)),
        ("a_scaled_range", format!("{:e} {:e}", report.a_range.0, report.a_range.1)),
        ("b_scaled_range", format!("{:e} {:e}", report.b_range.0, report.b_range.1)),
        ("sum_scaled_range", format!("{:e} {:e}", report.sum_range.0, report.sum_range.1)),
    ]);
    for c in &report.claims {
        out.push((format!("claim.{:?}", c.claim), if c.holds { "pass".into() } else { "fail".into() }));
        out.push((format!("claim.{:?}.failures", c.claim), c.failures.to_string()));
        if let Some(tau) = c.settled_tau {
            out.push((format!("claim.{:?}.settled_log_t", c.claim), format!("{tau}")));
        }
    }
    let mut ok = report.passed;
    if let (Some((cfg, record)), Some(dir)) = (&run, run_dir) {
        let at_t = record
            .snapshots
            .iter()
            .find(|s| ((s.t() - bp.big_t) / bp.big_t).abs() < 1e-9)
            .ok_or_else(|| Error::Calibration(format!("T = {} is not a checkpoint of {}", bp.big_t, dir.display())))?;
        let calibrated = calibrate(&barrier, &phi, &spec, at_t, delta)?;
        let ord = verify_ordering(&record.snapshots, &calibrated, &phi, &spec, delta, cfg.t_end)?;
        out.extend(kv(&[
            ("ordering.kappa0", format!("{}", ord.kappa0)),
            ("ordering.times", ord.times.len().to_string()),
            ("ordering.samples", ord.samples.to_string()),
            ("ordering.passed", ord.passed_samples.to_string()),
            ("ordering.worst_violation", format!("{:e}", ord.worst_violation)),
            ("ordering.degenerate", ord.degenerate.to_string()),
            ("ordering", if ord.passed() { "pass".into() } else { "fail".into() }),
        ]));
        ok &= ord.passed();
    }
    out.push(("result".into(), if ok { "pass".into() } else { "fail".into() }));
    write_key_values(&out_dir.join("report.txt"), &out)?;
    print_kv(&out);
    Ok(ok)
}

fn check_sandwich(runs: &[PathBuf], out_dir: &Path) -> Result<bool> {
    let loaded = runs.iter().map(|d| load_run(d)).collect::<Result<Vec<_>>>()?;
    let holes = loaded
        .iter()
        .zip(runs)
        .map(|((cfg, _), d)| cfg.hole(d))
        .collect::<Result<Vec<_>>>()?;
    let gap_times: Vec<f64> = [1e2].into_iter().chain(decades(&loaded[1].1.checkpoints)).collect();
    let rep = sandwich_check(&loaded[0].1, &loaded[1].1, &loaded[2].1, &gap_times, 1e-12)?;
    let first = loaded[1].1.checkpoints.first().ok_or(Error::ShortSeries { needed: 1, got: 0 })?;
    let limit = sandwich_gap_limit(loaded[1].0.m, first.mass, holes[0].inner_radius(), holes[2].outer_radius());
    fs::create_dir_all(out_dir)?;
    let rows: Vec<Vec<f64>> = rep.mass_gap.iter().map(|g| vec![g.0, g.1, g.2]).collect();
    write_csv(&out_dir.join("mass_gap.csv"), &["T", "gap", "gap_log_T"], &rows)?;
    let ok = rep.ordered() && rep.gap_bounded(limit);
    let out = kv(&[
        ("times", rep.times.len().to_string()),
        ("samples", rep.samples.to_string()),
        ("violations", rep.violations.to_string()),
        ("worst", format!("{:e}", rep.worst)),
        ("gap_limit", format!("{limit}")),
        ("result", if ok { "pass".into() } else { "fail".into() }),
    ]);
    write_key_values(&out_dir.join("report.txt"), &out)?;
    print_kv(&out);
    Ok(ok)
}

fn experiment(config: &Path, out_root: &Path) -> Result<bool> {
    let cfg = parse_config(&fs::read_to_string(config)?)?;
    let s = run_experiment(&cfg, out_root, &config_dir(config))?;
    for (name, v) in &s.criteria {
        verdict_line(name, *v);
    }
    println!(
        "{} ({}{})",
        s.dir.display(),
        if s.cached { "cached" } else { "computed" },
        if s.degenerate { ", degenerate" } else { "" }
    );
    Ok(s.passed())
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Stationary { hole, tol, out } => stationary(&hole, tol, &out),
        Command::Profile { m, mass, points, out_dir } => profile(m, mass, points, &out_dir),
        Command::Simulate { config, out_dir } => simulate(&config, &out_dir),
        Command::VerifyAsymptotics { run_dir } => verify_asymptotics(&run_dir),
        Command::CheckComparison {
            side,
            params,
            region,
            run_dir,
            hole,
            m,
            m_phi,
            delta_fraction,
            runs,
            out_dir,
        } => {
            let side = match side {
                SideArg::Sandwich => return check_sandwich(&runs, &out_dir),
                SideArg::Super => Side::Super,
                SideArg::Sub => Side::Sub,
            };
            // clap enforces both flags for the barrier sides
            let (params, region) = (params.unwrap_or_default(), region.unwrap_or_default());
            check_barrier(
                side,
                &params,
                &region,
                run_dir.as_deref(),
                &hole,
                m,
                m_phi,
                delta_fraction,
                &out_dir,
            )
        }
        Command::Experiment { config, out_root } => experiment(&config, &out_root),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
