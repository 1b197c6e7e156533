//! The twelve acceptance criteria at their stated tolerances.
//!
//! Every test prints one `PASS`/`FAIL criterion N: ...` line to stderr,
//! bypassing output capture, and then asserts the recorded verdict: criteria
//! listed in [`KNOWN_FAILURES`] are expected to fail, every other criterion
//! to pass. A change of verdict in either direction breaks the suite.
//!
//! The long exterior runs are shared through `OnceLock`s. Run with
//! `cargo test --test acceptance -- --test-threads=1` to keep the lines in
//! criterion order.

use std::f64::consts::{E, PI};
use std::io::Write;
use std::sync::OnceLock;

use pmelab::asymptotics::{compact_limit, outer_error, support_ratio, weighted_error, RegionKind};
use pmelab::comparison::{
    calibrate, default_alpha0, eval_ab, fd_residual, find_sign_threshold, sandwich_check, sandwich_gap_limit, verify_ordering, Barrier,
    SubParams, SuperParams, SweepOptions,
};
use pmelab::geometry::{build_masked_grid, HoleGeometry, RadialGrid};
use pmelab::harness::experiment::SIGN_LADDER;
use pmelab::solver::{run, run_ensemble, InitialData, Mesh, RunRecord, SimulationConfig, SolverState};
use pmelab::special::{barenblatt, CriticalOuterSpec, ProfileSpec};
use pmelab::stationary::{
    check_gradient_bounds, phi_conformal, phi_disk, solve_stationary_numeric, ConformalMapSpec, DiskPotential, Potential,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that fail at desk-scale times; the analysis is in the README.
const KNOWN_FAILURES: &[u32] = &[5, 6, 7];

fn verdict(n: u32, ok: bool, detail: &str) {
    let line = format!("{} criterion {n:>2}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert_eq!(ok, !KNOWN_FAILURES.contains(&n), "criterion {n} changed verdict: {detail}");
}

const M: f64 = 2.0;
const DISK: DiskPotential = DiskPotential { radius: 1.0 };

/// Exterior of the unit disk, radial data `Ring{2, 0.8, 1}` from `t = 3`.
fn exterior_run(dlog: f64, t_end: f64) -> RunRecord {
    let grid = RadialGrid::log_uniform(1.0, 6.0, dlog).unwrap();
    let ring = InitialData::Ring {
        radius: 2.0,
        width: 0.8,
        amplitude: 1.0,
    };
    let s = SolverState::new(Mesh::Radial(grid), M, 3.0, &ring).unwrap();
    let cfg = SimulationConfig {
        t_end,
        keep_snapshots: true,
        ..Default::default()
    };
    run(s, &cfg, Some(&DISK)).unwrap().0
}

fn baseline() -> &'static RunRecord {
    static RUN: OnceLock<RunRecord> = OnceLock::new();
    RUN.get_or_init(|| exterior_run(0.02, 1e5))
}

fn fine() -> &'static RunRecord {
    static RUN: OnceLock<RunRecord> = OnceLock::new();
    RUN.get_or_init(|| exterior_run(0.01, 1e5))
}

/// Off-center bump outside the unit disk on a masked Cartesian grid.
fn masked_run(h: f64) -> RunRecord {
    let grid = build_masked_grid(HoleGeometry::disk(1.0).unwrap(), 8.0, h).unwrap();
    let bump = InitialData::Bump {
        center: [2.0, 0.5],
        radius: 0.8,
        amplitude: 0.1,
    };
    let s = SolverState::new(Mesh::Masked(grid), M, 3.0, &bump).unwrap();
    run(
        s,
        &SimulationConfig {
            t_end: 1e4,
            ..Default::default()
        },
        Some(&DISK),
    )
    .unwrap()
    .0
}

fn spec_of(record: &RunRecord) -> CriticalOuterSpec {
    CriticalOuterSpec::new(M, record.checkpoints[0].weighted_moment).unwrap()
}

fn snapshot_at(record: &RunRecord, t: f64) -> &SolverState {
    record
        .snapshots
        .iter()
        .find(|s| ((s.t() - t) / t).abs() < 1e-9)
        .unwrap_or_else(|| panic!("no snapshot at {t}"))
}

fn max_drift(record: &RunRecord) -> f64 {
    let m0 = record.checkpoints[0].weighted_moment;
    record
        .checkpoints
        .iter()
        .map(|c| (c.weighted_moment / m0 - 1.0).abs())
        .fold(0.0, f64::max)
}

/// `∫ 𝒰 dx` in the plane, with `r = R sin θ` to smooth the support edge.
fn quadrature_mass(spec: &ProfileSpec, t: f64) -> f64 {
    let big_r = spec.support_radius(t);
    let n = 4000;
    let h = 0.5 * PI / n as f64;
    let f = |th: f64| 2.0 * PI * big_r * big_r * th.sin() * th.cos() * spec.eval_radial(big_r * th.sin(), t);
    let mut sum = f(0.0) + f(0.5 * PI);
    for k in 1..n {
        sum += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// Centered-difference `∂ₜ𝒰 − Δ𝒰ᵐ`: Richardson-extrapolated time
/// derivative, five-point Laplacian with spacing `h`.
fn barenblatt_residual(spec: &ProfileSpec, x: [f64; 2], t: f64, h: f64) -> f64 {
    let u = |x: [f64; 2], t: f64| barenblatt(spec, &x, t).unwrap();
    let um = |x: [f64; 2]| u(x, t).powf(spec.m());
    let dt = 1e-3 * t;
    let d1 = (u(x, t + dt) - u(x, t - dt)) / (2.0 * dt);
    let d2 = (u(x, t + 2.0 * dt) - u(x, t - 2.0 * dt)) / (4.0 * dt);
    let dudt = (4.0 * d1 - d2) / 3.0;
    let lap = (um([x[0] + h, x[1]]) + um([x[0] - h, x[1]]) + um([x[0], x[1] + h]) + um([x[0], x[1] - h]) - 4.0 * um(x)) / (h * h);
    dudt - lap
}

#[test]
fn criterion_01_barenblatt_self_consistency() {
    let mut worst_mass: f64 = 0.0;
    let mut ratios = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in [1.5, 2.0, 3.0] {
        for mass in [1.0, 16.0] {
            let spec = ProfileSpec::new(m, 2, mass).unwrap();
            for t in [1.0, 10.0] {
                worst_mass = worst_mass.max((quadrature_mass(&spec, t) / mass - 1.0).abs());
                let big_r = spec.support_radius(t);
                let h = 0.01 * big_r;
                let points: Vec<[f64; 2]> = (0..50)
                    .map(|_| {
                        let (r, a) = (rng.gen_range(0.05..0.7) * big_r, rng.gen_range(0.0..2.0 * PI));
                        [r * a.cos(), r * a.sin()]
                    })
                    .collect();
                let max_res = |h: f64| {
                    points
                        .iter()
                        .map(|&x| barenblatt_residual(&spec, x, t, h).abs())
                        .fold(0.0, f64::max)
                };
                ratios.push(max_res(h) / max_res(h / 2.0));
            }
        }
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    let ok = worst_mass <= 1e-6 && lo >= 3.5 && hi <= 4.5;
    verdict(
        1,
        ok,
        &format!("max mass error {worst_mass:.2e} (≤ 1e-6); residual ratios under h→h/2 in [{lo:.3}, {hi:.3}] (⊂ [3.5, 4.5])"),
    );
}

#[test]
fn criterion_02_cauchy_validation() {
    let spec = ProfileSpec::new(2.0, 2, 1.0).unwrap();
    let error = |n: usize| {
        let grid = RadialGrid::whole_plane(5.0, 5 * n).unwrap();
        let s = SolverState::new(Mesh::Radial(grid), 2.0, 1.0, &InitialData::Barenblatt { mass: 1.0, t0: 1.0 }).unwrap();
        let (_, end) = run(
            s,
            &SimulationConfig {
                t_end: 10.0,
                ..Default::default()
            },
            None,
        )
        .unwrap();
        let exact = end.discretization().cell_averages(&|x| spec.eval_radial(x[0].hypot(x[1]), 10.0));
        exact.iter().zip(end.u()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let (e256, e512) = (error(256), error(512));
    let ok = e256 <= 1e-2 && e256 / e512 >= 1.8;
    verdict(
        2,
        ok,
        &format!(
            "sup error {e256:.3e} at h = 1/256 (≤ 1e-2), {e512:.3e} at 1/512, ratio {:.2} (≥ 1.8)",
            e256 / e512
        ),
    );
}

#[test]
fn criterion_03_conservation_law() {
    let (radial_base, radial_fine) = (max_drift(baseline()), max_drift(fine()));
    let (masked_base, masked_fine) = (max_drift(&masked_run(0.1)), max_drift(&masked_run(0.05)));
    let ok = radial_base <= 5e-3 && radial_fine <= 2.5e-3 && masked_base <= 5e-3 && masked_fine <= 2.5e-3;
    verdict(
        3,
        ok,
        &format!(
            "max |M_φ(t)/M_φ(3) − 1| on [3, 1e4+]: radial {radial_base:.1e} / {radial_fine:.1e}, masked bump {masked_base:.2e} / {masked_fine:.2e} (≤ 0.5% / 0.25%)"
        ),
    );
}

#[test]
fn criterion_04_mass_law() {
    let record = fine();
    let spec = spec_of(record);
    let ratio = |t: f64| {
        let c = record.checkpoints.iter().find(|c| ((c.t - t) / t).abs() < 1e-9).unwrap();
        t.ln() * c.mass / (2.0 * M * spec.m_phi_star())
    };
    let r = [ratio(1e3), ratio(1e4), ratio(1e5)];
    let dev: Vec<f64> = r.iter().map(|v| (v - 1.0).abs()).collect();
    let ok = r[2] > 0.6 && r[2] < 1.4 && dev[1] < dev[0] && dev[2] < dev[1];
    verdict(
        4,
        ok,
        &format!(
            "log t·M/(2mM_φ*) = {:.4}, {:.4}, {:.4} at 1e3, 1e4, 1e5 (final in (0.6, 1.4), |·−1| decreasing)",
            r[0], r[1], r[2]
        ),
    );
}

#[test]
fn criterion_05_far_field_trend() {
    let record = fine();
    let spec = spec_of(record);
    let delta = spec.delta_star() / 2.0;
    let e = |t: f64| outer_error(snapshot_at(record, t), &DISK, &spec, delta).unwrap().abs_max();
    let (e3, e4, e5) = (e(1e3), e(1e4), e(1e5));
    verdict(
        5,
        e3 / e5 >= 2.0,
        &format!(
            "outer error {e3:.4}, {e4:.4}, {e5:.4} at 1e3, 1e4, 1e5: decrease {:.3}× (≥ 2×)",
            e3 / e5
        ),
    );
}

#[test]
fn criterion_06_near_field_trend() {
    let record = fine();
    let spec = spec_of(record);
    let delta = spec.delta_star() / 2.0;
    let e = |t: f64| weighted_error(snapshot_at(record, t), &DISK, &spec, delta).unwrap().abs_max();
    let (e3, e4, e5) = (e(1e3), e(1e4), e(1e5));
    let probe = &compact_limit(&record.snapshots, &DISK, &spec, &[[E, 0.0]]).unwrap()[0];
    let ratio = probe.ratio.as_ref().unwrap();
    let dev = ratio.deviations(&[1e3, 1e4, 1e5]).unwrap();
    let final_ratio = ratio.at(1e5).unwrap();
    let compact_ok = final_ratio >= 1.0 / 1.5 && final_ratio <= 1.5 && dev[1] < dev[0] && dev[2] < dev[1];
    let ok = e3 / e5 >= 2.0 && compact_ok;
    verdict(
        6,
        ok,
        &format!(
            "inner error {e3:.4}, {e4:.4}, {e5:.4}: decrease {:.3}× (≥ 2×); compact ratio at |x| = e: {:.4}, {:.4}, {final_ratio:.4} ({})",
            e3 / e5,
            ratio.at(1e3).unwrap(),
            ratio.at(1e4).unwrap(),
            if compact_ok { "within 1.5 of 1, trending" } else { "out of band" }
        ),
    );
}

#[test]
fn criterion_07_support_law() {
    let record = fine();
    let spec = spec_of(record);
    let (minus, plus) = support_ratio(record, &spec).unwrap();
    let check = |s: &pmelab::asymptotics::TrendSeries| {
        let last = *s.values.last().unwrap();
        let tail = s.tail(3);
        let monotone = tail.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
        (
            last > 0.7 && last < 1.3 && monotone,
            format!("{:.5}, {:.5}, {:.5}", tail[0], tail[1], tail[2]),
        )
    };
    let ((ok_m, tm), (ok_p, tp)) = (check(&minus), check(&plus));
    verdict(
        7,
        ok_m && ok_p,
        &format!("ζ₋ ratio over the last three checkpoints {tm}; ζ₊ {tp} (final in (0.7, 1.3), |·−1| decreasing)"),
    );
}

#[test]
fn criterion_08_derivative_formulas() {
    let spec = CriticalOuterSpec::new(M, 3.0).unwrap();
    let t: f64 = 50.0;
    let support = spec.support_radius(t);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut summary = Vec::new();
    let mut ok = true;
    for b in [
        Barrier::Super(SuperParams::new(1.3, 0.7, 0.2, 1.0, 30.0).unwrap()),
        Barrier::Sub(SubParams::new(0.6, 0.4, 0.2, 0.05, 30.0).unwrap()),
    ] {
        let (h, dt) = (2e-2, 1e-2);
        let points: Vec<[f64; 2]> = (0..100)
            .map(|_| {
                let (r, a) = (rng.gen_range(1.3..0.8 * support), rng.gen_range(0.0..2.0 * PI));
                [r * a.cos(), r * a.sin()]
            })
            .collect();
        let (mut e1, mut e2, mut rel) = (0.0f64, 0.0f64, 0.0f64);
        for &x in &points {
            let exact = eval_ab(&b, &DISK, &spec, x, t.ln()).unwrap().residual();
            let a = (fd_residual(&b, &DISK, &spec, x, t, h, dt).unwrap() - exact).abs();
            let c = (fd_residual(&b, &DISK, &spec, x, t, h / 2.0, dt).unwrap() - exact).abs();
            e1 = e1.max(a);
            e2 = e2.max(c);
            rel = rel.max(c / exact.abs());
        }
        let ratio = e1 / e2;
        ok &= (3.5..=4.5).contains(&ratio) && rel <= 1e-2;
        summary.push(format!("{:?}: max error {e2:.2e} (relative {rel:.1e}), ratio {ratio:.3}", b.side()));
    }
    verdict(
        8,
        ok,
        &format!(
            "100 random points each, h = 0.02 → 0.01; {} (ratio in [3.5, 4.5], relative error ≤ 1e-2)",
            summary.join("; ")
        ),
    );
}

#[test]
fn criterion_09_residual_sign_sweeps() {
    let m_phi = baseline().checkpoints[0].weighted_moment;
    let hole = HoleGeometry::disk(1.0).unwrap();
    let (_, alpha0) = default_alpha0(&DISK, &hole, 0.1);
    let mut rows = Vec::new();
    let mut ok = true;
    for m in [1.5, 2.0, 3.0] {
        let spec = CriticalOuterSpec::new(m, m_phi).unwrap();
        let mut opts = SweepOptions::new(spec.delta_star() / 2.0);
        opts.min_samples = 10_000;
        let sup = Barrier::Super(SuperParams::at_log_time(1.5, 1.0, 0.1, 1.0, 5.0).unwrap());
        let sub = Barrier::Sub(SubParams::at_log_time(0.5, 0.5, 0.1, alpha0, 5.0).unwrap());
        let mut found = Vec::new();
        for (b, region) in [
            (sup, RegionKind::InnerOuter),
            (sup, RegionKind::InnerInner),
            (sub, RegionKind::Inner),
        ] {
            let r = find_sign_threshold(&b, &DISK, &hole, &spec, region, &opts, &SIGN_LADDER).unwrap();
            ok &= r.log_t0.is_some();
            found.push(r.log_t0.map_or("none".to_string(), |v| format!("{v}")));
        }
        rows.push(format!("m={m}: log T = {}/{}/{}", found[0], found[1], found[2]));
    }
    verdict(
        9,
        ok,
        &format!(
            "M_φ* = {m_phi:.5}, 10⁴ samples per sweep, thresholds super I^o/super I^i/sub I: {}",
            rows.join("; ")
        ),
    );
}

#[test]
fn criterion_10_ordering() {
    let record = fine();
    let spec = spec_of(record);
    let delta = spec.delta_star() / 2.0;
    let hole = HoleGeometry::disk(1.0).unwrap();
    let (_, alpha0) = default_alpha0(&DISK, &hole, 0.1);
    let big_t = 10.0;
    let at_t = snapshot_at(record, big_t);
    let mut rows = Vec::new();
    let mut ok = true;
    for b in [
        Barrier::Super(SuperParams::new(1.5, 0.1, 0.1, 1.0, big_t).unwrap()),
        Barrier::Super(SuperParams::new(1.1, 0.1, 0.1, 1.0, big_t).unwrap()),
        Barrier::Sub(SubParams::new(0.5, 0.1, 0.1, alpha0, big_t).unwrap()),
        Barrier::Sub(SubParams::new(0.9, 0.1, 0.1, alpha0, big_t).unwrap()),
    ] {
        let calibrated = calibrate(&b, &DISK, &spec, at_t, delta).unwrap();
        let r = verify_ordering(&record.snapshots, &calibrated, &DISK, &spec, delta, 1e4).unwrap();
        ok &= r.passed() && !r.degenerate;
        rows.push(format!(
            "{:?} η={} κ₀={:.4}: {}/{} over {} times",
            b.side(),
            b.eta(),
            r.kappa0,
            r.passed_samples,
            r.samples,
            r.times.len()
        ));
    }
    verdict(10, ok, &format!("T = 10, δ = δ*/2: {}", rows.join("; ")));
}

#[test]
fn criterion_11_sandwich() {
    let holes = [
        HoleGeometry::disk(0.5).unwrap(),
        HoleGeometry::ellipse(1.0, 0.75).unwrap(),
        HoleGeometry::disk(1.0).unwrap(),
    ];
    let bump = InitialData::Bump {
        center: [2.0, 0.5],
        radius: 0.8,
        amplitude: 0.1,
    };
    let states: Vec<SolverState> = holes
        .iter()
        .map(|h| SolverState::new(Mesh::Masked(build_masked_grid(h.clone(), 8.0, 0.1).unwrap()), M, 3.0, &bump).unwrap())
        .collect();
    let cfg = SimulationConfig {
        t_end: 1e4,
        keep_snapshots: true,
        ..Default::default()
    };
    let (records, _) = run_ensemble(states, &cfg, &[None, None, None]).unwrap();
    let rep = sandwich_check(&records[0], &records[1], &records[2], &[1e2, 1e3, 1e4], 1e-12).unwrap();
    let limit = sandwich_gap_limit(M, records[1].checkpoints[0].mass, 0.5, 1.0);
    let gaps: Vec<String> = rep.mass_gap.iter().map(|g| format!("{:.4}", g.2)).collect();
    let ok = rep.ordered() && rep.gap_bounded(limit);
    verdict(
        11,
        ok,
        &format!(
            "{} violations in {} samples over {} times; (M⁺ − M⁻)·log T = {} at 1e2, 1e3, 1e4 (≤ 2m·M₀·log 2 = {limit:.4})",
            rep.violations,
            rep.samples,
            rep.times.len(),
            gaps.join(", ")
        ),
    );
}

#[test]
fn criterion_12_stationary_certification() {
    let mut analytic: f64 = 0.0;
    let mut kelvin: f64 = 0.0;
    for k in 0..400 {
        let (d, a) = (1.0 + 0.05 * k as f64, 0.37 * k as f64);
        let x = [d * a.cos(), d * a.sin()];
        analytic = analytic.max((DISK.phi(x) - phi_disk(1.0, x).unwrap()).abs());
        analytic = analytic.max((phi_disk(1.0, x).unwrap() - d.ln()).abs());
        kelvin = kelvin.max((phi_conformal(&ConformalMapSpec::disk(1.0).unwrap(), x).unwrap() - d.ln()).abs());
    }
    let disk_field = solve_stationary_numeric(&HoleGeometry::disk(1.0).unwrap(), 1e-10).unwrap();
    let numeric = disk_field
        .fluid_cells()
        .map(|(k, x)| (disk_field.values()[k] - phi_disk(1.0, x).unwrap()).abs())
        .fold(0.0, f64::max);
    let ellipse_field = solve_stationary_numeric(&HoleGeometry::ellipse(1.0, 0.75).unwrap(), 1e-10).unwrap();
    let mut ok = analytic <= 1e-10 && numeric <= 1e-4 && kelvin <= 1e-12;
    let mut bounds = Vec::new();
    for (name, field) in [("disk", &disk_field), ("ellipse(1, 0.75)", &ellipse_field)] {
        let g = check_gradient_bounds(field).unwrap();
        ok &= g.r_split.is_finite() && g.radial_min >= 0.5 && g.radial_max <= 2.0;
        bounds.push(format!(
            "{name}: R_split = {:.4}, x·∇φ ∈ [{:.4}, {:.4}]",
            g.r_split, g.radial_min, g.radial_max
        ));
    }
    verdict(
        12,
        ok,
        &format!(
            "analytic {analytic:.1e} (≤ 1e-10), numeric {numeric:.1e} (≤ 1e-4), Kelvin {kelvin:.1e} (≤ 1e-12); {}",
            bounds.join("; ")
        ),
    );
}
