//! Property tests of the invariants stated for each module.

use proptest::prelude::*;

use pmelab::asymptotics::{outer_error, weighted_error};
use pmelab::comparison::{eval_ab, eval_sub, eval_super, Barrier, SubParams, SuperParams};
use pmelab::geometry::{build_masked_grid, HoleGeometry, RadialGrid};
use pmelab::harness::config::{parse_config, RunConfig};
use pmelab::harness::io::{fmt17, read_field, write_field};
use pmelab::solver::{InitialData, Mesh, SolverState};
use pmelab::special::CriticalOuterSpec;
use pmelab::stationary::{phi_disk, DiskPotential, Potential};

const DISK: DiskPotential = DiskPotential { radius: 1.0 };

fn point(r: f64, a: f64) -> [f64; 2] {
    [r * a.cos(), r * a.sin()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_numbers_round_trip_exactly(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(fmt17(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn field_files_round_trip(values in proptest::collection::vec(-1e6f64..1e6, 1..64), descriptor in "[a-z0-9=. ]{0,40}") {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        write_field(&path, &descriptor, 1, values.len(), &values).unwrap();
        let (header, back) = read_field(&path).unwrap();
        prop_assert_eq!(header.descriptor, descriptor);
        prop_assert_eq!(back, values);
    }

    #[test]
    fn normalized_config_round_trips_with_stable_hash(m in 1.1f64..4.0, t_end in 10.0f64..1e6, ratio in 1.05f64..3.0, fraction in 0.05f64..0.95) {
        let text = format!("solver.m = {m}\nsolver.t_end = {t_end}\nsolver.checkpoint_ratio = {ratio}\nasymptotics.delta_fraction = {fraction}\n");
        let cfg = parse_config(&text).unwrap();
        let again = parse_config(&cfg.to_text()).unwrap();
        prop_assert_eq!(again.to_text(), cfg.to_text());
        prop_assert_eq!(again.hash(), cfg.hash());
        prop_assert_ne!(cfg.hash(), RunConfig::default().hash());
    }

    #[test]
    fn disk_potential_vanishes_on_the_boundary_and_increases_outward(r in 0.1f64..5.0, a in 0.0f64..6.3, d in 1.0f64..50.0) {
        prop_assert!(phi_disk(r, point(r, a)).unwrap().abs() < 1e-14);
        prop_assert!(phi_disk(r, point(r * d * 1.01, a)).unwrap() > phi_disk(r, point(r * d, a)).unwrap());
    }

    #[test]
    fn supersolution_dominates_subsolution(
        m in 1.2f64..3.5,
        tau in 3.0f64..40.0,
        xi in 0.0f64..1.0,
        a in 0.0f64..6.3,
        eta_super in 1.01f64..2.0,
        eta_sub in 0.1f64..0.99,
    ) {
        let spec = CriticalOuterSpec::new(m, 4.0).unwrap();
        let t = tau.exp();
        let r = 1.0 + xi * spec.support_radius(t);
        let x = point(r, a);
        let sup = SuperParams::at_log_time(eta_super, 0.5, 0.1, 1.0, 2.0).unwrap();
        let sub = SubParams::at_log_time(eta_sub, 0.5, 0.1, 0.05, 2.0).unwrap();
        prop_assume!(DISK.phi(x) > 0.05);
        let v_super = eval_super(&sup, &DISK, &spec, x, t).unwrap();
        let v_sub = eval_sub(&sub, &DISK, &spec, x, t).unwrap();
        prop_assert!(v_sub <= v_super, "{} > {}", v_sub, v_super);
        prop_assert!(v_sub >= 0.0);
    }

    #[test]
    fn larger_k_raises_the_supersolution(k in 0.01f64..5.0, dk in 0.01f64..5.0, r in 1.0f64..20.0, tau in 3.0f64..30.0) {
        let spec = CriticalOuterSpec::new(2.0, 4.0).unwrap();
        let t = tau.exp();
        prop_assume!(r < spec.support_radius(t));
        let lo = eval_super(&SuperParams::at_log_time(1.5, 0.5, 0.1, k, 2.0).unwrap(), &DISK, &spec, [r, 0.0], t).unwrap();
        let hi = eval_super(&SuperParams::at_log_time(1.5, 0.5, 0.1, k + dk, 2.0).unwrap(), &DISK, &spec, [r, 0.0], t).unwrap();
        prop_assert!(hi > lo);
    }

    #[test]
    fn barrier_terms_vanish_outside_the_support(m in 1.2f64..3.5, tau in 3.0f64..40.0, beyond in 1.0f64..3.0) {
        let spec = CriticalOuterSpec::new(m, 4.0).unwrap();
        let x = [1.0 + beyond * spec.support_radius(tau.exp()), 0.0];
        let b = Barrier::Super(SuperParams::at_log_time(1.5, 0.5, 0.1, 1.0, 2.0).unwrap());
        let ab = eval_ab(&b, &DISK, &spec, x, tau).unwrap();
        prop_assert!(!ab.in_support);
        prop_assert_eq!(ab.a_scaled, 0.0);
        prop_assert_eq!(ab.b_scaled, 0.0);
    }

    #[test]
    fn radial_grids_tile_their_annulus(r_in in 0.2f64..3.0, factor in 2.0f64..50.0, dlog in 0.005f64..0.2) {
        let g = RadialGrid::log_uniform(r_in, r_in * factor, dlog).unwrap();
        let area: f64 = (0..g.len()).map(|i| g.area(i)).sum();
        let exact = std::f64::consts::PI * (g.r_out().powi(2) - g.r_in().powi(2));
        prop_assert!((area / exact - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn explicit_steps_keep_mass_plus_outflow_and_positivity(
        cx in 1.5f64..3.0,
        cy in -1.0f64..1.0,
        radius in 0.3f64..0.9,
        amplitude in 0.1f64..2.0,
        steps in 10usize..200,
    ) {
        let grid = build_masked_grid(HoleGeometry::ellipse(1.0, 0.75).unwrap(), 8.0, 0.15).unwrap();
        let data = InitialData::Bump { center: [cx, cy], radius, amplitude };
        let mut s = SolverState::new(Mesh::Masked(grid), 2.0, 3.0, &data).unwrap();
        let total = s.mass();
        for _ in 0..steps {
            let dt = s.stable_dt(0.45);
            s.step(dt).unwrap();
        }
        prop_assert!(((s.mass() + s.outflow()) / total - 1.0).abs() < 1e-12);
        prop_assert!(s.u().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn error_functionals_vanish_on_their_predictions(tau in 4.0f64..12.0, m in 1.5f64..3.0) {
        let t = tau.exp();
        let spec = CriticalOuterSpec::new(m, 5.0).unwrap();
        let grid = RadialGrid::log_uniform(1.0, 2.0 * spec.support_radius(t), 0.02).unwrap();
        let outer = InitialData::Values(
            grid.centers().iter().map(|&r| spec.eval_radial(r, t)).collect(),
        );
        let s = SolverState::new(Mesh::Radial(grid), m, t, &outer).unwrap();
        let delta = spec.delta_star() / 2.0;
        prop_assert!(outer_error(&s, &DISK, &spec, delta).unwrap().abs_max() < 1e-12);
        let grid = RadialGrid::log_uniform(1.0, 2.0 * spec.support_radius(t), 0.02).unwrap();
        let inner = InitialData::Values(
            grid.centers()
                .iter()
                .map(|&r| (2.0 * m * DISK.phi([r, 0.0]) / tau).powf(1.0 / m) * spec.eval_radial(r, t))
                .collect(),
        );
        let s = SolverState::new(Mesh::Radial(grid), m, t, &inner).unwrap();
        prop_assert!(weighted_error(&s, &DISK, &spec, delta).unwrap().abs_max() < 1e-12);
    }
}
