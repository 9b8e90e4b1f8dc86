mod common;

use std::f64::consts::PI;

use akns_lab::diagnostics::drift_report;
use akns_lab::flows::{
    self, evolve, evolve_with, mkdv_plane_wave, nls_plane_wave, original_time, rescale, rescale_onto, step_a_flow,
    step_difference, step_full, step_regularized, translate, FlowKind, FlowSpec, Scheme, Stepper, Trajectory,
};
use akns_lab::lax::determinant;
use akns_lab::spectral::{Field, Grid, Sign};
use akns_lab::{Error, C64};
use common::*;
use proptest::prelude::*;

fn run(q0: &Field, kind: FlowKind, dt: f64, t: f64) -> Field {
    evolve(q0, &FlowSpec::new(kind, dt, t).with_stride(usize::MAX)).unwrap().final_state().clone()
}

fn h_minus_half(a: &Field, b: &Field) -> f64 {
    a.grid().sobolev_norm(&diff(a.values(), b.values()), -0.5, 1.0).unwrap()
}

#[test]
fn plane_wave_one_step_local_error() {
    let g = grid(2.0 * PI * 4.0, 64);
    let xi0 = 2.0 * PI * 2.0 / g.length();
    let amp = C64::new(0.4, 0.1);
    for sign in [Sign::Defocusing, Sign::Focusing] {
        let q = mode(&g, amp, xi0, sign);
        for scheme in [Scheme::Splitting4, Scheme::Etd4, Scheme::Rk4Spectral] {
            let err = |dt: f64| step_full(&q, FlowKind::Nls, dt, scheme).unwrap().distance(&nls_plane_wave(&q, amp, xi0, dt).unwrap());
            assert!(err(1e-3) < 1e-13, "{scheme:?} {}", err(1e-3));
            let (a, b) = (err(0.2), err(0.1));
            assert!(a < 1e-12 || (24.0..40.0).contains(&(a / b)), "{scheme:?}: {a} {b}");
        }
        let m = step_full(&q, FlowKind::Mkdv, 1e-3, Scheme::Splitting4).unwrap();
        assert!(m.distance(&mkdv_plane_wave(&q, amp, xi0, 1e-3).unwrap()) < 1e-13);
    }
}

#[test]
fn plane_wave_global_error_is_fourth_order() {
    let g = grid(40.0, 64);
    let xi0 = 2.0 * PI * 2.0 / g.length();
    let amp = C64::new(0.5, 0.0);
    let q = mode(&g, amp, xi0, Sign::Defocusing);
    for scheme in [Scheme::Rk4Spectral, Scheme::Etd4] {
        let err = |dt: f64| {
            let spec = FlowSpec::new(FlowKind::Nls, dt, 1.0).with_scheme(scheme).with_stride(usize::MAX);
            evolve(&q, &spec).unwrap().final_state().distance(&nls_plane_wave(&q, amp, xi0, 1.0).unwrap())
        };
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..20.0).contains(&ratio), "{scheme:?} {ratio}");
    }
}

#[test]
fn splitting_is_fourth_order_on_localized_data() {
    let g = grid(40.0, 128);
    let q = gaussian(&g, 0.8);
    for kind in [FlowKind::Nls, FlowKind::Mkdv] {
        let t = if kind == FlowKind::Nls { 0.4 } else { 0.04 };
        let at = |dt: f64| run(&q, kind, dt, t);
        let reference = at(t / 1024.0);
        let ratio = at(t / 16.0).distance(&reference) / at(t / 32.0).distance(&reference);
        assert!((12.0..20.0).contains(&ratio), "{kind:?} {ratio}");
    }
}

#[test]
fn zero_stays_zero_for_every_flow() {
    let g = grid(40.0, 64);
    let z = Field::zeros(g.clone(), Sign::Focusing);
    let kinds = [
        FlowKind::Nls,
        FlowKind::Mkdv,
        FlowKind::AFlow { kappa: 2.0 },
        FlowKind::NlsKappa { kappa: 2.0 },
        FlowKind::MkdvKappa { kappa: 2.0 },
        FlowKind::NlsDiff { kappa: 2.0 },
        FlowKind::MkdvDiff { kappa: 2.0 },
    ];
    for kind in kinds {
        let out = run(&z, kind, 1e-3, 5e-3);
        assert!(out.is_zero(), "{}", kind.name());
    }
    assert!(step_a_flow(&z, 3.0, 1e-2).unwrap().is_zero());
    assert!(step_regularized(&z, FlowKind::MkdvKappa { kappa: 3.0 }, 1e-2).unwrap().is_zero());
    assert!(step_difference(&z, FlowKind::NlsDiff { kappa: 3.0 }, 1e-2).unwrap().is_zero());
}

#[test]
fn step_functions_reject_the_wrong_flow() {
    let z = Field::zeros(grid(40.0, 64), Sign::Focusing);
    assert!(matches!(step_full(&z, FlowKind::AFlow { kappa: 2.0 }, 1e-3, Scheme::Etd4), Err(Error::FlavorMismatch { .. })));
    assert!(matches!(step_regularized(&z, FlowKind::Nls, 1e-3), Err(Error::FlavorMismatch { .. })));
    assert!(matches!(step_difference(&z, FlowKind::NlsKappa { kappa: 2.0 }, 1e-3), Err(Error::FlavorMismatch { .. })));
}

#[test]
fn real_mkdv_data_stays_real() {
    let g = grid(40.0, 256);
    for sign in [Sign::Defocusing, Sign::Focusing] {
        let q = Field::from_fn(g.clone(), sign, |x| C64::new(0.3 * (-x * x).exp() * (1.0 + 0.5 * x), 0.0));
        let t = 0.5;
        let out = run(&q, FlowKind::Mkdv, 1e-3, t);
        let leak = out.values().iter().map(|z| z.im.abs()).fold(0.0, f64::max) / out.max_abs();
        assert!(leak <= 1e-12 * t, "{leak}");
    }
}

#[test]
fn a_flow_mean_rate() {
    let g = grid(40.0, 256);
    let q = &random_fields(&g, Sign::Defocusing, 1, 0.2, 31)[0];
    let kappa = 2.0;
    let mean = |f: &Field| g.integrate(f.values());
    let rate = |dt: f64| (mean(&step_a_flow(q, kappa, dt).unwrap()) - mean(q)) / dt;
    let extrapolated = 2.0 * rate(5e-4) - rate(1e-3);
    let t = akns_lab::lax::fixed_point::solve(q, kappa, &Default::default()).unwrap();
    let expected = C64::new(0.0, 1.0) * g.integrate(&t.g12);
    assert!((extrapolated - expected).norm() <= 1e-8 * expected.norm(), "{extrapolated} vs {expected}");
}

#[test]
fn a_flow_conserves_a_at_other_spectral_parameters() {
    let g = grid(40.0, 256);
    let q = Field::from_fn(g.clone(), Sign::Defocusing, |x| C64::from_polar(0.1 * (-x * x).exp(), 0.5 * x));
    let traj = evolve(&q, &FlowSpec::new(FlowKind::AFlow { kappa: 2.0 }, 1e-2, 0.1).with_stride(2)).unwrap();
    let a0 = determinant::a_value(&q, 4.0).unwrap();
    for (_, f) in &traj.samples[1..] {
        assert!(f.is_paired());
        let a = determinant::a_value(f, 4.0).unwrap();
        assert!((a - a0).norm() <= 1e-8 * a0.norm(), "{a} vs {a0}");
    }
    let report = drift_report(&traj, &[]);
    assert_eq!(report.rows[0].constraint_drift, 0.0);
    assert!(report.max_constraint_drift > 0.0 && report.max_constraint_drift.is_finite());
}

/// `-i 4k^2 xi^2 / (4k^2 + xi^2)` for `nls_kappa` and `i xi 4k^2 xi^2 / (4k^2 + xi^2)` for `mkdv_kappa`.
fn regularized_symbol(kind: FlowKind, xi: f64) -> C64 {
    let k2 = 4.0 * kind.kappa().unwrap().powi(2);
    let base = k2 * xi * xi / (k2 + xi * xi);
    match kind {
        FlowKind::NlsKappa { .. } => C64::new(0.0, -base),
        _ => C64::new(0.0, xi * base),
    }
}

#[test]
fn regularized_flows_linearize_to_their_symbols() {
    let g = grid(40.0, 256);
    for kind in [FlowKind::NlsKappa { kappa: 3.0 }, FlowKind::MkdvKappa { kappa: 3.0 }] {
        let remainder = |a: f64| {
            let q = Field::from_fn(g.clone(), Sign::Focusing, |x| C64::from_polar(a * (-x * x).exp(), 0.7 * x));
            let mut stepper = Stepper::new(&FlowSpec::new(kind, 1e-3, 1e-3), &g, q.sign(), 1e-3).unwrap();
            let v = stepper.vector_field(q.values()).unwrap();
            let lin = g.apply(q.values(), |xi| regularized_symbol(kind, xi)).unwrap();
            (l2(&g, &diff(&v, &lin)), l2(&g, &lin))
        };
        let (r1, lin) = remainder(1e-4);
        let (r2, _) = remainder(2e-4);
        assert!(r1 <= 1e-6 * lin, "{kind:?}: {r1} vs {lin}");
        assert!((6.0..10.0).contains(&(r2 / r1)), "{kind:?}: {}", r2 / r1);
    }
}

#[test]
fn regularized_flows_conserve_alpha() {
    let g = grid(40.0, 256);
    let q = Field::from_fn(g.clone(), Sign::Defocusing, |x| C64::from_polar(0.1 * (-x * x).exp(), 0.4 * x));
    for kind in [FlowKind::NlsKappa { kappa: 8.0 }, FlowKind::MkdvKappa { kappa: 8.0 }] {
        let traj = evolve(&q, &FlowSpec::new(kind, 1e-3, 0.1).with_stride(20)).unwrap();
        let report = drift_report(&traj, &[2.0, 4.0]);
        for (vk, d) in &report.alpha {
            assert!(d.unwrap() <= 1e-7, "{kind:?} alpha({vk}) drift {d:?}");
        }
        assert!(report.mass <= 1e-7);
    }
}

#[test]
fn mkdv_kappa_frame_shift_is_a_translation() {
    let g = grid(40.0, 128);
    let q = gaussian(&g, 0.2);
    let kappa: f64 = 2.0;
    let shift = 4.0 * kappa * kappa * 0.3;
    let moved = translate(&q, shift).unwrap();
    let peak = moved.values().iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap().0;
    assert!((g.node(peak) - shift).abs() <= g.dx());
    assert!(translate(&moved, -shift).unwrap().distance(&q) < 1e-13);
}

#[test]
fn difference_and_regularized_flows_compose_to_the_full_flow() {
    let g = grid(40.0, 256);
    let q = gaussian(&g, 0.1);
    let kappa = 8.0;
    for (full, reg, dif) in [
        (FlowKind::Nls, FlowKind::NlsKappa { kappa }, FlowKind::NlsDiff { kappa }),
        (FlowKind::Mkdv, FlowKind::MkdvKappa { kappa }, FlowKind::MkdvDiff { kappa }),
    ] {
        let defect = |t: f64| {
            let dt = t / 4.0;
            let composed = run(&run(&q, dif, dt, t), reg, dt, t);
            let direct = run(&q, full, dt, t);
            (composed.distance(&direct), direct.distance(&q))
        };
        let (d1, moved) = defect(0.05);
        let (d2, _) = defect(0.025);
        assert!(d1 <= 1e-4 * moved, "{full:?} {d1} {moved}");
        assert!(d1 / d2 >= 3.5, "{full:?} {}", d1 / d2);
    }
}

#[test]
fn difference_flow_approaches_identity_as_kappa_grows() {
    let g = grid(40.0, 256);
    let q = gaussian(&g, 0.2);
    for family in [0, 1] {
        let moves: Vec<f64> = [8.0, 16.0, 32.0]
            .iter()
            .map(|&kappa| {
                let kind = if family == 0 { FlowKind::NlsDiff { kappa } } else { FlowKind::MkdvDiff { kappa } };
                let traj = evolve(&q, &FlowSpec::new(kind, 2e-3, 0.1).with_stride(10)).unwrap();
                traj.samples.iter().map(|(_, f)| h_minus_half(f, &q)).fold(0.0, f64::max)
            })
            .collect();
        assert!(moves.windows(2).all(|w| w[1] < w[0]), "{moves:?}");
    }
}

#[test]
fn rescaling() {
    let g = grid(40.0, 256);
    let q = gaussian(&g, 0.3);
    assert_eq!(rescale(&q, 1.0, 2).unwrap().values(), q.values());
    for lambda in [0.5, 2.0, 3.0] {
        let r = rescale(&q, lambda, 2).unwrap();
        assert!((r.l2_norm().powi(2) - lambda * q.l2_norm().powi(2)).abs() < 1e-12);
    }
    assert_eq!(original_time(0.5, 2.0, 3), 4.0);
    let target = grid(20.0, 256);
    let r = rescale_onto(&q, 2.0, 2, &target).unwrap();
    let exact = Field::from_fn(target.clone(), Sign::Defocusing, |x| C64::new(2.0 * 0.3 * (-4.0 * x * x).exp(), 0.0));
    assert!(r.distance(&exact) < 1e-10);
    let coarse = grid(40.0, 32);
    assert!(matches!(rescale_onto(&q, 2.0, 2, &coarse), Err(Error::BandLimit(_))));
    assert!(rescale(&q, -1.0, 2).is_err());
}

#[test]
fn conservation_over_unit_time() {
    let g = grid(40.0, 512);
    let q = Field::from_fn(g.clone(), Sign::Defocusing, |x| C64::from_polar((-x * x / 2.0).exp(), 0.5 * x))
        .normalized(-0.25, 1.0, 0.1)
        .unwrap();
    let nls = drift_report(&evolve(&q, &FlowSpec::new(FlowKind::Nls, 1e-3, 1.0).with_stride(100)).unwrap(), &[1.0, 2.0, 4.0]);
    assert!(nls.mass <= 1e-7 && nls.h_nls <= 1e-7, "{} {}", nls.mass, nls.h_nls);
    let mkdv = drift_report(&evolve(&q, &FlowSpec::new(FlowKind::Mkdv, 1e-3, 1.0).with_stride(100)).unwrap(), &[1.0, 2.0, 4.0]);
    assert!(mkdv.mass <= 1e-7 && mkdv.momentum <= 1e-7 && mkdv.h_mkdv <= 1e-7);
    for r in [&nls, &mkdv] {
        for (vk, d) in &r.alpha {
            assert!(d.unwrap() <= 1e-7, "alpha({vk}) {d:?}");
        }
    }
}

#[test]
fn nls_is_reversible_under_conjugation() {
    let g = grid(40.0, 256);
    let q = &random_fields(&g, Sign::Focusing, 1, 0.25, 12)[0];
    let forward = run(q, FlowKind::Nls, 1e-3, 0.3);
    let back = run(&forward.conj(), FlowKind::Nls, 1e-3, 0.3);
    assert!(back.conj().distance(q) <= 1e-10 * q.l2_norm());
}

#[test]
fn mkdv_commutes_with_conjugation() {
    let g = grid(40.0, 256);
    let q = &random_fields(&g, Sign::Defocusing, 1, 0.25, 13)[0];
    let a = run(&q.conj(), FlowKind::Mkdv, 1e-3, 0.1);
    let b = run(q, FlowKind::Mkdv, 1e-3, 0.1).conj();
    assert!(a.distance(&b) <= 1e-12 * q.l2_norm());
}

#[test]
fn stability_gate_and_non_finite_detection() {
    let g = grid(40.0, 256);
    let q = gaussian(&g, 0.1);
    match evolve(&q, &FlowSpec::new(FlowKind::Mkdv, 1.0, 1.0)) {
        Err(Error::Unstable { order, .. }) => assert_eq!(order, 3),
        other => panic!("{other:?}"),
    }
    assert!(matches!(evolve(&q, &FlowSpec::new(FlowKind::Nls, -1.0, 1.0)), Err(Error::InvalidArgument(_))));
    let coarse = grid(40.0, 64);
    match evolve(&gaussian(&coarse, 30.0), &FlowSpec::new(FlowKind::Mkdv, 0.05, 5.0)) {
        Err(Error::NonFinite { time, last_valid }) => assert!(last_valid < time),
        other => panic!("{other:?}"),
    }
}

#[test]
fn trajectories_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let g = grid(40.0, 64);
    let traj = evolve(&gaussian(&g, 0.1), &FlowSpec::new(FlowKind::Nls, 1e-3, 1e-2).with_stride(5)).unwrap();
    assert_eq!(traj.times().len(), 3);
    assert!(traj.times().windows(2).all(|w| w[1] > w[0]));
    traj.save(dir.path(), &[2.0]).unwrap();
    let back = Trajectory::load(dir.path()).unwrap();
    assert_eq!(back.spec, traj.spec);
    assert_eq!(back.times(), traj.times());
    assert_eq!(back.final_state().values(), traj.final_state().values());
}

#[test]
fn observer_sees_every_step() {
    let g = grid(40.0, 64);
    let mut seen = Vec::new();
    evolve_with(&gaussian(&g, 0.1), &FlowSpec::new(FlowKind::Nls, 1e-3, 5e-3), |t, _| {
        seen.push(t);
        Ok(())
    })
    .unwrap();
    assert_eq!(seen.len(), 6);
}

#[test]
fn spec_parsing() {
    assert_eq!(FlowKind::parse("mkdv_diff", Some(4.0)).unwrap(), FlowKind::MkdvDiff { kappa: 4.0 });
    assert!(FlowKind::parse("a_flow", None).is_err());
    assert_eq!(Scheme::parse("etd4").unwrap(), Scheme::Etd4);
    assert_eq!(FlowSpec::new(FlowKind::Nls, 0.3, 1.0).steps().0, 4);
    assert_eq!(FlowSpec::new(FlowKind::AFlow { kappa: 2.0 }, 0.1, 1.0).scheme, Scheme::Rk4Spectral);
    assert!(flows::band_limit(&Field::zeros(Grid::new(10.0, 16).unwrap(), Sign::Focusing)) == 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn nls_conserves_mass_and_energy(q in field_strategy(grid(40.0, 256), 0.25)) {
        let traj = evolve(&q, &FlowSpec::new(FlowKind::Nls, 2e-3, 0.2).with_stride(25)).unwrap();
        let r = drift_report(&traj, &[2.0]);
        prop_assert!(r.mass <= 1e-9, "{}", r.mass);
        prop_assert!(r.h_nls <= 1e-7, "{}", r.h_nls);
        prop_assert!(r.alpha[0].1.unwrap() <= 1e-7);
    }
}
