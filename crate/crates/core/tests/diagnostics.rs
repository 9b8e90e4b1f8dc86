mod common;

use akns_lab::diagnostics::*;
use akns_lab::flows::{evolve, translate, FlowKind, FlowSpec, Trajectory, TrajectoryStats};
use akns_lab::hierarchy::Flavor;
use akns_lab::spectral::{h_lattice, CutoffFamily, Field, GridSpec, Sign};
use akns_lab::{Error, C64};
use common::*;

fn frozen(q: &Field, times: &[f64]) -> Trajectory {
    Trajectory {
        spec: FlowSpec::new(FlowKind::Nls, times[1] - times[0], times[times.len() - 1]),
        samples: times.iter().map(|&t| (t, q.clone())).collect(),
        stats: TrajectoryStats::default(),
    }
}

fn nls_traj(q0: &Field, dt: f64, t: f64, stride: usize) -> Trajectory {
    evolve(q0, &FlowSpec::new(FlowKind::Nls, dt, t).with_stride(stride)).unwrap()
}

// micro

#[test]
fn micro_zero_trajectory_has_zero_residual() {
    let g = grid(40.0, 128);
    let traj = nls_traj(&Field::zeros(g, Sign::Defocusing), 1e-3, 0.01, 1);
    let r = micro_residual(&traj, 2.0, Flavor::Nls).unwrap();
    assert_eq!(r.l1, 0.0);
    assert!(r.residual_l2.iter().all(|v| *v == 0.0));
    assert_eq!(r.max_integrated_relative(), 0.0);
}

#[test]
fn micro_nls_residual_and_refinement() {
    let g = grid(40.0, 256);
    let q0 = gaussian(&g, 0.1);
    let spec = FlowSpec::new(FlowKind::Nls, 1e-3, 0.1);
    let (coarse, fine) = micro_refinement(&q0, &spec, 2.0, Flavor::Nls).unwrap();
    assert!(coarse.l1 <= 1e-6, "residual {}", coarse.l1);
    assert!(coarse.l1 / fine.l1 >= 8.0, "ratio {}", coarse.l1 / fine.l1);
    assert!(coarse.refinement_slope.unwrap() >= 3.0);
}

#[test]
fn micro_integrated_check_at_centre() {
    let g = grid(40.0, 256);
    let traj = nls_traj(&gaussian(&g, 0.1), 1e-3, 0.1, 1);
    let r = micro_residual_with(&traj, 2.0, Flavor::Nls, 1, CutoffFamily::default()).unwrap();
    assert_eq!(r.integrated.len(), 1);
    assert_eq!(r.integrated[0].h, 0.0);
    assert!(r.integrated[0].relative <= 1e-6, "{:?}", r.integrated[0]);
}

#[test]
fn micro_rejects_wrong_flavor() {
    let g = grid(40.0, 64);
    let traj = nls_traj(&gaussian(&g, 0.1), 1e-3, 0.01, 1);
    let e = micro_residual(&traj, 2.0, Flavor::Mkdv).unwrap_err();
    assert!(matches!(e, Error::FlavorMismatch { .. }), "{e:?}");
}

#[test]
fn micro_table_has_every_midpoint() {
    let g = grid(40.0, 128);
    let traj = nls_traj(&gaussian(&g, 0.1), 1e-3, 0.01, 1);
    let r = micro_residual(&traj, 2.0, Flavor::Nls).unwrap();
    assert_eq!(r.times.len(), traj.samples.len() - 3);
    assert_eq!(r.integrated.len(), 9);
    let csv = r.table().to_csv_string();
    assert_eq!(csv.matches("residual_l2").count(), r.times.len());
}

// smoothing

#[test]
fn smoothing_zero_trajectory() {
    let g = grid(40.0, 128);
    let traj = frozen(&Field::zeros(g, Sign::Defocusing), &[0.0, 0.5, 1.0]);
    let r = local_smoothing_norm(&traj, -0.25, 2.0).unwrap();
    assert_eq!(r.x_norm_sq, 0.0);
    assert_eq!(r.x_kappa_norm_sq, 0.0);
}

#[test]
fn smoothing_frozen_field_is_window_times_sup() {
    let g = grid(40.0, 256);
    let q = Field::from_fn(g.clone(), Sign::Defocusing, |x| C64::new(0.2 * (-(x - 3.0) * (x - 3.0)).exp(), 0.1));
    let times: Vec<f64> = (0..=8).map(|k| 0.25 * k as f64).collect();
    let sigma = 0.25;
    let r = local_smoothing_norm(&frozen(&q, &times), sigma, 2.0).unwrap();
    let family = CutoffFamily::default();
    let sup = h_lattice(&g, DEFAULT_SMOOTHING_LATTICE)
        .into_iter()
        .map(|h| {
            let c = family.sample(&g, h, 6).unwrap();
            let v: Vec<C64> = q.values().iter().zip(&c.samples).map(|(z, p)| z * p).collect();
            g.sobolev_norm(&v, sigma, 1.0).unwrap().powi(2)
        })
        .fold(0.0, f64::max);
    assert_eq!(r.window, 2.0);
    assert!((r.x_norm_sq - 2.0 * sup).abs() <= 1e-12 * sup, "{} vs {}", r.x_norm_sq, 2.0 * sup);
}

#[test]
fn smoothing_constant_is_stable_under_data_halving() {
    let g = grid(40.0, 256);
    let s = -0.25;
    let constant = |a: f64| {
        let q0 = gaussian(&g, a);
        let r = local_smoothing_norm(&nls_traj(&q0, 1e-2, 1.0, 10), s + 0.5, 1.0).unwrap();
        assert!(r.x_norm().is_finite());
        r.x_norm() / q0.sobolev_norm(s, 1.0).unwrap()
    };
    let (c1, c2) = (constant(0.1), constant(0.05));
    assert!((c1 / c2 - 1.0).abs() < 0.05, "{c1} vs {c2}");
}

#[test]
fn smoothing_is_translation_robust() {
    let g = grid(64.0, 256);
    let q0 = gaussian(&g, 0.1);
    let shifted = translate(&q0, 1.3).unwrap();
    let a = local_smoothing_norm(&nls_traj(&q0, 1e-2, 0.5, 5), 0.25, 2.0).unwrap();
    let b = local_smoothing_norm(&nls_traj(&shifted, 1e-2, 0.5, 5), 0.25, 2.0).unwrap();
    assert!((a.x_norm_sq / b.x_norm_sq - 1.0).abs() <= 0.02);
    assert!((a.x_kappa_norm_sq / b.x_kappa_norm_sq - 1.0).abs() <= 0.02);
}

#[test]
fn smoothing_rejects_bad_arguments() {
    let g = grid(40.0, 64);
    let traj = frozen(&gaussian(&g, 0.1), &[0.0, 1.0]);
    assert!(local_smoothing_norm(&traj, -0.25, 0.5).is_err());
    assert!(local_smoothing_norm_with(&traj, -0.25, 2.0, 0, CutoffFamily::default()).is_err());
}

// equicontinuity

#[test]
fn equicontinuity_zero_and_constant_mode() {
    let g = grid(40.0, 128);
    assert_eq!(equicontinuity_tail(&Field::zeros(g.clone(), Sign::Defocusing), 4.0, -0.25).unwrap(), 0.0);
    let q = constant(&g, C64::new(0.3, -0.1), Sign::Defocusing);
    let l2sq = 0.1 * g.length();
    for (kappa, s) in [(1.0f64, -0.25f64), (4.0, -0.5), (16.0, -0.25)] {
        let tail = equicontinuity_tail(&q, kappa, s).unwrap();
        let expect = (2.0 * kappa).powf(2.0 * s) * l2sq;
        assert!((tail * tail - expect).abs() <= 1e-12 * expect, "kappa {kappa}");
    }
    assert!(equicontinuity_tail(&q, 4.0, 0.0).is_err());
}

#[test]
fn equicontinuity_family_decreases_in_kappa() {
    let g = grid(40.0, 256);
    let family = random_fields(&g, Sign::Defocusing, 5, 0.2, 3);
    let rows = equicontinuity_family(&family, &[1.0, 4.0, 16.0, 64.0], -0.25).unwrap();
    assert!(rows.windows(2).all(|w| w[1].1 < w[0].1));
}

#[test]
fn equicontinuity_tail_bounded_along_nls() {
    let g = grid(40.0, 256);
    let traj = nls_traj(&gaussian(&g, 0.1), 1e-2, 1.0, 10);
    let sweep = equicontinuity_sweep(&traj, 16.0, -0.25).unwrap();
    let sup = sweep.iter().map(|p| p.1).fold(0.0, f64::max);
    assert!(sup <= 4.0 * sweep[0].1);
}

// tightness

#[test]
fn tightness_zero_and_compact_support() {
    let g = grid(64.0, 256);
    assert_eq!(tightness_metric(&Field::zeros(g.clone(), Sign::Defocusing), 8.0, -0.25).unwrap(), 0.0);
    let q = Field::from_fn(g.clone(), Sign::Defocusing, |x| {
        let y = x / 8.0;
        C64::new(if y.abs() < 1.0 { (-1.0 / (1.0 - y * y)).exp() } else { 0.0 }, 0.0)
    });
    assert!(tightness_metric(&q, 8.0, -0.25).unwrap() <= 1e-10);
}

#[test]
fn tightness_radius_past_half_length_is_an_error() {
    let g = grid(40.0, 64);
    let q = gaussian(&g, 0.1);
    assert!(tightness_metric(&q, 20.0, -0.25).is_ok());
    assert!(matches!(tightness_metric(&q, 20.5, -0.25), Err(Error::InvalidArgument(_))));
    assert!(tightness_metric(&q, 0.0, -0.25).is_err());
}

#[test]
fn tightness_bounded_along_nls() {
    let g = grid(256.0, 1024);
    let q0 = Field::from_fn(g.clone(), Sign::Defocusing, |x| C64::new(0.1 * (-x * x / 200.0).exp(), 0.0));
    let traj = nls_traj(&q0, 1e-2, 1.0, 10);
    let sweep = tightness_sweep(&traj, g.length() / 8.0, -0.25).unwrap();
    assert!(sweep[0].1 > 0.0);
    let sup = sweep.iter().map(|p| p.1).fold(0.0, f64::max);
    assert!(sup <= 4.0 * sweep[0].1, "{sup} vs {}", sweep[0].1);
}

// convergence

fn quick() -> ConvergenceOptions {
    ConvergenceOptions { lattice: 9, stride: 20, ..Default::default() }
}

#[test]
fn convergence_zero_data() {
    let g = grid(40.0, 128);
    let t = kappa_convergence_study_with(&Field::zeros(g, Sign::Defocusing), FlowKind::Nls, 4.0, &[8.0, 16.0], 0.02, &quick())
        .unwrap();
    assert!(t.rows.iter().all(|r| r.defect == 0.0));
}

#[test]
fn convergence_monotone_in_kappa() {
    let g = grid(40.0, 256);
    let q0 = gaussian(&g, 0.1);
    for flow in [FlowKind::Nls, FlowKind::Mkdv] {
        let t = kappa_convergence_study_with(&q0, flow, 4.0, &[8.0, 16.0, 32.0], 0.1, &quick()).unwrap();
        assert!(t.is_monotone_decreasing(0.0), "{:?}", t.rows);
        assert!(t.ratios().iter().all(|r| *r < 1.0));
    }
}

#[test]
fn convergence_defect_linear_in_time() {
    let g = grid(40.0, 256);
    let q0 = gaussian(&g, 0.1);
    let at = |t: f64| kappa_convergence_study_with(&q0, FlowKind::Nls, 4.0, &[8.0], t, &quick()).unwrap().rows[0].defect;
    let (a, b) = (at(0.02), at(0.04));
    assert!((b / a - 2.0).abs() < 0.2, "ratio {}", b / a);
}

#[test]
fn convergence_argument_checks() {
    let g = grid(40.0, 64);
    let q0 = gaussian(&g, 0.1);
    assert!(kappa_convergence_study(&q0, FlowKind::Nls, 2.0, &[8.0], 0.01).is_err());
    assert!(kappa_convergence_study(&q0, FlowKind::Nls, 4.0, &[6.0], 0.01).is_err());
    let e = kappa_convergence_study(&q0, FlowKind::AFlow { kappa: 2.0 }, 4.0, &[8.0], 0.01).unwrap_err();
    assert!(matches!(e, Error::FlavorMismatch { .. }));
}

// inflation

fn small(parity: Parity, amplitude: f64) -> InflationConfig {
    InflationConfig {
        parity,
        amplitude,
        grid: GridSpec { length: 120.0, points: 512 },
        dt: 2e-3,
        window: 0.1,
        stride: 10,
        ..Default::default()
    }
}

#[test]
fn inflation_zero_amplitude_is_flat() {
    let r = norm_inflation_experiment(&small(Parity::Even, 0.0)).unwrap();
    assert_eq!(r.growth_ratio(), 1.0);
    assert!(r.t1.is_none());
    assert!(r.flag.is_some());
}

#[test]
fn inflation_mean_production_sign() {
    let r = norm_inflation_experiment(&small(Parity::Even, 0.05)).unwrap();
    let mp = r.mean_production;
    assert!(mp.predicted.im != 0.0);
    assert!(mp.sign_agrees, "{mp:?}");
    assert!((mp.predicted - mp.physical).norm() <= 1e-10 * mp.physical.norm());
}

#[test]
fn inflation_initial_data_has_zero_mean() {
    let g = grid(120.0, 512);
    for parity in [Parity::Even, Parity::Odd] {
        let u0 = inflation_data(&g, parity, 0.2, Sign::Defocusing).unwrap();
        assert!(g.integrate(u0.values()).norm() <= 1e-12);
    }
}

#[test]
fn inflation_scaling_dichotomy() {
    let g = grid(120.0, 1024);
    let lambdas = [8.0, 64.0, 512.0];
    let mean_zero = inflation_data(&g, Parity::Even, 0.2, Sign::Defocusing).unwrap();
    assert!(band_ratio(&scaled_norms_sq(&mean_zero, &lambdas, -0.5)) <= 2.0);
    let bump = gaussian(&g, 0.2);
    let fit = log_lambda_fit(&lambdas, &scaled_norms_sq(&bump, &lambdas, -0.5)).unwrap();
    assert!(fit.slope > 0.0);
    assert!(fit.residual <= 0.1, "{fit:?}");
}

#[test]
fn inflation_even_crossing_within_unit_time() {
    let r = norm_inflation_experiment(&InflationConfig::default()).unwrap();
    let t1 = r.t1.expect("mean production crosses the threshold");
    assert!(t1 > 0.0 && t1 <= 1.0);
    assert!(r.mean_production.sign_agrees);
    assert!(r.initial_band_ratio <= 2.0);
    assert!(r.post_t1_fit.is_some());
}

#[test]
fn inflation_config_checks() {
    let mut c = small(Parity::Odd, 0.1);
    c.sigma = 0.0;
    assert!(norm_inflation_experiment(&c).is_err());
    let mut c = small(Parity::Odd, 0.1);
    c.bumps = 0;
    assert!(norm_inflation_experiment(&c).is_err());
    assert_eq!(Parity::parse("odd").unwrap(), Parity::Odd);
    assert!(Parity::parse("both").is_err());
}

// drift

#[test]
fn drift_is_exactly_zero_for_frozen_trajectories() {
    let g = grid(40.0, 128);
    let q = gaussian(&g, 0.1);
    let r = drift_report(&frozen(&q, &[0.0, 0.5, 1.0]), &[1.0, 2.0]);
    assert_eq!((r.mass, r.momentum, r.h_nls, r.h_mkdv), (0.0, 0.0, 0.0, 0.0));
    assert!(r.alpha.iter().all(|(_, d)| *d == Some(0.0)));
}

#[test]
fn report_tables_serialize() {
    let g = grid(40.0, 128);
    let r = drift_report(&nls_traj(&gaussian(&g, 0.1), 1e-2, 0.05, 1), &[2.0]);
    let dir = tempfile::tempdir().unwrap();
    write_json(&dir.path().join("drift.json"), &r.rows).unwrap();
    let text = std::fs::read_to_string(dir.path().join("drift.json")).unwrap();
    assert!(serde_json::from_str::<serde_json::Value>(&text).is_ok());
    assert!(relative_difference(1.0, 1.0) == 0.0);
}
