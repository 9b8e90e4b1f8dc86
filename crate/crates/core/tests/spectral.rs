mod common;

use std::f64::consts::PI;

use akns_lab::spectral::{
    apply_multiplier, h_lattice, minus_power_symbol, partition_constant, plus_power_symbol, snapshot, sobolev_norm,
    CutoffFamily, Field, Grid, Sign,
};
use akns_lab::{Error, C64};
use common::*;
use proptest::prelude::*;

#[test]
fn grid_spacing_and_nodes() {
    let g = grid(40.0, 256);
    assert_eq!(g.dx(), 40.0 / 256.0);
    assert!((g.dxi() - 2.0 * PI / 40.0).abs() < 1e-15);
    assert_eq!(g.node(0), -20.0);
    assert!((g.node(128)).abs() < 1e-15);
    assert!(Grid::new(40.0, 100).is_err());
    assert!(Grid::new(-1.0, 64).is_err());
}

#[test]
fn resolvent_of_constant_is_half() {
    let g = grid(40.0, 64);
    let one = vec![C64::new(1.0, 0.0); 64];
    let kappa = 1.0;
    let out = apply_multiplier(&g, &one, |xi| C64::new(2.0 * kappa, -xi).inv()).unwrap();
    for z in out {
        assert!((z - 0.5).norm() < 1e-14);
    }
}

#[test]
fn resolvent_of_unit_mode() {
    let g = grid(2.0 * PI * 8.0, 128);
    let f = mode(&g, C64::new(1.0, 0.0), 1.0, Sign::Defocusing);
    let out = apply_multiplier(&g, f.values(), |xi| C64::new(2.0, xi).inv()).unwrap();
    let expected = C64::new(2.0, 1.0).inv();
    for (z, w) in out.iter().zip(f.values()) {
        assert!((z - w * expected).norm() < 1e-13);
        assert!((z.norm() - 1.0 / 5f64.sqrt()).abs() < 1e-13);
    }
}

#[test]
fn identity_symbol_leaves_field_unchanged() {
    let g = grid(40.0, 256);
    let f = &random_fields(&g, Sign::Defocusing, 1, 0.2, 7)[0];
    let out = apply_multiplier(&g, f.values(), |_| C64::new(1.0, 0.0)).unwrap();
    assert!(l2(&g, &diff(&out, f.values())) <= 1e-12 * f.l2_norm());
}

#[test]
fn singular_symbol_names_the_frequency() {
    let g = grid(40.0, 64);
    let f = vec![C64::new(1.0, 0.0); 64];
    match apply_multiplier(&g, &f, |xi| C64::new(xi, 0.0).inv()) {
        Err(Error::SingularSymbol { xi }) => assert_eq!(xi, 0.0),
        other => panic!("expected a singular symbol error, got {other:?}"),
    }
}

#[test]
fn sobolev_norm_examples() {
    let g = grid(40.0, 256);
    assert_eq!(sobolev_norm(&Field::zeros(g.clone(), Sign::Defocusing), -0.5, 1.0).unwrap(), 0.0);

    let unit = constant(&g, C64::new(1.0 / 40f64.sqrt(), 0.0), Sign::Defocusing);
    assert!((unit.l2_norm() - 1.0).abs() < 1e-14);
    let n = sobolev_norm(&unit, -0.5, 1.0).unwrap();
    assert!((n * n - 0.5).abs() < 1e-13);

    let gauss = gaussian(&g, 1.0);
    for kappa in [1.0, 3.0, 10.0] {
        let n = sobolev_norm(&gauss, 0.0, kappa).unwrap();
        assert!((n * n - (PI / 2.0).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn sobolev_norm_matches_gaussian_quadrature() {
    // |q^(xi)|^2 = exp(-xi^2/2)/2 for q = exp(-x^2); integrate the weight against it directly.
    let g = grid(40.0, 512);
    let gauss = gaussian(&g, 1.0);
    for (sigma, kappa) in [(-0.5f64, 1.0f64), (-0.25, 2.0), (1.0, 1.0)] {
        let h = 1e-3;
        let mut acc = 0.0;
        let mut xi: f64 = -40.0;
        while xi < 40.0 {
            let m = xi + 0.5 * h;
            acc += (4.0 * kappa * kappa + m * m).powf(sigma) * 0.5 * (-m * m / 2.0).exp() * h;
            xi += h;
        }
        let n = sobolev_norm(&gauss, sigma, kappa).unwrap();
        assert!((n * n - acc).abs() < 1e-9 * acc, "sigma {sigma} kappa {kappa}: {} vs {acc}", n * n);
    }
}

#[test]
fn boundary_decay_is_checked() {
    let g = grid(40.0, 256);
    assert!(gaussian(&g, 0.1).check_decay().is_ok());
    let wide = Field::from_fn(g.clone(), Sign::Defocusing, |x| C64::new((-x * x / 50.0).exp(), 0.0));
    assert!(matches!(wide.check_decay(), Err(Error::BoundaryDecay { .. })));
}

#[test]
fn partition_constant_value() {
    assert!((partition_constant() - 512.0 / 7.0).abs() < 1e-8);
    let family = CutoffFamily::default();
    assert!((family.integral_of_power(2) - 198.0).abs() < 1e-8);
    assert_eq!(family.psi(0.0).powi(12), 1.0);
}

#[test]
fn cutoff_invariants() {
    let g = grid(4096.0, 1024);
    let family = CutoffFamily::default();
    for h in h_lattice(&g, 9) {
        let c = family.sample_with_antiderivative(&g, h, 12).unwrap();
        assert!(c.samples.iter().all(|&v| v > 0.0 && v <= 1.0));
        let phi = c.antiderivative.unwrap();
        assert!(phi.windows(2).all(|w| w[1] >= w[0]));
        assert!(phi[0] < 1e-10 * phi[phi.len() - 1]);
        let psi = family.sample(&g, h, 1).unwrap();
        for (j, x) in g.nodes().iter().enumerate().step_by(97) {
            assert_eq!(psi.samples[j], family.psi(x - h));
        }
    }
    assert!(family.sample(&g, 0.0, 13).is_err());
    assert!(family.sample(&g, 0.0, 0).is_err());
}

#[test]
fn phi_derivative_is_psi_power() {
    let family = CutoffFamily::default();
    let h = 7.0;
    for x in [-150.0, -20.0, 0.0, 7.0, 40.0, 200.0] {
        let e = 1e-3;
        let d = (family.phi(x + e, h) - family.phi(x - e, h)) / (2.0 * e);
        assert!((d - family.psi(x - h).powi(12)).abs() < 1e-8);
    }
    assert!((family.phi(1e4, h) - 512.0 / 7.0).abs() < 1e-8);
}

#[test]
fn h_lattice_spans_quarter_lengths() {
    let g = grid(256.0, 256);
    let h = h_lattice(&g, 33);
    assert_eq!(h.len(), 33);
    assert_eq!(h[0], -64.0);
    assert_eq!(h[32], 64.0);
    assert_eq!(h[16], 0.0);
}

#[test]
fn snapshot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = grid(40.0, 64);
    let f = &random_fields(&g, Sign::Focusing, 1, 0.2, 3)[0];
    snapshot::write_snapshot(dir.path(), "q", f, 0.25, "test").unwrap();
    let bin = dir.path().join("q.bin");
    assert_eq!(std::fs::metadata(&bin).unwrap().len(), 64 * 16);
    let (back, meta) = snapshot::read_snapshot(&bin).unwrap();
    assert_eq!(back.values(), f.values());
    assert_eq!(back.sign(), Sign::Focusing);
    assert_eq!(meta.time, 0.25);
    assert_eq!(meta.label, "test");
}

/// Band-limited random grid function.
fn band_limited(g: &Grid, coeffs: &[(f64, f64)]) -> Vec<C64> {
    let mut s = vec![C64::new(0.0, 0.0); g.points()];
    for (k, (re, im)) in coeffs.iter().enumerate() {
        let signed = k as i64 - (coeffs.len() as i64) / 2;
        s[g.mode_index(signed)] = C64::new(*re, *im);
    }
    g.inverse_transform(&s)
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_round_trip(c in coeffs(), n in 4u32..10) {
        let g = grid(40.0, 1 << n);
        let c: Vec<_> = c.into_iter().take((1 << n) / 2).collect();
        let f = band_limited(&g, &c);
        let back = g.inverse_transform(&g.transform(&f));
        prop_assert!(l2(&g, &diff(&back, &f)) <= 1e-12 * l2(&g, &f).max(1e-300));
    }

    #[test]
    fn plancherel(c in coeffs()) {
        let g = grid(30.0, 128);
        let f = band_limited(&g, &c);
        let a = g.l2_norm(&f);
        let b = g.l2_norm_spectral(&f);
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn multiplier_composition(c in coeffs(), k1 in 1.0..8.0f64, k2 in 1.0..8.0f64, s in -1.0..1.0f64) {
        let g = grid(40.0, 128);
        let f = band_limited(&g, &c);
        let m1 = minus_power_symbol(k1, s);
        let m2 = plus_power_symbol(k2, 0.5);
        let two = g.apply(&g.apply(&f, &m2).unwrap(), &m1).unwrap();
        let one = g.apply(&f, |xi| m1(xi) * m2(xi)).unwrap();
        prop_assert!(l2(&g, &diff(&two, &one)) <= 1e-12 * l2(&g, &one));
    }

    #[test]
    fn adjoint_convention(a in coeffs(), b in coeffs(), kappa in 1.0..8.0f64, sigma in -1.0..1.0f64) {
        let g = grid(40.0, 128);
        let f = band_limited(&g, &a);
        let h = band_limited(&g, &b);
        let lhs = g.inner(&f, &g.apply(&h, minus_power_symbol(kappa, sigma)).unwrap());
        let rhs = g.inner(&g.apply(&f, plus_power_symbol(kappa, sigma)).unwrap(), &h);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * l2(&g, &f) * l2(&g, &h) * (2.0 * kappa).powf(-sigma).max(1.0) * 10.0);
    }

    #[test]
    fn negative_regularity_norm_decreases_in_kappa(c in coeffs(), sigma in -2.0..-0.01f64) {
        let g = grid(40.0, 128);
        let f = band_limited(&g, &c);
        let norms: Vec<f64> = [1.0, 2.0, 4.0, 8.0].iter().map(|&k| g.sobolev_norm(&f, sigma, k).unwrap()).collect();
        prop_assert!(norms.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn zero_regularity_is_l2(c in coeffs(), kappa in 1.0..20.0f64) {
        let g = grid(40.0, 128);
        let f = band_limited(&g, &c);
        let n = g.sobolev_norm(&f, 0.0, kappa).unwrap();
        prop_assert!((n - g.l2_norm(&f)).abs() <= 1e-12 * n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn norm_equivalence_over_kappa(c in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..24), kappa in 1.0..4.0f64) {
        // int_kappa^{100 kappa} vk^{2(s - s')} ||q||^2_{H^{s'}_vk} dvk / vk against ||q||^2_{H^s_kappa}
        let g = grid(40.0, 64);
        let f = band_limited(&g, &c);
        let (s, sp) = (-0.25, -0.5);
        let steps = 4000;
        let du = (100f64).ln() / steps as f64;
        let mut acc = 0.0;
        for i in 0..steps {
            let vk = kappa * ((i as f64 + 0.5) * du).exp();
            acc += vk.powf(2.0 * (s - sp)) * g.sobolev_norm_sq(&f, sp, vk).unwrap() * du;
        }
        let target = g.sobolev_norm_sq(&f, s, kappa).unwrap();
        let ratio = acc / target;
        prop_assert!((0.25..=4.0).contains(&ratio), "ratio {}", ratio);
    }
}
