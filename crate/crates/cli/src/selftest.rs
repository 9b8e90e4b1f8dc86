use akns_lab::diagnostics::{self, InflationConfig, LongTable, Parity};
use akns_lab::flows::{self, evolve, FlowKind, FlowSpec, Scheme};
use akns_lab::hierarchy::{self, Flavor};
use akns_lab::lax::{self, determinant, fixed_point};
use akns_lab::spectral::{Bump, Field, Grid, GridSpec, Sign};
use akns_lab::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Context};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub low: f64,
    pub high: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, high: f64) -> Self {
        Self { name: name.into(), value, low: f64::NEG_INFINITY, high, passed: value <= high }
    }

    fn within(name: &str, value: f64, low: f64, high: f64) -> Self {
        Self { name: name.into(), value, low, high, passed: value >= low && value <= high }
    }

    fn holds(name: &str, ok: bool) -> Self {
        Self { name: name.into(), value: if ok { 1.0 } else { 0.0 }, low: 1.0, high: 1.0, passed: ok }
    }
}

/// Random sums of one to three modulated Gaussians with `||q||_{H^{-1/4}}` in `[0.05, max_norm]`.
pub fn random_fields(grid: &Grid, sign: Sign, count: usize, max_norm: f64, seed: u64) -> Vec<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k = rng.gen_range(1..=3);
            let bumps: Vec<Bump> = (0..k)
                .map(|_| Bump {
                    center: rng.gen_range(-3.0..3.0),
                    width: rng.gen_range(0.7..1.5),
                    amplitude: C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    frequency: rng.gen_range(-1.0..1.0),
                })
                .collect();
            let target = rng.gen_range(0.05..max_norm.max(0.05 + 1e-9));
            Field::from_bumps(grid.clone(), sign, &bumps).normalized(-0.25, 1.0, target).expect("valid norm")
        })
        .collect()
}

fn gaussian(grid: &Grid, a: f64) -> Field {
    Field::from_fn(grid.clone(), Sign::Defocusing, |x| C64::new(a * (-x * x).exp(), 0.0))
}

/// Runs every property and returns one row per check.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Check>, CliError> {
    let st = &cfg.selftest;
    let grid = Grid::new(40.0, st.points).context("selftest grid")?;
    let fields = random_fields(&grid, Sign::Defocusing, st.fields, st.max_norm, cfg.seed);
    let kappas = [1.0, 2.0, 4.0, 8.0];
    let mut checks = Vec::new();
    let tight = fixed_point::FixedPointOptions { tol: 1e-14, ..Default::default() };

    let mut oracle = 0.0f64;
    for &k in &kappas {
        let a = fixed_point::solve(&fields[0], k, &tight).context("fixed point")?;
        let b = lax::greens_oracle(&fields[0], k).context("oracle")?;
        oracle = oracle.max(a.relative_distance(&b, &grid));
    }
    checks.push(Check::at_most("oracle_equivalence", oracle, 1e-7));

    let series_error = |q: &Field| -> Result<f64, CliError> {
        let s = lax::g_series(q, 2.0, 3).context("series")?;
        let f = fixed_point::solve(q, 2.0, &tight).context("fixed point")?;
        Ok(determinant::l2(q, &s.g12.iter().zip(&f.g12).map(|(x, y)| x - y).collect::<Vec<_>>()))
    };
    let half = fields[0].scaled(C64::new(0.5, 0.0));
    checks.push(Check::within("series_amplitude_power", (series_error(&fields[0])? / series_error(&half)?).log2(), 4.0, 6.0));

    let (mut ident, mut sym, mut tele) = (0.0f64, 0.0f64, 0.0f64);
    for q in &fields {
        for &k in &kappas {
            let t = fixed_point::solve(q, k, &tight).context("fixed point")?;
            let m = fixed_point::solve(q, -k, &tight).context("fixed point")?;
            ident = ident.max(t.residuals(q).max());
            sym = sym.max(t.symmetry_residual(&m, q));
            let v = fixed_point::solve(q, k + 0.5, &tight).context("fixed point")?;
            let (l, r) = hierarchy::telescoping_sides(q, &t, &v);
            tele = tele.max(determinant::l2(q, &l.iter().zip(&r).map(|(a, b)| a - b).collect::<Vec<_>>()));
        }
    }
    checks.push(Check::at_most("identities", ident, 1e-7));
    checks.push(Check::at_most("conjugation_symmetry", sym, 1e-7));
    checks.push(Check::at_most("telescoping", tele, 1e-7));

    let q = &fields[0];
    let t2 = fixed_point::solve(q, 2.0, &tight).context("fixed point")?;
    let a_int = determinant::a_integral(q, &t2).context("A")?;
    let a_tr = determinant::a_trace(q, 2.0, 12).context("trace")?;
    checks.push(Check::at_most("a_trace_vs_integral", (a_int - a_tr.value).norm(), 1e-7));
    let h = 1e-3;
    let dk = (determinant::a_value(q, 2.0 + h).context("A")? - determinant::a_value(q, 2.0 - h).context("A")?) / (2.0 * h);
    let gi = determinant::gamma_integral(q, &t2);
    checks.push(Check::at_most("a_kappa_derivative", (dk - gi).norm() / gi.norm(), 1e-5));
    let e: Vec<f64> = [8.0, 16.0, 32.0]
        .iter()
        .map(|&k| hierarchy::a_expansion_error(q, k).context("expansion"))
        .collect::<Result<_, _>>()?;
    checks.push(Check::within("expansion_ratio_8_16", e[0] / e[1], 24.0, 40.0));
    checks.push(Check::within("expansion_ratio_16_32", e[1] / e[2], 24.0, 40.0));

    let dir = random_fields(&grid, Sign::Defocusing, 1, 0.1, cfg.seed ^ 0x5eed)[0].normalized(-0.25, 1.0, 1.0).context("direction")?;
    let (g21, mg12) = hierarchy::a_gradient(&t2);
    let rdir = dir.r();
    let pairing = grid.integrate(&(0..grid.points()).map(|j| g21[j] * dir.values()[j] + mg12[j] * rdir[j]).collect::<Vec<_>>());
    let fd_error = |eps: f64| -> Result<f64, CliError> {
        let plus = q.axpy(C64::new(eps, 0.0), &dir).context("perturb")?;
        let minus = q.axpy(C64::new(-eps, 0.0), &dir).context("perturb")?;
        let ap = determinant::a_integral(&plus, &fixed_point::solve(&plus, 2.0, &tight).context("A")?).context("A")?;
        let am = determinant::a_integral(&minus, &fixed_point::solve(&minus, 2.0, &tight).context("A")?).context("A")?;
        Ok(((ap - am) / (2.0 * eps) - pairing).norm())
    };
    checks.push(Check::within("gradient_fd_ratio", fd_error(1e-3)? / fd_error(1e-4)?, 50.0, 200.0));

    let tv = fixed_point::solve(q, 3.0, &tight).context("fixed point")?;
    let ga = hierarchy::a_gradient(&t2);
    let gb = hierarchy::a_gradient(&tv);
    let br = hierarchy::poisson_bracket(&grid, (&ga.0, &ga.1), (&gb.0, &gb.1)).context("bracket")?;
    checks.push(Check::at_most("bracket_a_a", br.norm(), 1e-8));

    let g0 = gaussian(&grid, 0.1);
    let traj = evolve(&g0, &FlowSpec::new(FlowKind::Nls, 1e-3, 0.1).with_stride(20)).context("nls")?;
    let drift = diagnostics::drift_report(&traj, &[2.0]);
    let alpha = drift.alpha[0].1.unwrap_or(f64::INFINITY);
    checks.push(Check::at_most("nls_conservation", drift.mass.max(drift.h_nls).max(alpha), 1e-6));

    let traj = evolve(&g0, &FlowSpec::new(FlowKind::Nls, 1e-3, 0.05)).context("nls")?;
    let micro = diagnostics::micro_residual(&traj, 2.0, Flavor::Nls).context("micro")?;
    checks.push(Check::at_most("micro_residual_l1", micro.l1, 1e-5));
    checks.push(Check::at_most("micro_integrated", micro.max_integrated_relative(), 1e-5));

    let conv = diagnostics::kappa_convergence_study_with(
        &g0,
        FlowKind::Nls,
        4.0,
        &[8.0, 16.0, 32.0],
        0.02,
        &diagnostics::ConvergenceOptions { stride: 5, ..Default::default() },
    )
    .context("convergence")?;
    checks.push(Check::holds("kappa_convergence_monotone", conv.is_monotone_decreasing(0.0)));

    let infl = diagnostics::norm_inflation_experiment(&InflationConfig {
        parity: Parity::Even,
        amplitude: 0.05,
        window: 0.01,
        grid: GridSpec { length: 60.0, points: 512 },
        ..Default::default()
    })
    .context("inflation")?;
    checks.push(Check::holds("mean_production_sign", infl.mean_production.sign_agrees));
    let lambdas = [8.0, 64.0, 512.0];
    let fit = diagnostics::log_lambda_fit(&lambdas, &diagnostics::scaled_norms_sq(&gaussian(&grid, 1.0), &lambdas, -0.5))
        .context("fit")?;
    checks.push(Check::at_most("log_lambda_fit_residual", fit.residual, 0.1));
    let odd = Field::from_fn(grid.clone(), Sign::Defocusing, |x| C64::new(x * (-x * x).exp(), 0.0));
    checks.push(Check::at_most("mean_zero_band", diagnostics::band_ratio(&diagnostics::scaled_norms_sq(&odd, &lambdas, -0.5)), 2.0));

    let xi0 = 2.0 * std::f64::consts::PI * 2.0 / grid.length();
    let amp = C64::new(0.5, 0.0);
    let wave = Field::from_fn(grid.clone(), Sign::Defocusing, |x| amp * C64::from_polar(1.0, xi0 * x));
    let wave_error = |dt: f64| -> Result<f64, CliError> {
        let spec = FlowSpec::new(FlowKind::Nls, dt, 1.0).with_scheme(Scheme::Rk4Spectral).with_stride(usize::MAX);
        let end = evolve(&wave, &spec).context("plane wave")?;
        Ok(end.final_state().distance(&flows::nls_plane_wave(&wave, amp, xi0, 1.0).context("exact")?))
    };
    checks.push(Check::within("plane_wave_order", wave_error(0.1)? / wave_error(0.05)?, 12.0, 20.0));

    let zero = Field::zeros(grid.clone(), Sign::Defocusing);
    let zt = evolve(&zero, &FlowSpec::new(FlowKind::Nls, 1e-3, 0.01)).context("zero")?;
    let zr = diagnostics::micro_residual(&zt, 2.0, Flavor::Nls).context("zero micro")?;
    let zd = diagnostics::drift_report(&zt, &[2.0]);
    checks.push(Check::holds("zero_field", zr.l1 == 0.0 && zd.mass == 0.0 && zd.h_nls == 0.0));

    let text = cfg.to_toml();
    let back = ExperimentConfig::from_toml(&text)?;
    checks.push(Check::holds("config_round_trip", back == *cfg && back.to_toml() == text));
    Ok(checks)
}

pub fn table(checks: &[Check]) -> LongTable {
    let mut t = LongTable::new(&["check"]);
    for c in checks {
        let p = [c.name.as_str()];
        t.push(&p, "value", c.value);
        t.push(&p, "low", c.low);
        t.push(&p, "high", c.high);
        t.push(&p, "passed", if c.passed { 1.0 } else { 0.0 });
    }
    t
}
