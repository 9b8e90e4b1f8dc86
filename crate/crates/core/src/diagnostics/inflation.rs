use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::LongTable;
use crate::flows::{evolve_with, original_time, translate, FlowKind, FlowSpec};
use crate::spectral::{signed_index, Field, Grid, GridSpec, Sign};
use crate::{Error, Result, C64};

/// Number of quadrature nodes for the continuum norms of rescaled profiles.
pub const SCALED_NORM_NODES: usize = 2049;

/// Which initial profile and flow to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    /// `u0^(xi) = a xi^2 e^{-xi^2}` under NLS.
    Even,
    /// `u0^(xi) = a (xi^2 + xi^3) e^{-xi^2}` under mKdV.
    Odd,
}

impl Parity {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            _ => Err(Error::InvalidArgument(format!("parity must be even or odd, got {name}"))),
        }
    }

    pub fn flow(self) -> FlowKind {
        match self {
            Parity::Even => FlowKind::Nls,
            Parity::Odd => FlowKind::Mkdv,
        }
    }

    /// Exponent `m` of the scaling `q_lambda(t, x) = lambda q(lambda^m t, lambda x)`.
    pub fn scaling_power(self) -> u32 {
        match self {
            Parity::Even => 2,
            Parity::Odd => 3,
        }
    }

    pub fn profile(self, amplitude: f64, xi: f64) -> f64 {
        let p = match self {
            Parity::Even => xi * xi,
            Parity::Odd => xi * xi + xi * xi * xi,
        };
        amplitude * p * (-xi * xi).exp()
    }
}

/// Mean-zero initial data with the Fourier profile of `parity`.
pub fn inflation_data(grid: &Grid, parity: Parity, amplitude: f64, sign: Sign) -> Result<Field> {
    let n = grid.points();
    let fhat: Vec<C64> = grid
        .wavenumbers()
        .iter()
        .enumerate()
        .map(|(k, &xi)| if k == n / 2 { C64::new(0.0, 0.0) } else { C64::new(parity.profile(amplitude, xi), 0.0) })
        .collect();
    Field::new(grid.clone(), grid.inverse_transform(&fhat), sign)
}

/// `d/dt int q` at a state, from the nonlinearity in physical space.
pub fn mean_rate(q: &Field, parity: Parity) -> C64 {
    let grid = q.grid();
    let s = q.sign().value();
    match parity {
        Parity::Even => {
            let v: Vec<C64> = q.values().iter().map(|z| C64::new(0.0, -2.0 * s) * z.norm_sqr() * z).collect();
            grid.integrate(&v)
        }
        Parity::Odd => {
            let d = grid.derivative(q.values(), 1);
            let v: Vec<C64> = q.values().iter().zip(&d).map(|(z, dz)| 6.0 * s * z.norm_sqr() * dz).collect();
            grid.integrate(&v)
        }
    }
}

/// The same rate as a double Fourier integral
/// `(2 pi)^{-1/2} int int f^(eta - xi) q^(xi) conj(q^(eta)) dxi deta`
/// with `f = q` (NLS) or `f = q'` (mKdV).
pub fn mean_rate_fourier(q: &Field, parity: Parity) -> C64 {
    let grid = q.grid();
    let n = grid.points();
    let qhat = grid.transform(q.values());
    let xi = grid.wavenumbers();
    let half = (n / 2) as i64;
    let mut total = C64::new(0.0, 0.0);
    for k in 0..n {
        let kk = signed_index(k, n);
        let conj_k = qhat[k].conj();
        for l in 0..n {
            let d = kk - signed_index(l, n);
            if d.abs() >= half {
                continue;
            }
            let m = grid.mode_index(d);
            let f = match parity {
                Parity::Even => qhat[m],
                Parity::Odd => C64::new(0.0, xi[m]) * qhat[m],
            };
            total += f * qhat[l] * conj_k;
        }
    }
    let s = q.sign().value();
    let pref = match parity {
        Parity::Even => C64::new(0.0, -2.0 * s),
        Parity::Odd => C64::new(6.0 * s, 0.0),
    };
    pref * total * grid.dxi() * grid.dxi() / (2.0 * PI).sqrt()
}

/// Quadrature for `||psi_lambda||^2_{H^sigma} = lambda int (4 + lambda^2 eta^2)^sigma |psi^(eta)|^2 d eta`
/// on `eta = eta0 sinh(tau)`, with `psi^` evaluated off-grid by a direct sum.
#[derive(Clone, Debug)]
pub struct ScaledNormQuadrature {
    pub eta: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ScaledNormQuadrature {
    pub fn new(grid: &Grid, lambda_max: f64) -> Self {
        Self::with_nodes(grid, lambda_max, SCALED_NORM_NODES)
    }

    pub fn with_nodes(grid: &Grid, lambda_max: f64, nodes: usize) -> Self {
        let eta0 = 2.0 / lambda_max.max(1.0);
        let tau_max = (grid.max_wavenumber() / eta0).asinh();
        let m = nodes.max(3);
        let dtau = 2.0 * tau_max / (m - 1) as f64;
        let (mut eta, mut weights) = (Vec::with_capacity(m), Vec::with_capacity(m));
        for i in 0..m {
            let tau = -tau_max + i as f64 * dtau;
            let end = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
            eta.push(eta0 * tau.sinh());
            weights.push(end * dtau * eta0 * tau.cosh());
        }
        Self { eta, weights }
    }

    /// `|psi^(eta)|^2` at every node.
    pub fn power(&self, psi: &Field) -> Vec<f64> {
        let grid = psi.grid();
        let x0 = grid.node(0);
        let dx = grid.dx();
        let c = dx / (2.0 * PI).sqrt();
        self.eta
            .iter()
            .map(|&eta| {
                let step = C64::from_polar(1.0, -eta * dx);
                let mut phase = C64::from_polar(1.0, -eta * x0);
                let mut sum = C64::new(0.0, 0.0);
                for z in psi.values() {
                    sum += z * phase;
                    phase *= step;
                }
                (c * sum).norm_sqr()
            })
            .collect()
    }

    pub fn norm_sq_from_power(&self, power: &[f64], lambda: f64, sigma: f64) -> f64 {
        self.eta
            .iter()
            .zip(&self.weights)
            .zip(power)
            .map(|((e, w), p)| w * (4.0 + lambda * lambda * e * e).powf(sigma) * p)
            .sum::<f64>()
            * lambda
    }

    pub fn norm_sq(&self, psi: &Field, lambda: f64, sigma: f64) -> f64 {
        self.norm_sq_from_power(&self.power(psi), lambda, sigma)
    }
}

/// `||psi_lambda||^2_{H^sigma}` for every `lambda`.
pub fn scaled_norms_sq(psi: &Field, lambdas: &[f64], sigma: f64) -> Vec<f64> {
    let quad = ScaledNormQuadrature::new(psi.grid(), lambdas.iter().cloned().fold(1.0, f64::max));
    let p = quad.power(psi);
    lambdas.iter().map(|&l| quad.norm_sq_from_power(&p, l, sigma)).collect()
}

/// Least-squares fit `value = slope log(lambda) + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    /// `max |value - fit| / |value|`.
    pub residual: f64,
}

pub fn log_lambda_fit(lambdas: &[f64], values: &[f64]) -> Result<LogFit> {
    if lambdas.len() != values.len() || lambdas.len() < 2 {
        return Err(Error::InvalidArgument("log fit needs at least two matching points".into()));
    }
    let n = lambdas.len() as f64;
    let x: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = values.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(values).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = x
        .iter()
        .zip(values)
        .map(|(a, v)| if *v == 0.0 { 0.0 } else { (v - (slope * a + intercept)).abs() / v.abs() })
        .fold(0.0, f64::max);
    Ok(LogFit { slope, intercept, residual })
}

/// `max / min` of positive values (1 when all vanish).
pub fn band_ratio(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(0.0, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        1.0
    } else {
        max / min
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InflationConfig {
    pub parity: Parity,
    pub amplitude: f64,
    pub lambdas: Vec<f64>,
    pub sigma: f64,
    pub bumps: usize,
    /// Distance between bump centres, in the unscaled coordinates of `u`.
    pub separation: f64,
    pub grid: GridSpec,
    pub sign: Sign,
    pub dt: f64,
    /// Search window `[0, window]` for `t1`, in the time of `u`.
    pub window: f64,
    /// `t1` is the first time with `|int u| > threshold ||u0||_{L^1}`.
    pub threshold: f64,
    /// Norm series are sampled every `stride` steps.
    pub stride: usize,
}

impl Default for InflationConfig {
    fn default() -> Self {
        Self {
            parity: Parity::Even,
            amplitude: 0.2,
            lambdas: vec![8.0, 64.0, 512.0],
            sigma: -0.5,
            bumps: 1,
            separation: 40.0,
            grid: GridSpec { length: 120.0, points: 1024 },
            sign: Sign::Defocusing,
            dt: 1e-3,
            window: 1.0,
            threshold: 1e-3,
            stride: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSeries {
    pub lambda: f64,
    /// Times of `q_lambda`, i.e. `t_u / lambda^m`.
    pub times: Vec<f64>,
    /// `||q_lambda(t)||_{H^sigma}`
    pub values: Vec<f64>,
    /// `max_t value / value(0)`.
    pub growth_ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanProduction {
    /// Double Fourier integral at `t = 0`.
    pub predicted: C64,
    /// Physical-space integral at `t = 0`.
    pub physical: C64,
    /// One-sided fourth-order difference of `int u` along the trajectory.
    pub measured: C64,
    /// Sign of `Im predicted`, the component the cubic term produces.
    pub predicted_sign: f64,
    pub sign_agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiBump {
    pub bumps: usize,
    pub separation: f64,
    pub grid: GridSpec,
    /// Largest `int |u0(x - c_n)| |u0(x - c_{n+1})| dx / ||u0||^2`.
    pub overlap: f64,
    /// `max_t ||q(t) - sum_n u(t, x - c_n)||_{L^2} / ||q(t)||_{L^2}`.
    pub superposition_error: f64,
    pub series: Vec<NormSeries>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InflationReport {
    pub config: InflationConfig,
    pub initial_mean: C64,
    pub initial_l1: f64,
    /// `(t, int u(t))` at every step.
    pub mean_series: Vec<(f64, C64)>,
    pub t1: Option<f64>,
    /// Set when no mean production crosses the threshold inside the window.
    pub flag: Option<String>,
    pub mean_production: MeanProduction,
    pub series: Vec<NormSeries>,
    /// `max / min` over `lambda` of `||(u0)_lambda||^2_{H^sigma}`.
    pub initial_band_ratio: f64,
    /// Log-lambda fit of `||(u(t1))_lambda||^2_{H^sigma}`.
    pub post_t1_fit: Option<LogFit>,
    pub multi_bump: Option<MultiBump>,
}

impl InflationReport {
    /// Largest growth ratio over `lambda`.
    pub fn growth_ratio(&self) -> f64 {
        self.series.iter().map(|s| s.growth_ratio).fold(0.0, f64::max)
    }

    pub fn table(&self) -> LongTable {
        let mut t = LongTable::new(&["parity", "amplitude", "sigma", "lambda", "time"]);
        let c = &self.config;
        let par = format!("{:?}", c.parity).to_lowercase();
        let base = |l: &str, tm: &str| {
            [par.clone(), c.amplitude.to_string(), c.sigma.to_string(), l.to_string(), tm.to_string()]
        };
        for (tm, m) in &self.mean_series {
            let p = base("", &tm.to_string());
            t.push(&p, "mean_re", m.re);
            t.push(&p, "mean_im", m.im);
        }
        for s in &self.series {
            for (tm, v) in s.times.iter().zip(&s.values) {
                t.push(&base(&s.lambda.to_string(), &tm.to_string()), "h_sigma_norm", *v);
            }
            t.push(&base(&s.lambda.to_string(), ""), "growth_ratio", s.growth_ratio);
        }
        let p = base("", "");
        t.push(&p, "t1", self.t1.unwrap_or(f64::NAN));
        let mp = &self.mean_production;
        t.push(&p, "rate_predicted_re", mp.predicted.re);
        t.push(&p, "rate_predicted_im", mp.predicted.im);
        t.push(&p, "rate_measured_re", mp.measured.re);
        t.push(&p, "rate_measured_im", mp.measured.im);
        t.push(&p, "sign_agrees", if mp.sign_agrees { 1.0 } else { 0.0 });
        t.push(&p, "initial_band_ratio", self.initial_band_ratio);
        if let Some(f) = self.post_t1_fit {
            t.push(&p, "post_t1_fit_slope", f.slope);
            t.push(&p, "post_t1_fit_residual", f.residual);
        }
        if let Some(mb) = &self.multi_bump {
            t.push(&p, "superposition_error", mb.superposition_error);
            t.push(&p, "bump_overlap", mb.overlap);
            for s in &mb.series {
                for (tm, v) in s.times.iter().zip(&s.values) {
                    t.push(&base(&s.lambda.to_string(), &tm.to_string()), "multi_bump_h_sigma_norm", *v);
                }
            }
        }
        t
    }
}

fn norm_series(
    samples: &[(f64, Field)],
    lambdas: &[f64],
    sigma: f64,
    m: u32,
    quad: &ScaledNormQuadrature,
) -> Vec<NormSeries> {
    let powers: Vec<Vec<f64>> = samples.par_iter().map(|(_, q)| quad.power(q)).collect();
    lambdas
        .iter()
        .map(|&lambda| {
            let values: Vec<f64> =
                powers.iter().map(|p| quad.norm_sq_from_power(p, lambda, sigma).sqrt()).collect();
            let max = values.iter().cloned().fold(0.0, f64::max);
            let growth_ratio = if values[0] > 0.0 { max / values[0] } else if max == 0.0 { 1.0 } else { f64::INFINITY };
            NormSeries {
                lambda,
                times: samples.iter().map(|(t, _)| t / original_time(1.0, lambda, m)).collect(),
                values,
                growth_ratio,
            }
        })
        .collect()
}

fn one_sided_rate(means: &[(f64, C64)], dt: f64) -> C64 {
    if means.len() < 5 {
        return C64::new(f64::NAN, f64::NAN);
    }
    let f: Vec<C64> = means[..5].iter().map(|(_, m)| *m).collect();
    (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * dt)
}

fn check_config(cfg: &InflationConfig) -> Result<()> {
    if !(cfg.sigma <= -0.5) {
        return Err(Error::InvalidArgument(format!("inflation needs sigma <= -1/2, got {}", cfg.sigma)));
    }
    if cfg.bumps == 0 {
        return Err(Error::InvalidArgument("bumps must be at least 1".into()));
    }
    if cfg.lambdas.is_empty() || cfg.lambdas.iter().any(|&l| !(l.is_finite() && l >= 1.0)) {
        return Err(Error::InvalidArgument("lambdas must be a non-empty list of values >= 1".into()));
    }
    if !(cfg.amplitude.is_finite() && cfg.window > 0.0 && cfg.threshold > 0.0 && cfg.stride > 0) {
        return Err(Error::InvalidArgument("amplitude, window, threshold and stride must be positive".into()));
    }
    Ok(())
}

/// Mean production followed by the scaling argument; see [`InflationReport`].
pub fn norm_inflation_experiment(cfg: &InflationConfig) -> Result<InflationReport> {
    check_config(cfg)?;
    let grid = Grid::from_spec(cfg.grid)?;
    let u0 = inflation_data(&grid, cfg.parity, cfg.amplitude, cfg.sign)?;
    let initial_mean = grid.integrate(u0.values());
    let initial_l1 = grid.integrate_real(&u0.values().iter().map(|z| z.norm()).collect::<Vec<_>>());
    if initial_mean.norm() > 1e-12 * initial_l1.max(1.0) {
        return Err(Error::InvalidArgument(format!("initial data has mean {initial_mean}, expected zero")));
    }
    let m = cfg.parity.scaling_power();
    let level = cfg.threshold * initial_l1;
    let spec = FlowSpec::new(cfg.parity.flow(), cfg.dt, cfg.window).with_stride(cfg.stride);
    let (_, dt) = spec.steps();
    let mut mean_series = Vec::new();
    let mut t1: Option<(f64, Field)> = None;
    let traj = evolve_with(&u0, &spec, |t, q| {
        let mean = q.grid().integrate(q.values());
        mean_series.push((t, mean));
        if t1.is_none() && level > 0.0 && mean.norm() > level {
            t1 = Some((t, q.clone()));
        }
        Ok(())
    })?;

    let predicted = mean_rate_fourier(&u0, cfg.parity);
    let physical = mean_rate(&u0, cfg.parity);
    let measured = one_sided_rate(&mean_series, dt);
    let predicted_sign = predicted.im.signum();
    let sign_agrees = predicted.im != 0.0
        && measured.im.signum() == predicted_sign
        && measured.re.abs() < 0.1 * measured.im.abs();

    let lambda_max = cfg.lambdas.iter().cloned().fold(1.0, f64::max);
    let quad = ScaledNormQuadrature::new(&grid, lambda_max);
    let series = norm_series(&traj.samples, &cfg.lambdas, cfg.sigma, m, &quad);
    let p0 = quad.power(&u0);
    let initial_band_ratio =
        band_ratio(&cfg.lambdas.iter().map(|&l| quad.norm_sq_from_power(&p0, l, cfg.sigma)).collect::<Vec<_>>());
    let post_t1_fit = match &t1 {
        Some((_, q)) if cfg.lambdas.len() >= 2 => {
            let p = quad.power(q);
            let v: Vec<f64> = cfg.lambdas.iter().map(|&l| quad.norm_sq_from_power(&p, l, cfg.sigma)).collect();
            Some(log_lambda_fit(&cfg.lambdas, &v)?)
        }
        _ => None,
    };
    let flag = if t1.is_none() {
        Some(format!("no mean production above {level:.3e} within [0, {}]", cfg.window))
    } else {
        None
    };
    let multi_bump = if cfg.bumps > 1 { Some(multi_bump(cfg, &grid, &spec)?) } else { None };

    Ok(InflationReport {
        config: cfg.clone(),
        initial_mean,
        initial_l1,
        mean_series,
        t1: t1.map(|(t, _)| t),
        flag,
        mean_production: MeanProduction { predicted, physical, measured, predicted_sign, sign_agrees },
        series,
        initial_band_ratio,
        post_t1_fit,
        multi_bump,
    })
}

fn multi_bump(cfg: &InflationConfig, grid: &Grid, spec: &FlowSpec) -> Result<MultiBump> {
    let span = (cfg.bumps - 1) as f64 * cfg.separation;
    let needed = (grid.length() + span) / grid.dx();
    let points = (needed.ceil() as usize).next_power_of_two();
    let big = Grid::new(points as f64 * grid.dx(), points)?;
    let u0 = inflation_data(&big, cfg.parity, cfg.amplitude, cfg.sign)?;
    let centres: Vec<f64> =
        (0..cfg.bumps).map(|n| (n as f64 - (cfg.bumps - 1) as f64 / 2.0) * cfg.separation).collect();

    let a = translate(&u0, centres[0])?;
    let b = translate(&u0, centres[1])?;
    let cross: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| x.norm() * y.norm()).collect();
    let norm_sq = u0.l2_norm().powi(2);
    let overlap = if norm_sq > 0.0 { big.integrate_real(&cross) / norm_sq } else { 0.0 };
    if overlap >= 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "separation {} leaves bump overlap {overlap:.3e} >= 1e-8",
            cfg.separation
        )));
    }

    let shifted = |u: &Field| -> Result<Field> {
        let mut acc = translate(u, centres[0])?;
        for &c in &centres[1..] {
            acc = acc.axpy(C64::new(1.0, 0.0), &translate(u, c)?)?;
        }
        Ok(acc)
    };
    let q0 = shifted(&u0)?;
    let (single, multi) = rayon::join(|| crate::flows::evolve(&u0, spec), || crate::flows::evolve(&q0, spec));
    let (single, multi) = (single?, multi?);
    let mut superposition_error: f64 = 0.0;
    for ((_, u), (_, q)) in single.samples.iter().zip(&multi.samples) {
        let approx = shifted(u)?;
        let n = q.l2_norm();
        if n > 0.0 {
            superposition_error = superposition_error.max(q.distance(&approx) / n);
        }
    }
    let quad = ScaledNormQuadrature::new(&big, cfg.lambdas.iter().cloned().fold(1.0, f64::max));
    let series = norm_series(&multi.samples, &cfg.lambdas, cfg.sigma, cfg.parity.scaling_power(), &quad);
    Ok(MultiBump {
        bumps: cfg.bumps,
        separation: cfg.separation,
        grid: big.spec(),
        overlap,
        superposition_error,
        series,
    })
}
