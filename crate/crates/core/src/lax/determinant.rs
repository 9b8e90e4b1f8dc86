//! The perturbation determinant `A(kappa)` by two routes and `alpha(kappa)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_kappa, fixed_point, series, GreensTriple};
use crate::spectral::{minus_power_symbol, plus_power_symbol, ops, Field};
use crate::{Error, Result, C64};

/// Dense representations of `Lambda = (k - d)^{-1/2} q (k + d)^{-1/2}` and
/// `Gamma = (k + d)^{-1/2} r (k - d)^{-1/2}` in the unitary Fourier basis.
#[derive(Clone, Debug)]
pub struct OperatorPair {
    pub kappa: f64,
    pub lambda_matrix: DMatrix<C64>,
    pub gamma_matrix: DMatrix<C64>,
}

impl OperatorPair {
    pub fn new(q: &Field, kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        let grid = q.grid();
        let n = grid.points();
        if n > super::oracle::DENSE_CAP {
            return Err(Error::DenseCap { points: n, cap: super::oracle::DENSE_CAP });
        }
        let cm = grid.symbol(minus_power_symbol(kappa, 0.5))?;
        let cp = grid.symbol(plus_power_symbol(kappa, 0.5))?;
        let qs = grid.dft(q.values());
        let rs = grid.dft(&q.r());
        let inv_n = 1.0 / n as f64;
        let lambda_matrix = DMatrix::from_fn(n, n, |k, l| cm[k] * qs[(k + n - l) % n] * cp[l] * inv_n);
        let gamma_matrix = DMatrix::from_fn(n, n, |k, l| cp[k] * rs[(k + n - l) % n] * cm[l] * inv_n);
        Ok(Self { kappa, lambda_matrix, gamma_matrix })
    }

    /// Hilbert-Schmidt norms of `Lambda` and `Gamma`.
    pub fn hs_norms(&self) -> (f64, f64) {
        (self.lambda_matrix.norm(), self.gamma_matrix.norm())
    }

    pub fn product(&self) -> DMatrix<C64> {
        &self.lambda_matrix * &self.gamma_matrix
    }
}

/// Power-iteration estimate of the spectral radius.
pub fn spectral_radius(m: &DMatrix<C64>, iterations: usize) -> f64 {
    let n = m.nrows();
    let mut v = DVector::<C64>::from_fn(n, |i, _| C64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.05));
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let nv = v.norm();
        if nv == 0.0 {
            return 0.0;
        }
        v /= C64::new(nv, 0.0);
        let w = m * &v;
        estimate = w.norm();
        v = w;
    }
    estimate
}

/// Result of the trace route.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceValue {
    pub value: C64,
    /// `|term_m|` for `m = 1..=M` (including the `sgn(kappa)(-1)^{m-1}/m` factor).
    pub terms: Vec<f64>,
    /// Magnitude of the last retained term.
    pub truncation_bound: f64,
    pub spectral_radius: f64,
    pub renormalized: bool,
}

#[derive(Clone, Debug)]
pub struct TraceOptions {
    /// Replace the `m = 1, 2` traces by their closed-form paraproduct values,
    /// removing the `1/N` truncation error of the dense traces.
    pub renormalize: bool,
    pub power_iterations: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self { renormalize: true, power_iterations: 200 }
    }
}

/// `A(k) = sgn(k) sum_{m=1}^M (-1)^{m-1}/m tr((Lambda Gamma)^m)`.
pub fn a_trace(q: &Field, kappa: f64, truncation: usize) -> Result<TraceValue> {
    a_trace_with(q, kappa, truncation, &TraceOptions::default())
}

pub fn a_trace_with(q: &Field, kappa: f64, truncation: usize, opts: &TraceOptions) -> Result<TraceValue> {
    if truncation == 0 {
        return Err(Error::InvalidArgument("trace truncation must be at least 1".into()));
    }
    let pair = OperatorPair::new(q, kappa)?;
    let lg = pair.product();
    let radius = spectral_radius(&lg, opts.power_iterations);
    if radius >= 1.0 {
        return Err(Error::DivergentTrace { radius });
    }
    let sgn = kappa.signum();
    let mut traces = Vec::with_capacity(truncation);
    let mut power = lg.clone();
    for m in 1..=truncation {
        if m > 1 {
            power = &power * &lg;
        }
        traces.push(power.trace());
    }
    if opts.renormalize {
        let grid = q.grid();
        let t = series::series_terms(q, kappa)?;
        let qv = q.values();
        let r = q.r();
        let pair_int = |g21: &[C64], g12: &[C64]| {
            let f: Vec<C64> = (0..qv.len()).map(|j| qv[j] * g21[j] - r[j] * g12[j]).collect();
            grid.integrate(&f)
        };
        // Euler's relation for homogeneous parts: n A^[n] = int q g21^[n-1] - r g12^[n-1]
        let a2 = 0.5 * pair_int(&t.g21_1, &t.g12_1);
        let a4 = 0.25 * pair_int(&t.g21_3, &t.g12_3);
        traces[0] = sgn * a2;
        if truncation >= 2 {
            traces[1] = -2.0 * sgn * a4;
        }
    }
    let mut value = C64::new(0.0, 0.0);
    let mut terms = Vec::with_capacity(truncation);
    for (i, tr) in traces.iter().enumerate() {
        let m = (i + 1) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let term = sgn * sign / m * tr;
        terms.push(term.norm());
        value += term;
    }
    Ok(TraceValue {
        value,
        truncation_bound: *terms.last().expect("truncation >= 1"),
        terms,
        spectral_radius: radius,
        renormalized: opts.renormalize,
    })
}

/// `rho = (q g21 - r g12) / (2 + gamma)`, guarded against a small denominator.
pub fn density(q: &Field, triple: &GreensTriple) -> Result<Vec<C64>> {
    let qv = q.values();
    let r = q.r();
    let min = triple.gamma.iter().map(|g| (g + 2.0).norm()).fold(f64::INFINITY, f64::min);
    if min < 0.5 {
        return Err(Error::DenominatorGuard { min });
    }
    Ok((0..qv.len())
        .map(|j| (qv[j] * triple.g21[j] - r[j] * triple.g12[j]) / (triple.gamma[j] + 2.0))
        .collect())
}

/// `A = int rho dx`.
pub fn a_integral(q: &Field, triple: &GreensTriple) -> Result<C64> {
    let rho = density(q, triple)?;
    Ok(q.grid().integrate(&rho))
}

/// `A(kappa)` via the fixed point and the density integral.
pub fn a_value(q: &Field, kappa: f64) -> Result<C64> {
    let t = fixed_point::solve(q, kappa, &fixed_point::FixedPointOptions::default())?;
    a_integral(q, &t)
}

/// `int gamma dx`, the `kappa`-derivative of `A`.
pub fn gamma_integral(q: &Field, triple: &GreensTriple) -> C64 {
    q.grid().integrate(&triple.gamma)
}

/// `alpha(kappa) = sign * Re A(kappa)` for `kappa >= 1`.
pub fn alpha(q: &Field, kappa: f64) -> Result<f64> {
    if kappa < 1.0 {
        return Err(Error::KappaRange(kappa));
    }
    Ok(q.sign().value() * a_value(q, kappa)?.re)
}

/// `alpha` from a precomputed triple.
pub fn alpha_from_triple(q: &Field, triple: &GreensTriple) -> Result<f64> {
    Ok(q.sign().value() * a_integral(q, triple)?.re)
}

/// `alpha` through `sign * (A(k) - A(-k)) / 2`.
pub fn alpha_symmetric(q: &Field, kappa: f64) -> Result<f64> {
    let ap = a_value(q, kappa)?;
    let am = a_value(q, -kappa)?;
    let v = 0.5 * (ap - am);
    Ok(q.sign().value() * v.re)
}

/// Convenience: `||v||_{L^2}` on the field's grid.
pub fn l2(q: &Field, v: &[C64]) -> f64 {
    ops::l2(v, q.grid().dx())
}
