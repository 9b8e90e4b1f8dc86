//! Brute-force Green's function from a dense discretization of the Lax operator.
//!
//! `L(k) = [[k - d, q], [-r, k + d]]` is assembled as a `2N x 2N` matrix from
//! spectral differentiation blocks and diagonal multiplication blocks and
//! inverted by LU. The kernel difference `G - G0` is read off the diagonal.
//!
//! Reading the diagonal of a Fourier-truncated kernel converges only like
//! `1/N` because the free kernel jumps across `x = y`. In renormalized mode
//! the first four Born terms are removed from the dense inverse,
//! `L^{-1} = sum_{n<5} (-G0 V)^n G0 + (-G0 V)^5 L^{-1}`, and their diagonals
//! are restored from the closed-form paraproducts. The dense remainder then
//! carries everything of order five and higher.

use nalgebra::DMatrix;

use super::{check_kappa, series, GreensTriple, Method};
use crate::spectral::{Field, Grid};
use crate::{Error, Result, C64};

/// Largest grid accepted by the dense path.
pub const DENSE_CAP: usize = 1024;

/// Smallest `|kappa| L` accepted (periodization error ~ `exp(-|kappa| L / 2)`).
pub const MIN_KAPPA_LENGTH: f64 = 40.0;

/// Condition estimates above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug)]
pub struct OracleOptions {
    pub renormalize: bool,
    pub min_kappa_length: f64,
    pub max_condition: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { renormalize: true, min_kappa_length: MIN_KAPPA_LENGTH, max_condition: MAX_CONDITION }
    }
}

/// Dense oracle with default options.
pub fn greens_oracle(q: &Field, kappa: f64) -> Result<GreensTriple> {
    greens_oracle_with(q, kappa, &OracleOptions::default())
}

pub fn greens_oracle_with(q: &Field, kappa: f64, opts: &OracleOptions) -> Result<GreensTriple> {
    check_kappa(kappa)?;
    let grid = q.grid();
    let n = grid.points();
    if n > DENSE_CAP {
        return Err(Error::DenseCap { points: n, cap: DENSE_CAP });
    }
    if kappa.abs() * grid.length() < opts.min_kappa_length {
        return Err(Error::InvalidArgument(format!(
            "|kappa| L = {} is below {}",
            kappa.abs() * grid.length(),
            opts.min_kappa_length
        )));
    }
    let qv = q.values();
    let r = q.r();
    let dx = grid.dx();
    let sgn = kappa.signum();

    let deriv = circulant(grid, |xi| C64::new(0.0, xi));
    let free_minus = circulant(grid, |xi| C64::new(kappa, -xi).inv());
    let free_plus = circulant(grid, |xi| C64::new(kappa, xi).inv());

    let mut lax = DMatrix::<C64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        for m in 0..n {
            lax[(j, m)] = -deriv[(j, m)];
            lax[(n + j, n + m)] = deriv[(j, m)];
        }
        lax[(j, j)] += kappa;
        lax[(n + j, n + j)] += kappa;
        lax[(j, n + j)] = qv[j];
        lax[(n + j, j)] = -r[j];
    }
    let norm1 = one_norm(&lax);
    let inv = lax.lu().try_inverse().ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
    let condition = norm1 * one_norm(&inv);
    if !condition.is_finite() || condition > opts.max_condition {
        return Err(Error::IllConditioned { condition });
    }
    let block = |bj: usize, bm: usize| inv.view((bj * n, bm * n), (n, n)).into_owned();
    let (li11, li12, li21, li22) = (block(0, 0), block(0, 1), block(1, 0), block(1, 1));

    let (g12, g21, gamma) = if opts.renormalize {
        // P = G0_11 diag(q), S = -G0_22 diag(r); (-G0 V)^5 = -[[0, PSPSP], [SPSPS, 0]]
        let p = scale_columns(&free_minus, qv, 1.0);
        let s = scale_columns(&free_plus, &r, -1.0);
        let ps = &p * &s;
        let sp = &s * &p;
        let x = &ps * &ps * &p;
        let y = &sp * &sp * &s;
        let d11 = diag_of_product(&x, &li21);
        let d12 = diag_of_product(&x, &li22);
        let d21 = diag_of_product(&y, &li11);
        let d22 = diag_of_product(&y, &li12);
        let t = series::series_terms(q, kappa)?;
        let mut g12 = Vec::with_capacity(n);
        let mut g21 = Vec::with_capacity(n);
        let mut gamma = Vec::with_capacity(n);
        for j in 0..n {
            g12.push(-sgn * d12[j] / dx + t.g12_1[j] + t.g12_3[j]);
            g21.push(-sgn * d21[j] / dx + t.g21_1[j] + t.g21_3[j]);
            gamma.push(-sgn * (d11[j] + d22[j]) / dx + t.gamma_2[j] + t.gamma_4[j]);
        }
        (g12, g21, gamma)
    } else {
        let g12 = (0..n).map(|j| sgn * li12[(j, j)] / dx).collect();
        let g21 = (0..n).map(|j| sgn * li21[(j, j)] / dx).collect();
        let gamma = (0..n)
            .map(|j| sgn * (li11[(j, j)] - free_minus[(j, j)] + li22[(j, j)] - free_plus[(j, j)]) / dx)
            .collect();
        (g12, g21, gamma)
    };
    Ok(GreensTriple {
        kappa,
        g12,
        g21,
        gamma,
        method: Method::Oracle { condition, renormalized: opts.renormalize },
    })
}

/// Dense matrix of the Fourier multiplier with the given symbol.
pub fn circulant<F>(grid: &Grid, symbol: F) -> DMatrix<C64>
where
    F: Fn(f64) -> C64,
{
    let n = grid.points();
    let values: Vec<C64> = grid.wavenumbers().iter().map(|&xi| symbol(xi)).collect();
    let col = grid.idft(&values);
    DMatrix::from_fn(n, n, |j, m| col[(j + n - m) % n])
}

fn scale_columns(m: &DMatrix<C64>, v: &[C64], s: f64) -> DMatrix<C64> {
    let mut out = m.clone();
    for (c, mut col) in out.column_iter_mut().enumerate() {
        col *= v[c] * s;
    }
    out
}

fn diag_of_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Vec<C64> {
    let n = a.nrows();
    (0..n).map(|i| (0..n).map(|k| a[(i, k)] * b[(k, i)]).sum()).collect()
}

fn one_norm(m: &DMatrix<C64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}
